//! Multi-start BFGS minimization of the QAOA cost expectation.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::graph::Graph;
use crate::seed::{derive_seed, rng_from_seed, stream};
use crate::simulator::{
    apply_cost_operator, apply_mixer, apply_phase, build_cost_diagonal, cost_expectation, cost_overlap,
    mixer_generator_overlap, run_qaoa_diag, DiagonalCost, QaoaAngles,
};
use crate::{Error, Result};

/// Step of the central finite-difference gradient.
pub const FD_STEP: f64 = 1e-6;

/// Draws `gamma_l ~ U[0, 2pi)` and `beta_l ~ U[0, pi)`.
pub fn sample_initial_angles(p: usize, seed: u64) -> Result<QaoaAngles> {
    if p < 1 {
        return Err(Error::Parameter("depth must be at least 1".into()));
    }
    let mut rng = rng_from_seed(seed);
    let mut betas = Vec::with_capacity(p);
    let mut gammas = Vec::with_capacity(p);
    for _ in 0..p {
        gammas.push(rng.random_range(0.0..2.0 * PI));
        betas.push(rng.random_range(0.0..PI));
    }
    QaoaAngles::new(betas, gammas)
}

pub fn evaluate_cost(diag: &DiagonalCost, angles: &QaoaAngles) -> Result<f64> {
    cost_expectation(&run_qaoa_diag(diag, angles)?, diag)
}

/// Central finite differences of the cost, layout `[d/dbeta.., d/dgamma..]`.
pub fn gradient(g: &Graph, angles: &QaoaAngles) -> Result<Vec<f64>> {
    gradient_fd(&build_cost_diagonal(g)?, angles)
}

pub fn gradient_fd(diag: &DiagonalCost, angles: &QaoaAngles) -> Result<Vec<f64>> {
    let x = angles.to_vec();
    let mut grad = Vec::with_capacity(x.len());
    let mut probe = x.clone();
    for k in 0..x.len() {
        probe[k] = x[k] + FD_STEP;
        let up = evaluate_cost(diag, &QaoaAngles::from_slice(&probe)?)?;
        probe[k] = x[k] - FD_STEP;
        let down = evaluate_cost(diag, &QaoaAngles::from_slice(&probe)?)?;
        probe[k] = x[k];
        grad.push((up - down) / (2.0 * FD_STEP));
    }
    Ok(grad)
}

/// Cost and exact gradient by reverse-mode sweep through the circuit.
///
/// One forward pass, then both the state and `C|psi>` are propagated
/// backwards layer by layer; each derivative is the imaginary part of an
/// overlap with the layer generator.
pub fn cost_and_gradient(diag: &DiagonalCost, angles: &QaoaAngles) -> Result<(f64, Vec<f64>)> {
    let p = angles.depth();
    let mut psi = run_qaoa_diag(diag, angles)?;
    let mut lam = apply_cost_operator(&psi, diag)?;
    let cost = psi.inner(&lam).re;
    let mut grad = vec![0.0; 2 * p];
    for l in (0..p).rev() {
        grad[l] = mixer_generator_overlap(&lam, &psi).im;
        apply_mixer(&mut psi, -angles.betas()[l]);
        apply_mixer(&mut lam, -angles.betas()[l]);
        grad[p + l] = cost_overlap(&lam, &psi, diag).im;
        apply_phase(&mut psi, -angles.gammas()[l], diag)?;
        apply_phase(&mut lam, -angles.gammas()[l], diag)?;
    }
    Ok((cost, grad))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GradientMethod {
    #[default]
    Adjoint,
    CentralDifference,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BfgsOptions {
    pub max_iterations: usize,
    pub grad_tol: f64,
    pub rel_cost_tol: f64,
    pub armijo: f64,
    pub gradient: GradientMethod,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        BfgsOptions {
            max_iterations: 500,
            grad_tol: 1e-6,
            rel_cost_tol: 1e-10,
            armijo: 1e-4,
            gradient: GradientMethod::Adjoint,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub angles: QaoaAngles,
    pub cost: f64,
    pub n_iterations: usize,
    pub restart_index: usize,
    pub converged: bool,
}

fn cost_grad(diag: &DiagonalCost, x: &[f64], method: GradientMethod) -> Result<(f64, Vec<f64>)> {
    let angles = QaoaAngles::from_slice(x)?;
    match method {
        GradientMethod::Adjoint => cost_and_gradient(diag, &angles),
        GradientMethod::CentralDifference => Ok((evaluate_cost(diag, &angles)?, gradient_fd(diag, &angles)?)),
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// BFGS with an inverse-Hessian update and Armijo backtracking (halving).
///
/// Iterates only ever decrease the cost, so the final iterate is the best
/// point visited.
pub fn minimize_diag(diag: &DiagonalCost, init: &QaoaAngles, opts: &BfgsOptions) -> Result<OptimizationResult> {
    let dim = 2 * init.depth();
    let mut x = init.to_vec();
    let (mut f, mut g) = cost_grad(diag, &x, opts.gradient)?;
    let mut h = identity(dim);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iterations {
        if dot(&g, &g).sqrt() < opts.grad_tol {
            converged = true;
            break;
        }
        let mut dir: Vec<f64> = mat_vec(&h, &g).into_iter().map(|v| -v).collect();
        let mut slope = dot(&g, &dir);
        if slope >= 0.0 {
            h = identity(dim);
            dir = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }
        let mut step = 1.0;
        let accepted = loop {
            let trial: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + step * di).collect();
            let ft = evaluate_cost(diag, &QaoaAngles::from_slice(&trial)?)?;
            if ft <= f + opts.armijo * step * slope {
                break Some(trial);
            }
            step *= 0.5;
            if step < 1e-16 {
                break None;
            }
        };
        iterations += 1;
        let Some(x_new) = accepted else {
            // no descent along a descent direction: numerically stationary
            converged = dot(&g, &g).sqrt() < opts.grad_tol.sqrt();
            break;
        };
        let (f_new, g_new) = cost_grad(diag, &x_new, opts.gradient)?;
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            if iterations == 1 {
                let scale = sy / dot(&y, &y);
                h.iter_mut().for_each(|v| *v *= scale);
            }
            bfgs_update(&mut h, &s, &y, sy);
        }
        let change = (f - f_new).abs();
        x = x_new;
        g = g_new;
        let prev = f;
        f = f_new;
        if change <= opts.rel_cost_tol * prev.abs().max(f.abs()).max(f64::MIN_POSITIVE) {
            converged = true;
            break;
        }
    }
    Ok(OptimizationResult { angles: QaoaAngles::from_slice(&x)?, cost: f, n_iterations: iterations, restart_index: 0, converged })
}

fn identity(dim: usize) -> Vec<f64> {
    let mut m = vec![0.0; dim * dim];
    for k in 0..dim {
        m[k * dim + k] = 1.0;
    }
    m
}

fn mat_vec(m: &[f64], v: &[f64]) -> Vec<f64> {
    m.chunks_exact(v.len()).map(|row| dot(row, v)).collect()
}

/// `H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T`, `rho = 1 / y^T s`.
fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let rho = 1.0 / sy;
    let hy = mat_vec(h, y);
    let yhy = dot(y, &hy);
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] += -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
        }
    }
}

pub fn minimize_single(g: &Graph, init: &QaoaAngles, budget: usize) -> Result<OptimizationResult> {
    let opts = BfgsOptions { max_iterations: budget, ..BfgsOptions::default() };
    minimize_diag(&build_cost_diagonal(g)?, init, &opts)
}

/// Seed of restart `k` under master seed `seed`.
pub fn restart_seed(seed: u64, k: usize) -> u64 {
    derive_seed(seed, &[stream::RESTART, k as u64])
}

/// Minimizes from every initial point (in parallel) and keeps the lowest
/// cost; ties go to the lowest index.
pub fn minimize_from(diag: &DiagonalCost, inits: &[QaoaAngles], opts: &BfgsOptions) -> Result<OptimizationResult> {
    let results: Vec<Result<OptimizationResult>> = inits
        .par_iter()
        .enumerate()
        .map(|(k, init)| {
            minimize_diag(diag, init, opts).map(|mut r| {
                r.restart_index = k;
                r
            })
        })
        .collect();
    let mut best: Option<OptimizationResult> = None;
    for r in results {
        let r = r?;
        if best.as_ref().is_none_or(|b| r.cost < b.cost) {
            best = Some(r);
        }
    }
    best.ok_or_else(|| Error::Parameter("at least one restart is required".into()))
}

pub fn multistart_inits(p: usize, restarts: usize, seed: u64) -> Result<Vec<QaoaAngles>> {
    (0..restarts).map(|k| sample_initial_angles(p, restart_seed(seed, k))).collect()
}

pub fn minimize_multistart_diag(
    diag: &DiagonalCost,
    p: usize,
    restarts: usize,
    seed: u64,
    opts: &BfgsOptions,
) -> Result<OptimizationResult> {
    if restarts < 1 {
        return Err(Error::Parameter("at least one restart is required".into()));
    }
    minimize_from(diag, &multistart_inits(p, restarts, seed)?, opts)
}

pub fn minimize_multistart(g: &Graph, p: usize, restarts: usize, seed: u64) -> Result<OptimizationResult> {
    minimize_multistart_diag(&build_cost_diagonal(g)?, p, restarts, seed, &BfgsOptions::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gen_complete, gen_regular3, Edge, GraphKind};

    fn single_edge() -> Graph {
        Graph::new(2, GraphKind::Complete, vec![Edge { i: 0, j: 1, w: 1.0 }]).unwrap()
    }

    #[test]
    fn initial_angles_in_boxes() {
        let a = sample_initial_angles(1, 5).unwrap();
        assert!((0.0..PI).contains(&a.betas()[0]));
        assert!((0.0..2.0 * PI).contains(&a.gammas()[0]));
        assert_eq!(a, sample_initial_angles(1, 5).unwrap());
        assert!(sample_initial_angles(0, 5).is_err());
    }

    #[test]
    fn initial_angle_moments() {
        let draws = 10_000;
        let (mut mb, mut mg) = (0.0, 0.0);
        for s in 0..draws {
            let a = sample_initial_angles(1, s).unwrap();
            mb += a.betas()[0];
            mg += a.gammas()[0];
        }
        mb /= draws as f64;
        mg /= draws as f64;
        // sd of the mean: (width / sqrt 12) / sqrt(draws)
        let sb = PI / 12f64.sqrt() / (draws as f64).sqrt();
        assert!((mb - PI / 2.0).abs() < 3.0 * sb);
        assert!((mg - PI).abs() < 6.0 * sb);
    }

    #[test]
    fn stationary_at_origin() {
        let g = single_edge();
        let z = QaoaAngles::new(vec![0.0], vec![0.0]).unwrap();
        let grad = gradient(&g, &z).unwrap();
        assert!(grad.iter().all(|v| v.abs() < 1e-9));
        let r = minimize_single(&g, &z, 100).unwrap();
        assert_eq!(r.angles, z);
        assert!(r.converged);
        assert_eq!(r.n_iterations, 0);
    }

    #[test]
    fn adjoint_matches_finite_differences() {
        for seed in 0..10 {
            let g = gen_complete(5, seed).unwrap();
            let d = build_cost_diagonal(&g).unwrap();
            let a = sample_initial_angles(3, seed + 100).unwrap();
            let (c, ga) = cost_and_gradient(&d, &a).unwrap();
            assert!((c - evaluate_cost(&d, &a).unwrap()).abs() < 1e-12);
            let gf = gradient_fd(&d, &a).unwrap();
            for (x, y) in ga.iter().zip(&gf) {
                assert!((x - y).abs() < 1e-7, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn central_vs_forward_difference() {
        let g = gen_complete(4, 2).unwrap();
        let d = build_cost_diagonal(&g).unwrap();
        let a = sample_initial_angles(2, 8).unwrap();
        let central = gradient_fd(&d, &a).unwrap();
        let x = a.to_vec();
        let f0 = evaluate_cost(&d, &a).unwrap();
        let h = 1e-6;
        for k in 0..x.len() {
            let mut xp = x.clone();
            xp[k] += h;
            let fwd = (evaluate_cost(&d, &QaoaAngles::from_slice(&xp).unwrap()).unwrap() - f0) / h;
            // forward differences are first order in h, scaled by the curvature
            assert!((fwd - central[k]).abs() < 1e-4);
        }
    }

    #[test]
    fn single_edge_solved_at_depth_one() {
        let g = single_edge();
        let r = minimize_multistart(&g, 1, 5, 3).unwrap();
        assert!((r.cost + 1.0).abs() < 1e-6, "cost {}", r.cost);
    }

    #[test]
    fn cost_never_increases_and_is_reproducible() {
        let g = gen_regular3(8, 4).unwrap();
        let d = build_cost_diagonal(&g).unwrap();
        let init = sample_initial_angles(2, 1).unwrap();
        let c0 = evaluate_cost(&d, &init).unwrap();
        let r = minimize_diag(&d, &init, &BfgsOptions::default()).unwrap();
        assert!(r.cost <= c0);
        assert!((evaluate_cost(&d, &r.angles).unwrap() - r.cost).abs() < 1e-8);
        // every budget-truncated run is a prefix of the same descent
        let mut last = c0;
        for budget in 1..8 {
            let opts = BfgsOptions { max_iterations: budget, ..BfgsOptions::default() };
            let rb = minimize_diag(&d, &init, &opts).unwrap();
            assert!(rb.cost <= last + 1e-15);
            last = rb.cost;
        }
    }

    #[test]
    fn one_restart_equals_single_run() {
        let g = gen_complete(4, 6).unwrap();
        let seed = 99;
        let multi = minimize_multistart(&g, 2, 1, seed).unwrap();
        let init = sample_initial_angles(2, restart_seed(seed, 0)).unwrap();
        let single = minimize_single(&g, &init, BfgsOptions::default().max_iterations).unwrap();
        assert_eq!(multi, single);
    }

    #[test]
    fn more_restarts_never_worse() {
        let g = gen_regular3(6, 2).unwrap();
        let few = minimize_multistart(&g, 2, 5, 7).unwrap();
        let many = minimize_multistart(&g, 2, 20, 7).unwrap();
        assert!(many.cost <= few.cost);
    }
}
