//! Exact state-vector execution of QAOA and Trotterized annealing circuits.
//!
//! Qubit `q` is bit `q` of the basis index (little-endian). A computational
//! basis bit of 0 corresponds to spin `+1`. All kernels are sequential over
//! the amplitude buffer, so results are bit-identical for a given input
//! regardless of how many worker threads run independent simulations.

use std::collections::HashMap;
use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::graph::Graph;
use crate::{Error, Result};

/// Largest register the simulator will allocate (2^26 amplitudes = 1 GiB).
pub const MAX_QUBITS: usize = 26;

/// Above this many distinct cost levels the phase is evaluated per amplitude.
const MAX_PHASE_LEVELS: usize = 1 << 12;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|+>^n`, the output of a Hadamard layer on `|0...0>`.
    pub fn plus(n: usize) -> Result<Self> {
        check_qubits(n)?;
        let a = (0.5f64).powf(n as f64 / 2.0);
        Ok(StateVector { n, amps: vec![Complex64::new(a, 0.0); 1 << n] })
    }

    pub fn basis(n: usize, index: usize) -> Result<Self> {
        check_qubits(n)?;
        if index >= 1 << n {
            return Err(Error::Parameter(format!("basis index {index} out of range")));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n, amps })
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidSize(format!("amplitude count {len} is not a power of two >= 2")));
        }
        let n = len.trailing_zeros() as usize;
        check_qubits(n)?;
        Ok(StateVector { n, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// `max_b |amps[b] - amps[!b]|`: zero for states invariant under global X.
    pub fn z2_asymmetry(&self) -> f64 {
        let mask = self.amps.len() - 1;
        (0..self.amps.len() / 2)
            .map(|b| (self.amps[b] - self.amps[b ^ mask]).norm())
            .fold(0.0, f64::max)
    }

    /// Writes the debug dump: `u32` qubit count then interleaved `(re, im)`
    /// doubles, all little-endian.
    pub fn write_dump<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&(self.n as u32).to_le_bytes())?;
        for a in &self.amps {
            w.write_all(&a.re.to_le_bytes())?;
            w.write_all(&a.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_dump<R: Read>(mut r: R) -> Result<Self> {
        let mut word = [0u8; 4];
        r.read_exact(&mut word)?;
        let n = u32::from_le_bytes(word) as usize;
        check_qubits(n)?;
        let mut buf = vec![0u8; 16 << n];
        r.read_exact(&mut buf)?;
        let amps = buf
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().unwrap());
                let im = f64::from_le_bytes(c[8..].try_into().unwrap());
                Complex64::new(re, im)
            })
            .collect();
        Ok(StateVector { n, amps })
    }
}

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::InvalidSize(format!("qubit count {n} outside 1..={MAX_QUBITS}")));
    }
    Ok(())
}

pub fn init_plus_state(n: usize) -> Result<StateVector> {
    StateVector::plus(n)
}

/// The `2p` circuit parameters, in radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaoaAngles {
    betas: Vec<f64>,
    gammas: Vec<f64>,
}

impl QaoaAngles {
    pub fn new(betas: Vec<f64>, gammas: Vec<f64>) -> Result<Self> {
        if betas.len() != gammas.len() {
            return Err(Error::Parameter(format!(
                "{} betas but {} gammas",
                betas.len(),
                gammas.len()
            )));
        }
        Ok(QaoaAngles { betas, gammas })
    }

    pub fn empty() -> Self {
        QaoaAngles { betas: Vec::new(), gammas: Vec::new() }
    }

    pub fn depth(&self) -> usize {
        self.betas.len()
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    /// Flat parameter vector `[beta_1..beta_p, gamma_1..gamma_p]`.
    pub fn to_vec(&self) -> Vec<f64> {
        self.betas.iter().chain(&self.gammas).copied().collect()
    }

    pub fn from_slice(x: &[f64]) -> Result<Self> {
        if x.len() % 2 == 1 {
            return Err(Error::Parameter("parameter vector must have even length".into()));
        }
        let p = x.len() / 2;
        Ok(QaoaAngles { betas: x[..p].to_vec(), gammas: x[p..].to_vec() })
    }

    /// Appends an identity layer (`beta = gamma = 0`).
    pub fn padded(&self) -> Self {
        let mut out = self.clone();
        out.betas.push(0.0);
        out.gammas.push(0.0);
        out
    }
}

/// The cost operator as its diagonal in the computational basis.
#[derive(Debug, Clone)]
pub struct DiagonalCost {
    diag: Vec<f64>,
    // distinct values and, per amplitude, the index of its value
    levels: Option<(Vec<f64>, Vec<u16>)>,
}

impl DiagonalCost {
    pub fn from_values(diag: Vec<f64>) -> Result<Self> {
        let len = diag.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidSize(format!("diagonal length {len} is not a power of two")));
        }
        let levels = level_table(&diag);
        Ok(DiagonalCost { diag, levels })
    }

    pub fn values(&self) -> &[f64] {
        &self.diag
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn n_qubits(&self) -> usize {
        self.diag.len().trailing_zeros() as usize
    }

    pub fn min(&self) -> f64 {
        self.diag.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn check(&self, state: &StateVector) -> Result<()> {
        if state.dim() != self.diag.len() {
            return Err(Error::Shape { expected: self.diag.len(), actual: state.dim() });
        }
        Ok(())
    }
}

fn level_table(diag: &[f64]) -> Option<(Vec<f64>, Vec<u16>)> {
    let mut lookup: HashMap<u64, u16> = HashMap::new();
    let mut values = Vec::new();
    let mut index = Vec::with_capacity(diag.len());
    for &d in diag {
        let next = values.len();
        let k = *lookup.entry(d.to_bits()).or_insert_with(|| {
            values.push(d);
            next as u16
        });
        if values.len() > MAX_PHASE_LEVELS {
            return None;
        }
        index.push(k);
    }
    Some((values, index))
}

/// `diag[b] = sum_{(i,j)} w_ij z_i(b) z_j(b)`; `O(2^N |E|)`.
pub fn build_cost_diagonal(g: &Graph) -> Result<DiagonalCost> {
    let n = g.n_vertices();
    check_qubits(n)?;
    let mut diag = vec![0.0; 1 << n];
    for e in g.edges() {
        let mask = (1usize << e.i) | (1usize << e.j);
        for (b, d) in diag.iter_mut().enumerate() {
            // z_i z_j = +1 iff the two bits agree
            if (b & mask).count_ones() == 1 {
                *d -= e.w;
            } else {
                *d += e.w;
            }
        }
    }
    DiagonalCost::from_values(diag)
}

/// Applies `exp(-i beta X_j / 2)` to every qubit.
pub fn apply_mixer(state: &mut StateVector, beta: f64) {
    let (s, c) = (beta / 2.0).sin_cos();
    for q in 0..state.n {
        rx_butterfly(&mut state.amps, q, c, s);
    }
}

/// `exp(-i theta X_q / 2)` with `c = cos(theta/2)`, `s = sin(theta/2)`.
#[inline]
fn rx_butterfly(amps: &mut [Complex64], q: usize, c: f64, s: f64) {
    let stride = 1 << q;
    for block in amps.chunks_exact_mut(2 * stride) {
        let (lo, hi) = block.split_at_mut(stride);
        for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
            let (x, y) = (*a, *b);
            // -i s y = (s y.im, -s y.re)
            *a = Complex64::new(c * x.re + s * y.im, c * x.im - s * y.re);
            *b = Complex64::new(c * y.re + s * x.im, c * y.im - s * x.re);
        }
    }
}

/// Applies `exp(-i gamma C / 2)`.
pub fn apply_phase(state: &mut StateVector, gamma: f64, diag: &DiagonalCost) -> Result<()> {
    diag.check(state)?;
    let phase = |d: f64| {
        let (s, c) = (-0.5 * gamma * d).sin_cos();
        Complex64::new(c, s)
    };
    match &diag.levels {
        Some((values, index)) => {
            let table: Vec<Complex64> = values.iter().map(|&d| phase(d)).collect();
            for (a, &k) in state.amps.iter_mut().zip(index) {
                *a *= table[k as usize];
            }
        }
        None => {
            for (a, &d) in state.amps.iter_mut().zip(&diag.diag) {
                *a *= phase(d);
            }
        }
    }
    Ok(())
}

/// One circuit layer: the cost phase, then the mixer.
pub fn apply_layer(state: &mut StateVector, beta: f64, gamma: f64, diag: &DiagonalCost) -> Result<()> {
    apply_phase(state, gamma, diag)?;
    apply_mixer(state, beta);
    Ok(())
}

/// `<psi|C|psi>`.
pub fn cost_expectation(state: &StateVector, diag: &DiagonalCost) -> Result<f64> {
    diag.check(state)?;
    Ok(state.amps.iter().zip(&diag.diag).map(|(a, d)| a.norm_sqr() * d).sum())
}

/// Runs the circuit from `|+>^N`, layer 1 first; `observer(layer, state)` is
/// called for layer 0 (the initial state) and after every layer.
pub fn run_layers<F>(diag: &DiagonalCost, angles: &QaoaAngles, mut observer: F) -> Result<StateVector>
where
    F: FnMut(usize, &StateVector),
{
    let mut state = StateVector::plus(diag.n_qubits())?;
    observer(0, &state);
    for (l, (&beta, &gamma)) in angles.betas.iter().zip(&angles.gammas).enumerate() {
        apply_layer(&mut state, beta, gamma, diag)?;
        observer(l + 1, &state);
    }
    Ok(state)
}

pub fn run_qaoa_diag(diag: &DiagonalCost, angles: &QaoaAngles) -> Result<StateVector> {
    run_layers(diag, angles, |_, _| {})
}

pub fn run_qaoa(g: &Graph, angles: &QaoaAngles) -> Result<StateVector> {
    run_qaoa_diag(&build_cost_diagonal(g)?, angles)
}

/// Trotterized linear interpolation from `-sum X` to `C` over time `total`.
///
/// Layer `l = 1..L` (with `L = total / dt`, `t = l dt`) uses
/// `gamma_l = 2 t dt / T` and `beta_l = -2 dt (1 - t / T)`.
pub fn annealing_schedule(total: f64, dt: f64) -> Result<QaoaAngles> {
    if !(total > 0.0 && total.is_finite()) || !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Parameter(format!("need T > 0 and dt > 0, got T={total}, dt={dt}")));
    }
    let steps = (total / dt).round();
    if steps < 1.0 || (steps * dt - total).abs() > 1e-9 * total.max(1.0) {
        return Err(Error::Parameter(format!("T={total} is not an integer multiple of dt={dt}")));
    }
    let steps = steps as usize;
    let frac = |l: usize| l as f64 / steps as f64;
    let gammas = (1..=steps).map(|l| 2.0 * dt * frac(l)).collect();
    let betas = (1..=steps).map(|l| -2.0 * dt * (1.0 - frac(l))).collect();
    QaoaAngles::new(betas, gammas)
}

/// Runs the annealing circuit; `observer(t, state)` sees `t = 0` and every
/// step `t = l dt` without the trajectory being stored.
pub fn run_annealing<F>(g: &Graph, total: f64, dt: f64, mut observer: F) -> Result<StateVector>
where
    F: FnMut(f64, &StateVector),
{
    let diag = build_cost_diagonal(g)?;
    run_annealing_diag(&diag, total, dt, &mut observer)
}

pub fn run_annealing_diag<F>(diag: &DiagonalCost, total: f64, dt: f64, mut observer: F) -> Result<StateVector>
where
    F: FnMut(f64, &StateVector),
{
    let schedule = annealing_schedule(total, dt)?;
    run_layers(diag, &schedule, |l, s| observer(l as f64 * dt, s))
}

/// `<lhs| sum_j X_j |rhs>`.
pub fn mixer_generator_overlap(lhs: &StateVector, rhs: &StateVector) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for q in 0..rhs.n {
        let bit = 1 << q;
        for (b, l) in lhs.amps.iter().enumerate() {
            acc += l.conj() * rhs.amps[b ^ bit];
        }
    }
    acc
}

/// `<lhs|C|rhs>`.
pub fn cost_overlap(lhs: &StateVector, rhs: &StateVector, diag: &DiagonalCost) -> Complex64 {
    lhs.amps
        .iter()
        .zip(&rhs.amps)
        .zip(&diag.diag)
        .map(|((l, r), d)| l.conj() * r * d)
        .sum()
}

/// `C|state>` as a new (unnormalized) vector.
pub fn apply_cost_operator(state: &StateVector, diag: &DiagonalCost) -> Result<StateVector> {
    diag.check(state)?;
    let amps = state.amps.iter().zip(&diag.diag).map(|(a, d)| a * d).collect();
    Ok(StateVector { n: state.n, amps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gen_complete, Edge, GraphKind};
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn single_edge() -> Graph {
        Graph::new(2, GraphKind::Complete, vec![Edge { i: 0, j: 1, w: 1.0 }]).unwrap()
    }

    fn triangle() -> Graph {
        let edges = vec![Edge { i: 0, j: 1, w: 1.0 }, Edge { i: 0, j: 2, w: 1.0 }, Edge { i: 1, j: 2, w: 1.0 }];
        Graph::new(3, GraphKind::Complete, edges).unwrap()
    }

    #[test]
    fn diagonal_examples() {
        assert_eq!(build_cost_diagonal(&single_edge()).unwrap().values(), &[1.0, -1.0, -1.0, 1.0]);
        assert_eq!(
            build_cost_diagonal(&triangle()).unwrap().values(),
            &[3.0, -1.0, -1.0, -1.0, -1.0, -1.0, -1.0, 3.0]
        );
    }

    #[test]
    fn diagonal_flip_symmetry_and_minimum() {
        let g = gen_complete(7, 1).unwrap();
        let d = build_cost_diagonal(&g).unwrap();
        let mask = d.len() - 1;
        for b in 0..d.len() {
            assert_eq!(d.values()[b], d.values()[b ^ mask]);
        }
        let (min, _) = crate::graph::maxcut_bruteforce(&g).unwrap();
        assert!((d.min() - min).abs() < 1e-12);
    }

    #[test]
    fn phase_table_matches_direct_evaluation() {
        let g = crate::graph::gen_regular3(10, 4).unwrap();
        let d = build_cost_diagonal(&g).unwrap();
        assert!(d.levels.is_some());
        let direct = DiagonalCost { diag: d.diag.clone(), levels: None };
        let mut a = StateVector::plus(10).unwrap();
        apply_mixer(&mut a, 0.3);
        let mut b = a.clone();
        apply_phase(&mut a, 0.77, &d).unwrap();
        apply_phase(&mut b, 0.77, &direct).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn plus_state() {
        let s = StateVector::plus(1).unwrap();
        assert!(s.amplitudes().iter().all(|a| (a.re - FRAC_1_SQRT_2).abs() < 1e-15 && a.im == 0.0));
        let s = StateVector::plus(4).unwrap();
        assert_eq!(s.dim(), 16);
        assert!(s.amplitudes().iter().all(|a| *a == Complex64::new(0.25, 0.0)));
    }

    #[test]
    fn mixer_zero_is_identity() {
        let mut s = StateVector::plus(3).unwrap();
        apply_phase(&mut s, 0.4, &build_cost_diagonal(&triangle()).unwrap()).unwrap();
        let before = s.clone();
        apply_mixer(&mut s, 0.0);
        assert_eq!(s, before);
    }

    #[test]
    fn mixer_pi_flips_all_qubits() {
        for n in 1..5 {
            let mut s = StateVector::basis(n, 0).unwrap();
            apply_mixer(&mut s, PI);
            let phase = Complex64::new(0.0, -1.0).powu(n as u32);
            let last = (1 << n) - 1;
            for (b, a) in s.amplitudes().iter().enumerate() {
                let want = if b == last { phase } else { Complex64::new(0.0, 0.0) };
                assert!((a - want).norm() < 1e-15, "n={n} b={b}");
            }
        }
    }

    #[test]
    fn phase_examples() {
        let d = build_cost_diagonal(&single_edge()).unwrap();
        let mut s = StateVector::plus(2).unwrap();
        let before = s.clone();
        apply_phase(&mut s, 0.0, &d).unwrap();
        assert_eq!(s, before);
        apply_phase(&mut s, PI, &d).unwrap();
        let m = Complex64::new(0.0, -0.5);
        let p = Complex64::new(0.0, 0.5);
        for (a, want) in s.amplitudes().iter().zip([m, p, p, m]) {
            assert!((a - want).norm() < 1e-15);
        }
        let mut wrong = StateVector::plus(3).unwrap();
        assert!(matches!(apply_phase(&mut wrong, 1.0, &d), Err(Error::Shape { .. })));
    }

    #[test]
    fn p_zero_is_uniform_and_costs_nothing() {
        let g = gen_complete(5, 2).unwrap();
        let s = run_qaoa(&g, &QaoaAngles::empty()).unwrap();
        assert_eq!(s, StateVector::plus(5).unwrap());
        let d = build_cost_diagonal(&g).unwrap();
        assert!(cost_expectation(&s, &d).unwrap().abs() < 1e-14);
    }

    #[test]
    fn basis_state_cost() {
        let g = gen_complete(4, 8).unwrap();
        let d = build_cost_diagonal(&g).unwrap();
        for b in 0..16 {
            let s = StateVector::basis(4, b).unwrap();
            assert_eq!(cost_expectation(&s, &d).unwrap(), d.values()[b]);
        }
    }

    #[test]
    fn schedule_examples() {
        let a = annealing_schedule(1.0, 0.5).unwrap();
        assert_eq!(a.gammas(), &[0.5, 1.0]);
        assert_eq!(a.betas(), &[-0.5, 0.0]);
        let a = annealing_schedule(10.0, 0.1).unwrap();
        assert_eq!(a.depth(), 100);
        assert_eq!(*a.betas().last().unwrap(), 0.0);
        assert!(annealing_schedule(0.0, 0.1).is_err());
        assert!(annealing_schedule(1.0, -0.1).is_err());
        assert!(annealing_schedule(1.0, 0.3).is_err());
    }

    #[test]
    fn annealing_observer_starts_from_product_state() {
        let g = gen_complete(4, 3).unwrap();
        let mut seen = Vec::new();
        run_annealing(&g, 1.0, 0.1, |t, s| {
            if seen.is_empty() {
                assert_eq!(*s, StateVector::plus(4).unwrap());
            }
            assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
            seen.push(t);
        })
        .unwrap();
        assert_eq!(seen.len(), 11);
        assert_eq!(seen[0], 0.0);
        assert!((seen[10] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dump_roundtrip() {
        let g = gen_complete(3, 1).unwrap();
        let s = run_qaoa(&g, &QaoaAngles::new(vec![0.3], vec![1.1]).unwrap()).unwrap();
        let mut buf = Vec::new();
        s.write_dump(&mut buf).unwrap();
        assert_eq!(buf.len(), 4 + 16 * 8);
        assert_eq!(&buf[..4], &3u32.to_le_bytes());
        assert_eq!(StateVector::read_dump(&buf[..]).unwrap(), s);
    }

    #[test]
    fn generator_overlap_matches_explicit_sum() {
        let g = gen_complete(3, 5).unwrap();
        let s = run_qaoa(&g, &QaoaAngles::new(vec![0.2, 0.9], vec![0.4, 1.3]).unwrap()).unwrap();
        let t = run_qaoa(&g, &QaoaAngles::new(vec![1.2], vec![0.1]).unwrap()).unwrap();
        let mut xs = StateVector { n: 3, amps: vec![Complex64::new(0.0, 0.0); 8] };
        for q in 0..3 {
            for b in 0..8 {
                xs.amps[b] += t.amps[b ^ (1 << q)];
            }
        }
        let want = s.inner(&xs);
        assert!((mixer_generator_overlap(&s, &t) - want).norm() < 1e-14);
    }
}
