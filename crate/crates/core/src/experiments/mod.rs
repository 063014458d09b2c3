//! Ensemble sweeps: randomized, optimized and annealed circuits over many
//! problem instances, with per-layer entanglement records.
//!
//! Every problem instance has a seed derived from the master seed and its
//! coordinates `(N, problem_id)`; graph, bipartition, angles and restarts
//! are in turn derived from that seed. Instances run in parallel, and the
//! output order is fixed by instance coordinates, so a sweep is reproducible
//! for any worker count.

mod analysis;
mod config;
mod io;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use analysis::{
    aggregate_series, detect_saturation, gap_summaries, linear_fit, max_over_layers, maxima_per_problem,
    mean_stderr_streaming, mean_stderr_two_pass, power_fit, spectrum_summaries, summarize, FitKind, FitResult,
    GapSummary, MaxPoint, NamedFit, RunningStats, SaturationPoint, SeriesPoint, SpectrumSummary, Summary,
    HISTOGRAM_BINS, SATURATION_DRIFT, SATURATION_WINDOW,
};
pub use config::{ExperimentConfig, Mode, Preset};
pub use io::{read_records_csv, write_records_csv, Manifest};

use crate::entanglement::{
    bipartition_for, gap_ratios, gap_ratios_with, mean_gap_ratio, schmidt_spectrum, spectrum_blocks,
    von_neumann_entropy, Bipartition, GapRatioConvention,
};
use crate::graph::{generate, Graph, GraphKind};
use crate::optimize::{minimize_multistart_diag, sample_initial_angles, BfgsOptions};
use crate::seed::{derive_seed, stream};
use crate::simulator::{build_cost_diagonal, cost_expectation, run_annealing_diag, run_layers, DiagonalCost, StateVector};
use crate::Result;

/// One `(problem, schedule, layer)` observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub mode: Mode,
    pub graph_kind: GraphKind,
    pub problem_id: usize,
    #[serde(rename = "N")]
    pub n: usize,
    /// Circuit depth (randomized: the maximum depth) or total annealing time.
    #[serde(rename = "p_or_T")]
    pub p_or_t: f64,
    /// Layer index, or time `t` in annealing mode.
    pub layer_or_time: f64,
    #[serde(rename = "S")]
    pub entropy: f64,
    pub r_mean: Option<f64>,
    pub cost: Option<f64>,
    pub seed: u64,
}

/// Spectrum statistics of one instance at the end of its circuit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumDigest {
    pub problem_id: usize,
    pub n: usize,
    pub p_or_t: f64,
    /// Full descending spectrum.
    pub spectrum: Vec<f64>,
    /// Eigenvalues of the two symmetry blocks, when the state is symmetric.
    pub blocks: Option<(Vec<f64>, Vec<f64>)>,
}

impl SpectrumDigest {
    pub fn gap_ratios(&self, floor: f64) -> Option<Vec<f64>> {
        gap_ratios_with(&self.spectrum, floor, GapRatioConvention::MinOverMax).ok()
    }

    /// Ratios computed inside each block separately, concatenated.
    pub fn block_gap_ratios(&self, floor: f64) -> Option<Vec<f64>> {
        let (even, odd) = self.blocks.as_ref()?;
        let mut r = gap_ratios_with(even, floor, GapRatioConvention::MinOverMax).ok()?;
        r.extend(gap_ratios_with(odd, floor, GapRatioConvention::MinOverMax).ok()?);
        Some(r)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepOutput {
    pub records: Vec<ExperimentRecord>,
    pub spectra: Vec<SpectrumDigest>,
}

/// A generated problem instance with everything derived from its seed.
#[derive(Debug, Clone)]
pub struct Problem {
    pub id: usize,
    pub seed: u64,
    pub graph: Graph,
    pub diag: DiagonalCost,
    pub part: Bipartition,
}

pub fn problem_seed(master: u64, n: usize, id: usize) -> u64 {
    derive_seed(master, &[stream::PROBLEM, n as u64, id as u64])
}

pub fn build_problem(cfg: &ExperimentConfig, n: usize, id: usize) -> Result<Problem> {
    let seed = problem_seed(cfg.master_seed, n, id);
    let graph = generate(cfg.graph_kind, n, derive_seed(seed, &[stream::GRAPH]))?;
    let diag = build_cost_diagonal(&graph)?;
    let part = bipartition_for(cfg.bipartition_policy(), n, derive_seed(seed, &[stream::BIPARTITION]))?;
    Ok(Problem { id, seed, graph, diag, part })
}

struct Recorder<'a> {
    cfg: &'a ExperimentConfig,
    problem: &'a Problem,
    p_or_t: f64,
    out: SweepOutput,
}

impl Recorder<'_> {
    /// Records entropy and cost of `state`; with `final_layer`, also the
    /// spectrum digest and mean gap ratio when spectra are enabled.
    fn observe(&mut self, layer_or_time: f64, state: &StateVector, final_layer: bool) -> Result<()> {
        let spec = schmidt_spectrum(state, &self.problem.part)?;
        let mut r_mean = None;
        if final_layer && self.cfg.spectrum {
            r_mean = gap_ratios(&spec, self.cfg.level_floor).ok().and_then(|r| mean_gap_ratio(&r).ok());
            let blocks = spectrum_blocks(state, &self.problem.part).ok().map(|b| (b.even, b.odd));
            self.out.spectra.push(SpectrumDigest {
                problem_id: self.problem.id,
                n: state.n_qubits(),
                p_or_t: self.p_or_t,
                spectrum: spec.values().to_vec(),
                blocks,
            });
        }
        self.out.records.push(ExperimentRecord {
            mode: self.cfg.mode,
            graph_kind: self.cfg.graph_kind,
            problem_id: self.problem.id,
            n: state.n_qubits(),
            p_or_t: self.p_or_t,
            layer_or_time,
            entropy: von_neumann_entropy(&spec),
            r_mean,
            cost: Some(cost_expectation(state, &self.problem.diag)?),
            seed: self.problem.seed,
        });
        Ok(())
    }
}

fn run_randomized_problem(cfg: &ExperimentConfig, problem: &Problem) -> Result<SweepOutput> {
    let depth = cfg.max_depth();
    let angles = sample_initial_angles(depth, derive_seed(problem.seed, &[stream::ANGLES]))?;
    let mut rec = Recorder { cfg, problem, p_or_t: depth as f64, out: SweepOutput::default() };
    let mut err = Ok(());
    run_layers(&problem.diag, &angles, |l, state| {
        if err.is_ok() && cfg.measures_layer(l) {
            err = rec.observe(l as f64, state, l == depth);
        }
    })?;
    err.map(|_| rec.out)
}

fn run_optimized_problem(cfg: &ExperimentConfig, problem: &Problem) -> Result<SweepOutput> {
    let opts = BfgsOptions { max_iterations: cfg.bfgs_budget, ..BfgsOptions::default() };
    let mut out = SweepOutput::default();
    for &p in &cfg.depths {
        let seed = derive_seed(problem.seed, &[stream::RESTART, p as u64]);
        let best = minimize_multistart_diag(&problem.diag, p, cfg.restarts, seed, &opts)?;
        let mut rec = Recorder { cfg, problem, p_or_t: p as f64, out: SweepOutput::default() };
        let mut err = Ok(());
        run_layers(&problem.diag, &best.angles, |l, state| {
            if err.is_ok() {
                err = rec.observe(l as f64, state, l == p);
            }
        })?;
        err?;
        out.records.extend(rec.out.records);
        out.spectra.extend(rec.out.spectra);
    }
    Ok(out)
}

fn run_annealing_problem(cfg: &ExperimentConfig, problem: &Problem) -> Result<SweepOutput> {
    let mut out = SweepOutput::default();
    for &total in &cfg.times {
        let steps = (total / cfg.dt).round() as usize;
        let mut rec = Recorder { cfg, problem, p_or_t: total, out: SweepOutput::default() };
        let mut step = 0;
        let mut err = Ok(());
        run_annealing_diag(&problem.diag, total, cfg.dt, |t, state| {
            if err.is_ok() {
                err = rec.observe(t, state, step == steps);
            }
            step += 1;
        })?;
        err?;
        out.records.extend(rec.out.records);
        out.spectra.extend(rec.out.spectra);
    }
    Ok(out)
}

/// Runs every problem of one size/index pair; also the replay entry point.
pub fn run_problem(cfg: &ExperimentConfig, n: usize, id: usize) -> Result<SweepOutput> {
    let problem = build_problem(cfg, n, id)?;
    match cfg.mode {
        Mode::Randomized => run_randomized_problem(cfg, &problem),
        Mode::Optimized => run_optimized_problem(cfg, &problem),
        Mode::Annealing => run_annealing_problem(cfg, &problem),
    }
}

fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepOutput> {
    cfg.validate()?;
    let jobs: Vec<(usize, usize)> = cfg
        .sizes
        .iter()
        .flat_map(|&n| (0..cfg.n_problems).map(move |id| (n, id)))
        .collect();
    let parts: Vec<Result<SweepOutput>> = jobs.par_iter().map(|&(n, id)| run_problem(cfg, n, id)).collect();
    let mut out = SweepOutput::default();
    for part in parts {
        let part = part?;
        out.records.extend(part.records);
        out.spectra.extend(part.spectra);
    }
    Ok(out)
}

fn expect_mode(cfg: &ExperimentConfig, mode: Mode) -> Result<()> {
    if cfg.mode != mode {
        return Err(crate::Error::Config(format!("expected mode {mode}, config says {}", cfg.mode)));
    }
    Ok(())
}

/// Fresh random angles per layer and per problem; records after every
/// measured layer.
pub fn run_randomized_sweep(cfg: &ExperimentConfig) -> Result<SweepOutput> {
    expect_mode(cfg, Mode::Randomized)?;
    run_sweep(cfg)
}

/// Multi-start optimization at each depth, then the best circuit replayed
/// layer by layer.
pub fn run_optimized_sweep(cfg: &ExperimentConfig) -> Result<SweepOutput> {
    expect_mode(cfg, Mode::Optimized)?;
    run_sweep(cfg)
}

/// Annealing trajectories for every total time, recorded at every step.
pub fn run_annealing_sweep(cfg: &ExperimentConfig) -> Result<SweepOutput> {
    expect_mode(cfg, Mode::Annealing)?;
    run_sweep(cfg)
}

pub fn run(cfg: &ExperimentConfig) -> Result<SweepOutput> {
    match cfg.mode {
        Mode::Randomized => run_randomized_sweep(cfg),
        Mode::Optimized => run_optimized_sweep(cfg),
        Mode::Annealing => run_annealing_sweep(cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(mode: Mode, kind: GraphKind) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(mode, kind, vec![4, 6]);
        cfg.n_problems = 3;
        cfg.depths = vec![3];
        cfg.times = vec![1.0];
        cfg.restarts = 2;
        cfg.spectrum = true;
        cfg
    }

    #[test]
    fn randomized_layer_zero_is_unentangled() {
        let out = run(&small(Mode::Randomized, GraphKind::Complete)).unwrap();
        assert_eq!(out.records.len(), 2 * 3 * 4);
        for r in out.records.iter().filter(|r| r.layer_or_time == 0.0) {
            assert!(r.entropy.abs() < 1e-10);
        }
        assert_eq!(out.spectra.len(), 6);
        assert!(out.records.iter().filter(|r| r.layer_or_time == 3.0).all(|r| r.r_mean.is_some()));
    }

    #[test]
    fn annealing_records_every_step() {
        let out = run(&small(Mode::Annealing, GraphKind::Regular3)).unwrap();
        assert_eq!(out.records.len(), 2 * 3 * 11);
        assert!(out.records.iter().filter(|r| r.layer_or_time == 0.0).all(|r| r.entropy.abs() < 1e-10));
    }

    #[test]
    fn optimized_sweep_runs() {
        let out = run(&small(Mode::Optimized, GraphKind::Linear)).unwrap();
        assert_eq!(out.records.len(), 2 * 3 * 4);
    }

    #[test]
    fn replay_reproduces_records() {
        let cfg = small(Mode::Randomized, GraphKind::Regular3);
        let out = run(&cfg).unwrap();
        let again = run_problem(&cfg, 6, 2).unwrap();
        let orig: Vec<_> = out.records.iter().filter(|r| r.n == 6 && r.problem_id == 2).collect();
        assert_eq!(orig.len(), again.records.len());
        for (a, b) in orig.iter().zip(&again.records) {
            assert!((a.entropy - b.entropy).abs() < 1e-9);
            assert_eq!(a.seed, b.seed);
        }
    }

    #[test]
    fn mode_mismatch_rejected() {
        let cfg = small(Mode::Annealing, GraphKind::Complete);
        assert!(run_randomized_sweep(&cfg).is_err());
    }
}
