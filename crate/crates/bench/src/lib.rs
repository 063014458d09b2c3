//! Benchmark fixtures; the benches live in `benches/`.

use qaoae_core::experiments::{build_problem, ExperimentConfig, Mode, Problem};
use qaoae_core::GraphKind;

/// A reproducible problem instance of the given kind and size.
pub fn fixture(kind: GraphKind, n: usize) -> Problem {
    let cfg = ExperimentConfig::new(Mode::Randomized, kind, vec![n]);
    build_problem(&cfg, n, 0).expect("fixture sizes are valid")
}
