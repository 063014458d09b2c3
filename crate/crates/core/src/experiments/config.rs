use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::entanglement::{BipartitionPolicy, DEFAULT_LEVEL_FLOOR};
use crate::graph::GraphKind;
use crate::simulator::{annealing_schedule, MAX_QUBITS};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Randomized,
    Optimized,
    Annealing,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Randomized => "randomized",
            Mode::Optimized => "optimized",
            Mode::Annealing => "annealing",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// Reduced ensembles that finish on a workstation in minutes.
    Desk,
    /// Ensemble sizes and system sizes of the original study.
    Paper,
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Preset::Desk),
            "paper" => Ok(Preset::Paper),
            other => Err(Error::Parameter(format!("unknown preset `{other}`"))),
        }
    }
}

fn default_depths() -> Vec<usize> {
    vec![10]
}
fn default_times() -> Vec<f64> {
    vec![10.0]
}
fn default_dt() -> f64 {
    0.1
}
fn default_problems() -> usize {
    1000
}
fn default_restarts() -> usize {
    1000
}
fn default_floor() -> f64 {
    DEFAULT_LEVEL_FLOOR
}
fn default_budget() -> usize {
    500
}

/// Parameters of one sweep. Serialized as the JSON config / manifest body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub graph_kind: GraphKind,
    pub sizes: Vec<usize>,
    /// Randomized: the largest entry is the circuit depth. Optimized: every
    /// entry is a separate depth `p`.
    #[serde(default = "default_depths")]
    pub depths: Vec<usize>,
    /// Total annealing times `T`.
    #[serde(default = "default_times")]
    pub times: Vec<f64>,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_problems")]
    pub n_problems: usize,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default)]
    pub master_seed: u64,
    /// `None` picks contiguous halves for linear graphs, random otherwise.
    #[serde(default)]
    pub bipartition: Option<BipartitionPolicy>,
    /// Randomized mode only: layers at which entropy is measured (the last
    /// layer is always measured). `None` measures every layer.
    #[serde(default)]
    pub measure_layers: Option<Vec<usize>>,
    /// Collect spectra and gap statistics at the final layer.
    #[serde(default)]
    pub spectrum: bool,
    #[serde(default = "default_floor")]
    pub level_floor: f64,
    #[serde(default = "default_budget")]
    pub bfgs_budget: usize,
    /// Window `[lo, hi]` (layers or time) of pre-saturation power-law fits.
    #[serde(default)]
    pub fit_window: Option<(f64, f64)>,
}

impl ExperimentConfig {
    pub fn new(mode: Mode, graph_kind: GraphKind, sizes: Vec<usize>) -> Self {
        ExperimentConfig {
            mode,
            graph_kind,
            sizes,
            depths: default_depths(),
            times: default_times(),
            dt: default_dt(),
            n_problems: default_problems(),
            restarts: default_restarts(),
            master_seed: 0,
            bipartition: None,
            measure_layers: None,
            spectrum: false,
            level_floor: default_floor(),
            bfgs_budget: default_budget(),
            fit_window: None,
        }
    }

    /// Ready-made configurations. `Desk` matches the acceptance runs.
    pub fn preset(mode: Mode, kind: GraphKind, preset: Preset) -> Self {
        use GraphKind::*;
        let mut cfg = ExperimentConfig::new(mode, kind, vec![]);
        cfg.master_seed = 2022;
        match (preset, mode) {
            (Preset::Desk, Mode::Randomized) => {
                cfg.n_problems = 200;
                cfg.spectrum = true;
                match kind {
                    Complete => {
                        cfg.sizes = vec![10, 12, 14];
                        cfg.depths = vec![20];
                    }
                    Regular3 => {
                        cfg.sizes = vec![14];
                        cfg.depths = vec![40];
                    }
                    Linear => {
                        cfg.sizes = vec![14, 16];
                        cfg.depths = vec![300];
                        cfg.measure_layers = Some(vec![
                            0, 1, 2, 3, 4, 5, 6, 8, 10, 12, 16, 20, 24, 30, 40, 50, 60, 80, 100, 150, 200, 250, 300,
                        ]);
                        cfg.fit_window = Some((4.0, 60.0));
                    }
                }
            }
            (Preset::Desk, Mode::Optimized) => {
                cfg.sizes = vec![8, 10, 12, 14];
                cfg.depths = vec![2, 4];
                cfg.n_problems = 30;
                cfg.restarts = 100;
            }
            (Preset::Desk, Mode::Annealing) => {
                cfg.n_problems = 100;
                cfg.dt = 0.1;
                cfg.fit_window = Some((0.5, 2.0));
                if kind == Linear {
                    cfg.sizes = vec![12];
                    cfg.times = vec![10.0];
                } else {
                    cfg.sizes = vec![8, 10, 12, 14];
                    cfg.times = vec![2.0, 5.0, 10.0, 20.0];
                }
            }
            (Preset::Paper, _) => {
                cfg.sizes = vec![8, 10, 12, 14, 16, 18, 20, 22];
                cfg.n_problems = if mode == Mode::Optimized { 100 } else { 1000 };
                cfg.restarts = 1000;
                cfg.spectrum = mode == Mode::Randomized;
                cfg.depths = match mode {
                    Mode::Randomized if kind == Linear => vec![600],
                    Mode::Randomized => vec![50],
                    _ => (1..=10).collect(),
                };
                cfg.times = vec![1.0, 2.0, 5.0, 10.0, 20.0, 50.0];
            }
        }
        cfg
    }

    pub fn bipartition_policy(&self) -> BipartitionPolicy {
        self.bipartition.unwrap_or(match self.graph_kind {
            GraphKind::Linear => BipartitionPolicy::Contiguous,
            _ => BipartitionPolicy::Random,
        })
    }

    pub fn max_depth(&self) -> usize {
        self.depths.iter().copied().max().unwrap_or(0)
    }

    pub fn measures_layer(&self, layer: usize) -> bool {
        layer == self.max_depth() || self.measure_layers.as_ref().is_none_or(|m| m.contains(&layer))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.sizes.is_empty() {
            return bad("sizes must not be empty".into());
        }
        for &n in &self.sizes {
            if n < 2 || n % 2 == 1 || n > MAX_QUBITS {
                return bad(format!("size {n} must be even and within 2..={MAX_QUBITS}"));
            }
            if self.graph_kind == GraphKind::Regular3 && n < 4 {
                return bad(format!("3-regular graphs need at least 4 vertices, got {n}"));
            }
        }
        if self.n_problems < 1 {
            return bad("n_problems must be at least 1".into());
        }
        if !(self.level_floor >= 0.0) {
            return bad("level_floor must be non-negative".into());
        }
        match self.mode {
            Mode::Randomized => {
                if self.depths.is_empty() {
                    return bad("randomized mode needs a depth".into());
                }
            }
            Mode::Optimized => {
                if self.depths.is_empty() || self.depths.contains(&0) {
                    return bad("optimized mode needs depths >= 1".into());
                }
                if self.restarts < 1 {
                    return bad("restarts must be at least 1".into());
                }
            }
            Mode::Annealing => {
                if !(self.dt > 0.0) {
                    return bad(format!("dt must be positive, got {}", self.dt));
                }
                if self.times.is_empty() {
                    return bad("annealing mode needs at least one total time".into());
                }
                for &t in &self.times {
                    annealing_schedule(t, self.dt).map_err(|e| Error::Config(e.to_string()))?;
                }
            }
        }
        if let Some((lo, hi)) = self.fit_window {
            if !(lo > 0.0 && hi > lo) {
                return bad(format!("fit window [{lo}, {hi}] must satisfy 0 < lo < hi"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for mode in [Mode::Randomized, Mode::Optimized, Mode::Annealing] {
            for kind in [GraphKind::Linear, GraphKind::Regular3, GraphKind::Complete] {
                for preset in [Preset::Desk, Preset::Paper] {
                    ExperimentConfig::preset(mode, kind, preset).validate().unwrap();
                }
            }
        }
    }

    #[test]
    fn invariant_violations() {
        let mut cfg = ExperimentConfig::new(Mode::Randomized, GraphKind::Complete, vec![5]);
        assert!(cfg.validate().is_err());
        cfg.sizes = vec![6];
        cfg.validate().unwrap();
        cfg.n_problems = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::new(Mode::Annealing, GraphKind::Complete, vec![6]);
        cfg.dt = 0.0;
        assert!(cfg.validate().is_err());
        cfg.dt = 0.3;
        cfg.times = vec![1.0];
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn json_keys_are_checked() {
        let ok = r#"{"mode":"randomized","graph_kind":"linear","sizes":[8],"depths":[20]}"#;
        let cfg: ExperimentConfig = serde_json::from_str(ok).unwrap();
        assert_eq!(cfg.bipartition_policy(), BipartitionPolicy::Contiguous);
        assert_eq!(cfg.n_problems, 1000);
        let unknown = r#"{"mode":"randomized","graph_kind":"linear","sizes":[8],"depht":[20]}"#;
        assert!(serde_json::from_str::<ExperimentConfig>(unknown).is_err());
    }
}
