//! Entanglement in QAOA and quantum-annealing circuits for MaxCut.
//!
//! The crate builds MaxCut instances ([`graph`]), runs them through an exact
//! state-vector simulator ([`simulator`]), extracts entanglement spectra and
//! their random-matrix statistics ([`entanglement`]), optimizes circuit
//! angles ([`optimize`]) and orchestrates whole ensembles ([`experiments`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod entanglement;
mod error;
pub mod experiments;
pub mod graph;
pub mod oracle;
pub mod optimize;
pub mod seed;
pub mod simulator;

pub use entanglement::{Bipartition, BipartitionPolicy, EntanglementSpectrum};
pub use error::{Error, Result};
pub use graph::{Graph, GraphKind, SpinConfig};
pub use optimize::OptimizationResult;
pub use simulator::{DiagonalCost, QaoaAngles, StateVector};
