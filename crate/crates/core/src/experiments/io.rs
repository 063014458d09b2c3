use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, ExperimentRecord};
use crate::Result;

/// Writes records with the header
/// `mode,graph_kind,problem_id,N,p_or_T,layer_or_time,S,r_mean,cost,seed`.
///
/// Floats use shortest round-trip formatting; missing values are empty.
pub fn write_records_csv<W: Write>(w: W, records: &[ExperimentRecord]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in records {
        out.serialize(r)?;
    }
    if records.is_empty() {
        out.write_record(["mode", "graph_kind", "problem_id", "N", "p_or_T", "layer_or_time", "S", "r_mean", "cost", "seed"])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_records_csv<R: Read>(r: R) -> Result<Vec<ExperimentRecord>> {
    csv::Reader::from_reader(r)
        .deserialize()
        .map(|rec| rec.map_err(Into::into))
        .collect()
}

/// Config snapshot written next to every sweep; feeding `config` back in
/// reproduces the sweep's CSV byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub created_unix: u64,
    pub config: ExperimentConfig,
}

impl Manifest {
    pub fn new(config: ExperimentConfig) -> Self {
        let created_unix = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or_default();
        Manifest { tool: "qaoae".into(), version: env!("CARGO_PKG_VERSION").into(), created_unix, config }
    }
}
