//! Constrained search over pruning vectors.

mod accuracy;
mod fitness;
mod ncs;

pub use accuracy::{flops_reduction, simulated_accuracy, simulated_accuracy_with, AccuracyModel};
pub use fitness::{penalized_fitness, FitnessBreakdown, FitnessContext};
pub use ncs::{bhattacharyya, ncs_minimize, NcsConfig, NcsOutcome, NcsTraceEntry};

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One row of the search trace export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchTraceRow {
    pub generation: usize,
    pub individual: usize,
    pub fitness: f64,
    pub accuracy: f64,
    pub latency_estimate: f64,
    pub accepted: bool,
}

/// Writes `generation,individual,fitness,accuracy,latency_estimate,accepted`.
pub fn write_trace_csv<W: Write>(rows: &[SearchTraceRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)
            .map_err(|e| Error::Input(format!("trace export: {e}")))?;
    }
    w.flush().map_err(|e| Error::io("trace.csv", e))
}
