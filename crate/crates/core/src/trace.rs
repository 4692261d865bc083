//! Per-round run records and their CSV form.
//!
//! A trace holds one row per cloud-round boundary, row `k` describing the
//! cloud model after `k` rounds (row 0 is the initial state). The CSV
//! columns are the stable external contract:
//! `k,t_total,wall_clock_s,loss,grad_norm_sq,tau1,tau2,eta,uplink_bits`.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::vector::ParamVector;

/// One cloud-round boundary.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    /// Cloud round index.
    pub k: u32,
    /// Total local update steps performed so far.
    pub t_total: u64,
    /// Cumulative wall-clock seconds.
    pub wall_clock_s: f64,
    /// Exact global loss at the cloud model.
    pub loss: f64,
    /// Squared norm of the exact global gradient at the cloud model.
    pub grad_norm_sq: f64,
    /// Client-edge interval in force for the round starting here.
    pub tau1: u32,
    /// Edge-cloud interval in force.
    pub tau2: u32,
    /// Step size in force at the next local step.
    pub eta: f64,
    /// Cumulative uplink bits.
    pub uplink_bits: u64,
}

/// A run aborted by non-finite or exploding parameters.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DivergenceReport {
    /// The cloud round whose aggregation produced the bad state.
    pub round: u32,
    pub reason: String,
}

/// The full record of one simulated run.
#[derive(Clone, Debug, Default, Serialize)]
pub struct RunTrace {
    pub rows: Vec<RoundRecord>,
    /// Cloud model at the last recorded row.
    pub final_model: ParamVector,
    /// Set when the run aborted; rows stop at the last finite state.
    pub divergence: Option<DivergenceReport>,
    /// Feasibility constant computed from the model constants, when known.
    pub g_value: Option<f64>,
    pub warnings: Vec<String>,
    /// Cloud iterate per row, kept only when requested.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub models: Option<Vec<ParamVector>>,
    /// Squared distance between the cloud model and its unquantized virtual
    /// counterpart, per completed round; kept only with diagnostics enabled.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quantization_error_sq: Option<Vec<f64>>,
    /// Average client-reported local training loss per completed round, kept
    /// when the run collects it (adaptive control does).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reported_loss: Option<Vec<f64>>,
}

impl RunTrace {
    pub fn final_row(&self) -> Option<&RoundRecord> {
        self.rows.last()
    }

    pub fn rounds_completed(&self) -> u32 {
        self.rows.last().map_or(0, |r| r.k)
    }

    /// Average squared gradient norm over rows `0..count` (the first `count`
    /// cloud iterates, initial state included).
    pub fn mean_grad_norm_sq(&self, count: usize) -> f64 {
        let take = count.min(self.rows.len());
        if take == 0 {
            return f64::NAN;
        }
        self.rows[..take].iter().map(|r| r.grad_norm_sq).sum::<f64>() / take as f64
    }

    /// Serialize the rows in the contract CSV layout.
    pub fn to_csv_string(&self) -> Result<String> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            writer.serialize(row)?;
        }
        let bytes = writer.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn write_csv(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string()?)?;
        Ok(())
    }
}

/// Read the loss series back from a trace CSV.
pub fn read_trace_csv(path: &std::path::Path) -> Result<Vec<RoundRecord>> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut rows = Vec::new();
    for record in reader.deserialize() {
        rows.push(record?);
    }
    Ok(rows)
}
