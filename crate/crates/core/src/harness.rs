//! Experiment orchestration: sweeps, per-run outputs and summaries, and
//! grouped comparison of finished runs.
//!
//! A sweep executes the Cartesian product of its axes times the repetition
//! count. Every run gets its own seed derived from `(master seed, axis
//! coordinates, repetition)`, so appending values to an axis or raising the
//! repetition count never perturbs existing runs. Each run writes
//! `trace.csv` plus a `meta.json` sidecar carrying a standalone re-executable
//! config; the merged `summary.csv` is byte-identical across re-runs and
//! worker counts.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use crate::adaptive::run_adaptive;
use crate::config::{apply_sweep_value, ExperimentConfig};
use crate::engine::run_hier_local_qsgd;
use crate::error::{Error, Result};
use crate::rng::child_seed;
use crate::trace::{read_trace_csv, RunTrace};

const SWEEP_SEED_DOMAIN: u64 = 0x5357_4545_502d_5253;

/// One row of the experiment summary.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunSummary {
    pub point: usize,
    pub label: String,
    pub repetition: u32,
    pub seed: u64,
    pub final_loss: f64,
    pub final_grad_norm_sq: f64,
    pub wall_clock_s: f64,
    pub uplink_bits: u64,
    pub rounds: u32,
    pub diverged: bool,
}

/// All summaries of one experiment, in (point, repetition) order.
#[derive(Clone, Debug)]
pub struct ResultSet {
    pub summaries: Vec<RunSummary>,
    pub out_dir: PathBuf,
}

impl ResultSet {
    pub fn summary_csv(&self) -> Result<String> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        for row in &self.summaries {
            writer.serialize(row)?;
        }
        let bytes = writer.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// The sweep points of a config: every combination of axis value indices,
/// in row-major order, with a human-readable label each.
fn enumerate_points(cfg: &ExperimentConfig) -> Result<Vec<(Vec<usize>, ExperimentConfig, String)>> {
    for axis in &cfg.sweep {
        if axis.values.is_empty() {
            return Err(Error::Config(format!(
                "sweep axis {} has no values",
                axis.field
            )));
        }
    }
    let mut coords = vec![0usize; cfg.sweep.len()];
    let mut points = Vec::new();
    loop {
        let mut point_cfg = cfg.clone();
        point_cfg.sweep.clear();
        let mut labels = Vec::new();
        for (axis, &c) in cfg.sweep.iter().zip(&coords) {
            let value = &axis.values[c];
            apply_sweep_value(&mut point_cfg, &axis.field, value)?;
            labels.push(format!("{}={}", axis.field, value));
        }
        let label = if labels.is_empty() {
            "base".to_string()
        } else {
            labels.join(";")
        };
        points.push((coords.clone(), point_cfg, label));

        // Advance the mixed-radix counter.
        let mut i = coords.len();
        loop {
            if i == 0 {
                return Ok(points);
            }
            i -= 1;
            coords[i] += 1;
            if coords[i] < cfg.sweep[i].values.len() {
                break;
            }
            coords[i] = 0;
        }
    }
}

/// Derive the engine seed of a run from its sweep coordinates and repetition.
pub fn run_seed(master: u64, coords: &[usize], repetition: u32) -> u64 {
    let mut parts = vec![SWEEP_SEED_DOMAIN];
    parts.extend(coords.iter().map(|&c| c as u64));
    parts.push(repetition as u64);
    child_seed(master, &parts)
}

/// Execute one resolved point/repetition and return its trace.
pub fn execute_run(point_cfg: &ExperimentConfig, engine_seed: u64) -> Result<RunTrace> {
    let engine_cfg = point_cfg.resolve(engine_seed)?;
    match point_cfg.adaptive_settings() {
        Some(settings) => run_adaptive(&engine_cfg, &settings),
        None => run_hier_local_qsgd(&engine_cfg),
    }
}

fn summarize(trace: &RunTrace, point: usize, label: &str, repetition: u32, seed: u64) -> RunSummary {
    let last = trace.final_row();
    RunSummary {
        point,
        label: label.to_string(),
        repetition,
        seed,
        final_loss: last.map_or(f64::NAN, |r| r.loss),
        final_grad_norm_sq: last.map_or(f64::NAN, |r| r.grad_norm_sq),
        wall_clock_s: last.map_or(0.0, |r| r.wall_clock_s),
        uplink_bits: last.map_or(0, |r| r.uplink_bits),
        rounds: trace.rounds_completed(),
        diverged: trace.divergence.is_some(),
    }
}

#[derive(Serialize)]
struct RunMeta<'a> {
    label: &'a str,
    point: usize,
    repetition: u32,
    run_seed: u64,
    g_value: Option<f64>,
    warnings: &'a [String],
    divergence: &'a Option<crate::trace::DivergenceReport>,
    topology_sizes: Vec<usize>,
    /// Per-client sample counts for dataset-backed models.
    #[serde(skip_serializing_if = "Option::is_none")]
    partition_sizes: Option<Vec<usize>>,
    constants: crate::model::SmoothnessConstants,
    /// Re-running this config standalone reproduces the run byte-identically.
    standalone_config: ExperimentConfig,
}

/// Run the full sweep x repetitions grid, writing per-run directories and a
/// merged summary CSV under `out_dir`.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<ResultSet> {
    if cfg.repetitions == 0 {
        return Err(Error::Config("repetitions must be at least 1".into()));
    }
    let points = enumerate_points(cfg)?;
    std::fs::create_dir_all(out_dir)?;

    let mut jobs = Vec::new();
    for (pi, (coords, point_cfg, label)) in points.iter().enumerate() {
        for rep in 0..cfg.repetitions {
            jobs.push((pi, coords.clone(), point_cfg.clone(), label.clone(), rep));
        }
    }

    let summaries: Result<Vec<RunSummary>> = jobs
        .par_iter()
        .map(|(pi, coords, point_cfg, label, rep)| {
            let seed = run_seed(cfg.seed, coords, *rep);
            let trace = execute_run(point_cfg, seed)?;
            let run_dir = out_dir.join(format!("point{pi:03}_rep{rep:02}"));
            std::fs::create_dir_all(&run_dir)?;
            trace.write_csv(&run_dir.join("trace.csv"))?;

            let mut standalone = point_cfg.clone();
            standalone.repetitions = 1;
            standalone.engine_seed = Some(seed);
            let engine_cfg = point_cfg.resolve(seed)?;
            let partition_sizes = match &engine_cfg.model {
                crate::model::LossModel::Logistic(l) => {
                    Some(l.client_samples.iter().map(Vec::len).collect())
                }
                crate::model::LossModel::Quadratic(_) => None,
            };
            let meta = RunMeta {
                label,
                point: *pi,
                repetition: *rep,
                run_seed: seed,
                g_value: trace.g_value,
                warnings: &trace.warnings,
                divergence: &trace.divergence,
                topology_sizes: engine_cfg.topology.sizes(),
                partition_sizes,
                constants: engine_cfg.model.constants(),
                standalone_config: standalone,
            };
            std::fs::write(
                run_dir.join("meta.json"),
                serde_json::to_string_pretty(&meta)?,
            )?;
            Ok(summarize(&trace, *pi, label, *rep, seed))
        })
        .collect();
    let summaries = summaries?;

    let result = ResultSet {
        summaries,
        out_dir: out_dir.to_path_buf(),
    };
    std::fs::write(out_dir.join("summary.csv"), result.summary_csv()?)?;
    Ok(result)
}

/// A loss curve indexed by round or wall-clock.
#[derive(Clone, Debug)]
pub struct TraceSeries {
    pub xs: Vec<f64>,
    pub losses: Vec<f64>,
}

impl TraceSeries {
    pub fn from_csv(path: &Path, mode: CompareMode) -> Result<Self> {
        let rows = read_trace_csv(path)?;
        if rows.is_empty() {
            return Err(Error::Config(format!("empty trace: {}", path.display())));
        }
        let xs = rows
            .iter()
            .map(|r| match mode {
                CompareMode::Rounds => r.k as f64,
                CompareMode::WallClock => r.wall_clock_s,
            })
            .collect();
        Ok(TraceSeries {
            xs,
            losses: rows.iter().map(|r| r.loss).collect(),
        })
    }

    /// Loss at `x`, linearly interpolated; clamped at the ends. The flag
    /// reports whether interpolation (or clamping) was needed.
    fn value_at(&self, x: f64) -> (f64, bool) {
        match self
            .xs
            .binary_search_by(|probe| probe.partial_cmp(&x).expect("finite checkpoints"))
        {
            Ok(i) => (self.losses[i], false),
            Err(0) => (self.losses[0], true),
            Err(i) if i >= self.xs.len() => (*self.losses.last().expect("non-empty"), true),
            Err(i) => {
                let (x0, x1) = (self.xs[i - 1], self.xs[i]);
                let (y0, y1) = (self.losses[i - 1], self.losses[i]);
                let t = (x - x0) / (x1 - x0);
                (y0 + t * (y1 - y0), true)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CompareMode {
    Rounds,
    WallClock,
}

/// Mean and standard error of one group at one checkpoint.
#[derive(Clone, Debug, Serialize)]
pub struct ComparisonRow {
    pub checkpoint: f64,
    pub group: String,
    pub count: usize,
    pub mean_loss: f64,
    pub se_loss: f64,
    pub interpolated: bool,
}

/// Compare groups of runs at matched checkpoints. The checkpoint grid is the
/// coarsest trace's; other traces are interpolated onto it and the rows
/// flagged.
pub fn compare_groups(groups: &[(String, Vec<TraceSeries>)]) -> Result<Vec<ComparisonRow>> {
    let all: Vec<&TraceSeries> = groups.iter().flat_map(|(_, s)| s.iter()).collect();
    if all.is_empty() {
        return Err(Error::Config("nothing to compare".into()));
    }
    let grid = &all
        .iter()
        .min_by_key(|s| s.xs.len())
        .expect("non-empty")
        .xs;

    let mut rows = Vec::new();
    for &x in grid {
        for (name, series) in groups {
            let mut values = Vec::with_capacity(series.len());
            let mut interpolated = false;
            for s in series {
                let (v, interp) = s.value_at(x);
                values.push(v);
                interpolated |= interp;
            }
            let count = values.len();
            let mean = values.iter().sum::<f64>() / count as f64;
            let se = if count > 1 {
                let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
                    / (count as f64 - 1.0);
                (var / count as f64).sqrt()
            } else {
                0.0
            };
            rows.push(ComparisonRow {
                checkpoint: x,
                group: name.clone(),
                count,
                mean_loss: mean,
                se_loss: se,
                interpolated,
            });
        }
    }
    Ok(rows)
}

pub fn comparison_csv(rows: &[ComparisonRow]) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer.serialize(row)?;
    }
    let bytes = writer.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Collect the traces under a directory (recursively) or a single CSV file.
pub fn collect_traces(input: &Path, mode: CompareMode) -> Result<Vec<TraceSeries>> {
    if input.is_file() {
        return Ok(vec![TraceSeries::from_csv(input, mode)?]);
    }
    let mut paths = Vec::new();
    collect_trace_paths(input, &mut paths)?;
    paths.sort();
    if paths.is_empty() {
        return Err(Error::Config(format!(
            "no trace.csv found under {}",
            input.display()
        )));
    }
    paths
        .iter()
        .map(|p| TraceSeries::from_csv(p, mode))
        .collect()
}

fn collect_trace_paths(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    for entry in std::fs::read_dir(dir)? {
        let entry = entry?;
        let path = entry.path();
        if path.is_dir() {
            collect_trace_paths(&path, out)?;
        } else if path.file_name().is_some_and(|n| n == "trace.csv") {
            out.push(path);
        }
    }
    Ok(())
}
