//! Execution of the hierarchical quantized training loop and its two
//! degenerate baselines.
//!
//! One cloud round runs, per edge: `tau2` edge rounds, each of which has
//! every member client take `tau1` local SGD steps from the edge model and
//! upload its quantized model delta; the edge averages the uploads into its
//! model. After `tau2` edge rounds each edge uploads its quantized
//! accumulated delta and the cloud combines them with client-count
//! proportional (or uniform) coefficients.
//!
//! Reproducibility contract: every stochastic event draws from a stream
//! keyed by `(seed, event kind, ids, round indices)`, client updates are
//! reduced in client-id order, and edge updates in edge-id order. Traces are
//! therefore byte-identical across thread counts.
//!
//! Deltas are accumulated additively (`delta -= eta * g` per step,
//! `edge_delta += increment` per edge round) rather than recovered by
//! subtracting endpoint models; with identity quantizers and degenerate
//! intervals the loop then reduces bit-exactly to FedAvg and to plain SGD.
//! The baselines [`run_fedavg`] and [`run_sgd`] are written as their own
//! loops so those reductions are a real check of the nested loop structure,
//! and they emit the engine's degenerate-case wall-clock and bit accounting
//! so full traces are directly comparable.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bound::{compute_g, BoundParams};
use crate::error::{Error, Result};
use crate::latency::{quantized_payload_bits, round_seconds, LatencyModel};
use crate::model::LossModel;
use crate::quantizer::{quantize, variance_factor, QuantizerSpec};
use crate::rng::{RngStream, StreamLabel};
use crate::topology::{EdgeWeighting, Topology};
use crate::trace::{DivergenceReport, RoundRecord, RunTrace};
use crate::vector::{add_assign, add_scaled, check_dim, check_finite, norm_sq, ParamVector};

/// Bits assumed per full-precision parameter when sizing uploads.
pub const FULL_PRECISION_BITS_PER_PARAM: u64 = 32;

/// Model norm above which a run is declared divergent.
const DIVERGENCE_NORM: f64 = 1e12;

/// Aggregation intervals, round budget and step-size schedule.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Schedule {
    /// Client-edge aggregation interval (local steps per edge round).
    pub tau1: u32,
    /// Edge-cloud aggregation interval (edge rounds per cloud round).
    pub tau2: u32,
    /// Number of cloud rounds to run (fewer if a wall-clock budget stops the run).
    pub cloud_rounds: u32,
    /// Initial step size.
    pub eta0: f64,
    /// Per-epoch exponential decay factor in (0, 1]; 1 disables decay.
    pub eta_decay: f64,
    /// Local iterations that constitute one epoch for the decay; 0 disables decay.
    pub iters_per_epoch: u64,
}

impl Schedule {
    pub fn validate(&self) -> Result<()> {
        if self.tau1 == 0 || self.tau2 == 0 || self.cloud_rounds == 0 {
            return Err(Error::Config(
                "tau1, tau2 and cloud_rounds must be positive".into(),
            ));
        }
        if self.eta0 <= 0.0 || !self.eta0.is_finite() {
            return Err(Error::Config("eta0 must be positive".into()));
        }
        if self.eta_decay.is_nan() || self.eta_decay <= 0.0 || self.eta_decay > 1.0 {
            return Err(Error::Config("eta_decay must lie in (0, 1]".into()));
        }
        Ok(())
    }

    /// Step size at global local-iteration index `t`.
    pub fn eta_at(&self, t: u64) -> f64 {
        if self.eta_decay == 1.0 || self.iters_per_epoch == 0 {
            return self.eta0;
        }
        let epoch = (t / self.iters_per_epoch).min(i32::MAX as u64) as i32;
        self.eta0 * self.eta_decay.powi(epoch)
    }
}

/// Full configuration of a hierarchical run.
#[derive(Clone, Debug)]
pub struct EngineConfig {
    pub topology: Topology,
    pub model: LossModel,
    pub schedule: Schedule,
    /// Client-to-edge upload quantizer.
    pub q1: QuantizerSpec,
    /// Edge-to-cloud upload quantizer.
    pub q2: QuantizerSpec,
    pub weighting: EdgeWeighting,
    pub seed: u64,
    pub init: ParamVector,
    pub latency: LatencyModel,
    /// Stop before a round that would exceed this cumulative wall-clock.
    pub wall_clock_budget_seconds: Option<f64>,
    /// Worker threads for client simulation; 0 uses the ambient rayon pool.
    pub workers: usize,
    /// Retain the cloud iterate at every row (for analysis/tests).
    pub keep_models: bool,
    /// Record the per-round distance to the unquantized virtual aggregate.
    pub diagnostics: bool,
}

impl EngineConfig {
    pub fn validate(&self) -> Result<()> {
        self.schedule.validate()?;
        self.latency.validate()?;
        self.q1.validate()?;
        self.q2.validate()?;
        let dim = self.model.dim();
        if self.topology.clients() != self.model.clients() {
            return Err(Error::Config(format!(
                "topology has {} clients but the model has {}",
                self.topology.clients(),
                self.model.clients()
            )));
        }
        for (name, d) in [("q1", self.q1.dim()), ("q2", self.q2.dim())] {
            if d != dim {
                return Err(Error::Config(format!(
                    "{name} dimension {d} does not match the model dimension {dim}"
                )));
            }
        }
        check_dim(dim, &self.init)?;
        check_finite("initial model", &self.init)?;
        if let Some(b) = self.wall_clock_budget_seconds {
            if b.is_nan() || b <= 0.0 {
                return Err(Error::Config("wall-clock budget must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Uplink bits one cloud round costs: `n tau2` client uploads plus `s` edge
/// uploads at the quantizers' serialized sizes.
pub fn round_uplink_bits(cfg: &EngineConfig) -> u64 {
    let full = FULL_PRECISION_BITS_PER_PARAM * cfg.model.dim() as u64;
    let p1 = quantized_payload_bits(&cfg.q1, full);
    let p2 = quantized_payload_bits(&cfg.q2, full);
    cfg.topology.clients() as u64 * cfg.schedule.tau2 as u64 * p1
        + cfg.topology.edges() as u64 * p2
}

/// Hook by which a controller adjusts the client-edge interval between
/// cloud rounds. The fixed engine uses the no-op implementation.
pub(crate) trait IntervalController: Send {
    fn wants_reported_loss(&self) -> bool {
        false
    }
    fn on_start(&mut self, _f0: f64, _eta0: f64) {}
    /// Called after each completed round; returns a new `tau1` to apply from
    /// the next round on, if any.
    fn after_round(&mut self, _ctx: &RoundContext) -> Result<Option<u32>> {
        Ok(None)
    }
}

pub(crate) struct RoundContext {
    pub wall_clock: f64,
    /// Average client-reported local training loss for this round.
    pub reported_loss: Option<f64>,
    pub eta_next: f64,
}

struct FixedController;

impl IntervalController for FixedController {}

/// Run the full hierarchical quantized loop.
pub fn run_hier_local_qsgd(cfg: &EngineConfig) -> Result<RunTrace> {
    run_with_controller(cfg, &mut FixedController)
}

pub(crate) fn run_with_controller(
    cfg: &EngineConfig,
    ctrl: &mut dyn IntervalController,
) -> Result<RunTrace> {
    cfg.validate()?;
    if cfg.workers > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
        pool.install(|| run_inner(cfg, ctrl))
    } else {
        run_inner(cfg, ctrl)
    }
}

struct ClientUpdate {
    quantized_delta: ParamVector,
    local_loss: Option<f64>,
}

#[allow(clippy::too_many_arguments)]
fn client_round(
    cfg: &EngineConfig,
    client: u32,
    start: &[f64],
    tau1: u32,
    cloud_round: u32,
    edge_round: u32,
    t_base: u64,
    collect_loss: bool,
) -> Result<ClientUpdate> {
    let dim = start.len();
    let mut local = start.to_vec();
    let mut delta = vec![0.0; dim];
    for t1 in 0..tau1 {
        let eta = cfg.schedule.eta_at(t_base + t1 as u64);
        let mut rng = RngStream::derive(
            cfg.seed,
            StreamLabel::Gradient {
                client,
                cloud_round,
                edge_round,
                local_step: t1,
            },
        );
        let g = cfg
            .model
            .stochastic_gradient(client as usize, &local, &mut rng)?;
        for j in 0..dim {
            let step = eta * g[j];
            local[j] -= step;
            delta[j] -= step;
        }
    }
    let local_loss = if collect_loss {
        Some(cfg.model.local_loss(client as usize, &local)?)
    } else {
        None
    };
    let mut q_rng = RngStream::derive(
        cfg.seed,
        StreamLabel::ClientUpload {
            client,
            cloud_round,
            edge_round,
        },
    );
    let quantized_delta = quantize(&cfg.q1, &delta, &mut q_rng)?;
    Ok(ClientUpdate {
        quantized_delta,
        local_loss,
    })
}

struct RoundOutput {
    x_next: ParamVector,
    reported_loss: Option<f64>,
    quantization_error_sq: Option<f64>,
}

fn execute_round(
    cfg: &EngineConfig,
    weights: &[f64],
    x: &[f64],
    cloud_round: u32,
    tau1: u32,
    t_round_start: u64,
    collect_loss: bool,
) -> Result<RoundOutput> {
    let dim = x.len();
    let tau2 = cfg.schedule.tau2;
    let mut edge_deltas: Vec<ParamVector> = Vec::with_capacity(cfg.topology.edges());
    let mut loss_sum = 0.0;
    let mut loss_count = 0usize;

    for edge in 0..cfg.topology.edges() {
        let members = cfg.topology.members(edge);
        let inv_m = 1.0 / members.len() as f64;
        let mut edge_model = x.to_vec();
        let mut edge_delta = vec![0.0; dim];
        for t2 in 0..tau2 {
            let t_base = t_round_start + t2 as u64 * tau1 as u64;
            let collect_now = collect_loss && t2 == tau2 - 1;
            let updates: Result<Vec<ClientUpdate>> = members
                .par_iter()
                .map(|&client| {
                    client_round(cfg, client, &edge_model, tau1, cloud_round, t2, t_base, collect_now)
                })
                .collect();
            let updates = updates?;
            // Sum in client-id order, then scale once: the reduction order is
            // part of the determinism contract.
            let mut increment = vec![0.0; dim];
            for update in &updates {
                add_assign(&mut increment, &update.quantized_delta);
            }
            for v in increment.iter_mut() {
                *v *= inv_m;
            }
            add_assign(&mut edge_model, &increment);
            add_assign(&mut edge_delta, &increment);
            if collect_now {
                for update in &updates {
                    loss_sum += update.local_loss.expect("requested above");
                    loss_count += 1;
                }
            }
        }
        edge_deltas.push(edge_delta);
    }

    let mut streams: Vec<RngStream> = (0..cfg.topology.edges())
        .map(|edge| {
            RngStream::derive(
                cfg.seed,
                StreamLabel::EdgeUpload {
                    edge: edge as u32,
                    cloud_round,
                },
            )
        })
        .collect();
    let x_next = cloud_aggregate(x, &edge_deltas, weights, &cfg.q2, &mut streams)?;
    let quantization_error_sq = if cfg.diagnostics {
        let virtual_x = virtual_unquantized_state(x, &edge_deltas, weights)?;
        Some(norm_sq(&crate::vector::sub(&x_next, &virtual_x)))
    } else {
        None
    };
    Ok(RoundOutput {
        x_next,
        reported_loss: (loss_count > 0).then(|| loss_sum / loss_count as f64),
        quantization_error_sq,
    })
}

fn run_inner(cfg: &EngineConfig, ctrl: &mut dyn IntervalController) -> Result<RunTrace> {
    let weights = cfg.topology.weights(cfg.weighting);
    check_cloud_weights(&weights)?;

    let constants = cfg.model.constants();
    let g_value = compute_g(&BoundParams {
        l: constants.l,
        eta: cfg.schedule.eta0,
        sigma2: constants.sigma2,
        n: cfg.topology.clients() as u32,
        s: cfg.topology.edges() as u32,
        tau1: cfg.schedule.tau1,
        tau2: cfg.schedule.tau2,
        q1: variance_factor(&cfg.q1),
        q2: variance_factor(&cfg.q2),
        k: cfg.schedule.cloud_rounds,
        f0: 0.0,
        f_star: 0.0,
    });
    let mut warnings = Vec::new();
    if g_value < 0.0 {
        warnings.push(format!(
            "feasibility constant G = {g_value:.6} is negative; the convergence bound does not apply to this configuration"
        ));
    }

    let mut x = cfg.init.clone();
    let round_bits = round_uplink_bits(cfg);
    let collect_loss = ctrl.wants_reported_loss();

    let mut tau1 = cfg.schedule.tau1;
    let mut t_total: u64 = 0;
    // Piecewise-multiplicative wall clock: exact k * round_seconds while the
    // schedule is unchanged, re-based when the controller adjusts tau1.
    let mut wall_base = 0.0f64;
    let mut rounds_since_base = 0u32;
    let mut secs_per_round = round_seconds(tau1, cfg.schedule.tau2, &cfg.latency);
    let mut wall;

    let mut trace = RunTrace {
        models: cfg.keep_models.then(Vec::new),
        quantization_error_sq: cfg.diagnostics.then(Vec::new),
        reported_loss: collect_loss.then(Vec::new),
        g_value: Some(g_value),
        warnings,
        ..Default::default()
    };

    let push_row = |trace: &mut RunTrace,
                    x: &[f64],
                    k: u32,
                    t_total: u64,
                    wall: f64,
                    tau1: u32,
                    bits: u64,
                    cfg: &EngineConfig|
     -> Result<()> {
        let loss = cfg.model.global_loss(x)?;
        let grad = cfg.model.global_gradient(x)?;
        trace.rows.push(RoundRecord {
            k,
            t_total,
            wall_clock_s: wall,
            loss,
            grad_norm_sq: norm_sq(&grad),
            tau1,
            tau2: cfg.schedule.tau2,
            eta: cfg.schedule.eta_at(t_total),
            uplink_bits: bits,
        });
        if let Some(models) = trace.models.as_mut() {
            models.push(x.to_vec());
        }
        Ok(())
    };

    push_row(&mut trace, &x, 0, 0, 0.0, tau1, 0, cfg)?;
    ctrl.on_start(trace.rows[0].loss, trace.rows[0].eta);

    for k in 0..cfg.schedule.cloud_rounds {
        if let Some(budget) = cfg.wall_clock_budget_seconds {
            let projected = wall_base + (rounds_since_base + 1) as f64 * secs_per_round;
            if projected > budget {
                break;
            }
        }

        let out = match execute_round(cfg, &weights, &x, k, tau1, t_total, collect_loss) {
            Ok(out) => out,
            Err(Error::NonFiniteInput(_)) => {
                trace.divergence = Some(DivergenceReport {
                    round: k,
                    reason: "non-finite model update".into(),
                });
                break;
            }
            Err(e) => return Err(e),
        };
        if let Some(report) = check_state(&out.x_next, k) {
            trace.divergence = Some(report);
            break;
        }
        x = out.x_next;

        rounds_since_base += 1;
        wall = wall_base + rounds_since_base as f64 * secs_per_round;
        t_total += tau1 as u64 * cfg.schedule.tau2 as u64;
        let bits = (k as u64 + 1) * round_bits;

        if let Some(diag) = trace.quantization_error_sq.as_mut() {
            diag.push(out.quantization_error_sq.expect("diagnostics enabled"));
        }
        if let Some(reported) = trace.reported_loss.as_mut() {
            reported.push(out.reported_loss.expect("loss collection enabled"));
        }

        let ctx = RoundContext {
            wall_clock: wall,
            reported_loss: out.reported_loss,
            eta_next: cfg.schedule.eta_at(t_total),
        };
        if let Some(new_tau1) = ctrl.after_round(&ctx)? {
            if new_tau1 == 0 {
                return Err(Error::Config("controller produced tau1 = 0".into()));
            }
            if new_tau1 != tau1 {
                tau1 = new_tau1;
                wall_base = wall;
                rounds_since_base = 0;
                secs_per_round = round_seconds(tau1, cfg.schedule.tau2, &cfg.latency);
            }
        }

        push_row(&mut trace, &x, k + 1, t_total, wall, tau1, bits, cfg)?;
    }

    trace.final_model = x;
    Ok(trace)
}

fn check_state(x: &[f64], round: u32) -> Option<DivergenceReport> {
    if x.iter().any(|v| !v.is_finite()) {
        return Some(DivergenceReport {
            round,
            reason: "non-finite model update".into(),
        });
    }
    if norm_sq(x) > DIVERGENCE_NORM * DIVERGENCE_NORM {
        return Some(DivergenceReport {
            round,
            reason: "model norm exceeded divergence threshold".into(),
        });
    }
    None
}

fn check_cloud_weights(weights: &[f64]) -> Result<()> {
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > 1e-12 {
        return Err(Error::Config(format!(
            "cloud aggregation weights sum to {sum}, expected 1"
        )));
    }
    Ok(())
}

/// Edge aggregation: `u + (1/m) sum_i Q1(delta_i)`, with one quantization
/// stream per client and the sum taken in client order.
pub fn edge_aggregate(
    u: &[f64],
    client_deltas: &[ParamVector],
    q1: &QuantizerSpec,
    streams: &mut [RngStream],
) -> Result<ParamVector> {
    if client_deltas.is_empty() || client_deltas.len() != streams.len() {
        return Err(Error::Config(
            "need one delta and one stream per client".into(),
        ));
    }
    let dim = u.len();
    let inv_m = 1.0 / client_deltas.len() as f64;
    let mut increment = vec![0.0; dim];
    for (delta, stream) in client_deltas.iter().zip(streams.iter_mut()) {
        check_dim(dim, delta)?;
        let q = quantize(q1, delta, stream)?;
        add_assign(&mut increment, &q);
    }
    let mut out = u.to_vec();
    for (o, v) in out.iter_mut().zip(&increment) {
        *o += v * inv_m;
    }
    Ok(out)
}

/// Cloud aggregation: `x + sum_l w_l Q2(delta_l)`, edge order, with the
/// weight applied after quantization.
pub fn cloud_aggregate(
    x: &[f64],
    edge_deltas: &[ParamVector],
    weights: &[f64],
    q2: &QuantizerSpec,
    streams: &mut [RngStream],
) -> Result<ParamVector> {
    if edge_deltas.len() != weights.len() || edge_deltas.len() != streams.len() {
        return Err(Error::Config(
            "need one delta, weight and stream per edge".into(),
        ));
    }
    check_cloud_weights(weights)?;
    let dim = x.len();
    let mut acc = vec![0.0; dim];
    for ((delta, &w), stream) in edge_deltas.iter().zip(weights).zip(streams.iter_mut()) {
        check_dim(dim, delta)?;
        let q = quantize(q2, delta, stream)?;
        add_scaled(&mut acc, w, &q);
    }
    let mut out = x.to_vec();
    add_assign(&mut out, &acc);
    Ok(out)
}

/// The cloud aggregate with the edge-to-cloud quantizer skipped:
/// `x + sum_l w_l delta_l`. Diagnostic counterpart of [`cloud_aggregate`];
/// their squared distance is the edge-upload quantization error.
pub fn virtual_unquantized_state(
    x: &[f64],
    edge_deltas: &[ParamVector],
    weights: &[f64],
) -> Result<ParamVector> {
    if edge_deltas.len() != weights.len() {
        return Err(Error::Config("need one weight per edge delta".into()));
    }
    let dim = x.len();
    let mut acc = vec![0.0; dim];
    for (delta, &w) in edge_deltas.iter().zip(weights) {
        check_dim(dim, delta)?;
        add_scaled(&mut acc, w, delta);
    }
    let mut out = x.to_vec();
    add_assign(&mut out, &acc);
    Ok(out)
}

/// Two-layer FedAvg: every client takes `tau` local steps, a single server
/// averages the (optionally quantized) deltas with uniform `1/n` weights.
///
/// Stream labels and accounting match the hierarchical engine at the
/// degenerate tiering (one edge holding all clients, one edge round per
/// cloud round, identity edge-to-cloud quantizer), so the engine reduces to
/// this loop bit-exactly under that configuration.
#[derive(Clone, Debug)]
pub struct FedAvgConfig {
    pub model: LossModel,
    pub tau: u32,
    pub rounds: u32,
    pub eta0: f64,
    pub eta_decay: f64,
    pub iters_per_epoch: u64,
    pub quantizer: QuantizerSpec,
    pub seed: u64,
    pub init: ParamVector,
    pub latency: LatencyModel,
    pub keep_models: bool,
}

pub fn run_fedavg(cfg: &FedAvgConfig) -> Result<RunTrace> {
    let schedule = Schedule {
        tau1: cfg.tau,
        tau2: 1,
        cloud_rounds: cfg.rounds,
        eta0: cfg.eta0,
        eta_decay: cfg.eta_decay,
        iters_per_epoch: cfg.iters_per_epoch,
    };
    schedule.validate()?;
    cfg.latency.validate()?;
    cfg.quantizer.validate()?;
    let dim = cfg.model.dim();
    let n = cfg.model.clients();
    check_dim(dim, &cfg.init)?;
    check_finite("initial model", &cfg.init)?;
    if cfg.quantizer.dim() != dim {
        return Err(Error::Config("quantizer dimension mismatch".into()));
    }

    let full = FULL_PRECISION_BITS_PER_PARAM * dim as u64;
    let round_bits = n as u64 * quantized_payload_bits(&cfg.quantizer, full)
        + quantized_payload_bits(&QuantizerSpec::Identity { dim }, full);
    let secs_per_round = round_seconds(cfg.tau, 1, &cfg.latency);
    let inv_n = 1.0 / n as f64;

    let mut trace = RunTrace {
        models: cfg.keep_models.then(Vec::new),
        ..Default::default()
    };
    let mut x = cfg.init.clone();

    let push_row = |trace: &mut RunTrace, x: &[f64], k: u32| -> Result<()> {
        let loss = cfg.model.global_loss(x)?;
        let grad = cfg.model.global_gradient(x)?;
        let t_total = k as u64 * cfg.tau as u64;
        trace.rows.push(RoundRecord {
            k,
            t_total,
            wall_clock_s: k as f64 * secs_per_round,
            loss,
            grad_norm_sq: norm_sq(&grad),
            tau1: cfg.tau,
            tau2: 1,
            eta: schedule.eta_at(t_total),
            uplink_bits: k as u64 * round_bits,
        });
        if let Some(models) = trace.models.as_mut() {
            models.push(x.to_vec());
        }
        Ok(())
    };
    push_row(&mut trace, &x, 0)?;

    for k in 0..cfg.rounds {
        let t_base = k as u64 * cfg.tau as u64;
        let mut increment = vec![0.0; dim];
        let mut failed = false;
        for client in 0..n as u32 {
            let mut local = x.clone();
            let mut delta = vec![0.0; dim];
            for t1 in 0..cfg.tau {
                let eta = schedule.eta_at(t_base + t1 as u64);
                let mut rng = RngStream::derive(
                    cfg.seed,
                    StreamLabel::Gradient {
                        client,
                        cloud_round: k,
                        edge_round: 0,
                        local_step: t1,
                    },
                );
                let g = cfg.model.stochastic_gradient(client as usize, &local, &mut rng)?;
                for j in 0..dim {
                    let step = eta * g[j];
                    local[j] -= step;
                    delta[j] -= step;
                }
            }
            let mut q_rng = RngStream::derive(
                cfg.seed,
                StreamLabel::ClientUpload {
                    client,
                    cloud_round: k,
                    edge_round: 0,
                },
            );
            match quantize(&cfg.quantizer, &delta, &mut q_rng) {
                Ok(q) => add_assign(&mut increment, &q),
                Err(Error::NonFiniteInput(_)) => {
                    failed = true;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if failed {
            trace.divergence = Some(DivergenceReport {
                round: k,
                reason: "non-finite model update".into(),
            });
            break;
        }
        for (xj, inc) in x.iter_mut().zip(&increment) {
            *xj += inc * inv_n;
        }
        if let Some(report) = check_state(&x, k) {
            trace.divergence = Some(report);
            break;
        }
        push_row(&mut trace, &x, k + 1)?;
    }

    trace.final_model = x;
    Ok(trace)
}

/// Plain single-worker SGD, the innermost baseline of the reduction chain.
/// Uses the same gradient stream labels as the engine's client 0 with
/// one-step rounds, and the engine's degenerate accounting (n = s = 1,
/// identity quantizers).
#[derive(Clone, Debug)]
pub struct SgdConfig {
    pub model: LossModel,
    pub client: usize,
    pub iterations: u32,
    pub eta0: f64,
    pub eta_decay: f64,
    pub iters_per_epoch: u64,
    pub seed: u64,
    pub init: ParamVector,
    pub latency: LatencyModel,
    pub keep_models: bool,
}

pub fn run_sgd(cfg: &SgdConfig) -> Result<RunTrace> {
    let schedule = Schedule {
        tau1: 1,
        tau2: 1,
        cloud_rounds: cfg.iterations,
        eta0: cfg.eta0,
        eta_decay: cfg.eta_decay,
        iters_per_epoch: cfg.iters_per_epoch,
    };
    schedule.validate()?;
    cfg.latency.validate()?;
    let dim = cfg.model.dim();
    check_dim(dim, &cfg.init)?;
    check_finite("initial model", &cfg.init)?;

    let full = FULL_PRECISION_BITS_PER_PARAM * dim as u64;
    let round_bits = 2 * full;
    let secs_per_round = round_seconds(1, 1, &cfg.latency);

    let mut trace = RunTrace {
        models: cfg.keep_models.then(Vec::new),
        ..Default::default()
    };
    let mut x = cfg.init.clone();

    let push_row = |trace: &mut RunTrace, x: &[f64], k: u32| -> Result<()> {
        let loss = cfg.model.global_loss(x)?;
        let grad = cfg.model.global_gradient(x)?;
        trace.rows.push(RoundRecord {
            k,
            t_total: k as u64,
            wall_clock_s: k as f64 * secs_per_round,
            loss,
            grad_norm_sq: norm_sq(&grad),
            tau1: 1,
            tau2: 1,
            eta: schedule.eta_at(k as u64),
            uplink_bits: k as u64 * round_bits,
        });
        if let Some(models) = trace.models.as_mut() {
            models.push(x.to_vec());
        }
        Ok(())
    };
    push_row(&mut trace, &x, 0)?;

    for t in 0..cfg.iterations {
        let eta = schedule.eta_at(t as u64);
        let mut rng = RngStream::derive(
            cfg.seed,
            StreamLabel::Gradient {
                client: cfg.client as u32,
                cloud_round: t,
                edge_round: 0,
                local_step: 0,
            },
        );
        let g = cfg.model.stochastic_gradient(cfg.client, &x, &mut rng)?;
        x = crate::model::sgd_step(&x, &g, eta);
        if let Some(report) = check_state(&x, t) {
            trace.divergence = Some(report);
            break;
        }
        push_row(&mut trace, &x, t + 1)?;
    }

    trace.final_model = x;
    Ok(trace)
}
