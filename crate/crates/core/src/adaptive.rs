//! Adaptive aggregation-interval selection.
//!
//! The edge-cloud interval is fixed up front from the delay ratio; the
//! client-edge interval shrinks with the training loss. Training is split
//! into wall-clock windows of length `T0`: at the first cloud round whose
//! cumulative wall-clock crosses a window boundary, the controller collects
//! the average client-reported local training loss and sets
//!
//! ```text
//! tau1 = ceil( sqrt(f_now / f_0) * tau1_0 )
//! ```
//!
//! scaled additionally by `sqrt(eta_0 / eta_now)` when the step size decays.
//! The rule is scale-free in loss units and always returns at least 1.
//! Updates land on cloud-round boundaries because the engine cannot change
//! the interval mid-round.

use serde::{Deserialize, Serialize};

use crate::engine::{run_with_controller, EngineConfig, IntervalController, RoundContext};
use crate::error::{Error, Result};
use crate::trace::RunTrace;

/// Settings for an adaptive run.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct AdaptiveSettings {
    /// Predefined interval for the first window.
    pub tau1_initial: u32,
    /// Wall-clock window length `T0` in seconds.
    pub window_seconds: f64,
    /// Use the decay-aware rule (automatically sensible when the schedule
    /// decays eta; harmless otherwise).
    pub use_decay_rule: bool,
    /// When false the controller never updates, reproducing the fixed-interval
    /// engine exactly.
    pub enabled: bool,
}

impl AdaptiveSettings {
    pub fn validate(&self) -> Result<()> {
        if self.tau1_initial == 0 {
            return Err(Error::Config("tau1_initial must be positive".into()));
        }
        if self.window_seconds <= 0.0 || !self.window_seconds.is_finite() {
            return Err(Error::Config("window_seconds must be positive".into()));
        }
        Ok(())
    }
}

/// Fixed edge-cloud interval from the delay ratio:
/// `ceil( sqrt( (d_ec/d_de) * (1 - (1+q1)/(n/s)) / ((1+q1)/(n/s)) ) )`,
/// valid when `1 + q1 < n/s`.
pub fn tau2_from_delays(d_de: f64, d_ec: f64, n: u32, s: u32, q1: f64) -> Result<u32> {
    if d_de.is_nan() || d_de <= 0.0 || d_ec.is_nan() || d_ec <= 0.0 {
        return Err(Error::Config("delays must be positive".into()));
    }
    if n == 0 || s == 0 || n < s {
        return Err(Error::Config("need n >= s >= 1".into()));
    }
    let ratio = (1.0 + q1) / (n as f64 / s as f64);
    if ratio >= 1.0 {
        return Err(Error::ConditionViolated(format!(
            "tau2 rule needs 1 + q1 < n/s (got q1={q1}, n/s={}); choose tau2 manually",
            n as f64 / s as f64
        )));
    }
    let value = ((d_ec / d_de) * (1.0 - ratio) / ratio).sqrt().ceil();
    Ok((value as u32).max(1))
}

fn checked_ratio(name: &str, value: f64) -> Result<f64> {
    if value.is_nan() || value <= 0.0 || !value.is_finite() {
        return Err(Error::InvalidLoss(format!(
            "{name} must be positive and finite, got {value}"
        )));
    }
    Ok(value)
}

/// Loss-driven interval update: `ceil( sqrt(f_current/f0) * tau1_initial )`.
pub fn update_tau1(tau1_initial: u32, f0: f64, f_current: f64) -> Result<u32> {
    let f0 = checked_ratio("initial loss", f0)?;
    let f_current = checked_ratio("current loss", f_current)?;
    let value = ((f_current / f0).sqrt() * tau1_initial as f64).ceil();
    Ok((value as u32).max(1))
}

/// Decay-aware variant: `ceil( sqrt((eta0/eta_current) * (f_current/f0)) * tau1_initial )`.
pub fn update_tau1_with_decay(
    tau1_initial: u32,
    f0: f64,
    f_current: f64,
    eta0: f64,
    eta_current: f64,
) -> Result<u32> {
    let f0 = checked_ratio("initial loss", f0)?;
    let f_current = checked_ratio("current loss", f_current)?;
    let eta0 = checked_ratio("initial step size", eta0)?;
    let eta_current = checked_ratio("current step size", eta_current)?;
    let value = ((eta0 / eta_current) * (f_current / f0)).sqrt() * tau1_initial as f64;
    Ok((value.ceil() as u32).max(1))
}

/// Controller state across windows.
#[derive(Clone, Debug)]
pub struct AdaptState {
    pub tau1_initial: u32,
    pub f0: f64,
    pub eta0: f64,
    pub window_seconds: f64,
    pub window_index: u32,
    pub current_tau1: u32,
}

struct AdaptiveController {
    settings: AdaptiveSettings,
    state: AdaptState,
}

impl IntervalController for AdaptiveController {
    fn wants_reported_loss(&self) -> bool {
        true
    }

    fn on_start(&mut self, f0: f64, eta0: f64) {
        self.state.f0 = f0;
        self.state.eta0 = eta0;
    }

    fn after_round(&mut self, ctx: &RoundContext) -> Result<Option<u32>> {
        if !self.settings.enabled {
            return Ok(None);
        }
        let next_boundary = (self.state.window_index as f64 + 1.0) * self.state.window_seconds;
        if ctx.wall_clock < next_boundary {
            return Ok(None);
        }
        // Skip any windows this round straddled; the rule depends only on the
        // loss now, not on intermediate windows.
        self.state.window_index = (ctx.wall_clock / self.state.window_seconds) as u32;
        let loss = ctx.reported_loss.expect("reported loss requested");
        let new_tau1 = if self.settings.use_decay_rule {
            update_tau1_with_decay(
                self.state.tau1_initial,
                self.state.f0,
                loss,
                self.state.eta0,
                ctx.eta_next,
            )?
        } else {
            update_tau1(self.state.tau1_initial, self.state.f0, loss)?
        };
        self.state.current_tau1 = new_tau1;
        Ok(Some(new_tau1))
    }
}

/// Run the engine under windowed adaptive interval control. The trace's
/// `tau1` column records the interval in force per round, and
/// `reported_loss` the per-round average client-reported local loss.
pub fn run_adaptive(cfg: &EngineConfig, settings: &AdaptiveSettings) -> Result<RunTrace> {
    settings.validate()?;
    let mut cfg = cfg.clone();
    cfg.schedule.tau1 = settings.tau1_initial;
    let mut controller = AdaptiveController {
        settings: *settings,
        state: AdaptState {
            tau1_initial: settings.tau1_initial,
            f0: 0.0,
            eta0: cfg.schedule.eta0,
            window_seconds: settings.window_seconds,
            window_index: 0,
            current_tau1: settings.tau1_initial,
        },
    };
    run_with_controller(&cfg, &mut controller)
}
