//! Wall-clock accounting: computation and upload delays per aggregation round.
//!
//! The model counts uplink transfers only (downlink assumed free) and treats
//! all clients as homogeneous. One cloud round costs
//! `tau1 * tau2 * d_comp + tau2 * d_de + d_ec` seconds: every local step pays
//! the computation delay, every edge aggregation one client-to-edge upload,
//! and the round one edge-to-cloud upload.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantizer::QuantizerSpec;

/// Delay constants in seconds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatencyModel {
    /// Local computation time for one SGD iteration.
    pub d_comp_seconds: f64,
    /// Upload time of one quantized client-to-edge update.
    pub d_de_seconds: f64,
    /// Upload time of one quantized edge-to-cloud update.
    pub d_ec_seconds: f64,
}

impl LatencyModel {
    pub fn zero() -> Self {
        LatencyModel {
            d_comp_seconds: 0.0,
            d_de_seconds: 0.0,
            d_ec_seconds: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("d_comp_seconds", self.d_comp_seconds),
            ("d_de_seconds", self.d_de_seconds),
            ("d_ec_seconds", self.d_ec_seconds),
        ] {
            if v.is_nan() || v < 0.0 || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be non-negative, got {v}")));
            }
        }
        Ok(())
    }
}

/// Physical uplink/computation parameters from which delays are derived.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Full-precision payload in bits (the uploaded model size W).
    pub payload_bits: f64,
    /// Channel bandwidth in Hz.
    pub bandwidth_hz: f64,
    /// Dimensionless channel gain.
    pub channel_gain: f64,
    /// Transmit power in watts.
    pub transmit_power_watts: f64,
    /// Noise power in watts.
    pub noise_power_watts: f64,
    /// CPU cycles needed per bit of training data.
    pub cycles_per_bit: f64,
    /// Bits of data processed by one local iteration.
    pub bits_per_iteration: f64,
    /// CPU frequency in Hz.
    pub cpu_hz: f64,
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("payload_bits", self.payload_bits),
            ("bandwidth_hz", self.bandwidth_hz),
            ("channel_gain", self.channel_gain),
            ("transmit_power_watts", self.transmit_power_watts),
            ("noise_power_watts", self.noise_power_watts),
            ("cycles_per_bit", self.cycles_per_bit),
            ("bits_per_iteration", self.bits_per_iteration),
            ("cpu_hz", self.cpu_hz),
        ] {
            if v.is_nan() || v <= 0.0 || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Seconds for one cloud round.
pub fn round_seconds(tau1: u32, tau2: u32, m: &LatencyModel) -> f64 {
    (tau1 as f64) * (tau2 as f64) * m.d_comp_seconds
        + (tau2 as f64) * m.d_de_seconds
        + m.d_ec_seconds
}

/// Wall-clock seconds for `rounds` cloud rounds at a fixed schedule.
pub fn wall_clock(rounds: u32, tau1: u32, tau2: u32, m: &LatencyModel) -> f64 {
    rounds as f64 * round_seconds(tau1, tau2, m)
}

/// Upload time of a `payload_bits`-bit message over the channel:
/// `W / (B log2(1 + h p / N0))`.
pub fn comm_latency_seconds(ch: &ChannelParams, payload_bits: f64) -> f64 {
    let snr = ch.channel_gain * ch.transmit_power_watts / ch.noise_power_watts;
    payload_bits / (ch.bandwidth_hz * (1.0 + snr).log2())
}

/// Computation time of one local iteration: `c * D / f`.
pub fn comp_latency_seconds(ch: &ChannelParams) -> f64 {
    ch.cycles_per_bit * ch.bits_per_iteration / ch.cpu_hz
}

fn ceil_log2(k: u64) -> u32 {
    debug_assert!(k >= 1);
    if k <= 1 {
        0
    } else {
        64 - (k - 1).leading_zeros()
    }
}

/// Serialized size of one quantized update, in bits.
///
/// Sparsification ships `r` (index, value) pairs with `ceil(log2 dim)`-bit
/// indices and 32-bit values; keeping every coordinate can therefore exceed
/// the full-precision payload. Stochastic rounding ships one sign bit plus a
/// level code per coordinate and a single 32-bit norm scalar.
pub fn quantized_payload_bits(spec: &QuantizerSpec, full_bits: u64) -> u64 {
    const VALUE_BITS: u64 = 32;
    const NORM_BITS: u64 = 32;
    match *spec {
        QuantizerSpec::Identity { .. } => full_bits,
        QuantizerSpec::RandomSparsification { dim, r } => {
            (r as u64) * (u64::from(ceil_log2(dim as u64)) + VALUE_BITS)
        }
        QuantizerSpec::StochasticRounding { dim, levels } => {
            (dim as u64) * (1 + u64::from(ceil_log2(levels as u64 + 1))) + NORM_BITS
        }
    }
}

/// Derive the three delay constants from channel parameters: computation from
/// the CPU model, uploads from the channel applied to each quantizer's
/// payload, with the edge-cloud link slower by `ec_scale`.
pub fn delays_from_channel(
    ch: &ChannelParams,
    q1: &QuantizerSpec,
    q2: &QuantizerSpec,
    ec_scale: f64,
) -> Result<LatencyModel> {
    ch.validate()?;
    if ec_scale <= 0.0 || !ec_scale.is_finite() {
        return Err(Error::Config("ec_scale must be positive".into()));
    }
    let full = ch.payload_bits as u64;
    let m = LatencyModel {
        d_comp_seconds: comp_latency_seconds(ch),
        d_de_seconds: comm_latency_seconds(ch, quantized_payload_bits(q1, full) as f64),
        d_ec_seconds: ec_scale * comm_latency_seconds(ch, quantized_payload_bits(q2, full) as f64),
    };
    m.validate()?;
    Ok(m)
}
