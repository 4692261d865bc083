//! Unbiased random compressors for model updates.
//!
//! Every compressor `Q` here is unbiased, `E[Q(x)] = x`, with variance
//! bounded by a known factor of the input norm:
//! `E||Q(x) - x||^2 <= q ||x||^2`. The factor `q` drives the convergence
//! bound, so [`variance_factor`] must return the tightest known value and
//! [`certify`] checks both properties empirically on caller-supplied probes.
//!
//! Two compressors are provided besides the identity:
//!
//! * random sparsification: keep `r` of `d` coordinates uniformly at random
//!   and rescale by `d/r`; `q = d/r - 1` exactly, for every input.
//! * stochastic rounding: round each normalized magnitude `|x_i|/||x||` to
//!   one of `levels + 1` grid points, choosing between the two neighbours
//!   with probabilities that preserve the mean; `q <= min(d/levels^2,
//!   sqrt(d)/levels)`, the standard bound for this scheme.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{RngStream, StreamLabel};
use crate::vector::{check_dim, check_finite, norm_sq, ParamVector};

/// A compressor definition together with its parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum QuantizerSpec {
    /// Pass-through; `q = 0`.
    Identity { dim: usize },
    /// Keep `r` coordinates chosen uniformly without replacement, scaled by `dim/r`.
    RandomSparsification { dim: usize, r: usize },
    /// Norm-scaled stochastic rounding with `levels >= 1` grid intervals.
    StochasticRounding { dim: usize, levels: u32 },
}

impl QuantizerSpec {
    pub fn dim(&self) -> usize {
        match *self {
            QuantizerSpec::Identity { dim }
            | QuantizerSpec::RandomSparsification { dim, .. }
            | QuantizerSpec::StochasticRounding { dim, .. } => dim,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            QuantizerSpec::Identity { dim } => {
                if dim == 0 {
                    return Err(Error::Config("quantizer dim must be positive".into()));
                }
            }
            QuantizerSpec::RandomSparsification { dim, r } => {
                if dim == 0 {
                    return Err(Error::Config("quantizer dim must be positive".into()));
                }
                if r == 0 || r > dim {
                    return Err(Error::Config(format!(
                        "sparsification requires 1 <= r <= dim, got r={r}, dim={dim}"
                    )));
                }
            }
            QuantizerSpec::StochasticRounding { dim, levels } => {
                if dim == 0 {
                    return Err(Error::Config("quantizer dim must be positive".into()));
                }
                if levels == 0 {
                    return Err(Error::Config("stochastic rounding requires levels >= 1".into()));
                }
            }
        }
        Ok(())
    }

    /// Convenience for a sign-magnitude `bits` budget: one sign bit plus
    /// `bits - 1` magnitude bits, i.e. `levels = 2^(bits-1)`.
    pub fn rounding_from_bits(dim: usize, bits: u32) -> Result<Self> {
        if bits == 0 || bits > 32 {
            return Err(Error::Config(format!("rounding bits must be in 1..=32, got {bits}")));
        }
        Ok(QuantizerSpec::StochasticRounding {
            dim,
            levels: 1u32 << (bits - 1),
        })
    }
}

/// The tightest known `q` with `E||Q(x) - x||^2 <= q ||x||^2` for all `x`.
pub fn variance_factor(spec: &QuantizerSpec) -> f64 {
    match *spec {
        QuantizerSpec::Identity { .. } => 0.0,
        QuantizerSpec::RandomSparsification { dim, r } => dim as f64 / r as f64 - 1.0,
        QuantizerSpec::StochasticRounding { dim, levels } => {
            let d = dim as f64;
            let s = levels as f64;
            (d / (s * s)).min(d.sqrt() / s)
        }
    }
}

/// One random draw of `Q(x)`.
pub fn quantize(spec: &QuantizerSpec, x: &[f64], rng: &mut RngStream) -> Result<ParamVector> {
    spec.validate()?;
    check_dim(spec.dim(), x)?;
    check_finite("quantizer input", x)?;
    match *spec {
        QuantizerSpec::Identity { .. } => Ok(x.to_vec()),
        QuantizerSpec::RandomSparsification { dim, r } => Ok(sparsify(x, dim, r, rng)),
        QuantizerSpec::StochasticRounding { levels, .. } => Ok(round_stochastic(x, levels, rng)),
    }
}

fn sparsify(x: &[f64], dim: usize, r: usize, rng: &mut RngStream) -> ParamVector {
    let scale = dim as f64 / r as f64;
    // Partial Fisher-Yates: the first r slots end up a uniform r-subset.
    let mut idx: Vec<usize> = (0..dim).collect();
    for i in 0..r {
        let j = rng.random_range(i..dim);
        idx.swap(i, j);
    }
    let mut out = vec![0.0; dim];
    for &p in &idx[..r] {
        out[p] = scale * x[p];
    }
    out
}

fn round_stochastic(x: &[f64], levels: u32, rng: &mut RngStream) -> ParamVector {
    let norm = norm_sq(x).sqrt();
    if norm == 0.0 {
        // Zero input is defined to map to zero.
        return vec![0.0; x.len()];
    }
    let s = levels as f64;
    x.iter()
        .map(|&v| {
            let a = (v.abs() / norm).min(1.0);
            let scaled = a * s;
            let lower = scaled.floor();
            let level = if lower >= s {
                s
            } else {
                let p = scaled - lower;
                let u: f64 = rng.random();
                if u < p {
                    lower + 1.0
                } else {
                    lower
                }
            };
            v.signum() * norm * (level / s)
        })
        .collect()
}

/// Tolerances for [`certify`]. Defaults match the documented slack:
/// a 4-sigma Monte-Carlo confidence band on the mean and 5% slack on the
/// variance ratio.
#[derive(Clone, Copy, Debug)]
pub struct CertifyOptions {
    pub sigma_multiplier: f64,
    pub variance_slack: f64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            sigma_multiplier: 4.0,
            variance_slack: 0.05,
        }
    }
}

/// Per-probe certification outcome.
#[derive(Clone, Debug, Serialize)]
pub struct ProbeReport {
    pub probe: usize,
    /// `|| mean(Q(x)) - x ||` over all draws.
    pub mean_deviation: f64,
    /// The Monte-Carlo confidence limit the deviation is held against.
    pub mean_deviation_limit: f64,
    /// Empirical `E||Q(x)-x||^2 / ||x||^2`; `None` for the zero probe.
    pub variance_ratio: Option<f64>,
    pub variance_limit: f64,
    /// For the zero probe: whether every draw returned exactly zero.
    pub zero_output_ok: Option<bool>,
    pub pass: bool,
}

/// Result of an empirical unbiasedness/variance certification.
#[derive(Clone, Debug, Serialize)]
pub struct CertificationReport {
    pub spec: QuantizerSpec,
    pub q_bound: f64,
    pub draws: usize,
    pub probes: Vec<ProbeReport>,
    pub pass: bool,
}

/// Empirically check unbiasedness and the variance bound on a set of probes.
///
/// For each probe `x` the componentwise mean over `draws` samples is compared
/// against `x` at the configured sigma multiple, and the empirical variance
/// ratio against `variance_factor(spec) * (1 + slack)`. A zero probe is
/// skipped for the ratio (it divides by zero) and instead must quantize to
/// exactly zero on every draw.
pub fn certify(
    spec: &QuantizerSpec,
    probes: &[ParamVector],
    draws: usize,
    seed: u64,
    opts: CertifyOptions,
) -> Result<CertificationReport> {
    spec.validate()?;
    if draws < 10_000 {
        return Err(Error::Config(format!(
            "certification needs at least 10000 draws, got {draws}"
        )));
    }
    let dim = spec.dim();
    let q_bound = variance_factor(spec);
    let mut reports = Vec::with_capacity(probes.len());
    for (pi, probe) in probes.iter().enumerate() {
        check_dim(dim, probe)?;
        check_finite("certification probe", probe)?;
        let mut rng = RngStream::derive(seed, StreamLabel::Probe { index: pi as u32 });
        let probe_norm_sq = norm_sq(probe);
        let mut sum = vec![0.0f64; dim];
        let mut sum_sq = vec![0.0f64; dim];
        let mut err_sq_total = 0.0f64;
        let mut all_zero = true;
        for _ in 0..draws {
            let drawn = quantize(spec, probe, &mut rng)?;
            for j in 0..dim {
                let v = drawn[j];
                sum[j] += v;
                sum_sq[j] += v * v;
                let e = v - probe[j];
                err_sq_total += e * e;
                if v != 0.0 {
                    all_zero = false;
                }
            }
        }
        let m = draws as f64;
        let mut dev_sq = 0.0;
        let mut var_of_mean = 0.0;
        for j in 0..dim {
            let mean = sum[j] / m;
            let d = mean - probe[j];
            dev_sq += d * d;
            let var = (sum_sq[j] - sum[j] * sum[j] / m).max(0.0) / (m - 1.0);
            var_of_mean += var / m;
        }
        let mean_deviation = dev_sq.sqrt();
        let mean_deviation_limit = opts.sigma_multiplier * var_of_mean.sqrt();
        let variance_limit = q_bound * (1.0 + opts.variance_slack);

        let report = if probe_norm_sq == 0.0 {
            ProbeReport {
                probe: pi,
                mean_deviation,
                mean_deviation_limit,
                variance_ratio: None,
                variance_limit,
                zero_output_ok: Some(all_zero),
                pass: all_zero,
            }
        } else {
            let ratio = err_sq_total / m / probe_norm_sq;
            let pass = mean_deviation <= mean_deviation_limit && ratio <= variance_limit;
            ProbeReport {
                probe: pi,
                mean_deviation,
                mean_deviation_limit,
                variance_ratio: Some(ratio),
                variance_limit,
                zero_output_ok: None,
                pass,
            }
        };
        reports.push(report);
    }
    let pass = reports.iter().all(|r| r.pass);
    Ok(CertificationReport {
        spec: *spec,
        q_bound,
        draws,
        probes: reports,
        pass,
    })
}

/// Default probe set for certification: a constant vector, a basis vector,
/// a seeded Gaussian draw, and the zero vector.
pub fn default_probes(dim: usize, seed: u64) -> Vec<ParamVector> {
    let mut gaussian = vec![0.0; dim];
    let mut rng = RngStream::derive(seed, StreamLabel::DataGeneration { stage: u32::MAX });
    for v in gaussian.iter_mut() {
        *v = rng.sample(rand_distr::StandardNormal);
    }
    let mut basis = vec![0.0; dim];
    basis[0] = 1.0;
    vec![vec![1.0; dim], basis, gaussian, vec![0.0; dim]]
}
