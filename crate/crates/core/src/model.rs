//! Loss functions and stochastic-gradient oracles with known constants.
//!
//! Two loss kinds are supported. The quadratic kind has exactly known
//! smoothness constant `L` (the largest curvature entry) and gradient-noise
//! variance (the configured value), which makes the convergence bound
//! checkable with no estimation slack. The logistic kind is the realistic
//! counterpart: its `L` comes from the standard `||feature||^2 / 4` bound and
//! its gradient variance is computed at the zero-weight initial point and
//! flagged as an estimate.
//!
//! The global loss is the client-weighted average of the per-client losses
//! (uniform weights for quadratic clients, sample counts for logistic ones),
//! and both kinds are non-negative by construction, so zero is a valid lower
//! bound for the global loss.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{RngStream, StreamLabel};
use crate::vector::{check_dim, check_finite, norm_sq, ParamVector};

/// Smoothness/noise constants a loss model exposes for bound evaluation.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SmoothnessConstants {
    pub l: f64,
    pub sigma2: f64,
    pub f_star: f64,
    /// True when `sigma2` is an estimate at the initial point rather than an
    /// exact population value.
    pub sigma2_is_estimate: bool,
}

/// Per-client quadratic losses `f_i(x) = 1/2 (x - c_i)' A (x - c_i)` with a
/// shared diagonal curvature `A` and optional per-client centers.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuadraticModel {
    pub curvature: Vec<f64>,
    pub centers: Vec<ParamVector>,
    pub noise_sigma: f64,
    pub batch_size: u32,
}

impl QuadraticModel {
    pub fn new(
        curvature: Vec<f64>,
        centers: Vec<ParamVector>,
        noise_sigma: f64,
        batch_size: u32,
    ) -> Result<Self> {
        if curvature.is_empty() || curvature.iter().any(|&a| a.is_nan() || a <= 0.0 || !a.is_finite()) {
            return Err(Error::Config(
                "quadratic curvature must be positive and finite".into(),
            ));
        }
        if centers.is_empty() {
            return Err(Error::Config("at least one client center required".into()));
        }
        for c in &centers {
            check_dim(curvature.len(), c)?;
            check_finite("quadratic center", c)?;
        }
        if noise_sigma.is_nan() || noise_sigma < 0.0 || !noise_sigma.is_finite() {
            return Err(Error::Config("noise sigma must be non-negative".into()));
        }
        if batch_size == 0 {
            return Err(Error::Config("batch size must be positive".into()));
        }
        Ok(QuadraticModel {
            curvature,
            centers,
            noise_sigma,
            batch_size,
        })
    }

    /// IID helper: every client shares the same center.
    pub fn iid(curvature: Vec<f64>, center: ParamVector, clients: usize, noise_sigma: f64, batch_size: u32) -> Result<Self> {
        Self::new(curvature, vec![center; clients], noise_sigma, batch_size)
    }
}

/// Per-client logistic losses over a shared labeled dataset.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LogisticModel {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<u8>,
    /// Index sets into the dataset, one per client.
    pub client_samples: Vec<Vec<usize>>,
    pub ridge: f64,
    pub batch_size: u32,
}

impl LogisticModel {
    pub fn new(
        features: Vec<Vec<f64>>,
        labels: Vec<u8>,
        client_samples: Vec<Vec<usize>>,
        ridge: f64,
        batch_size: u32,
    ) -> Result<Self> {
        if features.is_empty() || features.len() != labels.len() {
            return Err(Error::Config(
                "logistic features and labels must be non-empty and equal length".into(),
            ));
        }
        let dim = features[0].len();
        for f in &features {
            check_dim(dim, f)?;
            check_finite("logistic feature", f)?;
        }
        if labels.iter().any(|&y| y > 1) {
            return Err(Error::Config("logistic labels must be 0 or 1".into()));
        }
        if client_samples.is_empty() || client_samples.iter().any(|s| s.is_empty()) {
            return Err(Error::Config("every client needs at least one sample".into()));
        }
        for s in &client_samples {
            if s.iter().any(|&i| i >= features.len()) {
                return Err(Error::Config("client sample index out of range".into()));
            }
        }
        if ridge.is_nan() || ridge < 0.0 || !ridge.is_finite() {
            return Err(Error::Config("ridge must be non-negative".into()));
        }
        if batch_size == 0 {
            return Err(Error::Config("batch size must be positive".into()));
        }
        Ok(LogisticModel {
            features,
            labels,
            client_samples,
            ridge,
            batch_size,
        })
    }
}

/// A client-partitioned loss with a stochastic-gradient oracle.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LossModel {
    Quadratic(QuadraticModel),
    Logistic(LogisticModel),
}

// sigmoid and the numerically safe log(1 + e^z).
#[inline]
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[inline]
fn log1p_exp(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

impl LossModel {
    pub fn dim(&self) -> usize {
        match self {
            LossModel::Quadratic(q) => q.curvature.len(),
            LossModel::Logistic(l) => l.features[0].len(),
        }
    }

    pub fn clients(&self) -> usize {
        match self {
            LossModel::Quadratic(q) => q.centers.len(),
            LossModel::Logistic(l) => l.client_samples.len(),
        }
    }

    fn client_weight(&self, client: usize) -> f64 {
        match self {
            LossModel::Quadratic(_) => 1.0,
            LossModel::Logistic(l) => l.client_samples[client].len() as f64,
        }
    }

    /// Exact local loss `f_i(x)`.
    pub fn local_loss(&self, client: usize, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x)?;
        match self {
            LossModel::Quadratic(q) => {
                let c = &q.centers[client];
                Ok(0.5
                    * x.iter()
                        .zip(c)
                        .zip(&q.curvature)
                        .map(|((xi, ci), ai)| ai * (xi - ci) * (xi - ci))
                        .sum::<f64>())
            }
            LossModel::Logistic(l) => {
                let idx = &l.client_samples[client];
                let mut total = 0.0;
                for &i in idx {
                    let z = crate::vector::dot(x, &l.features[i]);
                    total += log1p_exp(z) - f64::from(l.labels[i]) * z;
                }
                Ok(total / idx.len() as f64 + 0.5 * l.ridge * norm_sq(x))
            }
        }
    }

    /// Exact global loss: the client-weighted average of local losses,
    /// evaluated full-batch.
    pub fn global_loss(&self, x: &[f64]) -> Result<f64> {
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..self.clients() {
            let w = self.client_weight(i);
            num += w * self.local_loss(i, x)?;
            den += w;
        }
        Ok(num / den)
    }

    /// Exact local gradient of `f_i`.
    pub fn local_gradient(&self, client: usize, x: &[f64]) -> Result<ParamVector> {
        check_dim(self.dim(), x)?;
        match self {
            LossModel::Quadratic(q) => {
                let c = &q.centers[client];
                Ok(x.iter()
                    .zip(c)
                    .zip(&q.curvature)
                    .map(|((xi, ci), ai)| ai * (xi - ci))
                    .collect())
            }
            LossModel::Logistic(l) => {
                let idx = &l.client_samples[client];
                let mut g = vec![0.0; x.len()];
                for &i in idx {
                    let z = crate::vector::dot(x, &l.features[i]);
                    let coeff = sigmoid(z) - f64::from(l.labels[i]);
                    for (gj, fj) in g.iter_mut().zip(&l.features[i]) {
                        *gj += coeff * fj;
                    }
                }
                let inv = 1.0 / idx.len() as f64;
                for (gj, xj) in g.iter_mut().zip(x) {
                    *gj = *gj * inv + l.ridge * xj;
                }
                Ok(g)
            }
        }
    }

    /// Exact gradient of the global loss.
    pub fn global_gradient(&self, x: &[f64]) -> Result<ParamVector> {
        let mut acc = vec![0.0; self.dim()];
        let mut den = 0.0;
        for i in 0..self.clients() {
            let w = self.client_weight(i);
            let g = self.local_gradient(i, x)?;
            crate::vector::add_scaled(&mut acc, w, &g);
            den += w;
        }
        let inv = 1.0 / den;
        for v in acc.iter_mut() {
            *v *= inv;
        }
        Ok(acc)
    }

    /// One stochastic gradient draw for `client` at `x`, unbiased for the
    /// local gradient. The quadratic oracle adds isotropic Gaussian noise of
    /// total variance `noise_sigma^2 / batch_size`; the logistic oracle
    /// averages a uniformly sampled mini-batch.
    pub fn stochastic_gradient(
        &self,
        client: usize,
        x: &[f64],
        rng: &mut RngStream,
    ) -> Result<ParamVector> {
        check_dim(self.dim(), x)?;
        match self {
            LossModel::Quadratic(q) => {
                let mut g = self.local_gradient(client, x)?;
                if q.noise_sigma > 0.0 {
                    let per_coord =
                        q.noise_sigma / ((q.batch_size as f64) * (x.len() as f64)).sqrt();
                    for v in g.iter_mut() {
                        let z: f64 = rng.sample(StandardNormal);
                        *v += per_coord * z;
                    }
                }
                Ok(g)
            }
            LossModel::Logistic(l) => {
                let idx = &l.client_samples[client];
                let b = l.batch_size as usize;
                let mut g = vec![0.0; x.len()];
                for _ in 0..b {
                    let pick = idx[rng.random_range(0..idx.len())];
                    let z = crate::vector::dot(x, &l.features[pick]);
                    let coeff = sigmoid(z) - f64::from(l.labels[pick]);
                    for (gj, fj) in g.iter_mut().zip(&l.features[pick]) {
                        *gj += coeff * fj;
                    }
                }
                let inv = 1.0 / b as f64;
                for (gj, xj) in g.iter_mut().zip(x) {
                    *gj = *gj * inv + l.ridge * xj;
                }
                Ok(g)
            }
        }
    }

    /// Constants for bound evaluation.
    ///
    /// Quadratic: `L` is the largest curvature entry and `sigma2` the
    /// configured noise variance divided by the batch size; both exact.
    /// Logistic: `L <= max_j ||feature_j||^2 / 4 + ridge`, and `sigma2` is
    /// the largest per-client population variance of the single-sample
    /// gradient at the zero-weight initial point, divided by the batch size.
    pub fn constants(&self) -> SmoothnessConstants {
        match self {
            LossModel::Quadratic(q) => SmoothnessConstants {
                l: q.curvature.iter().cloned().fold(f64::MIN, f64::max),
                sigma2: q.noise_sigma * q.noise_sigma / q.batch_size as f64,
                f_star: 0.0,
                sigma2_is_estimate: false,
            },
            LossModel::Logistic(l) => {
                let max_feat = l
                    .features
                    .iter()
                    .map(|f| norm_sq(f))
                    .fold(0.0f64, f64::max);
                let x0 = vec![0.0; self.dim()];
                let mut worst = 0.0f64;
                for (client, idx) in l.client_samples.iter().enumerate() {
                    let mean = self
                        .local_gradient(client, &x0)
                        .expect("dimensions are validated at construction");
                    let mut var = 0.0;
                    for &i in idx {
                        let z = crate::vector::dot(&x0, &l.features[i]);
                        let coeff = sigmoid(z) - f64::from(l.labels[i]);
                        let mut d2 = 0.0;
                        for (fj, mj) in l.features[i].iter().zip(&mean) {
                            let d = coeff * fj - mj;
                            d2 += d * d;
                        }
                        var += d2;
                    }
                    worst = worst.max(var / idx.len() as f64);
                }
                SmoothnessConstants {
                    l: max_feat / 4.0 + l.ridge,
                    sigma2: worst / l.batch_size as f64,
                    f_star: 0.0,
                    sigma2_is_estimate: true,
                }
            }
        }
    }
}

/// One plain SGD step: `x - eta * g`, elementwise.
pub fn sgd_step(x: &[f64], g: &[f64], eta: f64) -> ParamVector {
    debug_assert_eq!(x.len(), g.len());
    x.iter().zip(g).map(|(xi, gi)| xi - eta * gi).collect()
}

/// Load a logistic dataset from CSV: one row per sample, label first, then
/// features.
pub fn logistic_from_csv(path: &std::path::Path) -> Result<(Vec<Vec<f64>>, Vec<u8>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)?;
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for record in reader.records() {
        let record = record?;
        let mut fields = record.iter();
        let label: f64 = fields
            .next()
            .ok_or_else(|| Error::Config("empty csv row".into()))?
            .trim()
            .parse()
            .map_err(|e| Error::Config(format!("bad label: {e}")))?;
        if label != 0.0 && label != 1.0 {
            return Err(Error::Config(format!("labels must be 0 or 1, got {label}")));
        }
        let row: std::result::Result<Vec<f64>, _> =
            fields.map(|f| f.trim().parse::<f64>()).collect();
        let row = row.map_err(|e| Error::Config(format!("bad feature value: {e}")))?;
        check_finite("csv feature row", &row)?;
        features.push(row);
        labels.push(label as u8);
    }
    if features.is_empty() {
        return Err(Error::Config("csv dataset is empty".into()));
    }
    let dim = features[0].len();
    if features.iter().any(|f| f.len() != dim) {
        return Err(Error::Config("csv rows have inconsistent width".into()));
    }
    Ok((features, labels))
}

/// Seeded two-class Gaussian blobs; class centers sit `separation` apart.
pub fn synthetic_blobs(
    samples_per_class: usize,
    dim: usize,
    separation: f64,
    seed: u64,
) -> (Vec<Vec<f64>>, Vec<u8>) {
    let mut rng = RngStream::derive(seed, StreamLabel::DataGeneration { stage: 0 });
    let shift = separation / 2.0 / (dim as f64).sqrt();
    let mut features = Vec::with_capacity(2 * samples_per_class);
    let mut labels = Vec::with_capacity(2 * samples_per_class);
    for class in 0..2u8 {
        let center = if class == 0 { -shift } else { shift };
        for _ in 0..samples_per_class {
            let row: Vec<f64> = (0..dim)
                .map(|_| center + rng.sample::<f64, _>(StandardNormal))
                .collect();
            features.push(row);
            labels.push(class);
        }
    }
    (features, labels)
}
