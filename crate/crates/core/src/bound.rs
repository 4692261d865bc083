//! Closed-form convergence machinery for the hierarchical quantized scheme.
//!
//! All evaluators transcribe their displayed forms directly, with no
//! algebraic simplification: the randomized identity and consistency tests
//! are the guard against transcription drift. Everything here is a pure
//! function of [`BoundParams`].
//!
//! The central quantity is the average squared gradient norm over cloud
//! rounds, bounded (when the feasibility constant `G` is non-negative) by
//!
//! ```text
//! 2(f0 - f*)/(eta K tau1 tau2)
//!   + (L^2 eta^2 / 2) [ (1+q1)/(n/s) * tau1 (tau2 - 1) + (tau1 - 1) ] sigma^2
//!   + L eta (1+q1)(1+q2) sigma^2 / n
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::topology::Topology;

/// Inputs for bound evaluation.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BoundParams {
    /// Smoothness constant of the loss.
    pub l: f64,
    /// Step size.
    pub eta: f64,
    /// Gradient-noise variance bound.
    pub sigma2: f64,
    /// Number of clients.
    pub n: u32,
    /// Number of edge servers.
    pub s: u32,
    /// Client-edge aggregation interval.
    pub tau1: u32,
    /// Edge-cloud aggregation interval.
    pub tau2: u32,
    /// Variance factor of the client-side quantizer.
    pub q1: f64,
    /// Variance factor of the edge-side quantizer.
    pub q2: f64,
    /// Number of cloud rounds.
    pub k: u32,
    /// Initial loss `f(x0)`.
    pub f0: f64,
    /// Lower bound on the loss.
    pub f_star: f64,
}

impl BoundParams {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.s == 0 || self.n < self.s {
            return Err(Error::Config(format!(
                "need n >= s >= 1, got n={}, s={}",
                self.n, self.s
            )));
        }
        if self.tau1 == 0 || self.tau2 == 0 || self.k == 0 {
            return Err(Error::Config("tau1, tau2, k must be positive".into()));
        }
        if self.l.is_nan() || self.l <= 0.0 || self.eta.is_nan() || self.eta <= 0.0 {
            return Err(Error::Config("l and eta must be positive".into()));
        }
        if self.sigma2.is_nan() || self.sigma2 < 0.0 || self.q1.is_nan() || self.q1 < 0.0 || self.q2.is_nan() || self.q2 < 0.0 {
            return Err(Error::Config("sigma2, q1, q2 must be non-negative".into()));
        }
        if self.f0 < self.f_star {
            return Err(Error::Config(format!(
                "f0 ({}) must not be below f_star ({})",
                self.f0, self.f_star
            )));
        }
        Ok(())
    }

    fn cluster(&self) -> f64 {
        self.n as f64 / self.s as f64
    }
}

/// The feasibility constant `G`. The stationarity bound is valid when
/// `G >= 0`:
///
/// ```text
/// G = 1 - L^2 eta^2 [ tau1(tau1-1)/2 + tau1 tau2 (tau2(tau2-1)/2 + q1 tau2) ]
///       - L eta (1+q2) (tau1 tau2 + q1 tau1 / n)
/// ```
pub fn compute_g(p: &BoundParams) -> f64 {
    let t1 = p.tau1 as f64;
    let t2 = p.tau2 as f64;
    let interval_term = t1 * (t1 - 1.0) / 2.0 + t1 * t2 * (t2 * (t2 - 1.0) / 2.0 + p.q1 * t2);
    let step_term = p.l * p.eta * (1.0 + p.q2) * (t1 * t2 + p.q1 * t1 / p.n as f64);
    1.0 - p.l * p.l * p.eta * p.eta * interval_term - step_term
}

/// The threshold on `q1` at which the bound's dependence on the `tau1/tau2`
/// split flips sign: below `n/s - 1` a smaller `tau1` is better, above it a
/// larger one.
pub fn flip_threshold(n: u32, s: u32) -> f64 {
    n as f64 / s as f64 - 1.0
}

/// The three terms of the stationarity bound, separately.
pub fn stationarity_bound_terms(p: &BoundParams) -> (f64, f64, f64) {
    let t1 = p.tau1 as f64;
    let t2 = p.tau2 as f64;
    let kf = p.k as f64;
    let descent = 2.0 * (p.f0 - p.f_star) / (p.eta * kf * t1 * t2);
    let drift = p.l * p.l * p.eta * p.eta / 2.0
        * ((1.0 + p.q1) / p.cluster() * t1 * (t2 - 1.0) + (t1 - 1.0))
        * p.sigma2;
    let noise = p.l * p.eta * (1.0 + p.q1) * (1.0 + p.q2) * p.sigma2 / p.n as f64;
    (descent, drift, noise)
}

/// Outcome of a bound evaluation; `valid` is false when `G < 0`, in which
/// case the value is still returned for graceful degradation.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BoundEvaluation {
    pub value: f64,
    pub g: f64,
    pub valid: bool,
}

/// The stationarity bound on the average squared gradient norm over cloud
/// rounds.
pub fn stationarity_bound(p: &BoundParams) -> BoundEvaluation {
    let (a, b, c) = stationarity_bound_terms(p);
    let g = compute_g(p);
    BoundEvaluation {
        value: a + b + c,
        g,
        valid: g >= 0.0,
    }
}

/// The three terms of the rate form obtained at the scaled step size
/// `eta = 1 / (L sqrt(K tau1 tau2))`, transcribed independently of
/// [`stationarity_bound_terms`] so the substitution identity can be checked.
pub fn rate_form_terms(p: &BoundParams) -> (f64, f64, f64) {
    let t1 = p.tau1 as f64;
    let t2 = p.tau2 as f64;
    let total = p.k as f64 * t1 * t2;
    let descent = 2.0 * p.l * (p.f0 - p.f_star) / total.sqrt();
    let drift = 1.0 / total
        * 0.5
        * ((1.0 + p.q1) / p.cluster() * t1 * (t2 - 1.0) + (t1 - 1.0))
        * p.sigma2;
    let noise = (1.0 + p.q1) * (1.0 + p.q2) * p.sigma2 / (p.n as f64 * total.sqrt());
    (descent, drift, noise)
}

/// The step size at which the rate form applies.
pub fn rate_form_eta(p: &BoundParams) -> f64 {
    1.0 / (p.l * ((p.k as f64) * (p.tau1 as f64) * (p.tau2 as f64)).sqrt())
}

/// Per-client variance bounds and the two aggregates the heterogeneous bound
/// uses. Aggregates are recomputed on demand, never stored.
#[derive(Clone, Debug)]
pub struct HeteroVariances {
    per_client: Vec<f64>,
    edge_sizes: Vec<usize>,
    edge_of: Vec<u32>,
}

impl HeteroVariances {
    pub fn new(topology: &Topology, per_client: Vec<f64>) -> Result<Self> {
        if per_client.len() != topology.clients() {
            return Err(Error::Config(format!(
                "expected {} per-client variances, got {}",
                topology.clients(),
                per_client.len()
            )));
        }
        if per_client.iter().any(|v| v.is_nan() || *v < 0.0 || !v.is_finite()) {
            return Err(Error::Config("per-client variances must be non-negative".into()));
        }
        Ok(HeteroVariances {
            edge_sizes: topology.sizes(),
            edge_of: (0..topology.clients())
                .map(|c| topology.edge_of(c))
                .collect(),
            per_client,
        })
    }

    /// Plain client average `(1/n) sum_i sigma_i^2`.
    pub fn sigma_c2(&self) -> f64 {
        self.per_client.iter().sum::<f64>() / self.per_client.len() as f64
    }

    /// Edge-structured average `(1/n) sum_l [ (1/m_l) sum_{j in C_l} sigma_j^2 ]`.
    ///
    /// With equal per-client variances sigma^2 this equals `(s/n) sigma^2`,
    /// which is exactly how the `s/n` factor of the uniform-variance bound is
    /// absorbed; the two bound forms then coincide.
    pub fn sigma_e2(&self) -> f64 {
        let mut per_edge = vec![0.0; self.edge_sizes.len()];
        for (client, &v) in self.per_client.iter().enumerate() {
            per_edge[self.edge_of[client] as usize] += v;
        }
        per_edge
            .iter()
            .zip(&self.edge_sizes)
            .map(|(sum, &m)| sum / m as f64)
            .sum::<f64>()
            / self.per_client.len() as f64
    }
}

/// Stationarity bound under per-client variance bounds `sigma_i^2`:
/// the drift term splits into `(tau1-1) sigma_c^2` and
/// `(1+q1) tau1 (tau2-1) sigma_e^2`, and the noise term uses `sigma_c^2`.
pub fn stationarity_bound_hetero(p: &BoundParams, h: &HeteroVariances) -> BoundEvaluation {
    let t1 = p.tau1 as f64;
    let t2 = p.tau2 as f64;
    let kf = p.k as f64;
    let sigma_c2 = h.sigma_c2();
    let sigma_e2 = h.sigma_e2();
    let descent = 2.0 * (p.f0 - p.f_star) / (p.eta * kf * t1 * t2);
    let drift = p.l * p.l * p.eta * p.eta / 2.0
        * ((t1 - 1.0) * sigma_c2 + (1.0 + p.q1) * t1 * (t2 - 1.0) * sigma_e2);
    let noise = p.l * p.eta * (1.0 + p.q1) * (1.0 + p.q2) * sigma_c2 / p.n as f64;
    let g = compute_g(p);
    BoundEvaluation {
        value: descent + drift + noise,
        g,
        valid: g >= 0.0,
    }
}

/// The variance part of the stationarity bound rewritten to expose the
/// `tau1` coefficient at a fixed product `tau1 tau2`:
///
/// ```text
/// (L^2 eta^2 / 2) [ (1+q1)/(n/s) tau1 tau2 + (1 - (1+q1)/(n/s)) tau1 - 1 ] sigma^2
///   + L eta (1+q1)(1+q2) sigma^2 / n
/// ```
///
/// Algebraically identical to the variance part of [`stationarity_bound`];
/// the coefficient of `tau1` vanishes exactly at `q1 = n/s - 1`.
pub fn variance_term_rewritten(p: &BoundParams) -> f64 {
    let t1 = p.tau1 as f64;
    let t2 = p.tau2 as f64;
    let ratio = (1.0 + p.q1) / p.cluster();
    p.l * p.l * p.eta * p.eta / 2.0 * (ratio * t1 * t2 + (1.0 - ratio) * t1 - 1.0) * p.sigma2
        + p.l * p.eta * (1.0 + p.q1) * (1.0 + p.q2) * p.sigma2 / p.n as f64
}

/// The variance part of [`stationarity_bound`] (drift + noise terms).
pub fn variance_term(p: &BoundParams) -> f64 {
    let (_, drift, noise) = stationarity_bound_terms(p);
    drift + noise
}

/// Time-budget form of the bound at real-valued intervals: with
/// `T = K (tau1 tau2 d_comp + tau2 d_de + d_ec)` substituted for `K`, the
/// descent term becomes
/// `2(f0-f*)/(eta T) * (d_comp + d_de/tau1 + d_ec/(tau1 tau2))` and the
/// variance terms are unchanged.
pub fn time_budget_bound_at(
    p: &BoundParams,
    d_comp: f64,
    d_de: f64,
    d_ec: f64,
    t_total: f64,
    tau1: f64,
    tau2: f64,
) -> Result<f64> {
    if t_total.is_nan() || t_total <= 0.0 {
        return Err(Error::Config(format!("time budget must be positive, got {t_total}")));
    }
    if tau1 * tau2 * d_comp + tau2 * d_de + d_ec <= 0.0 {
        return Err(Error::Config("round duration must be positive".into()));
    }
    let descent = 2.0 * (p.f0 - p.f_star) / (p.eta * t_total)
        * (d_comp + d_de / tau1 + d_ec / (tau1 * tau2));
    let ratio = (1.0 + p.q1) / p.cluster();
    let drift =
        p.l * p.l * p.eta * p.eta / 2.0 * (ratio * tau1 * (tau2 - 1.0) + (tau1 - 1.0)) * p.sigma2;
    let noise = p.l * p.eta * (1.0 + p.q1) * (1.0 + p.q2) * p.sigma2 / p.n as f64;
    Ok(descent + drift + noise)
}

/// Time-budget bound at the configured integer intervals.
pub fn time_budget_bound(
    p: &BoundParams,
    d_comp: f64,
    d_de: f64,
    d_ec: f64,
    t_total: f64,
) -> Result<f64> {
    time_budget_bound_at(p, d_comp, d_de, d_ec, t_total, p.tau1 as f64, p.tau2 as f64)
}

/// Real-valued minimizers of the time-budget bound; callers round up.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct OptimalIntervals {
    pub tau1: f64,
    pub tau2: f64,
}

/// The interval pair minimizing the time-budget bound, valid when
/// `1 + q1 < n/s`:
///
/// ```text
/// tau1* = sqrt( 4 (f0 - f*) d_de / (eta^3 L^2 sigma^2 T (1 - (1+q1)/(n/s))) )
/// tau2* = sqrt( (d_ec / d_de) (1 - (1+q1)/(n/s)) / ((1+q1)/(n/s)) )
/// ```
pub fn optimal_intervals(
    p: &BoundParams,
    d_de: f64,
    d_ec: f64,
    t_total: f64,
) -> Result<OptimalIntervals> {
    let ratio = (1.0 + p.q1) / p.cluster();
    if ratio >= 1.0 {
        return Err(Error::ConditionViolated(format!(
            "interval optimizer needs 1 + q1 < n/s; got q1={}, n/s={}",
            p.q1,
            p.cluster()
        )));
    }
    if !(d_de > 0.0 && d_ec > 0.0 && t_total > 0.0) {
        return Err(Error::Config("d_de, d_ec and the budget must be positive".into()));
    }
    if p.sigma2.is_nan() || p.sigma2 <= 0.0 {
        return Err(Error::ConditionViolated(
            "interval optimizer needs sigma2 > 0 (noiseless runs have no interior optimum)".into(),
        ));
    }
    let tau1 = (4.0 * (p.f0 - p.f_star) * d_de
        / (p.eta.powi(3) * p.l * p.l * p.sigma2 * t_total * (1.0 - ratio)))
    .sqrt();
    let tau2 = ((d_ec / d_de) * (1.0 - ratio) / ratio).sqrt();
    Ok(OptimalIntervals { tau1, tau2 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> BoundParams {
        BoundParams {
            l: 1.0,
            eta: 0.01,
            sigma2: 1.0,
            n: 20,
            s: 4,
            tau1: 5,
            tau2: 2,
            q1: 1.0,
            q2: 0.0,
            k: 100,
            f0: 10.0,
            f_star: 0.0,
        }
    }

    #[test]
    fn g_hand_evaluation() {
        let p = BoundParams {
            l: 1.0,
            eta: 0.01,
            sigma2: 0.0,
            n: 10,
            s: 1,
            tau1: 5,
            tau2: 2,
            q1: 1.0,
            q2: 0.0,
            k: 1,
            f0: 1.0,
            f_star: 0.0,
        };
        let g = compute_g(&p);
        assert!((g - 0.891).abs() < 1e-12, "g = {g}");
    }

    #[test]
    fn g_degenerate_intervals_exactly_one_minus_l_eta() {
        for (l, eta) in [(1.0, 0.1), (3.0, 0.0123), (0.7, 1e-6)] {
            let p = BoundParams {
                l,
                eta,
                sigma2: 1.0,
                n: 5,
                s: 2,
                tau1: 1,
                tau2: 1,
                q1: 0.0,
                q2: 0.0,
                k: 1,
                f0: 1.0,
                f_star: 0.0,
            };
            assert_eq!(compute_g(&p), 1.0 - l * eta);
        }
    }

    #[test]
    fn g_tends_to_one_for_vanishing_eta() {
        let mut p = params();
        p.eta = 1e-300;
        assert!((compute_g(&p) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bound_degenerate_intervals() {
        let mut p = params();
        p.tau1 = 1;
        p.tau2 = 1;
        p.q1 = 0.0;
        p.q2 = 0.0;
        let (a, b, c) = stationarity_bound_terms(&p);
        assert_eq!(b, 0.0);
        let expected_a = 2.0 * p.f0 / (p.eta * p.k as f64);
        let expected_c = p.l * p.eta * p.sigma2 / p.n as f64;
        assert!((a - expected_a).abs() < 1e-15 * expected_a);
        assert!((c - expected_c).abs() < 1e-15 * expected_c);
    }

    #[test]
    fn noiseless_bound_is_descent_only() {
        let mut p = params();
        p.sigma2 = 0.0;
        let eval = stationarity_bound(&p);
        let expected = 2.0 * p.f0 / (p.eta * p.k as f64 * 10.0);
        assert!((eval.value - expected).abs() < 1e-15 * expected);
    }

    #[test]
    fn rate_form_matches_substituted_bound() {
        // At eta = 1/(L sqrt(K tau1 tau2)) the three bound terms match the
        // rate form term-by-term.
        let mut rng = crate::rng::RngStream::derive(5, crate::rng::StreamLabel::Probe { index: 1 });
        use rand::Rng;
        for _ in 0..100 {
            let s = rng.random_range(1..=8u32);
            let n = s * rng.random_range(1..=6u32);
            let mut p = BoundParams {
                l: 0.1 + 5.0 * rng.random::<f64>(),
                eta: 0.0,
                sigma2: 2.0 * rng.random::<f64>(),
                n,
                s,
                tau1: rng.random_range(1..=30),
                tau2: rng.random_range(1..=30),
                q1: 10.0 * rng.random::<f64>(),
                q2: 10.0 * rng.random::<f64>(),
                k: rng.random_range(1..=500),
                f0: 20.0 * rng.random::<f64>(),
                f_star: 0.0,
            };
            p.eta = rate_form_eta(&p);
            let lhs = stationarity_bound_terms(&p);
            let rhs = rate_form_terms(&p);
            for (a, b) in [(lhs.0, rhs.0), (lhs.1, rhs.1), (lhs.2, rhs.2)] {
                let denom = a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
                assert!((a - b).abs() / denom < 1e-12, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn rewrite_is_identical_to_variance_part() {
        let mut rng = crate::rng::RngStream::derive(9, crate::rng::StreamLabel::Probe { index: 2 });
        use rand::Rng;
        for _ in 0..1000 {
            let s = rng.random_range(1..=10u32);
            let n = s * rng.random_range(1..=10u32);
            let p = BoundParams {
                l: 0.01 + 10.0 * rng.random::<f64>(),
                eta: 1e-4 + rng.random::<f64>(),
                sigma2: 5.0 * rng.random::<f64>(),
                n,
                s,
                tau1: rng.random_range(1..=100),
                tau2: rng.random_range(1..=100),
                q1: 70.0 * rng.random::<f64>(),
                q2: 70.0 * rng.random::<f64>(),
                k: 1,
                f0: 1.0,
                f_star: 0.0,
            };
            let a = variance_term(&p);
            let b = variance_term_rewritten(&p);
            let denom = a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
            assert!((a - b).abs() / denom < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn at_flip_threshold_bound_ignores_the_split() {
        // q1 = n/s - 1 makes the tau1 coefficient vanish: every divisor split
        // of the same product gives the same variance term.
        let n = 20;
        let s = 4;
        let product = 60u32;
        let value_at = |tau1: u32, q1: f64| {
            let p = BoundParams {
                l: 2.0,
                eta: 0.02,
                sigma2: 1.5,
                n,
                s,
                tau1,
                tau2: product / tau1,
                q1,
                q2: 0.5,
                k: 1,
                f0: 1.0,
                f_star: 0.0,
            };
            variance_term_rewritten(&p)
        };
        let divisors = [1u32, 2, 3, 4, 5, 6, 10, 12, 15, 20, 30, 60];
        let q_flip = flip_threshold(n, s);
        assert_eq!(q_flip, 4.0);
        let reference = value_at(1, q_flip);
        for &d in &divisors {
            assert!((value_at(d, q_flip) - reference).abs() < 1e-12 * reference);
        }
        // Strictly monotone on either side of the threshold.
        for w in divisors.windows(2) {
            assert!(value_at(w[0], 0.0) < value_at(w[1], 0.0));
            assert!(value_at(w[0], 19.0) > value_at(w[1], 19.0));
        }
    }

    #[test]
    fn fewer_edges_give_a_smaller_bound() {
        let mut rng = crate::rng::RngStream::derive(11, crate::rng::StreamLabel::Probe { index: 3 });
        use rand::Rng;
        for _ in 0..200 {
            let mut p = params();
            p.tau2 = rng.random_range(2..=20);
            p.q1 = 5.0 * rng.random::<f64>();
            p.n = 60;
            let mut last = f64::MIN;
            for s in [1u32, 2, 3, 5, 6, 10, 60] {
                p.s = s;
                let v = stationarity_bound(&p).value;
                assert!(v >= last);
                last = v;
            }
        }
    }

    #[test]
    fn hetero_matches_uniform_at_equal_variances() {
        let topology = Topology::contiguous(20, &[5, 5, 5, 5]).unwrap();
        let p = params();
        let h = HeteroVariances::new(&topology, vec![p.sigma2; 20]).unwrap();
        assert!((h.sigma_e2() - p.sigma2 * 4.0 / 20.0).abs() < 1e-15);
        let uniform = stationarity_bound(&p).value;
        let hetero = stationarity_bound_hetero(&p, &h).value;
        assert!((uniform - hetero).abs() < 1e-12 * uniform);
    }

    #[test]
    fn hetero_single_noisy_client() {
        let topology = Topology::contiguous(10, &[5, 5]).unwrap();
        let mut per_client = vec![0.0; 10];
        per_client[3] = 2.0;
        let h = HeteroVariances::new(&topology, per_client).unwrap();
        assert!((h.sigma_c2() - 0.2).abs() < 1e-15);
        // All-zero variances leave only the descent term.
        let h0 = HeteroVariances::new(&topology, vec![0.0; 10]).unwrap();
        let mut p = params();
        p.n = 10;
        p.s = 2;
        let eval = stationarity_bound_hetero(&p, &h0);
        let descent = 2.0 * p.f0 / (p.eta * p.k as f64 * 10.0);
        assert!((eval.value - descent).abs() < 1e-15 * descent);
    }

    #[test]
    fn time_budget_reduces_to_computation_only() {
        let p = params();
        let mut noiseless = p;
        noiseless.sigma2 = 0.0;
        for tau1 in [1u32, 5, 50] {
            let mut q = noiseless;
            q.tau1 = tau1;
            let v = time_budget_bound(&q, 2.0, 0.0, 0.0, 1000.0).unwrap();
            let expected = 2.0 * q.f0 * 2.0 / (q.eta * 1000.0);
            assert!((v - expected).abs() < 1e-12 * expected);
        }
    }

    #[test]
    fn time_budget_descent_halves_when_budget_doubles() {
        let mut p = params();
        p.sigma2 = 0.0;
        let v1 = time_budget_bound(&p, 2.0, 33.0, 330.0, 1000.0).unwrap();
        let v2 = time_budget_bound(&p, 2.0, 33.0, 330.0, 2000.0).unwrap();
        assert!((v1 - 2.0 * v2).abs() < 1e-12 * v1);
    }

    #[test]
    fn time_budget_reference_constants() {
        // d_comp=2, d_de=33, d_ec=330: finite, hand-checkable value.
        let p = params();
        let v = time_budget_bound(&p, 2.0, 33.0, 330.0, 10_000.0).unwrap();
        let descent = 2.0 * 10.0 / (0.01 * 10_000.0) * (2.0 + 33.0 / 5.0 + 330.0 / 10.0);
        let variance = variance_term(&p);
        assert!((v - (descent + variance)).abs() < 1e-12 * v);
        assert!(v.is_finite());
        assert!(time_budget_bound(&p, 2.0, 33.0, 330.0, 0.0).is_err());
    }

    #[test]
    fn optimal_interval_examples() {
        let mut p = params();
        p.q1 = 0.0;
        let opt = optimal_intervals(&p, 1.0, 10.0, 1e5).unwrap();
        assert!((opt.tau2 - 40.0f64.sqrt()).abs() < 1e-12);
        assert_eq!(opt.tau2.ceil(), 7.0);

        // Balanced ratio: d_ec = d_de and (1+q1)/(n/s) = 1/2 gives tau2* = 1.
        let mut q = params();
        q.n = 4;
        q.s = 2;
        q.q1 = 0.0; // (1+0)/(4/2) = 1/2
        let opt = optimal_intervals(&q, 3.0, 3.0, 1e5).unwrap();
        assert!((opt.tau2 - 1.0).abs() < 1e-12);

        // Quadrupling d_de doubles tau1*.
        let a = optimal_intervals(&p, 1.0, 10.0, 1e5).unwrap();
        let b = optimal_intervals(&p, 4.0, 10.0, 1e5).unwrap();
        assert!((b.tau1 - 2.0 * a.tau1).abs() < 1e-12 * b.tau1);
    }

    #[test]
    fn optimizer_rejects_violated_condition() {
        let mut p = params();
        p.q1 = 10.0; // 1 + q1 = 11 >= n/s = 5
        assert!(matches!(
            optimal_intervals(&p, 1.0, 10.0, 1e5),
            Err(Error::ConditionViolated(_))
        ));
    }

    #[test]
    fn tau2_one_and_no_quantization_recovers_the_two_layer_form() {
        // tau2 = 1, q1 = q2 = 0: the bound collapses to
        // 2(f0-f*)/(eta K tau1) + (L^2 eta^2/2)(tau1-1) sigma^2 + L eta sigma^2 / n.
        for tau1 in [1u32, 3, 10, 50] {
            let p = BoundParams {
                l: 1.7,
                eta: 0.005,
                sigma2: 2.0,
                n: 12,
                s: 3,
                tau1,
                tau2: 1,
                q1: 0.0,
                q2: 0.0,
                k: 40,
                f0: 8.0,
                f_star: 0.0,
            };
            let (a, b, c) = stationarity_bound_terms(&p);
            let t1 = tau1 as f64;
            let ea = 2.0 * 8.0 / (0.005 * 40.0 * t1);
            let eb = 1.7 * 1.7 * 0.005 * 0.005 / 2.0 * (t1 - 1.0) * 2.0;
            let ec = 1.7 * 0.005 * 2.0 / 12.0;
            assert!((a - ea).abs() <= 1e-14 * ea.abs());
            assert!((b - eb).abs() <= 1e-14 * eb.abs().max(1e-300));
            assert!((c - ec).abs() <= 1e-14 * ec.abs());
        }
    }

    #[test]
    fn grid_confirms_interval_optimum() {
        // The closed-form point minimizes the time-budget bound on a local
        // grid, and its scaled finite-difference gradient vanishes.
        let p = BoundParams {
            l: 1.0,
            eta: 0.02,
            sigma2: 25.0,
            n: 20,
            s: 4,
            tau1: 1,
            tau2: 1,
            q1: 0.0,
            q2: 0.0,
            k: 1,
            f0: 20.0,
            f_star: 0.0,
        };
        let (d_comp, d_de, d_ec, t) = (2.0, 33.0, 330.0, 2e5);
        let opt = optimal_intervals(&p, d_de, d_ec, t).unwrap();
        let at = |t1: f64, t2: f64| time_budget_bound_at(&p, d_comp, d_de, d_ec, t, t1, t2).unwrap();
        let center = at(opt.tau1, opt.tau2);
        let h = 1e-3;
        for di in [-1.0, 0.0, 1.0] {
            for dj in [-1.0, 0.0, 1.0] {
                if di == 0.0 && dj == 0.0 {
                    continue;
                }
                assert!(center <= at(opt.tau1 + di * h, opt.tau2 + dj * h));
            }
        }
        let fd = 1e-4;
        let g1 = (at(opt.tau1 + fd, opt.tau2) - at(opt.tau1 - fd, opt.tau2)) / (2.0 * fd);
        let g2 = (at(opt.tau1, opt.tau2 + fd) - at(opt.tau1, opt.tau2 - fd)) / (2.0 * fd);
        assert!((g1 * opt.tau1 / center).abs() < 1e-6);
        assert!((g2 * opt.tau2 / center).abs() < 1e-6);
    }
}
