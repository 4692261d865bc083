//! Client-edge-cloud association and data partitioning.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{RngStream, StreamLabel};

/// How the cloud weighs edge updates when aggregating.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeWeighting {
    /// Client-count proportional coefficients `m_l / n`; makes convergence
    /// independent of the association.
    #[default]
    Weighted,
    /// Uniform coefficients `1 / s`; kept as the comparison variant.
    Uniform,
}

/// The client-edge association: `n` clients partitioned into `s` disjoint
/// per-edge client sets.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Topology {
    assignment: Vec<u32>,
    edge_members: Vec<Vec<u32>>,
}

impl Topology {
    /// Assign clients `0..n` contiguously to edges according to `sizes`.
    pub fn contiguous(n: usize, sizes: &[usize]) -> Result<Self> {
        if n == 0 || sizes.is_empty() {
            return Err(Error::Config("topology needs clients and edges".into()));
        }
        if sizes.contains(&0) {
            return Err(Error::Config("every edge needs at least one client".into()));
        }
        if sizes.iter().sum::<usize>() != n {
            return Err(Error::Config(format!(
                "edge sizes {:?} do not sum to the client count {n}",
                sizes
            )));
        }
        let mut assignment = Vec::with_capacity(n);
        let mut edge_members = Vec::with_capacity(sizes.len());
        let mut next = 0u32;
        for (edge, &m) in sizes.iter().enumerate() {
            let members: Vec<u32> = (next..next + m as u32).collect();
            assignment.extend(std::iter::repeat_n(edge as u32, m));
            edge_members.push(members);
            next += m as u32;
        }
        Ok(Topology {
            assignment,
            edge_members,
        })
    }

    pub fn clients(&self) -> usize {
        self.assignment.len()
    }

    pub fn edges(&self) -> usize {
        self.edge_members.len()
    }

    pub fn members(&self, edge: usize) -> &[u32] {
        &self.edge_members[edge]
    }

    pub fn edge_size(&self, edge: usize) -> usize {
        self.edge_members[edge].len()
    }

    pub fn edge_of(&self, client: usize) -> u32 {
        self.assignment[client]
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.edge_members.iter().map(Vec::len).collect()
    }

    /// Average clients per edge, `n/s`.
    pub fn effective_cluster_size(&self) -> f64 {
        self.clients() as f64 / self.edges() as f64
    }

    /// Cloud aggregation coefficients for the chosen weighting mode.
    pub fn weights(&self, mode: EdgeWeighting) -> Vec<f64> {
        let n = self.clients() as f64;
        let s = self.edges() as f64;
        match mode {
            EdgeWeighting::Weighted => self
                .edge_members
                .iter()
                .map(|m| m.len() as f64 / n)
                .collect(),
            EdgeWeighting::Uniform => vec![1.0 / s; self.edges()],
        }
    }
}

/// Per-client sample index sets forming a partition of a labeled dataset.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DataPartition {
    pub client_indices: Vec<Vec<usize>>,
    pub alpha: f64,
}

/// Split a labeled dataset across `clients` with per-class Dirichlet(alpha)
/// proportions. Larger alpha approaches a uniform class mix per client;
/// small alpha concentrates classes on few clients. Clients left empty by
/// the draw are repaired by stealing one sample from the largest client.
pub fn dirichlet_partition(
    labels: &[u32],
    clients: usize,
    alpha: f64,
    seed: u64,
) -> Result<DataPartition> {
    if alpha.is_nan() || alpha <= 0.0 || !alpha.is_finite() {
        return Err(Error::Config("dirichlet alpha must be positive".into()));
    }
    if clients == 0 {
        return Err(Error::Config("need at least one client".into()));
    }
    if labels.len() < clients {
        return Err(Error::Config(format!(
            "fewer samples ({}) than clients ({clients})",
            labels.len()
        )));
    }

    let mut classes: Vec<u32> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();

    let gamma = Gamma::new(alpha, 1.0).map_err(|e| Error::Config(format!("gamma: {e}")))?;
    let mut client_indices: Vec<Vec<usize>> = vec![Vec::new(); clients];

    for &class in &classes {
        let mut idx: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == class)
            .map(|(i, _)| i)
            .collect();
        let mut rng = RngStream::derive(seed, StreamLabel::Partition { class });
        // Shuffle so contiguous slices are unbiased samples of the class.
        for i in (1..idx.len()).rev() {
            let j = rng.random_range(0..=i);
            idx.swap(i, j);
        }
        let draws: Vec<f64> = (0..clients).map(|_| gamma.sample(&mut rng)).collect();
        let total: f64 = draws.iter().sum();
        // A degenerate all-zero draw (possible at tiny alpha through underflow)
        // falls back to a uniform split.
        let weights: Vec<f64> = if total > 0.0 {
            draws.iter().map(|g| g / total).collect()
        } else {
            vec![1.0 / clients as f64; clients]
        };
        let count = idx.len() as f64;
        let mut cumulative = 0.0;
        let mut start = 0usize;
        for (client, w) in weights.iter().enumerate() {
            cumulative += w;
            let end = if client + 1 == clients {
                idx.len()
            } else {
                ((cumulative * count).floor() as usize).min(idx.len())
            };
            client_indices[client].extend_from_slice(&idx[start..end.max(start)]);
            start = end.max(start);
        }
    }

    // Repair empties deterministically: smallest empty client takes the last
    // index of the currently largest client.
    loop {
        let empty = client_indices.iter().position(Vec::is_empty);
        let Some(empty) = empty else { break };
        let largest = client_indices
            .iter()
            .enumerate()
            .max_by(|(ia, a), (ib, b)| a.len().cmp(&b.len()).then(ib.cmp(ia)))
            .map(|(i, _)| i)
            .expect("at least one client");
        if client_indices[largest].len() <= 1 {
            return Err(Error::Config(
                "cannot repair empty clients: not enough samples".into(),
            ));
        }
        let moved = client_indices[largest].pop().expect("non-empty");
        client_indices[empty].push(moved);
    }

    Ok(DataPartition {
        client_indices,
        alpha,
    })
}

/// Split samples evenly and contiguously (the IID baseline partition).
pub fn even_partition(samples: usize, clients: usize) -> Result<DataPartition> {
    if clients == 0 || samples < clients {
        return Err(Error::Config(format!(
            "cannot split {samples} samples across {clients} clients"
        )));
    }
    let base = samples / clients;
    let extra = samples % clients;
    let mut client_indices = Vec::with_capacity(clients);
    let mut next = 0usize;
    for c in 0..clients {
        let take = base + usize::from(c < extra);
        client_indices.push((next..next + take).collect());
        next += take;
    }
    Ok(DataPartition {
        client_indices,
        alpha: f64::INFINITY,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn contiguous_association_examples() {
        let t = Topology::contiguous(20, &[10, 10]).unwrap();
        assert_eq!(t.sizes(), vec![10, 10]);
        assert_eq!(t.edge_of(0), 0);
        assert_eq!(t.edge_of(19), 1);

        let t = Topology::contiguous(20, &[18, 2]).unwrap();
        assert_eq!(t.sizes(), vec![18, 2]);
        assert_eq!(t.members(1), &[18, 19]);

        let t = Topology::contiguous(3, &[1, 1, 1]).unwrap();
        assert_eq!(t.sizes(), vec![1, 1, 1]);
    }

    #[test]
    fn invalid_sizes_rejected() {
        assert!(Topology::contiguous(5, &[2, 2]).is_err());
        assert!(Topology::contiguous(5, &[5, 0]).is_err());
        assert!(Topology::contiguous(0, &[]).is_err());
    }

    #[test]
    fn cluster_sizes() {
        assert_eq!(Topology::contiguous(20, &[5; 4]).unwrap().effective_cluster_size(), 5.0);
        assert_eq!(Topology::contiguous(4, &[1; 4]).unwrap().effective_cluster_size(), 1.0);
        assert_eq!(Topology::contiguous(20, &[10, 10]).unwrap().effective_cluster_size(), 10.0);
    }

    #[test]
    fn weights_sum_to_one() {
        let t = Topology::contiguous(20, &[18, 2]).unwrap();
        for mode in [EdgeWeighting::Weighted, EdgeWeighting::Uniform] {
            let w = t.weights(mode);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        assert_eq!(t.weights(EdgeWeighting::Weighted), vec![0.9, 0.1]);
        assert_eq!(t.weights(EdgeWeighting::Uniform), vec![0.5, 0.5]);
    }

    fn balanced_labels(classes: u32, per_class: usize) -> Vec<u32> {
        let mut labels = Vec::new();
        for c in 0..classes {
            labels.extend(std::iter::repeat_n(c, per_class));
        }
        labels
    }

    fn assert_is_partition(p: &DataPartition, samples: usize) {
        let mut seen = BTreeSet::new();
        for idx in &p.client_indices {
            assert!(!idx.is_empty());
            for &i in idx {
                assert!(seen.insert(i), "index {i} assigned twice");
            }
        }
        assert_eq!(seen.len(), samples);
    }

    #[test]
    fn dirichlet_is_a_partition_for_any_alpha() {
        let labels = balanced_labels(10, 200);
        for alpha in [0.05, 0.5, 1.0, 100.0] {
            for seed in 0..5 {
                let p = dirichlet_partition(&labels, 20, alpha, seed).unwrap();
                assert_is_partition(&p, labels.len());
            }
        }
    }

    #[test]
    fn dirichlet_is_deterministic() {
        let labels = balanced_labels(5, 100);
        let a = dirichlet_partition(&labels, 10, 0.3, 42).unwrap();
        let b = dirichlet_partition(&labels, 10, 0.3, 42).unwrap();
        assert_eq!(a.client_indices, b.client_indices);
        let c = dirichlet_partition(&labels, 10, 0.3, 43).unwrap();
        assert_ne!(a.client_indices, c.client_indices);
    }

    #[test]
    fn single_class_reduces_to_plain_split() {
        let labels = vec![0u32; 500];
        let p = dirichlet_partition(&labels, 10, 1.0, 7).unwrap();
        assert_is_partition(&p, 500);
    }

    #[test]
    fn fewer_samples_than_clients_is_an_error() {
        let labels = vec![0u32; 3];
        assert!(dirichlet_partition(&labels, 5, 1.0, 0).is_err());
    }

    /// Max deviation of a client's class shares from the uniform mix.
    fn max_share_deviation(p: &DataPartition, labels: &[u32], classes: usize) -> f64 {
        let uniform = 1.0 / classes as f64;
        p.client_indices
            .iter()
            .map(|idx| {
                let mut counts = vec![0usize; classes];
                for &i in idx {
                    counts[labels[i] as usize] += 1;
                }
                counts
                    .iter()
                    .map(|&c| (c as f64 / idx.len() as f64 - uniform).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn large_alpha_is_near_uniform() {
        // Monte-Carlo oracle over 100 seeds: with alpha = 100 the worst
        // per-client class-share deviation stays below 0.15 on >= 95 seeds.
        let classes = 10;
        let labels = balanced_labels(classes as u32, 200);
        let mut ok = 0;
        for seed in 0..100 {
            let p = dirichlet_partition(&labels, 20, 100.0, seed).unwrap();
            if max_share_deviation(&p, &labels, classes) < 0.15 {
                ok += 1;
            }
        }
        assert!(ok >= 95, "only {ok}/100 seeds were near-uniform");
    }

    #[test]
    fn smaller_alpha_increases_skew() {
        let classes = 10;
        let labels = balanced_labels(classes as u32, 200);
        let mut skew_low = 0.0;
        let mut skew_high = 0.0;
        for seed in 0..30 {
            let low = dirichlet_partition(&labels, 20, 0.1, seed).unwrap();
            let high = dirichlet_partition(&labels, 20, 100.0, seed).unwrap();
            skew_low += max_share_deviation(&low, &labels, classes);
            skew_high += max_share_deviation(&high, &labels, classes);
        }
        assert!(
            skew_low > skew_high,
            "alpha=0.1 skew {skew_low} not above alpha=100 skew {skew_high}"
        );
    }

    #[test]
    fn even_partition_covers_everything() {
        let p = even_partition(103, 10).unwrap();
        assert_is_partition(&p, 103);
    }
}
