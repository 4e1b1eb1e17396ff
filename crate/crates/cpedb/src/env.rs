//! Simulated duel environment and confidence-bound machinery.
//!
//! The environment owns the hidden preference matrix and a seeded generator;
//! algorithms observe only Bernoulli duel outcomes. Identical seed and call
//! sequence reproduce identical outcome streams. Algorithms keep their own
//! [`DuelStats`] ledgers and derive confidence radii and bound matrices from
//! them; the round variable in the radius is owned by the caller.

use crate::error::{Error, Result};
use crate::graph::BipartiteGraph;
use crate::preference::{PreferenceMatrix, SquareMatrix};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Identity of the generator algorithm, recorded in experiment metadata.
pub const GENERATOR_ID: &str = "chacha8";

/// Metadata serialized into every experiment report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvMetadata {
    pub seed: u64,
    pub generator: String,
    pub truth_hash: String,
}

/// The simulated environment: hidden truth, seeded randomness, and sample
/// accounting. Single-owner; independent trials use independent instances.
pub struct DuelEnvironment {
    truth: PreferenceMatrix,
    rng: ChaCha8Rng,
    seed: u64,
    total_samples: u64,
    per_pair_samples: Vec<u64>,
    m: usize,
}

impl DuelEnvironment {
    pub fn new(truth: PreferenceMatrix, seed: u64) -> Self {
        let m = truth.dim();
        Self {
            truth,
            rng: ChaCha8Rng::seed_from_u64(seed),
            seed,
            total_samples: 0,
            per_pair_samples: vec![0; m * m],
            m,
        }
    }

    /// Plays one duel between comparable edges; returns whether `e` won.
    pub fn sample_duel(&mut self, e: usize, e_other: usize) -> Result<bool> {
        if e >= self.m || e_other >= self.m || !self.truth.is_comparable(e, e_other) {
            return Err(Error::IncomparablePair(e, e_other));
        }
        let p = self.truth.get(e, e_other);
        let win = self.rng.random::<f64>() < p;
        self.total_samples += 1;
        let (lo, hi) = (e.min(e_other), e.max(e_other));
        self.per_pair_samples[lo * self.m + hi] += 1;
        Ok(win)
    }

    pub fn total_samples(&self) -> u64 {
        self.total_samples
    }

    pub fn pair_samples(&self, e1: usize, e2: usize) -> u64 {
        let (lo, hi) = (e1.min(e2), e1.max(e2));
        self.per_pair_samples[lo * self.m + hi]
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn metadata(&self) -> EnvMetadata {
        let mut hasher = Sha256::new();
        for v in self.truth.matrix().data() {
            hasher.update(v.to_bits().to_le_bytes());
        }
        EnvMetadata {
            seed: self.seed,
            generator: GENERATOR_ID.to_string(),
            truth_hash: format!("{:x}", hasher.finalize()),
        }
    }

    /// Monitoring hook: whether the hidden truth lies inside the given bound
    /// matrices on every comparable entry. Algorithms must not branch on it.
    pub fn truth_within_bounds(&self, upper: &SquareMatrix, lower: &SquareMatrix) -> bool {
        for i in 0..self.m {
            for j in 0..self.m {
                if !self.truth.is_comparable(i, j) {
                    continue;
                }
                let p = self.truth.get(i, j);
                if p > upper.get(i, j) || p < lower.get(i, j) {
                    return false;
                }
            }
        }
        true
    }

    /// Read-only access to the hidden truth, for post-hoc evaluation only.
    pub fn truth_for_evaluation(&self) -> &PreferenceMatrix {
        &self.truth
    }
}

/// Confidence radius for a quantity observed `t_obs` times at round `t`:
/// `sqrt(ln(4 K t^3 / delta) / (2 t_obs))`, with the convention that zero
/// observations give radius 1.
pub fn confidence_radius(t: u64, t_obs: u64, delta: f64, k: u64) -> f64 {
    if t_obs == 0 {
        return 1.0;
    }
    let log_term = (4.0 * k as f64 / delta).ln() + 3.0 * (t as f64).ln();
    (log_term / (2.0 * t_obs as f64)).sqrt()
}

/// Per-pair and per-edge sample ledger kept by each algorithm run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DuelStats {
    m: usize,
    /// Current round, owned by the algorithm.
    pub round: u64,
    pair_count: Vec<u64>,
    /// Wins of the lower-indexed edge over the higher-indexed one.
    pair_wins_low: Vec<u64>,
    edge_count: Vec<u64>,
    edge_mean: Vec<f64>,
}

impl DuelStats {
    pub fn new(m: usize) -> Self {
        Self {
            m,
            round: 0,
            pair_count: vec![0; m * m],
            pair_wins_low: vec![0; m * m],
            edge_count: vec![0; m],
            edge_mean: vec![0.0; m],
        }
    }

    fn slot(&self, e1: usize, e2: usize) -> usize {
        let (lo, hi) = (e1.min(e2), e1.max(e2));
        lo * self.m + hi
    }

    /// Records one duel between `e1` and `e2` where `e1_won` says whether
    /// the first argument won.
    pub fn record_pair(&mut self, e1: usize, e2: usize, e1_won: bool) {
        let slot = self.slot(e1, e2);
        self.pair_count[slot] += 1;
        let low_won = if e1 < e2 { e1_won } else { !e1_won };
        if low_won {
            self.pair_wins_low[slot] += 1;
        }
    }

    pub fn pair_count(&self, e1: usize, e2: usize) -> u64 {
        self.pair_count[self.slot(e1, e2)]
    }

    /// Empirical probability that `e1` beats `e2`; zero when unsampled.
    pub fn pair_mean(&self, e1: usize, e2: usize) -> f64 {
        let slot = self.slot(e1, e2);
        let n = self.pair_count[slot];
        if n == 0 {
            return 0.0;
        }
        let low = self.pair_wins_low[slot] as f64 / n as f64;
        if e1 < e2 {
            low
        } else {
            1.0 - low
        }
    }

    /// Eq.-style pairwise radius at round `t`.
    pub fn pair_radius(&self, e1: usize, e2: usize, t: u64, delta: f64, k: u64) -> f64 {
        confidence_radius(t, self.pair_count(e1, e2), delta, k)
    }

    /// Records one pull of edge `e` as the left arm of a duel, updating the
    /// running mean.
    pub fn record_edge_pull(&mut self, e: usize, won: bool) {
        let n = self.edge_count[e];
        let x = if won { 1.0 } else { 0.0 };
        self.edge_mean[e] = (self.edge_mean[e] * n as f64 + x) / (n + 1) as f64;
        self.edge_count[e] = n + 1;
    }

    pub fn edge_count(&self, e: usize) -> u64 {
        self.edge_count[e]
    }

    /// Running mean reward of edge `e`; zero when never pulled.
    pub fn edge_mean(&self, e: usize) -> f64 {
        self.edge_mean[e]
    }

    pub fn edge_means(&self) -> &[f64] {
        &self.edge_mean
    }

    /// Per-edge radius at round `t`.
    pub fn edge_radius(&self, e: usize, t: u64, delta: f64, k: u64) -> f64 {
        confidence_radius(t, self.edge_count[e], delta, k)
    }

    /// Test hook: plants an exact mean and count for an edge.
    #[cfg(test)]
    pub(crate) fn force_edge_state(&mut self, e: usize, mean: f64, count: u64) {
        self.edge_mean[e] = mean;
        self.edge_count[e] = count;
    }

    /// Upper and lower confidence-bound matrices at round `t`: entrywise
    /// clamp of mean +/- radius on comparable pairs, 1/2 on the diagonal,
    /// zero elsewhere.
    pub fn bound_matrices(
        &self,
        g: &BipartiteGraph,
        t: u64,
        delta: f64,
    ) -> (SquareMatrix, SquareMatrix) {
        let m = g.m();
        let k = g.duel_count();
        let mut upper = SquareMatrix::zeros(m);
        let mut lower = SquareMatrix::zeros(m);
        for i in 0..m {
            upper.set(i, i, 0.5);
            lower.set(i, i, 0.5);
        }
        for (i, j) in g.comparable_pairs() {
            let c = self.pair_radius(i, j, t, delta, k);
            let p = self.pair_mean(i, j);
            upper.set(i, j, (p + c).min(1.0));
            lower.set(i, j, (p - c).max(0.0));
            let q = 1.0 - p;
            upper.set(j, i, (q + c).min(1.0));
            lower.set(j, i, (q - c).max(0.0));
        }
        (upper, lower)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demo;

    #[test]
    fn radius_formula_and_conventions() {
        assert_eq!(confidence_radius(1, 0, 0.1, 10), 1.0);
        // ln(400)/400 under the square root.
        let r = confidence_radius(1, 200, 0.1, 10);
        assert!((r - (400.0f64.ln() / 400.0).sqrt()).abs() < 1e-12);
        assert!((r - 0.1224).abs() < 5e-4);
        // Doubling the observation count shrinks the radius.
        let r2 = confidence_radius(1, 400, 0.1, 10);
        assert!(r2 < r);
    }

    #[test]
    fn deterministic_duels_and_counters() {
        let (_, p) = demo::demo_instance();
        let mut a = DuelEnvironment::new(p.clone(), 11);
        let mut b = DuelEnvironment::new(p, 11);
        for _ in 0..200 {
            assert_eq!(a.sample_duel(0, 1).unwrap(), b.sample_duel(0, 1).unwrap());
        }
        assert_eq!(a.total_samples(), 200);
        assert_eq!(a.pair_samples(0, 1), 200);
        assert_eq!(a.metadata(), b.metadata());
    }

    #[test]
    fn certain_duel_always_wins() {
        let (_, p) = demo::demo_instance();
        let mut env = DuelEnvironment::new(p, 3);
        // p(e0 beats e2) = 1.
        for _ in 0..100 {
            assert!(env.sample_duel(0, 2).unwrap());
        }
    }

    #[test]
    fn fair_duel_frequency() {
        let g = demo::demo_graph();
        let p = PreferenceMatrix::from_entries(
            &g,
            &[(0, 1, 0.5), (0, 2, 0.5), (1, 2, 0.5), (3, 4, 0.5)],
        )
        .unwrap();
        let mut env = DuelEnvironment::new(p, 17);
        let wins = (0..10_000).filter(|_| env.sample_duel(0, 1).unwrap()).count();
        let freq = wins as f64 / 10_000.0;
        assert!((freq - 0.5).abs() < 0.02);
    }

    #[test]
    fn known_entry_frequency() {
        let (_, p) = demo::demo_instance();
        let mut env = DuelEnvironment::new(p, 5);
        // p(e1 beats e0) = 0.55.
        let wins = (0..10_000).filter(|_| env.sample_duel(1, 0).unwrap()).count();
        let freq = wins as f64 / 10_000.0;
        assert!((freq - 0.55).abs() < 0.02);
    }

    #[test]
    fn incomparable_and_self_duels_rejected() {
        let (_, p) = demo::demo_instance();
        let mut env = DuelEnvironment::new(p, 0);
        assert!(matches!(env.sample_duel(0, 3), Err(Error::IncomparablePair(0, 3))));
        assert!(matches!(env.sample_duel(2, 2), Err(Error::IncomparablePair(2, 2))));
        assert_eq!(env.total_samples(), 0);
    }

    #[test]
    fn stats_orientation_and_symmetry() {
        let mut stats = DuelStats::new(5);
        stats.record_pair(1, 0, true);
        stats.record_pair(1, 0, true);
        stats.record_pair(0, 1, true);
        assert_eq!(stats.pair_count(0, 1), 3);
        assert!((stats.pair_mean(1, 0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((stats.pair_mean(0, 1) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn edge_mean_running_update() {
        let mut stats = DuelStats::new(2);
        assert_eq!(stats.edge_mean(0), 0.0);
        stats.record_edge_pull(0, true);
        stats.record_edge_pull(0, false);
        stats.record_edge_pull(0, true);
        assert!((stats.edge_mean(0) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(stats.edge_count(0), 3);
    }

    #[test]
    fn bound_matrices_clamp_and_order() {
        let (g, p) = demo::demo_instance();
        let mut env = DuelEnvironment::new(p, 23);
        let mut stats = DuelStats::new(g.m());
        for (i, j) in g.comparable_pairs() {
            for _ in 0..50 {
                let won = env.sample_duel(i, j).unwrap();
                stats.record_pair(i, j, won);
            }
        }
        let (upper, lower) = stats.bound_matrices(&g, 1, 0.1);
        for i in 0..g.m() {
            for j in 0..g.m() {
                assert!(lower.get(i, j) <= upper.get(i, j));
                assert!((0.0..=1.0).contains(&upper.get(i, j)));
                assert!((0.0..=1.0).contains(&lower.get(i, j)));
            }
            assert_eq!(upper.get(i, i), 0.5);
        }
        // Extreme radius clamps to [0, 1].
        let fresh = DuelStats::new(g.m());
        let (u2, l2) = fresh.bound_matrices(&g, 1, 0.1);
        assert_eq!(u2.get(0, 1), 1.0);
        assert_eq!(l2.get(0, 1), 0.0);
    }

    #[test]
    fn truth_coverage_monitor() {
        let (g, p) = demo::demo_instance();
        let mut env = DuelEnvironment::new(p, 29);
        let mut stats = DuelStats::new(g.m());
        for (i, j) in g.comparable_pairs() {
            for _ in 0..1000 {
                let won = env.sample_duel(i, j).unwrap();
                stats.record_pair(i, j, won);
            }
        }
        let (upper, lower) = stats.bound_matrices(&g, 1, 0.1);
        assert!(env.truth_within_bounds(&upper, &lower));
    }
}
