//! Almost-uniform sampling of maximum matchings.
//!
//! The target is the uniform distribution over the decision class. Two modes
//! are provided behind one configuration:
//!
//! - `exact`: enumerate the class once and draw uniformly (total variation
//!   distance zero, satisfies any bias bound);
//! - `mcmc`: random walk over perfect and near-perfect matchings of the
//!   augmented square graph, projected back to the base graph. The bias is
//!   controlled empirically by the step count.
//!
//! The augmentation adds one fictitious position per surplus candidate, each
//! connected to every candidate, so that every base maximum matching extends
//! to exactly `(n - l)!` perfect matchings of the augmented graph.

use crate::error::{Error, Result};
use crate::graph::{
    enumerate_maximum_matchings, mwmc_raw, BipartiteGraph, ConstraintPair, Matching,
    DEFAULT_ENUMERATION_CAP,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Sampling backend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerMode {
    Exact,
    Mcmc,
}

/// Sampler configuration. `eta` is the requested bias bound in total
/// variation; the exact mode meets any bound, the mcmc mode is expected to
/// meet it at the configured step count (validated empirically in tests).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub mode: SamplerMode,
    pub eta: f64,
    pub mcmc_steps: u64,
    pub seed: u64,
}

impl SamplerConfig {
    pub fn exact(seed: u64) -> Self {
        Self {
            mode: SamplerMode::Exact,
            eta: 0.0,
            mcmc_steps: 0,
            seed,
        }
    }

    pub fn mcmc(seed: u64, eta: f64, mcmc_steps: u64) -> Self {
        Self {
            mode: SamplerMode::Mcmc,
            eta,
            mcmc_steps,
            seed,
        }
    }

    /// Same configuration with a different bias bound.
    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.eta) {
            return Err(Error::invalid(format!("eta {} outside [0,1)", self.eta)));
        }
        if self.mode == SamplerMode::Mcmc && self.mcmc_steps == 0 {
            return Err(Error::invalid("mcmc mode requires mcmc_steps >= 1"));
        }
        Ok(())
    }
}

/// Default step count for the mcmc walk on a graph whose augmentation has
/// `m_aug` edges.
pub fn default_mcmc_steps(g: &BipartiteGraph) -> u64 {
    let m_aug = (g.m() + g.n_candidates() * (g.n_candidates() - g.n_positions())) as u64;
    10 * m_aug * m_aug
}

/// The square graph used by the walk: fictitious positions are appended
/// after the real ones, so base edges keep their canonical indices.
#[derive(Debug, Clone)]
pub struct AugmentedGraph {
    graph: BipartiteGraph,
    base_edges: usize,
    fictitious_positions: usize,
}

impl AugmentedGraph {
    pub fn graph(&self) -> &BipartiteGraph {
        &self.graph
    }

    pub fn fictitious_positions(&self) -> usize {
        self.fictitious_positions
    }

    /// Base edge id for an augmented edge, or `None` for fictitious edges.
    pub fn base_edge(&self, e: usize) -> Option<usize> {
        (e < self.base_edges).then_some(e)
    }

    /// Drops fictitious edges from a perfect matching of the augmented graph.
    pub fn project(&self, base: &BipartiteGraph, edge_ids: &[usize]) -> Result<Matching> {
        let kept: Vec<usize> = edge_ids.iter().copied().filter(|&e| e < self.base_edges).collect();
        Matching::from_edge_ids(base, kept)
    }
}

/// Adds `n - l` fictitious positions, each adjacent to all candidates.
pub fn augment(g: &BipartiteGraph) -> AugmentedGraph {
    let n = g.n_candidates();
    let l = g.n_positions();
    let mut edges = g.edges().to_vec();
    for j in l..n {
        for c in 0..n {
            edges.push((c, j));
        }
    }
    let graph = BipartiteGraph::new(n, n, edges).expect("augmentation preserves feasibility");
    AugmentedGraph {
        graph,
        base_edges: g.m(),
        fictitious_positions: n - l,
    }
}

/// Walk state: a perfect or near-perfect matching of the augmented graph.
#[derive(Debug, Clone)]
struct WalkState {
    edge_in: Vec<bool>,
    candidate_match: Vec<Option<usize>>,
    position_match: Vec<Option<usize>>,
    cardinality: usize,
}

impl WalkState {
    fn from_matching(g: &BipartiteGraph, m: &Matching) -> Self {
        let mut s = Self {
            edge_in: vec![false; g.m()],
            candidate_match: vec![None; g.n_candidates()],
            position_match: vec![None; g.n_positions()],
            cardinality: 0,
        };
        for &e in m.edge_ids() {
            s.add(g, e);
        }
        s
    }

    fn add(&mut self, g: &BipartiteGraph, e: usize) {
        let (c, p) = g.edges()[e];
        debug_assert!(self.candidate_match[c].is_none() && self.position_match[p].is_none());
        self.edge_in[e] = true;
        self.candidate_match[c] = Some(e);
        self.position_match[p] = Some(e);
        self.cardinality += 1;
    }

    fn remove(&mut self, g: &BipartiteGraph, e: usize) {
        let (c, p) = g.edges()[e];
        self.edge_in[e] = false;
        self.candidate_match[c] = None;
        self.position_match[p] = None;
        self.cardinality -= 1;
    }

    fn is_perfect(&self, g: &BipartiteGraph) -> bool {
        self.cardinality == g.n_positions()
    }

    /// One proposal of the edge walk. Picks an edge uniformly; removes it
    /// from a perfect state, adds it across two holes, slides it when one
    /// endpoint is free, and stays put otherwise.
    fn step(&mut self, g: &BipartiteGraph, rng: &mut ChaCha8Rng) {
        let e = rng.random_range(0..g.m());
        let (c, p) = g.edges()[e];
        if self.edge_in[e] {
            if self.is_perfect(g) {
                self.remove(g, e);
            }
            return;
        }
        match (self.candidate_match[c], self.position_match[p]) {
            (None, None) => {
                if !self.is_perfect(g) {
                    self.add(g, e);
                }
            }
            (Some(f), None) => {
                if !self.is_perfect(g) {
                    self.remove(g, f);
                    self.add(g, e);
                }
            }
            (None, Some(f)) => {
                if !self.is_perfect(g) {
                    self.remove(g, f);
                    self.add(g, e);
                }
            }
            (Some(_), Some(_)) => {}
        }
    }

    fn edge_ids(&self) -> Vec<usize> {
        self.edge_in
            .iter()
            .enumerate()
            .filter_map(|(e, &b)| b.then_some(e))
            .collect()
    }
}

enum Backend {
    Exact { class: Vec<Matching> },
    Mcmc { aug: AugmentedGraph, start: Matching },
}

/// A seeded sampler bound to one graph. Owns its random stream.
pub struct MatchingSampler {
    base: BipartiteGraph,
    cfg: SamplerConfig,
    rng: ChaCha8Rng,
    backend: Backend,
}

impl MatchingSampler {
    pub fn new(g: &BipartiteGraph, cfg: SamplerConfig) -> Result<Self> {
        cfg.validate()?;
        let backend = match cfg.mode {
            SamplerMode::Exact => Backend::Exact {
                class: enumerate_maximum_matchings(g, &ConstraintPair::empty(), DEFAULT_ENUMERATION_CAP)?,
            },
            SamplerMode::Mcmc => {
                let aug = augment(g);
                // Deterministic walk start: the lexicographically smallest
                // perfect matching of the augmented graph.
                let start = mwmc_raw(
                    aug.graph(),
                    &vec![0.0; aug.graph().m()],
                    &ConstraintPair::empty(),
                )?;
                Backend::Mcmc { aug, start }
            }
        };
        Ok(Self {
            base: g.clone(),
            cfg,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            backend,
        })
    }

    pub fn config(&self) -> &SamplerConfig {
        &self.cfg
    }

    /// Number of matchings in the decision class (exact mode only).
    pub fn class_size(&self) -> Option<usize> {
        match &self.backend {
            Backend::Exact { class } => Some(class.len()),
            Backend::Mcmc { .. } => None,
        }
    }

    /// Draws one matching.
    pub fn sample(&mut self) -> Result<Matching> {
        match &self.backend {
            Backend::Exact { class } => {
                let idx = self.rng.random_range(0..class.len());
                Ok(class[idx].clone())
            }
            Backend::Mcmc { aug, start } => {
                let g = aug.graph();
                let mut state = WalkState::from_matching(g, start);
                let max_segments = 100u64;
                for _ in 0..max_segments {
                    for _ in 0..self.cfg.mcmc_steps {
                        state.step(g, &mut self.rng);
                    }
                    if state.is_perfect(g) {
                        return aug.project(&self.base, &state.edge_ids());
                    }
                }
                Err(Error::NotMixed {
                    steps: max_segments * self.cfg.mcmc_steps,
                })
            }
        }
    }
}

/// Total variation distance between two distributions on the same support.
pub fn tv_distance(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p
        .iter()
        .zip(q)
        .map(|(a, b)| (a - b).abs())
        .sum::<f64>()
}

/// Total variation of an empirical histogram against the uniform target.
pub fn tv_distance_uniform(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    let k = counts.len() as f64;
    let empirical: Vec<f64> = counts.iter().map(|&c| c as f64 / total as f64).collect();
    let uniform = vec![1.0 / k; counts.len()];
    tv_distance(&empirical, &uniform)
}
