//! Borda-winner identification from duel feedback.
//!
//! Each edge is treated as a bandit arm whose reward is its average win
//! probability against a uniformly drawn matching; the sum of arm rewards
//! over a matching is proportional to its Borda score, so the Borda winner
//! is the reward-maximizing matching. Both algorithms keep per-edge running
//! means, call the max-weight matching oracle on plain and padding-adjusted
//! weights, stop when the adjusted optimum stops beating the plain one, and
//! otherwise duel the widest-radius edge in the symmetric difference against
//! a sampled matching.
//!
//! [`clucb_borda_pac`] returns an epsilon-approximate winner; the exact
//! variant [`clucb_borda_exact`] wraps it in epochs with halving accuracy
//! and a strict-equality stop.

use crate::env::{DuelEnvironment, DuelStats};
use crate::error::{Error, Result};
use crate::graph::{mwmc_raw, BipartiteGraph, ConstraintPair, Matching};
use crate::sampler::{MatchingSampler, SamplerConfig};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Adjusted-weight equality tolerance for the exact stopping rule. Together
/// with the lexicographic oracle tie-break, an adjusted optimum within this
/// distance of the plain optimum means the two matchings coincide.
pub const EQUALITY_TOL: f64 = 1e-9;

/// Default cap on environment samples per run.
pub const DEFAULT_SAMPLE_CAP: u64 = 100_000_000;

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BordaStop {
    PacGapClosed,
    ExactEquality,
}

/// Per-epoch log of the exact variant.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpochLog {
    pub q: u32,
    pub epsilon: f64,
    pub delta: f64,
    pub rounds: u64,
}

/// Trace of one run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BordaTrace {
    pub rounds: u64,
    /// Environment samples consumed (self-duels excluded).
    pub samples: u64,
    /// Pulls per edge, cumulative over epochs.
    pub pulls: Vec<u64>,
    pub stop: BordaStop,
    pub epochs: Vec<EpochLog>,
    /// Duels where the sampled matching held the pulled edge itself; these
    /// resolve to a local fair coin and consume no environment sample.
    pub self_duels: u64,
}

struct RoundDecision {
    current: Matching,
    adjusted: Matching,
    gap: f64,
}

/// One oracle round: the plain argmax, the padding-adjusted argmax, and the
/// adjusted-weight gap between them.
fn compute_round(
    g: &BipartiteGraph,
    stats: &DuelStats,
    t: u64,
    delta: f64,
    pad: f64,
) -> Result<RoundDecision> {
    let k = g.duel_count();
    let current = mwmc_raw(g, stats.edge_means(), &ConstraintPair::empty())?;
    let mut adjusted_w = vec![0.0; g.m()];
    for e in 0..g.m() {
        let c = stats.edge_radius(e, t, delta, k);
        let mean = stats.edge_mean(e);
        adjusted_w[e] = if current.contains(e) {
            mean - c - pad
        } else {
            mean + c + pad
        };
    }
    let adjusted = mwmc_raw(g, &adjusted_w, &ConstraintPair::empty())?;
    let gap = adjusted.total_weight(&adjusted_w) - current.total_weight(&adjusted_w);
    Ok(RoundDecision {
        current,
        adjusted,
        gap,
    })
}

/// The widest-radius edge in the symmetric difference, ties to the smallest
/// index.
fn pick_arm(g: &BipartiteGraph, stats: &DuelStats, t: u64, delta: f64, d: &RoundDecision) -> usize {
    let k = g.duel_count();
    let mut best = usize::MAX;
    let mut best_c = f64::NEG_INFINITY;
    for e in 0..g.m() {
        if d.current.contains(e) == d.adjusted.contains(e) {
            continue;
        }
        let c = stats.edge_radius(e, t, delta, k);
        if c > best_c {
            best_c = c;
            best = e;
        }
    }
    best
}

enum EpochOutcome {
    Stopped(Matching, BordaStop),
    NextEpoch,
}

struct EpochParams {
    delta: f64,
    epsilon: f64,
    /// Exact mode adds the strict-equality stop and breaks epochs on the
    /// PAC condition instead of stopping.
    exact: bool,
}

#[allow(clippy::too_many_arguments)]
fn run_epoch(
    env: &mut DuelEnvironment,
    g: &BipartiteGraph,
    sampler: &mut MatchingSampler,
    coin: &mut ChaCha8Rng,
    params: &EpochParams,
    sample_cap: u64,
    start_samples: u64,
    trace: &mut BordaTrace,
) -> Result<(EpochOutcome, u64)> {
    let mut stats = DuelStats::new(g.m());
    let pad = params.epsilon / 4.0;
    let mut rounds = 0u64;
    for t in 1u64.. {
        let d = compute_round(g, &stats, t, params.delta, pad)?;
        if params.exact {
            if d.gap <= EQUALITY_TOL {
                return Ok((EpochOutcome::Stopped(d.current, BordaStop::ExactEquality), rounds));
            }
            if d.gap <= g.n_positions() as f64 * params.epsilon {
                return Ok((EpochOutcome::NextEpoch, rounds));
            }
        } else if d.gap <= g.n_positions() as f64 * params.epsilon {
            return Ok((EpochOutcome::Stopped(d.current, BordaStop::PacGapClosed), rounds));
        }

        let z = pick_arm(g, &stats, t, params.delta, &d);
        let drawn = sampler.sample()?;
        let opponent = drawn.edge_at(g.position_of(z));
        let won = if opponent == z {
            // Self-duel: a certain coin flip, resolved locally.
            trace.self_duels += 1;
            coin.random::<f64>() < 0.5
        } else {
            if env.total_samples() - start_samples >= sample_cap {
                return Err(Error::BudgetExceeded { cap: sample_cap });
            }
            env.sample_duel(z, opponent)?
        };
        stats.record_edge_pull(z, won);
        trace.pulls[z] += 1;
        rounds += 1;
        trace.rounds += 1;
    }
    unreachable!()
}

/// PAC identification: with probability at least `1 - delta` the returned
/// matching's Borda score is within `epsilon` of the best.
pub fn clucb_borda_pac(
    env: &mut DuelEnvironment,
    g: &BipartiteGraph,
    delta: f64,
    epsilon: f64,
    sampler_cfg: SamplerConfig,
    sample_cap: u64,
) -> Result<(Matching, BordaTrace)> {
    if !(0.0..1.0).contains(&delta) || delta == 0.0 {
        return Err(Error::invalid("delta must lie in (0, 1)"));
    }
    if epsilon <= 0.0 {
        return Err(Error::invalid("epsilon must be positive"));
    }
    let mut sampler = MatchingSampler::new(g, sampler_cfg.with_eta(bias_for(epsilon)))?;
    let mut coin = coin_rng(&sampler_cfg);
    let mut trace = new_trace(g);
    let start = env.total_samples();
    let params = EpochParams {
        delta,
        epsilon,
        exact: false,
    };
    let (outcome, rounds) = run_epoch(
        env,
        g,
        &mut sampler,
        &mut coin,
        &params,
        sample_cap,
        start,
        &mut trace,
    )?;
    trace.epochs.push(EpochLog {
        q: 0,
        epsilon,
        delta,
        rounds,
    });
    trace.samples = env.total_samples() - start;
    match outcome {
        EpochOutcome::Stopped(m, stop) => {
            trace.stop = stop;
            Ok((m, trace))
        }
        EpochOutcome::NextEpoch => unreachable!("pac mode stops in its only epoch"),
    }
}

/// Exact identification: with probability at least `1 - delta` returns the
/// Borda winner itself. Runs PAC epochs with halving accuracy `2^-q` and
/// confidence `delta / (2 q^2)`, resetting statistics each epoch, until the
/// adjusted and plain optima coincide.
pub fn clucb_borda_exact(
    env: &mut DuelEnvironment,
    g: &BipartiteGraph,
    delta: f64,
    sampler_cfg: SamplerConfig,
    sample_cap: u64,
) -> Result<(Matching, BordaTrace)> {
    if !(0.0..1.0).contains(&delta) || delta == 0.0 {
        return Err(Error::invalid("delta must lie in (0, 1)"));
    }
    let mut sampler = MatchingSampler::new(g, sampler_cfg)?;
    let mut coin = coin_rng(&sampler_cfg);
    let mut trace = new_trace(g);
    let start = env.total_samples();
    for q in 1u32.. {
        let epsilon = 0.5f64.powi(q as i32);
        let delta_q = delta / (2.0 * (q as f64) * (q as f64));
        let params = EpochParams {
            delta: delta_q,
            epsilon,
            exact: true,
        };
        let (outcome, rounds) = run_epoch(
            env,
            g,
            &mut sampler,
            &mut coin,
            &params,
            sample_cap,
            start,
            &mut trace,
        )?;
        trace.epochs.push(EpochLog {
            q,
            epsilon,
            delta: delta_q,
            rounds,
        });
        if let EpochOutcome::Stopped(m, stop) = outcome {
            trace.stop = stop;
            trace.samples = env.total_samples() - start;
            return Ok((m, trace));
        }
    }
    unreachable!()
}

/// Sampler bias consumed by the PAC algorithm.
fn bias_for(epsilon: f64) -> f64 {
    (epsilon / 8.0).min(0.999)
}

/// Local stream for resolving self-duels, decoupled from both the
/// environment and the sampler streams.
fn coin_rng(cfg: &SamplerConfig) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9e37_79b9_7f4a_7c15)
}

fn new_trace(g: &BipartiteGraph) -> BordaTrace {
    BordaTrace {
        rounds: 0,
        samples: 0,
        pulls: vec![0; g.m()],
        stop: BordaStop::PacGapClosed,
        epochs: Vec::new(),
        self_duels: 0,
    }
}
