//! Condorcet-winner identification: accept/reject exploration, verification,
//! and parallel simulation.
//!
//! [`CarCond`] partitions the edge set into accepted, rejected, and
//! undecided edges. Every round it duels each undecided comparable pair
//! once, rebuilds the confidence-bound matrices, and asks the minimax oracle
//! whether forcing an edge in or out changes the attainable game value by
//! more than the epoch accuracy; decisive edges move to the accepted or
//! rejected set. The run ends when the accepted set is a full matching.
//!
//! Oracle checks are expensive relative to duels, so the driver keeps, per
//! edge, a certified window of future rounds in which no contract-compliant
//! oracle output could classify it (bound-matrix entries move slowly and
//! the oracle reports certified value enclosures). Skipped checks are
//! provably no-ops: classification rounds, traces, and sample streams are
//! identical to running the checks every round, which `use_skip_ahead:
//! false` does.
//!
//! [`CarVerify`] first runs exploration at a fixed constant confidence to
//! obtain a hypothesis, then verifies it with cheap per-pair duels against
//! the strongest challenger, returning either the hypothesis or a rejection.
//! [`CarParallel`] interleaves verifiers of geometrically increasing
//! confidence at single-sample granularity.

use crate::env::{DuelEnvironment, DuelStats};
use crate::error::{Error, Result};
use crate::graph::{feasible, mwmc_raw, BipartiteGraph, ConstraintPair, Matching};
use crate::oracle::{exact_game_value, minimax_oracle, OracleConfig};
use crate::preference::SquareMatrix;
use serde::{Deserialize, Serialize};

/// Default cap on environment samples per run.
pub const DEFAULT_SAMPLE_CAP: u64 = 100_000_000;

/// Rounds past this bound abort the run; reached only by fast-forwarding
/// through provably idle stretches, which signals a stalled instance (for
/// example when no Condorcet winner exists).
const ROUND_CAP: u64 = 1 << 44;

/// Which solver backs the four per-edge oracle calls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleBackend {
    /// Projected subgradient ascent with Frank-Wolfe projections.
    Fptas,
    /// Enumerated zero-sum game, solved exactly (desk-scale instances).
    Exact,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CondConfig {
    pub delta: f64,
    pub oracle: OracleConfig,
    pub backend: OracleBackend,
    pub sample_cap: u64,
    /// Certified skipping of provably idle oracle checks.
    pub use_skip_ahead: bool,
    /// Record whether the hidden truth stayed inside the bound matrices.
    pub monitor_coverage: bool,
    /// Log every sampled pair (small runs only).
    pub record_sampled_pairs: bool,
}

impl CondConfig {
    pub fn new(delta: f64) -> Self {
        Self {
            delta,
            oracle: OracleConfig::default(),
            backend: OracleBackend::Fptas,
            sample_cap: DEFAULT_SAMPLE_CAP,
            use_skip_ahead: true,
            monitor_coverage: true,
            record_sampled_pairs: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.delta) || self.delta == 0.0 {
            return Err(Error::invalid("delta must lie in (0, 1)"));
        }
        Ok(())
    }
}

/// One accept/reject event.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassificationEvent {
    pub edge: usize,
    pub round: u64,
    pub epoch: u32,
    pub accepted: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CondTrace {
    pub rounds: u64,
    pub samples: u64,
    pub events: Vec<ClassificationEvent>,
    pub oracle_calls: u64,
    pub edge_checks: u64,
    /// False when the hidden truth ever escaped the bound matrices
    /// (monitoring only; the algorithm never sees it).
    pub coverage_ok: bool,
    pub sampled_pairs: Option<Vec<(u64, usize, usize)>>,
}

/// Certified value enclosure from one oracle call.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct Enclosure {
    value: f64,
    lower: f64,
    upper: f64,
}

/// Per-edge check record backing the skip-ahead schedule.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct SkipEntry {
    version: u64,
    next_check: u64,
}

/// Structural feasibility of forcing an edge in or out, cached per
/// constraint version.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct FeasEntry {
    version: u64,
    in_feasible: bool,
    ex_feasible: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
enum Phase {
    StartRound,
    Sampling { pairs: Vec<(usize, usize)>, next: usize },
    Checking,
}

/// Outcome of advancing a resumable run by one environment sample.
#[derive(Debug, Clone)]
pub enum Step<T> {
    Sampled,
    Done(T),
}

/// Resumable accept/reject exploration. Suspend points sit immediately
/// after each environment sample, so interleaved drivers see identical
/// decision sequences to an uninterrupted run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CarCond {
    g: BipartiteGraph,
    cfg: CondConfig,
    in_accepted: Vec<bool>,
    in_rejected: Vec<bool>,
    n_accepted: usize,
    round: u64,
    epoch: u32,
    epoch_end: u64,
    phase: Phase,
    stats: DuelStats,
    start_samples: Option<u64>,
    trace: CondTrace,
    skip: Vec<SkipEntry>,
    feas: Vec<FeasEntry>,
    constraint_version: u64,
}

impl CarCond {
    pub fn new(g: &BipartiteGraph, cfg: CondConfig) -> Result<Self> {
        cfg.validate()?;
        let m = g.m();
        Ok(Self {
            g: g.clone(),
            cfg,
            in_accepted: vec![false; m],
            in_rejected: vec![false; m],
            n_accepted: 0,
            round: 0,
            epoch: 1,
            epoch_end: 4,
            phase: Phase::StartRound,
            stats: DuelStats::new(m),
            start_samples: None,
            trace: CondTrace {
                rounds: 0,
                samples: 0,
                events: Vec::new(),
                oracle_calls: 0,
                edge_checks: 0,
                coverage_ok: true,
                sampled_pairs: cfg.record_sampled_pairs.then(Vec::new),
            },
            skip: (0..m)
                .map(|_| SkipEntry {
                    version: 0,
                    next_check: 0,
                })
                .collect(),
            feas: vec![
                FeasEntry {
                    version: 0,
                    in_feasible: false,
                    ex_feasible: false,
                };
                m
            ],
            constraint_version: 1,
        })
    }

    pub fn trace(&self) -> &CondTrace {
        &self.trace
    }

    fn undecided(&self, e: usize) -> bool {
        !self.in_accepted[e] && !self.in_rejected[e]
    }

    fn epsilon_q(&self) -> f64 {
        0.5f64.powi(self.epoch as i32)
    }

    fn accepted_ids(&self) -> Vec<usize> {
        (0..self.g.m()).filter(|&e| self.in_accepted[e]).collect()
    }

    fn rejected_ids(&self) -> Vec<usize> {
        (0..self.g.m()).filter(|&e| self.in_rejected[e]).collect()
    }

    /// Advances until exactly one environment sample is consumed or the run
    /// finishes. Non-sampling work (round starts, oracle checks) happens on
    /// the way.
    pub fn advance_one_sample(&mut self, env: &mut DuelEnvironment) -> Result<Step<Matching>> {
        if self.start_samples.is_none() {
            self.start_samples = Some(env.total_samples());
        }
        loop {
            match &mut self.phase {
                Phase::StartRound => {
                    self.round += 1;
                    if self.round > ROUND_CAP {
                        return Err(Error::BudgetExceeded {
                            cap: self.cfg.sample_cap,
                        });
                    }
                    while self.round > self.epoch_end {
                        self.epoch += 1;
                        self.epoch_end = 4u64.pow(self.epoch);
                    }
                    let mut pairs = Vec::new();
                    for (a, b) in self.g.comparable_pairs() {
                        if self.undecided(a) && self.undecided(b) {
                            pairs.push((a, b));
                        }
                    }
                    self.phase = if pairs.is_empty() {
                        Phase::Checking
                    } else {
                        Phase::Sampling { pairs, next: 0 }
                    };
                }
                Phase::Sampling { pairs, next } => {
                    let (a, b) = pairs[*next];
                    *next += 1;
                    let finished_round = *next == pairs.len();
                    if finished_round {
                        self.phase = Phase::Checking;
                    }
                    if self.trace.samples >= self.cfg.sample_cap {
                        return Err(Error::BudgetExceeded {
                            cap: self.cfg.sample_cap,
                        });
                    }
                    let won = env.sample_duel(a, b)?;
                    self.stats.record_pair(a, b, won);
                    self.trace.samples += 1;
                    let round = self.round;
                    if let Some(log) = &mut self.trace.sampled_pairs {
                        log.push((round, a, b));
                    }
                    return Ok(Step::Sampled);
                }
                Phase::Checking => {
                    if let Some(out) = self.run_checks(env)? {
                        return Ok(Step::Done(out));
                    }
                    self.phase = Phase::StartRound;
                    self.maybe_fast_forward();
                }
            }
        }
    }

    /// Runs this round's per-edge oracle checks against the constraint sets
    /// frozen at round start. Returns the output matching once the accepted
    /// set is full.
    fn run_checks(&mut self, env: &DuelEnvironment) -> Result<Option<Matching>> {
        self.trace.rounds = self.round;
        let (upper, lower) = self
            .stats
            .bound_matrices(&self.g, self.round, self.cfg.delta);
        if self.cfg.monitor_coverage && self.trace.coverage_ok {
            self.trace.coverage_ok = env.truth_within_bounds(&upper, &lower);
        }
        let snapshot_a = self.accepted_ids();
        let snapshot_r = self.rejected_ids();
        let version = self.constraint_version;
        let eps = self.epsilon_q();
        for e in 0..self.g.m() {
            // Edges classified earlier in this round would re-derive the
            // same decision from the same snapshot, so skipping them is
            // behavior-preserving.
            if !self.undecided(e) {
                continue;
            }
            if self.cfg.use_skip_ahead {
                let entry = &self.skip[e];
                if entry.version == version && entry.next_check > self.round {
                    continue;
                }
            }
            self.trace.edge_checks += 1;
            let decision =
                self.check_edge(e, &snapshot_a, &snapshot_r, version, eps, &upper, &lower)?;
            if let Some(accepted) = decision {
                self.classify(e, accepted);
                if self.n_accepted == self.g.n_positions() {
                    let m = Matching::from_edge_ids(&self.g, self.accepted_ids())?;
                    return Ok(Some(m));
                }
            }
        }
        Ok(None)
    }

    fn classify(&mut self, e: usize, accepted: bool) {
        if accepted {
            self.in_accepted[e] = true;
            self.n_accepted += 1;
        } else {
            self.in_rejected[e] = true;
        }
        self.constraint_version += 1;
        self.trace.events.push(ClassificationEvent {
            edge: e,
            round: self.round,
            epoch: self.epoch,
            accepted,
        });
    }

    /// Four oracle calls for an undecided edge; `Some(true)` accepts,
    /// `Some(false)` rejects. Structural infeasibilities resolve without
    /// oracle calls: an edge conflicting with the accepted set can only be
    /// rejected, an edge present in every surviving matching can only be
    /// accepted.
    fn check_edge(
        &mut self,
        e: usize,
        snapshot_a: &[usize],
        snapshot_r: &[usize],
        version: u64,
        eps: f64,
        upper: &SquareMatrix,
        lower: &SquareMatrix,
    ) -> Result<Option<bool>> {
        if self.feas[e].version != version {
            let with_e = {
                let mut a = snapshot_a.to_vec();
                a.push(e);
                ConstraintPair::new(&self.g, a, snapshot_r.to_vec())
            };
            let in_feasible = match &with_e {
                Ok(c) => feasible(&self.g, c),
                Err(_) => false,
            };
            let ex_feasible = {
                let mut r = snapshot_r.to_vec();
                r.push(e);
                feasible(&self.g, &ConstraintPair::new(&self.g, snapshot_a.to_vec(), r)?)
            };
            self.feas[e] = FeasEntry {
                version,
                in_feasible,
                ex_feasible,
            };
        }
        if !self.feas[e].in_feasible {
            return Ok(Some(false));
        }
        if !self.feas[e].ex_feasible {
            return Ok(Some(true));
        }
        let with_e = {
            let mut a = snapshot_a.to_vec();
            a.push(e);
            ConstraintPair::new(&self.g, a, snapshot_r.to_vec())?
        };
        let without_e = {
            let mut r = snapshot_r.to_vec();
            r.push(e);
            ConstraintPair::new(&self.g, snapshot_a.to_vec(), r)?
        };
        let base = ConstraintPair::new(&self.g, snapshot_a.to_vec(), snapshot_r.to_vec())?;

        let in_upper = self.call_oracle(&with_e, &base, upper, eps)?;
        let in_lower = self.call_oracle(&with_e, &base, lower, eps)?;
        let ex_upper = self.call_oracle(&without_e, &base, upper, eps)?;
        let ex_lower = self.call_oracle(&without_e, &base, lower, eps)?;

        if in_lower.value > ex_upper.value + eps {
            return Ok(Some(true));
        }
        if ex_lower.value > in_upper.value + eps {
            return Ok(Some(false));
        }

        if self.cfg.use_skip_ahead {
            // Next round at which either condition could fire. Firing needs
            // the oracle value on one side to exceed the other side's value
            // plus epsilon; with values certified to within kappa*epsilon of
            // the true game values, that requires the bound matrices to
            // drift by half of (certified deficit + (1-kappa)*epsilon).
            let accept_deficit = ex_upper.lower - in_lower.upper;
            let reject_deficit = in_upper.lower - ex_lower.upper;
            let deficit = accept_deficit.min(reject_deficit);
            let horizon = self.max_idle_rounds(deficit, self.oracle_kappa());
            if std::env::var_os("CPEDB_SKIP_DEBUG").is_some() && self.round % 977 == 0 {
                eprintln!(
                    "t={} e={} eps={:.5} dA={:.5} dR={:.5} k*={} drift1={:.6}",
                    self.round, e, eps, accept_deficit, reject_deficit, horizon,
                    self.drift_bound(1)
                );
            }
            self.skip[e] = SkipEntry {
                version,
                next_check: self.round + 1 + horizon,
            };
        }
        Ok(None)
    }

    fn oracle_kappa(&self) -> f64 {
        self.cfg.oracle.certify_factor.clamp(1e-3, 1.0)
    }

    /// Epoch accuracy in force at a given round.
    fn epsilon_at_round(round: u64) -> f64 {
        let mut q = 1u32;
        let mut end = 4u64;
        while round > end {
            q += 1;
            end = end.saturating_mul(4);
        }
        0.5f64.powi(q as i32)
    }

    fn call_oracle(
        &mut self,
        c1: &ConstraintPair,
        c2: &ConstraintPair,
        q: &SquareMatrix,
        eps: f64,
    ) -> Result<Enclosure> {
        self.trace.oracle_calls += 1;
        match self.cfg.backend {
            OracleBackend::Fptas => {
                let r = minimax_oracle(&self.g, c1, c2, q, eps, &self.cfg.oracle)?;
                Ok(Enclosure {
                    value: r.value,
                    lower: r.lower,
                    upper: r.upper,
                })
            }
            OracleBackend::Exact => {
                if !feasible(&self.g, c1) {
                    return Ok(Enclosure {
                        value: -1.0,
                        lower: -1.0,
                        upper: -1.0,
                    });
                }
                let tol = eps * self.oracle_kappa();
                let v = exact_game_value(&self.g, c1, c2, q, tol, self.g.m().max(24))?;
                Ok(Enclosure {
                    value: v - tol * 0.5,
                    lower: v - tol * 0.5,
                    upper: v + tol * 0.5,
                })
            }
        }
    }

    /// Largest `k` such that neither classification condition can fire
    /// within the next `k` rounds, assuming the undecided set stays fixed
    /// (any classification resets the schedule). A condition firing at
    /// round `t + k` requires `2 * drift(k) > deficit + (1 - kappa) *
    /// epsilon(t + k)`; both sides are monotone in `k`, so binary search
    /// finds the frontier.
    fn max_idle_rounds(&self, deficit: f64, kappa: f64) -> u64 {
        let idle = |k: u64| {
            let slack = (1.0 - kappa) * Self::epsilon_at_round(self.round + k);
            2.0 * self.drift_bound(k) + 1e-9 <= deficit + slack
        };
        if !idle(1) {
            return 0;
        }
        let mut lo = 1u64;
        let mut hi = 2u64;
        let limit = self.round.max(1024) * 8;
        while hi <= limit && idle(hi) {
            lo = hi;
            hi *= 2;
        }
        while lo + 1 < hi {
            let mid = lo + (hi - lo) / 2;
            if idle(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Upper bound on how much any comparable bound-matrix entry can change
    /// between round `t` and round `t + k`. Undecided pairs gain one sample
    /// per round (mean drift at most k/(T+k) plus the radius change); pairs
    /// touching classified edges keep frozen means while their radius grows
    /// with the log term.
    fn drift_bound(&self, k: u64) -> f64 {
        let t = self.round;
        let delta = self.cfg.delta;
        let kk = self.g.duel_count();
        let mut worst: f64 = 0.0;
        for (a, b) in self.g.comparable_pairs() {
            let n = self.stats.pair_count(a, b);
            if n == 0 {
                // Entries are clamped at the trivial bounds and stay there.
                continue;
            }
            let c_now = crate::env::confidence_radius(t, n, delta, kk);
            let live = self.undecided(a) && self.undecided(b);
            let d = if live {
                let mean_drift = k as f64 / (n + k) as f64;
                let c_frozen = crate::env::confidence_radius(t + k, n, delta, kk);
                let c_resampled = crate::env::confidence_radius(t + k, n + k, delta, kk);
                let radius_change = (c_frozen - c_now).max(0.0).max((c_now - c_resampled).max(0.0));
                mean_drift + radius_change
            } else {
                crate::env::confidence_radius(t + k, n, delta, kk) - c_now
            };
            worst = worst.max(d);
        }
        worst
    }

    /// With no pair left to sample, jumps directly to the earliest round at
    /// which any edge is due for a check again. The skipped rounds sample
    /// nothing and provably classify nothing.
    fn maybe_fast_forward(&mut self) {
        if !self.cfg.use_skip_ahead {
            return;
        }
        let any_pair = self
            .g
            .comparable_pairs()
            .into_iter()
            .any(|(a, b)| self.undecided(a) && self.undecided(b));
        if any_pair {
            return;
        }
        let next = (0..self.g.m())
            .filter(|&e| self.undecided(e))
            .map(|e| {
                let s = &self.skip[e];
                if s.version == self.constraint_version {
                    s.next_check
                } else {
                    self.round + 1
                }
            })
            .min();
        if let Some(next) = next {
            if next > self.round + 1 {
                self.round = next - 1;
            }
        }
    }
}

/// Runs accept/reject exploration to completion.
pub fn car_cond(
    env: &mut DuelEnvironment,
    g: &BipartiteGraph,
    cfg: CondConfig,
) -> Result<(Matching, CondTrace)> {
    let mut run = CarCond::new(g, cfg)?;
    loop {
        match run.advance_one_sample(env)? {
            Step::Sampled => {}
            Step::Done(m) => {
                let trace = run.trace().clone();
                return Ok((m, trace));
            }
        }
    }
}

/// Exact best response against a fixed matching: maximizes
/// `f(M, fixed, q)` over matchings other than `fixed` by one constrained
/// max-weight solve per position, each excluding one edge of `fixed`.
pub fn second_best_response(
    fixed: &Matching,
    q: &SquareMatrix,
    g: &BipartiteGraph,
) -> Result<(Matching, f64)> {
    let mut weights = vec![0.0; g.m()];
    for (e, w) in weights.iter_mut().enumerate() {
        *w = q.get(e, fixed.edge_at(g.position_of(e)));
    }
    let l = g.n_positions();
    let mut best: Option<(Matching, f64)> = None;
    for j in 0..l {
        let excluded = fixed.edge_at(j);
        let c = ConstraintPair::new(g, vec![], vec![excluded])?;
        let m = match mwmc_raw(g, &weights, &c) {
            Ok(m) => m,
            Err(Error::InfeasibleConstraints { .. }) => continue,
            Err(e) => return Err(e),
        };
        let value = m.total_weight(&weights) / l as f64;
        let better = match &best {
            None => true,
            Some((bm, bv)) => value > *bv + 1e-15 || ((value - bv).abs() <= 1e-15 && m < *bm),
        };
        if better {
            best = Some((m, value));
        }
    }
    best.ok_or_else(|| Error::invalid("decision class has a single matching"))
}

/// Verification outcome: the verified hypothesis or a rejection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum VerifyOutcome {
    Winner(Matching),
    Rejected,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyTrace {
    pub explore_samples: u64,
    pub verify_samples: u64,
    pub verify_rounds: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
enum VerifyPhase {
    Explore(Box<CarCond>),
    Verify { hypothesis: Matching },
}

/// Resumable verification run: exploration at the fixed constant confidence
/// 0.01, then challenger duels at the requested confidence.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CarVerify {
    g: BipartiteGraph,
    delta: f64,
    sample_cap: u64,
    phase: VerifyPhase,
    stats: DuelStats,
    t: u64,
    trace: VerifyTrace,
}

/// Exploration confidence used to form the hypothesis.
pub const VERIFY_EXPLORE_DELTA: f64 = 0.01;

impl CarVerify {
    pub fn new(g: &BipartiteGraph, delta: f64, base: CondConfig) -> Result<Self> {
        if delta >= VERIFY_EXPLORE_DELTA {
            return Err(Error::invalid(format!(
                "verification delta must be below {VERIFY_EXPLORE_DELTA}"
            )));
        }
        let explorer = CarCond::new(
            g,
            CondConfig {
                delta: VERIFY_EXPLORE_DELTA,
                ..base
            },
        )?;
        Ok(Self {
            g: g.clone(),
            delta,
            sample_cap: base.sample_cap,
            phase: VerifyPhase::Explore(Box::new(explorer)),
            stats: DuelStats::new(g.m()),
            t: 0,
            trace: VerifyTrace {
                explore_samples: 0,
                verify_samples: 0,
                verify_rounds: 0,
            },
        })
    }

    pub fn trace(&self) -> &VerifyTrace {
        &self.trace
    }

    pub fn hypothesis(&self) -> Option<&Matching> {
        match &self.phase {
            VerifyPhase::Verify { hypothesis } => Some(hypothesis),
            VerifyPhase::Explore(_) => None,
        }
    }

    pub fn advance_one_sample(&mut self, env: &mut DuelEnvironment) -> Result<Step<VerifyOutcome>> {
        loop {
            match &mut self.phase {
                VerifyPhase::Explore(run) => match run.advance_one_sample(env)? {
                    Step::Sampled => {
                        self.trace.explore_samples += 1;
                        return Ok(Step::Sampled);
                    }
                    Step::Done(m) => {
                        self.phase = VerifyPhase::Verify { hypothesis: m };
                    }
                },
                VerifyPhase::Verify { hypothesis } => {
                    self.t += 1;
                    self.trace.verify_rounds = self.t;
                    let (upper, lower) =
                        self.stats.bound_matrices(&self.g, self.t, self.delta);
                    let (_, pessimistic) = second_best_response(hypothesis, &lower, &self.g)?;
                    if pessimistic >= 0.5 {
                        return Ok(Step::Done(VerifyOutcome::Rejected));
                    }
                    let (challenger, optimistic) =
                        second_best_response(hypothesis, &upper, &self.g)?;
                    if optimistic <= 0.5 {
                        return Ok(Step::Done(VerifyOutcome::Winner(hypothesis.clone())));
                    }
                    // Widest-radius duel across the positions where the
                    // challenger and the hypothesis differ.
                    let k = self.g.duel_count();
                    let mut pick: Option<(usize, usize, f64)> = None;
                    for j in 0..self.g.n_positions() {
                        let e = challenger.edge_at(j);
                        let f = hypothesis.edge_at(j);
                        if e == f {
                            continue;
                        }
                        let c = self.stats.pair_radius(e, f, self.t, self.delta, k);
                        let better = match pick {
                            None => true,
                            Some((pe, pf, pc)) => {
                                c > pc || (c == pc && (e, f) < (pe, pf))
                            }
                        };
                        if better {
                            pick = Some((e, f, c));
                        }
                    }
                    let (e, f, _) = pick.expect("distinct matchings differ somewhere");
                    if self.trace.explore_samples + self.trace.verify_samples >= self.sample_cap {
                        return Err(Error::BudgetExceeded {
                            cap: self.sample_cap,
                        });
                    }
                    let won = env.sample_duel(e, f)?;
                    self.stats.record_pair(e, f, won);
                    self.trace.verify_samples += 1;
                    return Ok(Step::Sampled);
                }
            }
        }
    }
}

/// Runs verification to completion.
pub fn car_verify(
    env: &mut DuelEnvironment,
    g: &BipartiteGraph,
    delta: f64,
    base: CondConfig,
) -> Result<(VerifyOutcome, VerifyTrace)> {
    let mut run = CarVerify::new(g, delta, base)?;
    loop {
        match run.advance_one_sample(env)? {
            Step::Sampled => {}
            Step::Done(out) => {
                let trace = run.trace().clone();
                return Ok((out, trace));
            }
        }
    }
}

/// Instances advanced at tick `t`: all `k` with `t mod 2^k == 0`, ascending.
pub fn parallel_schedule(t: u64) -> Vec<u32> {
    debug_assert!(t >= 1);
    let mut ks = vec![0u32];
    let mut k = 1u32;
    while t % (1u64 << k) == 0 {
        ks.push(k);
        k += 1;
    }
    ks
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParallelTrace {
    pub ticks: u64,
    pub samples: u64,
    pub winner_instance: u32,
    pub retired: Vec<u32>,
    /// First advances as (tick, instance), capped.
    pub schedule_prefix: Vec<(u64, u32)>,
}

/// Interleaves verifier instances, instance `k` at confidence
/// `delta / 2^(k+1)` advanced one sample whenever `t mod 2^k == 0`. The
/// first answer wins; rejected instances retire.
pub fn car_parallel(
    env: &mut DuelEnvironment,
    g: &BipartiteGraph,
    delta: f64,
    base: CondConfig,
) -> Result<(Matching, ParallelTrace)> {
    if delta >= VERIFY_EXPLORE_DELTA {
        return Err(Error::invalid(format!(
            "parallel delta must be below {VERIFY_EXPLORE_DELTA}"
        )));
    }
    let mut instances: Vec<Option<CarVerify>> = Vec::new();
    let mut trace = ParallelTrace {
        ticks: 0,
        samples: 0,
        winner_instance: 0,
        retired: Vec::new(),
        schedule_prefix: Vec::new(),
    };
    let start = env.total_samples();
    for t in 1u64.. {
        trace.ticks = t;
        for k in parallel_schedule(t) {
            while instances.len() <= k as usize {
                let idx = instances.len() as u32;
                let delta_k = delta / 2f64.powi(idx as i32 + 1);
                instances.push(Some(CarVerify::new(g, delta_k, base)?));
            }
            let Some(instance) = instances[k as usize].as_mut() else {
                continue;
            };
            if trace.schedule_prefix.len() < 4096 {
                trace.schedule_prefix.push((t, k));
            }
            match instance.advance_one_sample(env) {
                Ok(Step::Sampled) => {}
                Ok(Step::Done(VerifyOutcome::Winner(m))) => {
                    trace.winner_instance = k;
                    trace.samples = env.total_samples() - start;
                    return Ok((m, trace));
                }
                Ok(Step::Done(VerifyOutcome::Rejected)) => {
                    trace.retired.push(k);
                    instances[k as usize] = None;
                }
                Err(Error::BudgetExceeded { .. }) => {
                    trace.retired.push(k);
                    instances[k as usize] = None;
                }
                Err(e) => return Err(e),
            }
            trace.samples = env.total_samples() - start;
            if trace.samples >= base.sample_cap {
                return Err(Error::BudgetExceeded {
                    cap: base.sample_cap,
                });
            }
        }
    }
    unreachable!()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demo;
    use crate::graph::enumerate_maximum_matchings;
    use crate::preference::{find_condorcet_winner, matching_score, PreferenceMatrix};

    fn fast_cfg(delta: f64) -> CondConfig {
        CondConfig {
            backend: OracleBackend::Fptas,
            ..CondConfig::new(delta)
        }
    }

    #[test]
    fn car_cond_finds_demo_winner() {
        let (g, p) = demo::demo_instance();
        let mut env = DuelEnvironment::new(p, 42);
        let (m, trace) = car_cond(&mut env, &g, fast_cfg(0.1)).unwrap();
        assert_eq!(m.edge_ids(), &[1, 4]);
        assert!(trace.coverage_ok);
        // Every accepted edge belongs to the winner, rejected ones do not.
        for ev in &trace.events {
            assert_eq!(ev.accepted, m.contains(ev.edge));
        }
    }

    #[test]
    fn single_position_dueling_bandit_case() {
        let g = BipartiteGraph::new(3, 1, vec![(0, 0), (1, 0), (2, 0)]).unwrap();
        let p =
            PreferenceMatrix::from_entries(&g, &[(0, 1, 0.9), (0, 2, 0.9), (1, 2, 0.5)]).unwrap();
        let mut env = DuelEnvironment::new(p, 7);
        let (m, trace) = car_cond(&mut env, &g, fast_cfg(0.1)).unwrap();
        assert_eq!(m.edge_ids(), &[0]);
        // The two dominated arms are rejected, never accepted.
        for ev in &trace.events {
            if ev.edge != 0 {
                assert!(!ev.accepted);
            }
        }
    }

    #[test]
    fn no_condorcet_winner_exhausts_budget_before_any_classification() {
        // Cyclic preferences at 0.6: no strict Condorcet winner exists. The
        // margins are too small for any classification within this cap, so
        // the run must end in budget exhaustion rather than a certificate.
        let g = BipartiteGraph::new(3, 1, vec![(0, 0), (1, 0), (2, 0)]).unwrap();
        let p =
            PreferenceMatrix::from_entries(&g, &[(0, 1, 0.6), (1, 2, 0.6), (0, 2, 0.4)]).unwrap();
        let class = enumerate_maximum_matchings(&g, &ConstraintPair::empty(), 24).unwrap();
        assert!(find_condorcet_winner(&p, &class).is_none());
        let mut cfg = fast_cfg(0.1);
        cfg.sample_cap = 10_000;
        let mut env = DuelEnvironment::new(p, 11);
        match car_cond(&mut env, &g, cfg) {
            Err(Error::BudgetExceeded { .. }) => {}
            other => panic!("expected budget exhaustion, got {other:?}"),
        }
    }

    #[test]
    fn symmetric_instance_cannot_classify_anything() {
        // All duels are fair coins: every oracle margin is exactly zero, so
        // no edge is ever classified and the budget is the only way out.
        let g = BipartiteGraph::new(3, 1, vec![(0, 0), (1, 0), (2, 0)]).unwrap();
        let p =
            PreferenceMatrix::from_entries(&g, &[(0, 1, 0.5), (1, 2, 0.5), (0, 2, 0.5)]).unwrap();
        let mut cfg = fast_cfg(0.1);
        cfg.sample_cap = 5_000;
        let mut env = DuelEnvironment::new(p, 2);
        let out = car_cond(&mut env, &g, cfg);
        assert!(matches!(out, Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn skip_ahead_is_output_equivalent() {
        let (g, p) = demo::demo_instance();
        // Moderate margins keep the no-skip run affordable.
        let run = |skip: bool| {
            let mut cfg = fast_cfg(0.2);
            cfg.use_skip_ahead = skip;
            cfg.sample_cap = 3_000_000;
            let mut env = DuelEnvironment::new(p.clone(), 1717);
            car_cond(&mut env, &g, cfg).unwrap()
        };
        let (m1, t1) = run(true);
        let (m2, t2) = run(false);
        assert_eq!(m1, m2);
        assert_eq!(t1.rounds, t2.rounds);
        assert_eq!(t1.samples, t2.samples);
        let ev1: Vec<(usize, u64, bool)> =
            t1.events.iter().map(|e| (e.edge, e.round, e.accepted)).collect();
        let ev2: Vec<(usize, u64, bool)> =
            t2.events.iter().map(|e| (e.edge, e.round, e.accepted)).collect();
        assert_eq!(ev1, ev2);
        // Skipping should do strictly less oracle work.
        assert!(t1.edge_checks <= t2.edge_checks);
    }

    #[test]
    fn sampling_discipline_only_undecided_pairs() {
        let (g, p) = demo::demo_instance();
        let mut cfg = fast_cfg(0.15);
        cfg.record_sampled_pairs = true;
        let mut env = DuelEnvironment::new(p, 99);
        let (_, trace) = car_cond(&mut env, &g, cfg).unwrap();
        let log = trace.sampled_pairs.as_ref().unwrap();
        // Rebuild the classification timeline and check every sample
        // touches two then-undecided edges.
        for &(round, a, b) in log {
            for ev in &trace.events {
                if ev.round < round {
                    assert_ne!(ev.edge, a, "sampled classified edge {a} at round {round}");
                    assert_ne!(ev.edge, b, "sampled classified edge {b} at round {round}");
                }
            }
        }
    }

    #[test]
    fn second_best_response_matches_enumeration() {
        let (g, p) = demo::demo_instance();
        let class = enumerate_maximum_matchings(&g, &ConstraintPair::empty(), 24).unwrap();
        let fixed = Matching::from_edge_ids(&g, vec![1, 4]).unwrap();
        let (m, v) = second_best_response(&fixed, p.matrix(), &g).unwrap();
        // Exhaustive argmax over the class minus the fixed matching.
        let best = class
            .iter()
            .filter(|x| *x != &fixed)
            .map(|x| (x, matching_score(x, &fixed, p.matrix(), 2)))
            .fold(None::<(&Matching, f64)>, |acc, (x, s)| match acc {
                None => Some((x, s)),
                Some((bx, bs)) => {
                    if s > bs + 1e-15 || ((s - bs).abs() <= 1e-15 && x < bx) {
                        Some((x, s))
                    } else {
                        Some((bx, bs))
                    }
                }
            })
            .unwrap();
        assert_eq!(&m, best.0);
        assert!((v - best.1).abs() < 1e-12);
        assert!((v - 0.475).abs() < 1e-12);
        assert_eq!(m.edge_ids(), &[0, 4]);
    }

    #[test]
    fn second_best_with_dominant_challenger() {
        let (g, p) = demo::demo_instance();
        let mut q = p.matrix().clone();
        // Make edge 2 crush edge 1.
        q.set(2, 1, 1.0);
        q.set(1, 2, 0.0);
        let fixed = Matching::from_edge_ids(&g, vec![1, 4]).unwrap();
        let (m, _) = second_best_response(&fixed, &q, &g).unwrap();
        assert_eq!(m.edge_ids(), &[2, 4]);
    }

    #[test]
    fn second_best_two_matching_instance() {
        let g = BipartiteGraph::new(2, 1, vec![(0, 0), (1, 0)]).unwrap();
        let p = PreferenceMatrix::from_entries(&g, &[(0, 1, 0.8)]).unwrap();
        let fixed = Matching::from_edge_ids(&g, vec![0]).unwrap();
        let (m, v) = second_best_response(&fixed, p.matrix(), &g).unwrap();
        assert_eq!(m.edge_ids(), &[1]);
        assert!((v - 0.2).abs() < 1e-12);
    }

    #[test]
    fn verify_accepts_demo_winner() {
        let (g, p) = demo::demo_instance();
        let mut env = DuelEnvironment::new(p, 31);
        let (out, trace) = car_verify(&mut env, &g, 0.005, fast_cfg(0.005)).unwrap();
        match out {
            VerifyOutcome::Winner(m) => assert_eq!(m.edge_ids(), &[1, 4]),
            VerifyOutcome::Rejected => panic!("verification rejected a correct hypothesis"),
        }
        assert!(trace.verify_rounds > 0);
    }

    #[test]
    fn verify_fast_on_lopsided_two_matching_instance() {
        let g = BipartiteGraph::new(2, 1, vec![(0, 0), (1, 0)]).unwrap();
        let p = PreferenceMatrix::from_entries(&g, &[(0, 1, 0.9)]).unwrap();
        let mut env = DuelEnvironment::new(p, 13);
        let (out, trace) = car_verify(&mut env, &g, 0.005, fast_cfg(0.005)).unwrap();
        assert_eq!(
            out,
            VerifyOutcome::Winner(Matching::from_edge_ids(&g, vec![0]).unwrap())
        );
        assert!(
            trace.verify_samples < 200,
            "expected tens of verification samples, used {}",
            trace.verify_samples
        );
    }

    #[test]
    fn schedule_prefix_matches_mod_arithmetic() {
        let got: Vec<Vec<u32>> = (1..=8).map(parallel_schedule).collect();
        assert_eq!(
            got,
            vec![
                vec![0],
                vec![0, 1],
                vec![0],
                vec![0, 1, 2],
                vec![0],
                vec![0, 1],
                vec![0],
                vec![0, 1, 2, 3],
            ]
        );
    }

    #[test]
    fn parallel_finds_demo_winner() {
        let (g, p) = demo::demo_instance();
        let mut env = DuelEnvironment::new(p, 37);
        let (m, trace) = car_parallel(&mut env, &g, 0.005, fast_cfg(0.005)).unwrap();
        assert_eq!(m.edge_ids(), &[1, 4]);
        // The logged schedule prefix obeys the mod rule.
        for &(t, k) in trace.schedule_prefix.iter().take(64) {
            assert_eq!(t % (1u64 << k), 0);
        }
    }

    #[test]
    fn suspension_resume_is_deterministic() {
        let (g, p) = demo::demo_instance();
        let cfg = fast_cfg(0.005);
        // Uninterrupted run.
        let mut env1 = DuelEnvironment::new(p.clone(), 55);
        let (out1, trace1) = car_verify(&mut env1, &g, 0.005, cfg).unwrap();
        // Serialize and resume between every sample.
        let mut env2 = DuelEnvironment::new(p, 55);
        let mut run = CarVerify::new(&g, 0.005, cfg).unwrap();
        let out2 = loop {
            let encoded = serde_json::to_string(&run).unwrap();
            run = serde_json::from_str(&encoded).unwrap();
            match run.advance_one_sample(&mut env2).unwrap() {
                Step::Sampled => {}
                Step::Done(out) => break out,
            }
        };
        assert_eq!(out1, out2);
        assert_eq!(trace1.explore_samples, run.trace().explore_samples);
        assert_eq!(trace1.verify_samples, run.trace().verify_samples);
        assert_eq!(env1.total_samples(), env2.total_samples());
    }
}
