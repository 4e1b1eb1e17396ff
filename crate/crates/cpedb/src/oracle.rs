//! Approximate minimax oracle over constrained matching polytopes.
//!
//! The oracle solves `max_x min_y (1/l) x^T Q y` where x ranges over the
//! convex hull of matchings containing `A1` and avoiding `R1`, and y over
//! the hull for `(A2, R2)`. The maximization runs projected subgradient
//! ascent; projections are approximated by Frank-Wolfe steps whose linear
//! subproblems are min-cost maximum matchings. Alongside the ascent the
//! oracle maintains a certified enclosure of the optimum: every feasible x
//! gives a lower bound through its inner minimum, every visited y gives an
//! upper bound through one constrained max-weight matching, and averaged
//! iterates tighten both sides. The oracle returns as soon as the enclosure
//! is narrower than the requested accuracy, so the returned value is within
//! `eps` below the optimum by construction rather than by worst-case
//! iteration counts.
//!
//! [`exact_game_value`] is the brute-force reference: it enumerates both
//! constrained vertex sets and solves the finite zero-sum game directly.

use crate::error::{Error, Result};
use crate::graph::{
    enumerate_maximum_matchings, feasible, min_cost_raw, min_cost_vertex_raw, mwmc_raw,
    mwmc_vertex_raw, BipartiteGraph, ConstraintPair, Matching,
};
use crate::preference::{matching_score, SquareMatrix};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Support weights below this threshold are dropped during compaction.
const SUPPORT_EPS: f64 = 1e-12;

/// A point of a constrained matching polytope, stored as a sparse convex
/// combination of matching vertices plus the cached dense vector.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolytopePoint {
    support: Vec<(Matching, f64)>,
    dense: Vec<f64>,
}

impl PolytopePoint {
    pub fn from_vertex(m: Matching, n_edges: usize) -> Self {
        let mut dense = vec![0.0; n_edges];
        for &e in m.edge_ids() {
            dense[e] = 1.0;
        }
        Self {
            support: vec![(m, 1.0)],
            dense,
        }
    }

    /// Builds a point from an explicit convex combination; weights must be
    /// positive and are normalized to sum to one.
    pub fn from_support(support: Vec<(Matching, f64)>, n_edges: usize) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::invalid("support must be nonempty"));
        }
        let total: f64 = support.iter().map(|&(_, w)| w).sum();
        if !(total > 0.0) || support.iter().any(|&(_, w)| w < 0.0) {
            return Err(Error::invalid("support weights must be nonnegative with positive sum"));
        }
        let mut dense = vec![0.0; n_edges];
        let support: Vec<(Matching, f64)> = support
            .into_iter()
            .map(|(m, w)| (m, w / total))
            .collect();
        for (m, w) in &support {
            for &e in m.edge_ids() {
                dense[e] += *w;
            }
        }
        Ok(Self { support, dense })
    }

    pub fn support(&self) -> &[(Matching, f64)] {
        &self.support
    }

    pub fn dense(&self) -> &[f64] {
        &self.dense
    }

    /// Moves toward `vertex` by step `gamma`, merging duplicate support.
    fn blend(&mut self, vertex: &Matching, gamma: f64) {
        for (_, w) in &mut self.support {
            *w *= 1.0 - gamma;
        }
        match self.support.iter_mut().find(|(m, _)| m == vertex) {
            Some((_, w)) => *w += gamma,
            None => self.support.push((vertex.clone(), gamma)),
        }
        for x in &mut self.dense {
            *x *= 1.0 - gamma;
        }
        for &e in vertex.edge_ids() {
            self.dense[e] += gamma;
        }
    }

    /// Drops negligible support weights, renormalizes, and rebuilds the
    /// dense cache from the surviving support.
    pub fn compact(&mut self) {
        self.support.retain(|&(_, w)| w >= SUPPORT_EPS);
        let total: f64 = self.support.iter().map(|&(_, w)| w).sum();
        for (_, w) in &mut self.support {
            *w /= total;
        }
        self.dense.fill(0.0);
        for (m, w) in &self.support {
            for &e in m.edge_ids() {
                self.dense[e] += *w;
            }
        }
    }
}

/// Knobs for the iterative solvers. The defaults favor certification over
/// exhausting the nominal worst-case horizon.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OracleConfig {
    /// Hard cap on subgradient iterations per oracle call.
    pub max_iterations: usize,
    /// Evaluate averaged iterates every this many steps.
    pub average_every: usize,
    /// Cap on Frank-Wolfe steps inside each internal projection.
    pub projection_iterations: usize,
    /// Fraction of `eps` the certificate must reach before returning, in
    /// (0, 1]. Certifying below `eps` leaves callers a guaranteed margin
    /// between the returned value and the true optimum.
    pub certify_factor: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            max_iterations: 120_000,
            average_every: 8,
            projection_iterations: 64,
            certify_factor: 0.25,
        }
    }
}

/// Outcome of one oracle call. `value` is the certified lower end of the
/// enclosure `[lower, upper]`, which contains the true optimum; the
/// guarantee is `value >= optimum - eps`. An infeasible max side yields the
/// sentinel `value = -1` with an empty point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleResult {
    pub value: f64,
    pub point: Option<PolytopePoint>,
    pub lower: f64,
    pub upper: f64,
    pub iterations: usize,
    pub projection_calls: usize,
}

impl OracleResult {
    fn sentinel() -> Self {
        Self {
            value: -1.0,
            point: None,
            lower: -1.0,
            upper: -1.0,
            iterations: 0,
            projection_calls: 0,
        }
    }

    pub fn is_sentinel(&self) -> bool {
        self.point.is_none()
    }
}

/// Exact inner minimization `min_y (1/l) x^T Q y` over the constrained
/// polytope; the minimum is attained at a vertex found by one min-cost
/// maximum matching with per-edge cost `(x^T Q)_e`.
pub fn inner_min(
    x: &PolytopePoint,
    q: &SquareMatrix,
    g: &BipartiteGraph,
    c2: &ConstraintPair,
) -> Result<(f64, Matching)> {
    inner_min_dense(x.dense(), q, g, c2)
}

fn inner_min_dense(
    x: &[f64],
    q: &SquareMatrix,
    g: &BipartiteGraph,
    c2: &ConstraintPair,
) -> Result<(f64, Matching)> {
    let costs = q.left_mul(x);
    let y = min_cost_raw(g, &costs, c2)?;
    let l = g.n_positions() as f64;
    let value = y.edge_ids().iter().map(|&e| costs[e]).sum::<f64>() / l;
    Ok((value, y))
}

/// Vertex-only inner minimization for the ascent loop: same value, no
/// lexicographic refinement.
fn inner_min_vertex(
    x: &[f64],
    q: &SquareMatrix,
    g: &BipartiteGraph,
    c2: &ConstraintPair,
) -> Result<(f64, Matching)> {
    let costs = q.left_mul(x);
    let y = min_cost_vertex_raw(g, &costs, c2)?;
    let l = g.n_positions() as f64;
    let value = y.edge_ids().iter().map(|&e| costs[e]).sum::<f64>() / l;
    Ok((value, y))
}

/// Upper bound on the max-min value from a fixed inner vector: one
/// constrained max-weight matching with weights `(Q y)_e / l`.
fn upper_bound_from_y(
    y_dense: &[f64],
    q: &SquareMatrix,
    g: &BipartiteGraph,
    c1: &ConstraintPair,
) -> Result<f64> {
    let weights = q.right_mul(y_dense);
    let x = mwmc_vertex_raw(g, &weights, c1)?;
    let l = g.n_positions() as f64;
    Ok(x.edge_ids().iter().map(|&e| weights[e]).sum::<f64>() / l)
}

/// Approximate Euclidean projection onto the constrained matching polytope
/// by Frank-Wolfe with step `2/(t+1)` from a deterministic start vertex.
/// Runs at most `ceil(16 l^2 / eps^2)` linear steps, returning early once
/// the duality-gap certificate guarantees `||x_r - projection||_2 <= eps`.
pub fn approx_project(
    p: &[f64],
    g: &BipartiteGraph,
    c: &ConstraintPair,
    eps: f64,
) -> Result<PolytopePoint> {
    if eps <= 0.0 {
        return Err(Error::invalid("projection accuracy must be positive"));
    }
    let l = g.n_positions() as f64;
    let max_iter = (16.0 * l * l / (eps * eps)).ceil() as usize;
    let start = mwmc_raw(g, &vec![0.0; g.m()], c)?;
    let mut x = PolytopePoint::from_vertex(start, g.m());
    for t in 1..=max_iter {
        let cost: Vec<f64> = x.dense().iter().zip(p).map(|(xi, pi)| xi - pi).collect();
        let vertex = min_cost_raw(g, &cost, c)?;
        // gap = <x - p, x - chi_v> bounds h(x) - h* for h = 0.5||x - p||^2,
        // and the projection inequality turns that into a distance bound.
        let mut gap = 0.0;
        for (e, &ce) in cost.iter().enumerate() {
            let chi = if vertex.contains(e) { 1.0 } else { 0.0 };
            gap += ce * (x.dense()[e] - chi);
        }
        if 2.0 * gap <= eps * eps {
            break;
        }
        let gamma = 2.0 / (t as f64 + 1.0);
        x.blend(&vertex, gamma);
    }
    x.compact();
    Ok(x)
}

/// Warm-started internal projection used between ascent steps: line-search
/// Frank-Wolfe with a small iteration cap. Accuracy here only affects how
/// fast the ascent makes progress, never the validity of the certificate.
fn project_warm(
    mut x: PolytopePoint,
    p: &[f64],
    g: &BipartiteGraph,
    c: &ConstraintPair,
    eps: f64,
    max_iter: usize,
    calls: &mut usize,
) -> Result<PolytopePoint> {
    for _ in 0..max_iter {
        let cost: Vec<f64> = x.dense().iter().zip(p).map(|(xi, pi)| xi - pi).collect();
        let vertex = min_cost_vertex_raw(g, &cost, c)?;
        *calls += 1;
        let mut gap = 0.0;
        let mut dir_sq = 0.0;
        for (e, &ce) in cost.iter().enumerate() {
            let chi = if vertex.contains(e) { 1.0 } else { 0.0 };
            let d = x.dense()[e] - chi;
            gap += ce * d;
            dir_sq += d * d;
        }
        if 2.0 * gap <= eps * eps || dir_sq == 0.0 {
            break;
        }
        let gamma = (gap / dir_sq).clamp(0.0, 1.0);
        x.blend(&vertex, gamma);
    }
    x.compact();
    Ok(x)
}

/// Approximately solves `max_{x in P(A1,R1)} min_{y in P(A2,R2)} (1/l) x^T Q y`.
///
/// Returns a value guaranteed to be within `eps` below the optimum together
/// with the point attaining it. An empty max side yields the -1 sentinel; an
/// empty min side is an error.
pub fn minimax_oracle(
    g: &BipartiteGraph,
    c1: &ConstraintPair,
    c2: &ConstraintPair,
    q: &SquareMatrix,
    eps: f64,
    cfg: &OracleConfig,
) -> Result<OracleResult> {
    if eps <= 0.0 {
        return Err(Error::invalid("oracle accuracy must be positive"));
    }
    if !feasible(g, c2) {
        return Err(Error::InfeasibleMinSide);
    }
    if !feasible(g, c1) {
        return Ok(OracleResult::sentinel());
    }

    let l = g.n_positions() as f64;
    let k = g.duel_count() as f64;
    let target_gap = eps * cfg.certify_factor.clamp(1e-3, 1.0) * (1.0 - 1e-6);
    let nominal_horizon =
        ((4.0 * l * k / target_gap) * (4.0 * l * k / target_gap)).ceil() as usize;
    let cap = nominal_horizon.min(cfg.max_iterations).max(1);

    // Start from the best response to the first min-side vertex; on games
    // with a pure saddle this tends to land on or near the maximizer.
    let y0 = mwmc_vertex_raw(g, &vec![0.0; g.m()], c2)?;
    let start_weights = q.right_mul(&y0.chi_f64());
    let start = mwmc_vertex_raw(g, &start_weights, c1)?;
    let mut x = PolytopePoint::from_vertex(start, g.m());

    let mut best_lower = f64::NEG_INFINITY;
    let mut best_point = x.clone();
    let mut best_upper = f64::INFINITY;
    let mut projection_calls = 0usize;
    let mut iterations = 0usize;

    // Running averages of the ascent iterates and inner minimizers.
    let mut x_sum = vec![0.0; g.m()];
    let mut x_sum_support: HashMap<Vec<usize>, f64> = HashMap::new();
    let mut y_sum = vec![0.0; g.m()];

    for t in 1..=cap {
        iterations = t;
        let (g_val, y) = inner_min_vertex(x.dense(), q, g, c2)?;
        if g_val > best_lower {
            best_lower = g_val;
            best_point = x.clone();
        }
        best_upper = best_upper.min(upper_bound_from_y(&y.chi_f64(), q, g, c1)?);

        for (e, v) in x_sum.iter_mut().enumerate() {
            *v += x.dense()[e];
        }
        for (m, w) in x.support() {
            *x_sum_support.entry(m.edge_ids().to_vec()).or_default() += w;
        }
        for &e in y.edge_ids() {
            y_sum[e] += 1.0;
        }

        if best_upper - best_lower <= target_gap {
            break;
        }

        if t % cfg.average_every == 0 {
            let scale = 1.0 / t as f64;
            let x_bar: Vec<f64> = x_sum.iter().map(|v| v * scale).collect();
            let (g_bar, _) = inner_min_vertex(&x_bar, q, g, c2)?;
            if g_bar > best_lower {
                best_lower = g_bar;
                best_point = average_point(g, &x_sum_support, t);
            }
            let y_bar: Vec<f64> = y_sum.iter().map(|v| v * scale).collect();
            best_upper = best_upper.min(upper_bound_from_y(&y_bar, q, g, c1)?);
            if best_upper - best_lower <= target_gap {
                break;
            }
        }

        // Ascent step with the anytime rate 2l/(K sqrt(t)), then project.
        let grad = q.right_mul(&y.chi_f64());
        let eta = 2.0 * l / (k * (t as f64).sqrt());
        let target: Vec<f64> = x
            .dense()
            .iter()
            .zip(&grad)
            .map(|(xi, gi)| xi + eta * gi / l)
            .collect();
        let proj_eps = (eps / (2.0 * k * (t as f64).sqrt())).max(eps / 64.0);
        x = project_warm(x, &target, g, c1, proj_eps, cfg.projection_iterations, &mut projection_calls)?;
    }

    if best_upper - best_lower > target_gap {
        return Err(Error::OracleBudget {
            eps,
            iterations: cap,
        });
    }
    best_point.compact();
    Ok(OracleResult {
        value: best_lower,
        point: Some(best_point),
        lower: best_lower,
        upper: best_upper,
        iterations,
        projection_calls,
    })
}

fn average_point(g: &BipartiteGraph, sums: &HashMap<Vec<usize>, f64>, t: usize) -> PolytopePoint {
    let mut support: Vec<(Matching, f64)> = sums
        .iter()
        .map(|(ids, &w)| {
            (
                Matching::from_edge_ids(g, ids.clone()).expect("support vertices are valid"),
                w / t as f64,
            )
        })
        .collect();
    support.sort_by(|a, b| a.0.cmp(&b.0));
    let mut dense = vec![0.0; g.m()];
    for (m, w) in &support {
        for &e in m.edge_ids() {
            dense[e] += *w;
        }
    }
    let mut point = PolytopePoint { support, dense };
    point.compact();
    point
}

/// Brute-force reference: the value of the finite zero-sum game over the
/// enumerated constrained matchings, payoff `(1/l) chi_x^T Q chi_y`.
/// Deterministic; exact at pure saddle points, otherwise multiplicative
/// weights self-play with a certified stopping rule at tolerance `tol`.
pub fn exact_game_value(
    g: &BipartiteGraph,
    c1: &ConstraintPair,
    c2: &ConstraintPair,
    q: &SquareMatrix,
    tol: f64,
    cap: usize,
) -> Result<f64> {
    let rows = enumerate_maximum_matchings(g, c1, cap)?;
    let cols = enumerate_maximum_matchings(g, c2, cap)?;
    let l = g.n_positions();
    let payoff: Vec<Vec<f64>> = rows
        .iter()
        .map(|x| cols.iter().map(|y| matching_score(x, y, q, l)).collect())
        .collect();

    let row_security: Vec<f64> = payoff
        .iter()
        .map(|r| r.iter().copied().fold(f64::INFINITY, f64::min))
        .collect();
    let maximin = row_security.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let minimax = (0..cols.len())
        .map(|j| payoff.iter().map(|r| r[j]).fold(f64::NEG_INFINITY, f64::max))
        .fold(f64::INFINITY, f64::min);
    if minimax - maximin <= 1e-14 {
        return Ok(maximin);
    }

    // Multiplicative-weights self-play with averaged strategies.
    let (nr, nc) = (rows.len(), cols.len());
    let mut log_wx = vec![0.0f64; nr];
    let mut log_wy = vec![0.0f64; nc];
    let mut x_avg = vec![0.0f64; nr];
    let mut y_avg = vec![0.0f64; nc];
    let ln_n = (nr.max(nc) as f64).ln().max(1.0);
    let max_rounds = 40_000_000usize / (nr * nc).max(1);
    for t in 1..=max_rounds {
        let x = softmax(&log_wx);
        let y = softmax(&log_wy);
        for (a, &b) in x_avg.iter_mut().zip(&x) {
            *a += b;
        }
        for (a, &b) in y_avg.iter_mut().zip(&y) {
            *a += b;
        }
        if t % 64 == 0 || t == max_rounds {
            let scale = 1.0 / t as f64;
            let xa: Vec<f64> = x_avg.iter().map(|v| v * scale).collect();
            let ya: Vec<f64> = y_avg.iter().map(|v| v * scale).collect();
            let lb = (0..nc)
                .map(|j| (0..nr).map(|i| xa[i] * payoff[i][j]).sum::<f64>())
                .fold(f64::INFINITY, f64::min);
            let ub = (0..nr)
                .map(|i| (0..nc).map(|j| payoff[i][j] * ya[j]).sum::<f64>())
                .fold(f64::NEG_INFINITY, f64::max);
            if ub - lb <= tol {
                return Ok(0.5 * (lb + ub));
            }
        }
        let eta = (ln_n / (t as f64 + 1.0)).sqrt();
        for (i, lw) in log_wx.iter_mut().enumerate() {
            let gain: f64 = (0..nc).map(|j| payoff[i][j] * y[j]).sum();
            *lw += eta * gain;
        }
        for (j, lw) in log_wy.iter_mut().enumerate() {
            let loss: f64 = (0..nr).map(|i| x[i] * payoff[i][j]).sum();
            *lw -= eta * loss;
        }
    }
    Err(Error::OracleBudget {
        eps: tol,
        iterations: max_rounds,
    })
}

fn softmax(log_w: &[f64]) -> Vec<f64> {
    let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = log_w.iter().map(|&v| (v - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.iter().map(|&v| v / total).collect()
}
