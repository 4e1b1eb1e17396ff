//! Bipartite candidate-position graphs, matchings, and matching oracles.
//!
//! Edges follow a canonical order: position-major, candidate-minor. Edge
//! index `i` always refers to the i-th edge in this order. The matching
//! oracles (`mwmc`, `min_cost_maximum_matching`) run in polynomial time via
//! an assignment solver; the enumeration paths are brute-force tools capped
//! at [`DEFAULT_ENUMERATION_CAP`] edges.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Default cap on the edge count for brute-force enumeration paths.
pub const DEFAULT_ENUMERATION_CAP: usize = 24;

/// Tolerance used when comparing matching weights for tie-breaking.
const REFINE_TOL: f64 = 1e-12;

/// JSON representation of a graph: 0-based candidate/position indices.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphSpec {
    pub candidates: usize,
    pub positions: usize,
    pub edges: Vec<(usize, usize)>,
}

/// A bipartite graph over `n` candidates and `l <= n` positions.
///
/// Invariants established at construction: edges sorted position-major then
/// candidate-minor, no duplicate pairs, and at least one matching of
/// cardinality `l` exists.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BipartiteGraph {
    n_candidates: usize,
    n_positions: usize,
    edges: Vec<(usize, usize)>,
    position_buckets: Vec<Vec<usize>>,
    candidate_buckets: Vec<Vec<usize>>,
    duel_count: u64,
}

impl BipartiteGraph {
    /// Builds a graph, sorting edges into canonical order.
    pub fn new(
        n_candidates: usize,
        n_positions: usize,
        edges: Vec<(usize, usize)>,
    ) -> Result<Self> {
        Ok(Self::new_with_permutation(n_candidates, n_positions, edges)?.0)
    }

    /// Builds a graph and reports, for each input edge, its canonical index.
    pub fn new_with_permutation(
        n_candidates: usize,
        n_positions: usize,
        edges: Vec<(usize, usize)>,
    ) -> Result<(Self, Vec<usize>)> {
        if n_positions == 0 || n_candidates < n_positions {
            return Err(Error::invalid(format!(
                "need 1 <= positions <= candidates, got {n_candidates} candidates, {n_positions} positions"
            )));
        }
        for &(c, s) in &edges {
            if c >= n_candidates || s >= n_positions {
                return Err(Error::invalid(format!(
                    "edge ({c},{s}) out of range for {n_candidates} candidates, {n_positions} positions"
                )));
            }
        }
        let mut order: Vec<usize> = (0..edges.len()).collect();
        order.sort_by_key(|&i| (edges[i].1, edges[i].0));
        let sorted: Vec<(usize, usize)> = order.iter().map(|&i| edges[i]).collect();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("duplicate (candidate, position) edge"));
        }
        let mut permutation = vec![0usize; edges.len()];
        for (new_idx, &old_idx) in order.iter().enumerate() {
            permutation[old_idx] = new_idx;
        }

        let mut position_buckets = vec![Vec::new(); n_positions];
        let mut candidate_buckets = vec![Vec::new(); n_candidates];
        for (i, &(c, s)) in sorted.iter().enumerate() {
            position_buckets[s].push(i);
            candidate_buckets[c].push(i);
        }
        let duel_count = position_buckets
            .iter()
            .map(|b| (b.len() * b.len().saturating_sub(1) / 2) as u64)
            .sum();

        let g = Self {
            n_candidates,
            n_positions,
            edges: sorted,
            position_buckets,
            candidate_buckets,
            duel_count,
        };
        if solve_assignment(&g, &vec![0.0; g.m()], &vec![true; g.m()]).is_none() {
            return Err(Error::invalid(format!(
                "graph admits no matching of cardinality {n_positions}"
            )));
        }
        Ok((g, permutation))
    }

    pub fn from_spec(spec: &GraphSpec) -> Result<(Self, Vec<usize>)> {
        Self::new_with_permutation(spec.candidates, spec.positions, spec.edges.clone())
    }

    pub fn to_spec(&self) -> GraphSpec {
        GraphSpec {
            candidates: self.n_candidates,
            positions: self.n_positions,
            edges: self.edges.clone(),
        }
    }

    pub fn n_candidates(&self) -> usize {
        self.n_candidates
    }

    pub fn n_positions(&self) -> usize {
        self.n_positions
    }

    /// Number of edges, `m`.
    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn candidate_of(&self, e: usize) -> usize {
        self.edges[e].0
    }

    /// Position index `s(e)`.
    pub fn position_of(&self, e: usize) -> usize {
        self.edges[e].1
    }

    /// Edge indices incident to position `j`.
    pub fn position_bucket(&self, j: usize) -> &[usize] {
        &self.position_buckets[j]
    }

    /// Total number of distinct duels `K`.
    pub fn duel_count(&self) -> u64 {
        self.duel_count
    }

    /// Two edges are comparable when they share a position and differ.
    pub fn comparable(&self, e1: usize, e2: usize) -> bool {
        e1 != e2 && self.position_of(e1) == self.position_of(e2)
    }

    /// All comparable unordered pairs `(e1, e2)` with `e1 < e2`.
    pub fn comparable_pairs(&self) -> Vec<(usize, usize)> {
        let mut pairs = Vec::with_capacity(self.duel_count as usize);
        for bucket in &self.position_buckets {
            for (k, &a) in bucket.iter().enumerate() {
                for &b in &bucket[k + 1..] {
                    pairs.push((a, b));
                }
            }
        }
        pairs
    }

    fn edge_id(&self, candidate: usize, position: usize) -> Option<usize> {
        self.position_buckets[position]
            .iter()
            .copied()
            .find(|&e| self.edges[e].0 == candidate)
    }

    /// Edges sharing an endpoint with `e`, excluding `e` itself.
    fn conflicts_of(&self, e: usize) -> impl Iterator<Item = usize> + '_ {
        let (c, s) = self.edges[e];
        self.position_buckets[s]
            .iter()
            .chain(self.candidate_buckets[c].iter())
            .copied()
            .filter(move |&x| x != e)
    }
}

/// A maximum matching: all positions covered, no candidate reused.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Matching {
    edge_ids: Vec<usize>,
    by_position: Vec<usize>,
    chi: Vec<bool>,
}

impl Matching {
    /// Validates cardinality and endpoint disjointness.
    pub fn from_edge_ids(g: &BipartiteGraph, mut edge_ids: Vec<usize>) -> Result<Self> {
        edge_ids.sort_unstable();
        if edge_ids.len() != g.n_positions() {
            return Err(Error::invalid(format!(
                "matching must have cardinality {}, got {}",
                g.n_positions(),
                edge_ids.len()
            )));
        }
        let mut by_position = vec![usize::MAX; g.n_positions()];
        let mut used_candidate = vec![false; g.n_candidates()];
        let mut chi = vec![false; g.m()];
        for &e in &edge_ids {
            if e >= g.m() {
                return Err(Error::invalid(format!("edge id {e} out of range")));
            }
            let (c, s) = g.edges()[e];
            if by_position[s] != usize::MAX || used_candidate[c] {
                return Err(Error::invalid("matching reuses a vertex"));
            }
            by_position[s] = e;
            used_candidate[c] = true;
            chi[e] = true;
        }
        Ok(Self {
            edge_ids,
            by_position,
            chi,
        })
    }

    /// Sorted edge indices.
    pub fn edge_ids(&self) -> &[usize] {
        &self.edge_ids
    }

    /// The edge of this matching at position `j`, `e(M, j)`.
    pub fn edge_at(&self, j: usize) -> usize {
        self.by_position[j]
    }

    /// 0/1 incidence vector over all edges.
    pub fn chi(&self) -> &[bool] {
        &self.chi
    }

    pub fn chi_f64(&self) -> Vec<f64> {
        self.chi.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()
    }

    pub fn contains(&self, e: usize) -> bool {
        self.chi[e]
    }

    /// Number of positions where `self` and `other` hold different edges.
    pub fn distance(&self, other: &Matching) -> usize {
        self.by_position
            .iter()
            .zip(&other.by_position)
            .filter(|(a, b)| a != b)
            .count()
    }

    pub fn total_weight(&self, w: &[f64]) -> f64 {
        self.edge_ids.iter().map(|&e| w[e]).sum()
    }
}

impl PartialEq for Matching {
    fn eq(&self, other: &Self) -> bool {
        self.edge_ids == other.edge_ids
    }
}

impl Eq for Matching {}

impl PartialOrd for Matching {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Matching {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.edge_ids.cmp(&other.edge_ids)
    }
}

/// Accepted/rejected edge sets constraining the matchings under consideration.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ConstraintPair {
    accepted: Vec<usize>,
    rejected: Vec<usize>,
}

impl ConstraintPair {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Validates disjointness and that `accepted` is a partial matching.
    pub fn new(g: &BipartiteGraph, mut accepted: Vec<usize>, mut rejected: Vec<usize>) -> Result<Self> {
        accepted.sort_unstable();
        accepted.dedup();
        rejected.sort_unstable();
        rejected.dedup();
        for &e in accepted.iter().chain(rejected.iter()) {
            if e >= g.m() {
                return Err(Error::invalid(format!("constraint edge {e} out of range")));
            }
        }
        if accepted.iter().any(|e| rejected.binary_search(e).is_ok()) {
            return Err(Error::invalid("accepted and rejected sets overlap"));
        }
        for (k, &a) in accepted.iter().enumerate() {
            for &b in &accepted[k + 1..] {
                let (ca, sa) = g.edges()[a];
                let (cb, sb) = g.edges()[b];
                if ca == cb || sa == sb {
                    return Err(Error::invalid("accepted set is not a partial matching"));
                }
            }
        }
        Ok(Self { accepted, rejected })
    }

    pub fn accepted(&self) -> &[usize] {
        &self.accepted
    }

    pub fn rejected(&self) -> &[usize] {
        &self.rejected
    }

    pub fn is_empty(&self) -> bool {
        self.accepted.is_empty() && self.rejected.is_empty()
    }
}

/// Real edge weights; entries must be finite.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeWeights(Vec<f64>);

impl EdgeWeights {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("edge weights must be finite"));
        }
        Ok(Self(w))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|x| -x).collect())
    }
}

/// Alive-edge mask implementing constraint surgery: rejected edges die, and
/// every edge sharing an endpoint with an accepted edge dies.
fn alive_mask(g: &BipartiteGraph, c: &ConstraintPair) -> Vec<bool> {
    let mut alive = vec![true; g.m()];
    for &e in c.rejected() {
        alive[e] = false;
    }
    for &a in c.accepted() {
        for x in g.conflicts_of(a) {
            alive[x] = false;
        }
        alive[a] = true;
    }
    alive
}

/// Deletes rejected edges and the competitors of accepted edges, returning
/// the surviving subgraph plus a map from original edge index to its index
/// in the subgraph.
pub fn restrict(
    g: &BipartiteGraph,
    c: &ConstraintPair,
) -> Result<(BipartiteGraph, Vec<Option<usize>>)> {
    let alive = alive_mask(g, c);
    let mut kept_edges = Vec::new();
    let mut index_map = vec![None; g.m()];
    for (e, &is_alive) in alive.iter().enumerate() {
        if is_alive {
            index_map[e] = Some(kept_edges.len());
            kept_edges.push(g.edges()[e]);
        }
    }
    // Surviving edges are already in canonical order, so indices are stable.
    let sub = BipartiteGraph::new(g.n_candidates(), g.n_positions(), kept_edges).map_err(|_| {
        Error::InfeasibleConstraints {
            required: g.n_positions(),
        }
    })?;
    Ok((sub, index_map))
}

/// True when some cardinality-`l` matching satisfies the constraints.
pub fn feasible(g: &BipartiteGraph, c: &ConstraintPair) -> bool {
    let alive = alive_mask(g, c);
    solve_assignment(g, &vec![0.0; g.m()], &alive).is_some()
}

/// All maximum matchings satisfying `c`, sorted lexicographically by edge-id
/// set. Brute force; refuses instances above `cap` edges.
pub fn enumerate_maximum_matchings(
    g: &BipartiteGraph,
    c: &ConstraintPair,
    cap: usize,
) -> Result<Vec<Matching>> {
    if g.m() > cap {
        return Err(Error::InstanceTooLarge { edges: g.m(), cap });
    }
    let alive = alive_mask(g, c);
    let mut used_candidate = vec![false; g.n_candidates()];
    let mut chosen = Vec::with_capacity(g.n_positions());
    let mut out = Vec::new();
    fn recurse(
        g: &BipartiteGraph,
        alive: &[bool],
        j: usize,
        used_candidate: &mut Vec<bool>,
        chosen: &mut Vec<usize>,
        out: &mut Vec<Matching>,
    ) {
        if j == g.n_positions() {
            out.push(Matching::from_edge_ids(g, chosen.clone()).expect("enumeration is valid"));
            return;
        }
        for &e in g.position_bucket(j) {
            let c = g.candidate_of(e);
            if alive[e] && !used_candidate[c] {
                used_candidate[c] = true;
                chosen.push(e);
                recurse(g, alive, j + 1, used_candidate, chosen, out);
                chosen.pop();
                used_candidate[c] = false;
            }
        }
    }
    recurse(g, &alive, 0, &mut used_candidate, &mut chosen, &mut out);
    if out.is_empty() {
        return Err(Error::InfeasibleConstraints {
            required: g.n_positions(),
        });
    }
    out.sort();
    Ok(out)
}

/// Maximum-weight matching among matchings of cardinality `l` satisfying `c`.
/// Ties are broken toward the lexicographically smallest edge-id set.
pub fn mwmc(g: &BipartiteGraph, w: &EdgeWeights, c: &ConstraintPair) -> Result<Matching> {
    mwmc_raw(g, w.as_slice(), c)
}

/// Minimum-cost maximum matching; equals `mwmc` on negated costs.
pub fn min_cost_maximum_matching(
    g: &BipartiteGraph,
    costs: &EdgeWeights,
    c: &ConstraintPair,
) -> Result<Matching> {
    mwmc_raw(g, &costs.negated().0, c)
}

pub(crate) fn min_cost_raw(g: &BipartiteGraph, costs: &[f64], c: &ConstraintPair) -> Result<Matching> {
    let neg: Vec<f64> = costs.iter().map(|x| -x).collect();
    mwmc_raw(g, &neg, c)
}

/// One optimal vertex without the lexicographic refinement, for internal
/// value queries where any deterministic argmax serves.
pub(crate) fn mwmc_vertex_raw(
    g: &BipartiteGraph,
    w: &[f64],
    c: &ConstraintPair,
) -> Result<Matching> {
    let alive = alive_mask(g, c);
    let (ids, _) = solve_assignment(g, w, &alive).ok_or(Error::InfeasibleConstraints {
        required: g.n_positions(),
    })?;
    Matching::from_edge_ids(g, ids)
}

pub(crate) fn min_cost_vertex_raw(
    g: &BipartiteGraph,
    costs: &[f64],
    c: &ConstraintPair,
) -> Result<Matching> {
    let neg: Vec<f64> = costs.iter().map(|x| -x).collect();
    mwmc_vertex_raw(g, &neg, c)
}

pub(crate) fn mwmc_raw(g: &BipartiteGraph, w: &[f64], c: &ConstraintPair) -> Result<Matching> {
    debug_assert_eq!(w.len(), g.m());
    let mut alive = alive_mask(g, c);
    let (m0, wstar) = solve_assignment(g, w, &alive).ok_or(Error::InfeasibleConstraints {
        required: g.n_positions(),
    })?;

    // Fast path: when the optimum is unique there is nothing to refine.
    // Excluding each chosen edge in turn bounds the runner-up weight.
    let mut unique = true;
    for &e in &m0 {
        if c.accepted().contains(&e) {
            continue;
        }
        alive[e] = false;
        if let Some((_, w2)) = solve_assignment(g, w, &alive) {
            if w2 >= wstar - REFINE_TOL {
                unique = false;
            }
        }
        alive[e] = true;
        if !unique {
            break;
        }
    }
    if unique {
        return Matching::from_edge_ids(g, m0);
    }

    // Greedy refinement: force the smallest-index edge that still attains the
    // optimum, which reconstructs the lexicographically smallest optimal set.
    let mut forced: Vec<usize> = c.accepted().to_vec();
    for e in 0..g.m() {
        if forced.len() == g.n_positions() {
            break;
        }
        if !alive[e] || forced.contains(&e) {
            continue;
        }
        let (ec, es) = g.edges()[e];
        if forced
            .iter()
            .any(|&f| g.edges()[f].0 == ec || g.edges()[f].1 == es)
        {
            continue;
        }
        let mut killed = Vec::new();
        for x in g.conflicts_of(e) {
            if alive[x] {
                alive[x] = false;
                killed.push(x);
            }
        }
        let keep = match solve_assignment(g, w, &alive) {
            Some((_, we)) if we >= wstar - REFINE_TOL => true,
            _ => false,
        };
        if keep {
            forced.push(e);
        } else {
            for x in killed {
                alive[x] = true;
            }
        }
    }
    Matching::from_edge_ids(g, forced)
}

/// Width of the graph: the maximum, over unordered pairs of distinct maximum
/// matchings, of the edge count of the largest connected component of their
/// union graph. A unique maximum matching yields 0 by convention.
pub fn width(g: &BipartiteGraph, cap: usize) -> Result<usize> {
    let ms = enumerate_maximum_matchings(g, &ConstraintPair::empty(), cap)?;
    if ms.len() < 2 {
        return Ok(0);
    }
    let n_vertices = g.n_candidates() + g.n_positions();
    let mut best = 0;
    let mut parent = vec![0usize; n_vertices];
    for (a, m1) in ms.iter().enumerate() {
        for m2 in &ms[a + 1..] {
            for (v, p) in parent.iter_mut().enumerate() {
                *p = v;
            }
            fn find(parent: &mut [usize], mut v: usize) -> usize {
                while parent[v] != v {
                    parent[v] = parent[parent[v]];
                    v = parent[v];
                }
                v
            }
            let union_edges: Vec<usize> = (0..g.m())
                .filter(|&e| m1.contains(e) || m2.contains(e))
                .collect();
            for &e in &union_edges {
                let (c, s) = g.edges()[e];
                let (rc, rs) = (find(&mut parent, c), find(&mut parent, g.n_candidates() + s));
                if rc != rs {
                    parent[rc] = rs;
                }
            }
            let mut count = vec![0usize; n_vertices];
            for &e in &union_edges {
                let root = find(&mut parent, g.edges()[e].0);
                count[root] += 1;
                best = best.max(count[root]);
            }
        }
    }
    Ok(best)
}

/// Reusable buffers for the assignment solver; the hot loops of the online
/// algorithms run it millions of times on tiny graphs.
#[derive(Default)]
struct AssignScratch {
    cost: Vec<f64>,
    u: Vec<f64>,
    v: Vec<f64>,
    matched_row: Vec<usize>,
    minv: Vec<f64>,
    used: Vec<bool>,
    way: Vec<usize>,
    assign: Vec<usize>,
}

thread_local! {
    static ASSIGN_SCRATCH: std::cell::RefCell<AssignScratch> =
        std::cell::RefCell::new(AssignScratch::default());
}

/// Minimum-cost assignment of every row to a distinct column via successive
/// shortest paths with potentials. `cost[r * cols + c]` is `INFINITY` where
/// no edge exists. Fills `assign` (row to column) and returns false when
/// some row cannot be matched.
fn min_cost_assignment(rows: usize, cols: usize, s: &mut AssignScratch) -> bool {
    const UNMATCHED: usize = usize::MAX;
    let virtual_col = cols;
    let cost = &s.cost;
    s.u.clear();
    s.u.resize(rows, 0.0);
    s.v.clear();
    s.v.resize(cols + 1, 0.0);
    s.matched_row.clear();
    s.matched_row.resize(cols + 1, UNMATCHED);
    s.minv.clear();
    s.minv.resize(cols + 1, 0.0);
    s.used.clear();
    s.used.resize(cols + 1, false);
    s.way.clear();
    s.way.resize(cols + 1, virtual_col);
    let u = &mut s.u;
    let v = &mut s.v;
    let matched_row = &mut s.matched_row;
    let minv = &mut s.minv;
    let used = &mut s.used;
    let way = &mut s.way;

    for r in 0..rows {
        matched_row[virtual_col] = r;
        minv[..cols].fill(f64::INFINITY);
        used.fill(false);
        way.fill(virtual_col);
        let mut j0 = virtual_col;
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = virtual_col;
            for j in 0..cols {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 * cols + j] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            if !delta.is_finite() {
                return false;
            }
            for j in 0..=cols {
                if used[j] {
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == UNMATCHED {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == virtual_col {
                break;
            }
        }
    }
    s.assign.clear();
    s.assign.resize(rows, UNMATCHED);
    for c in 0..cols {
        if s.matched_row[c] != UNMATCHED {
            s.assign[s.matched_row[c]] = c;
        }
    }
    !s.assign.contains(&UNMATCHED)
}

/// Max-weight matching covering every position, over alive edges only.
/// Returns sorted edge ids and the weight recomputed as a direct sum.
fn solve_assignment(g: &BipartiteGraph, w: &[f64], alive: &[bool]) -> Option<(Vec<usize>, f64)> {
    let rows = g.n_positions();
    let cols = g.n_candidates();
    ASSIGN_SCRATCH.with(|cell| {
        let mut scratch = cell.borrow_mut();
        scratch.cost.clear();
        scratch.cost.resize(rows * cols, f64::INFINITY);
        for (e, &(c, s)) in g.edges().iter().enumerate() {
            if alive[e] {
                scratch.cost[s * cols + c] = -w[e];
            }
        }
        if !min_cost_assignment(rows, cols, &mut scratch) {
            return None;
        }
        let mut ids: Vec<usize> = scratch
            .assign
            .iter()
            .enumerate()
            .map(|(s, &c)| g.edge_id(c, s).expect("assignment uses existing edges"))
            .collect();
        ids.sort_unstable();
        let total = ids.iter().map(|&e| w[e]).sum();
        Some((ids, total))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demo;

    fn ids(m: &Matching) -> Vec<usize> {
        m.edge_ids().to_vec()
    }

    #[test]
    fn canonical_order_and_permutation() {
        let (g, perm) = BipartiteGraph::new_with_permutation(
            3,
            2,
            vec![(2, 1), (0, 0), (1, 0), (2, 0), (1, 1)],
        )
        .unwrap();
        assert_eq!(g.edges(), &[(0, 0), (1, 0), (2, 0), (1, 1), (2, 1)]);
        assert_eq!(perm, vec![4, 0, 1, 2, 3]);
        assert_eq!(g.duel_count(), 3 + 1);
    }

    #[test]
    fn rejects_duplicates_and_infeasible() {
        assert!(BipartiteGraph::new(2, 1, vec![(0, 0), (0, 0)]).is_err());
        // Position 1 has no edge at all.
        assert!(BipartiteGraph::new(2, 2, vec![(0, 0), (1, 0)]).is_err());
    }

    #[test]
    fn enumerates_demo_matchings() {
        let g = demo::demo_graph();
        let ms = enumerate_maximum_matchings(&g, &ConstraintPair::empty(), 24).unwrap();
        let sets: Vec<Vec<usize>> = ms.iter().map(ids).collect();
        assert_eq!(
            sets,
            vec![
                vec![0, 3],
                vec![0, 4],
                vec![1, 3],
                vec![1, 4],
                vec![2, 4]
            ]
        );
    }

    #[test]
    fn enumeration_respects_constraints() {
        let g = demo::demo_graph();
        // Force e2 (index 1): the two survivors.
        let c = ConstraintPair::new(&g, vec![1], vec![]).unwrap();
        let ms = enumerate_maximum_matchings(&g, &c, 24).unwrap();
        assert_eq!(ms.iter().map(ids).collect::<Vec<_>>(), vec![vec![1, 3], vec![1, 4]]);
        // Reject e5 (index 4).
        let c = ConstraintPair::new(&g, vec![], vec![4]).unwrap();
        let ms = enumerate_maximum_matchings(&g, &c, 24).unwrap();
        assert_eq!(ms.iter().map(ids).collect::<Vec<_>>(), vec![vec![0, 3], vec![1, 3]]);
    }

    #[test]
    fn single_position_graph() {
        let g = BipartiteGraph::new(2, 1, vec![(0, 0), (1, 0)]).unwrap();
        let ms = enumerate_maximum_matchings(&g, &ConstraintPair::empty(), 24).unwrap();
        assert_eq!(ms.iter().map(ids).collect::<Vec<_>>(), vec![vec![0], vec![1]]);
    }

    #[test]
    fn restrict_reports_infeasible() {
        let g = demo::demo_graph();
        // Force e1 and reject both edges of position s2.
        let c = ConstraintPair::new(&g, vec![0], vec![3, 4]).unwrap();
        assert!(matches!(
            restrict(&g, &c),
            Err(Error::InfeasibleConstraints { .. })
        ));
    }

    #[test]
    fn restrict_identity_on_empty_constraints() {
        let g = demo::demo_graph();
        let (sub, map) = restrict(&g, &ConstraintPair::empty()).unwrap();
        assert_eq!(sub.m(), g.m());
        assert!(map.iter().enumerate().all(|(i, &x)| x == Some(i)));
    }

    #[test]
    fn restrict_then_enumerate_matches_filtering() {
        let g = demo::demo_graph();
        let c = ConstraintPair::new(&g, vec![1], vec![]).unwrap();
        let (sub, map) = restrict(&g, &c).unwrap();
        let direct = enumerate_maximum_matchings(&g, &c, 24).unwrap();
        let via_sub = enumerate_maximum_matchings(&sub, &ConstraintPair::empty(), 24).unwrap();
        // Map the direct matchings through the index map and compare.
        let mapped: Vec<Vec<usize>> = direct
            .iter()
            .map(|m| m.edge_ids().iter().map(|&e| map[e].unwrap()).collect())
            .collect();
        assert_eq!(mapped, via_sub.iter().map(ids).collect::<Vec<_>>());
    }

    #[test]
    fn mwmc_all_equal_weights_breaks_ties_lexicographically() {
        let g = demo::demo_graph();
        let w = EdgeWeights::new(vec![1.0; 5]).unwrap();
        let m = mwmc(&g, &w, &ConstraintPair::empty()).unwrap();
        assert_eq!(ids(&m), vec![0, 3]);
    }

    #[test]
    fn mwmc_negative_weights_keep_cardinality() {
        let g = demo::demo_graph();
        let w = EdgeWeights::new(vec![-1.0; 5]).unwrap();
        let m = mwmc(&g, &w, &ConstraintPair::empty()).unwrap();
        assert_eq!(m.edge_ids().len(), 2);
        assert_eq!(m.total_weight(w.as_slice()), -2.0);
        assert_eq!(ids(&m), vec![0, 3]);
    }

    #[test]
    fn mwmc_matches_bruteforce_argmax() {
        let g = demo::demo_graph();
        // The literal weight vector from the oracle example.
        let w = EdgeWeights::new(vec![0.58, 0.61, 0.45, 0.3, 0.7]).unwrap();
        let m = mwmc(&g, &w, &ConstraintPair::empty()).unwrap();
        assert_eq!(ids(&m), vec![1, 4]);
        assert!((m.total_weight(w.as_slice()) - 1.31).abs() < 1e-12);
    }

    #[test]
    fn min_cost_by_index_cost() {
        let g = demo::demo_graph();
        // cost(e) = 1-based index of e.
        let costs = EdgeWeights::new(vec![1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        let m = min_cost_maximum_matching(&g, &costs, &ConstraintPair::empty()).unwrap();
        assert_eq!(ids(&m), vec![0, 3]);
        assert_eq!(m.total_weight(costs.as_slice()), 5.0);
    }

    #[test]
    fn min_cost_equals_mwmc_on_negation() {
        let g = demo::demo_graph();
        let w = vec![0.2, -0.4, 0.9, 0.1, 0.3];
        let by_min = min_cost_maximum_matching(
            &g,
            &EdgeWeights::new(w.iter().map(|x| -x).collect()).unwrap(),
            &ConstraintPair::empty(),
        )
        .unwrap();
        let by_max = mwmc(&g, &EdgeWeights::new(w).unwrap(), &ConstraintPair::empty()).unwrap();
        assert_eq!(ids(&by_min), ids(&by_max));
    }

    #[test]
    fn mwmc_shift_invariance() {
        let g = demo::demo_graph();
        let w = vec![0.58, 0.53, 0.28, 0.2, 0.7];
        let base = mwmc(&g, &EdgeWeights::new(w.clone()).unwrap(), &ConstraintPair::empty()).unwrap();
        for shift in [-10.0, -0.5, 0.25, 3.0, 1e6] {
            let shifted: Vec<f64> = w.iter().map(|x| x + shift).collect();
            let m = mwmc(&g, &EdgeWeights::new(shifted).unwrap(), &ConstraintPair::empty()).unwrap();
            assert_eq!(ids(&m), ids(&base), "shift {shift} changed the argmax");
        }
    }

    #[test]
    fn mwmc_infeasible_constraints() {
        let g = demo::demo_graph();
        let c = ConstraintPair::new(&g, vec![0], vec![3, 4]).unwrap();
        let w = EdgeWeights::new(vec![1.0; 5]).unwrap();
        assert!(matches!(
            mwmc(&g, &w, &c),
            Err(Error::InfeasibleConstraints { .. })
        ));
    }

    #[test]
    fn width_of_demo_graph() {
        let g = demo::demo_graph();
        assert_eq!(width(&g, 24).unwrap(), 4);
    }

    #[test]
    fn width_of_union_example_graph() {
        // 5 candidates, 3 positions; e1..e6 in canonical order.
        let g = BipartiteGraph::new(
            5,
            3,
            vec![(0, 0), (1, 0), (1, 1), (2, 1), (3, 2), (4, 2)],
        )
        .unwrap();
        assert_eq!(width(&g, 24).unwrap(), 4);
    }

    #[test]
    fn width_zero_for_unique_matching() {
        let g = BipartiteGraph::new(2, 2, vec![(0, 0), (1, 1)]).unwrap();
        assert_eq!(width(&g, 24).unwrap(), 0);
    }

    #[test]
    fn enumeration_cap_enforced() {
        let g = demo::demo_graph();
        assert!(matches!(
            enumerate_maximum_matchings(&g, &ConstraintPair::empty(), 4),
            Err(Error::InstanceTooLarge { edges: 5, cap: 4 })
        ));
    }
}
