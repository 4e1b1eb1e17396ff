//! Preference matrices, matching-versus-matching preference, Borda and
//! Condorcet ground-truth oracles, edge rewards, and gap/hardness metrics.
//!
//! Everything here is exact brute force over an enumerated decision class;
//! these are the reference oracles the online algorithms are tested against.

use crate::error::{Error, Result};
use crate::graph::{BipartiteGraph, Matching};
use serde::{Deserialize, Serialize};

/// Tolerance below which two winner scores count as a tie.
pub const WINNER_TIE_TOL: f64 = 1e-12;

/// Tolerance for validating antisymmetry of loaded matrices.
const ANTISYMMETRY_TOL: f64 = 1e-12;

/// A plain m-by-m real matrix, row-major. Used for preference matrices and
/// for the upper/lower confidence-bound matrices fed to the minimax oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquareMatrix {
    m: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(m: usize) -> Self {
        Self {
            m,
            data: vec![0.0; m * m],
        }
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.m + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.m + j] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Row vector x times this matrix: returns x^T Q as a dense vector.
    pub fn left_mul(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.m];
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            let row = &self.data[i * self.m..(i + 1) * self.m];
            for (o, &q) in out.iter_mut().zip(row) {
                *o += xi * q;
            }
        }
        out
    }

    /// This matrix times column vector y: returns Q y.
    pub fn right_mul(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.m];
        for i in 0..self.m {
            let row = &self.data[i * self.m..(i + 1) * self.m];
            out[i] = row.iter().zip(y).map(|(&q, &yj)| q * yj).sum();
        }
        out
    }
}

/// Preference probability of `m1` over `m2` under an arbitrary score matrix:
/// the per-position average of `q[e(m1,j)][e(m2,j)]`.
pub fn matching_score(m1: &Matching, m2: &Matching, q: &SquareMatrix, l: usize) -> f64 {
    let mut total = 0.0;
    for j in 0..l {
        total += q.get(m1.edge_at(j), m2.edge_at(j));
    }
    total / l as f64
}

/// JSON form of a preference matrix: only comparable entries with i < j are
/// stored; the complement and the diagonal are synthesized on load.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PreferenceSpec {
    pub m: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

/// A validated m-by-m preference matrix: diagonal 1/2, antisymmetric on
/// comparable pairs, zero on incomparable pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PreferenceMatrix {
    mat: SquareMatrix,
    comparable: Vec<bool>,
}

impl PreferenceMatrix {
    /// Builds from upper-triangle comparable entries `(i, j, p(i beats j))`.
    /// Every comparable pair with i < j must appear exactly once.
    pub fn from_entries(g: &BipartiteGraph, entries: &[(usize, usize, f64)]) -> Result<Self> {
        let m = g.m();
        let mut mat = SquareMatrix::zeros(m);
        let mut comparable = vec![false; m * m];
        let mut seen = vec![false; m * m];
        for i in 0..m {
            mat.set(i, i, 0.5);
        }
        for &(i, j, p) in entries {
            if i >= m || j >= m || i >= j {
                return Err(Error::invalid(format!(
                    "preference entry ({i},{j}) must satisfy i < j < m"
                )));
            }
            if !g.comparable(i, j) {
                return Err(Error::invalid(format!(
                    "edges {i} and {j} are not comparable"
                )));
            }
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(format!("probability {p} outside [0,1]")));
            }
            if seen[i * m + j] {
                return Err(Error::invalid(format!("duplicate entry ({i},{j})")));
            }
            seen[i * m + j] = true;
            mat.set(i, j, p);
            mat.set(j, i, 1.0 - p);
            comparable[i * m + j] = true;
            comparable[j * m + i] = true;
        }
        for (a, b) in g.comparable_pairs() {
            if !seen[a * m + b] {
                return Err(Error::invalid(format!(
                    "missing preference entry for comparable pair ({a},{b})"
                )));
            }
        }
        Ok(Self { mat, comparable })
    }

    /// Validates a full matrix: diagonal 1/2, antisymmetry within 1e-12 on
    /// comparable pairs, exact zeros elsewhere.
    pub fn from_full(g: &BipartiteGraph, mat: SquareMatrix) -> Result<Self> {
        let m = g.m();
        if mat.dim() != m {
            return Err(Error::invalid("matrix dimension does not match edge count"));
        }
        let mut comparable = vec![false; m * m];
        for (a, b) in g.comparable_pairs() {
            comparable[a * m + b] = true;
            comparable[b * m + a] = true;
        }
        for i in 0..m {
            if (mat.get(i, i) - 0.5).abs() > ANTISYMMETRY_TOL {
                return Err(Error::invalid(format!("diagonal entry {i} must be 1/2")));
            }
            for j in 0..m {
                if i == j {
                    continue;
                }
                let v = mat.get(i, j);
                if comparable[i * m + j] {
                    if !(0.0..=1.0).contains(&v) {
                        return Err(Error::invalid(format!("entry ({i},{j}) outside [0,1]")));
                    }
                    if (v + mat.get(j, i) - 1.0).abs() > ANTISYMMETRY_TOL {
                        return Err(Error::invalid(format!(
                            "entries ({i},{j}) and ({j},{i}) violate antisymmetry"
                        )));
                    }
                } else if v != 0.0 {
                    return Err(Error::invalid(format!(
                        "incomparable entry ({i},{j}) must be zero"
                    )));
                }
            }
        }
        Ok(Self { mat, comparable })
    }

    pub fn from_spec(g: &BipartiteGraph, spec: &PreferenceSpec) -> Result<Self> {
        if spec.m != g.m() {
            return Err(Error::invalid(format!(
                "preference spec says m={}, but the graph has {} edges",
                spec.m,
                g.m()
            )));
        }
        Self::from_entries(g, &spec.entries)
    }

    pub fn to_spec(&self, g: &BipartiteGraph) -> PreferenceSpec {
        let entries = g
            .comparable_pairs()
            .into_iter()
            .map(|(i, j)| (i, j, self.get(i, j)))
            .collect();
        PreferenceSpec { m: g.m(), entries }
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.mat.get(i, j)
    }

    pub fn is_comparable(&self, i: usize, j: usize) -> bool {
        i != j && self.comparable[i * self.mat.dim() + j]
    }

    pub fn matrix(&self) -> &SquareMatrix {
        &self.mat
    }
}

/// Preference probability of `m1` over `m2` under `p`, in [0, 1].
pub fn matching_preference(m1: &Matching, m2: &Matching, p: &PreferenceMatrix) -> f64 {
    matching_score(m1, m2, &p.mat, m1.edge_ids().len())
}

/// Borda score: the average preference of `m` against the whole decision
/// class (including itself).
pub fn borda_score(m: &Matching, p: &PreferenceMatrix, class: &[Matching]) -> f64 {
    class
        .iter()
        .map(|other| matching_preference(m, other, p))
        .sum::<f64>()
        / class.len() as f64
}

/// Reward of edge `e`: the average of `p[e][e(M, s(e))]` over the class.
/// Summing rewards over a matching gives `l` times its Borda score.
pub fn edge_reward(e: usize, g: &BipartiteGraph, p: &PreferenceMatrix, class: &[Matching]) -> f64 {
    let j = g.position_of(e);
    class
        .iter()
        .map(|m| p.get(e, m.edge_at(j)))
        .sum::<f64>()
        / class.len() as f64
}

/// All edge rewards at once.
pub fn edge_rewards(g: &BipartiteGraph, p: &PreferenceMatrix, class: &[Matching]) -> Vec<f64> {
    (0..g.m()).map(|e| edge_reward(e, g, p, class)).collect()
}

/// The unique Borda-score maximizer; ties within 1e-12 are an error.
pub fn find_borda_winner(p: &PreferenceMatrix, class: &[Matching]) -> Result<Matching> {
    let scores: Vec<f64> = class.iter().map(|m| borda_score(m, p, class)).collect();
    let best = scores
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let mut winners: Vec<usize> = (0..class.len())
        .filter(|&i| scores[i] >= best - WINNER_TIE_TOL)
        .collect();
    if winners.len() != 1 {
        winners.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap());
        return Err(Error::NonUniqueWinner {
            best,
            runner_up: scores[winners[1]],
            tolerance: WINNER_TIE_TOL,
        });
    }
    Ok(class[winners[0]].clone())
}

/// The matching beating every other strictly, or `None` when absent.
pub fn find_condorcet_winner(p: &PreferenceMatrix, class: &[Matching]) -> Option<Matching> {
    class
        .iter()
        .find(|m| {
            class
                .iter()
                .filter(|other| other != m)
                .all(|other| matching_preference(m, other, p) > 0.5)
        })
        .cloned()
}

/// Per-edge and per-pair sub-optimality gaps plus the derived hardness
/// quantities. Gaps over empty feasible sets are `None` (infinite), which
/// contributes zero to the hardness sums.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GapReport {
    /// Borda gap per edge (None = infinite).
    pub borda_gap: Vec<Option<f64>>,
    /// Smallest finite Borda gap.
    pub borda_min_gap: Option<f64>,
    /// Sum of inverse squared Borda gaps.
    pub h_borda: f64,
    /// Graph width (drives the epsilon-capped hardness).
    pub width: usize,
    /// Condorcet gap per edge; None per-entry = infinite; absent entirely
    /// when no Condorcet winner exists.
    pub condorcet_gap: Option<Vec<Option<f64>>>,
    /// Pair gap max(gap(e), gap(e')) for comparable pairs (e < e').
    pub pair_gap: Option<Vec<(usize, usize, Option<f64>)>>,
    /// Verification gap per edge outside the Condorcet winner.
    pub verification_gap: Option<Vec<(usize, Option<f64>)>>,
    /// Sum of inverse squared verification gaps.
    pub h_condorcet_verify: Option<f64>,
}

impl GapReport {
    /// Epsilon-capped Borda hardness: sum over edges of
    /// `min(width^2 / gap^2, 1 / eps^2)`.
    pub fn h_borda_eps(&self, eps: f64) -> f64 {
        let w2 = (self.width * self.width) as f64;
        self.borda_gap
            .iter()
            .map(|gap| match gap {
                Some(d) => (w2 / (d * d)).min(1.0 / (eps * eps)),
                None => 0.0,
            })
            .sum()
    }
}

fn inv_sq_sum(gaps: impl Iterator<Item = Option<f64>>) -> f64 {
    gaps.map(|g| match g {
        Some(d) => 1.0 / (d * d),
        None => 0.0,
    })
    .sum()
}

/// Computes every gap and hardness quantity by exhaustive maximization over
/// the enumerated class. The Condorcet parts are `None` when that winner is
/// missing; a Borda tie is an error.
pub fn compute_gaps(
    g: &BipartiteGraph,
    p: &PreferenceMatrix,
    class: &[Matching],
    width: usize,
) -> Result<GapReport> {
    let rewards = edge_rewards(g, p, class);
    let weights: Vec<f64> = class.iter().map(|m| m.total_weight(&rewards)).collect();
    let borda_winner = find_borda_winner(p, class)?;
    let w_star = borda_winner.total_weight(&rewards);

    let mut borda_gap = Vec::with_capacity(g.m());
    for e in 0..g.m() {
        let include = borda_winner.contains(e);
        // Best matching on the other side of e's membership in the winner.
        let best = class
            .iter()
            .zip(&weights)
            .filter(|(m, _)| m.contains(e) != include)
            .map(|(_, &w)| w)
            .fold(f64::NEG_INFINITY, f64::max);
        borda_gap.push(if best.is_finite() {
            Some(w_star - best)
        } else {
            None
        });
    }
    let borda_min_gap = borda_gap
        .iter()
        .flatten()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let borda_min_gap = borda_min_gap.is_finite().then_some(borda_min_gap);
    let h_borda = inv_sq_sum(borda_gap.iter().copied());

    let condorcet = find_condorcet_winner(p, class);
    let (condorcet_gap, pair_gap, verification_gap, h_ver) = match condorcet {
        None => (None, None, None, None),
        Some(winner) => {
            let f_vs_winner: Vec<f64> = class
                .iter()
                .map(|m| matching_preference(m, &winner, p))
                .collect();
            let mut cg: Vec<Option<f64>> = Vec::with_capacity(g.m());
            for e in 0..g.m() {
                let include = winner.contains(e);
                // Strongest matching against the winner, restricted by e's
                // membership flipped relative to the winner.
                let best = class
                    .iter()
                    .zip(&f_vs_winner)
                    .filter(|(m, _)| m.contains(e) != include)
                    .map(|(_, &f)| f)
                    .fold(f64::NEG_INFINITY, f64::max);
                cg.push(if best.is_finite() {
                    Some(0.5 - best)
                } else {
                    None
                });
            }
            let pairs = g
                .comparable_pairs()
                .into_iter()
                .map(|(a, b)| {
                    let pg = match (cg[a], cg[b]) {
                        (Some(x), Some(y)) => Some(x.max(y)),
                        _ => None,
                    };
                    (a, b, pg)
                })
                .collect();
            let l = g.n_positions() as f64;
            let mut ver = Vec::new();
            for e in 0..g.m() {
                if winner.contains(e) {
                    continue;
                }
                let best = class
                    .iter()
                    .zip(&f_vs_winner)
                    .filter(|(m, _)| m.contains(e) && *m != &winner)
                    .map(|(m, &f)| {
                        let d = m.distance(&winner) as f64;
                        (l / d) * (0.5 - f)
                    })
                    .fold(f64::INFINITY, f64::min);
                ver.push((e, best.is_finite().then_some(best)));
            }
            let h = inv_sq_sum(ver.iter().map(|&(_, g)| g));
            (Some(cg), Some(pairs), Some(ver), Some(h))
        }
    };

    Ok(GapReport {
        borda_gap,
        borda_min_gap,
        h_borda,
        width,
        condorcet_gap,
        pair_gap,
        verification_gap,
        h_condorcet_verify: h_ver,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demo;
    use crate::graph::{enumerate_maximum_matchings, width, ConstraintPair};

    fn setup() -> (BipartiteGraph, PreferenceMatrix, Vec<Matching>) {
        let (g, p) = demo::demo_instance();
        let class = enumerate_maximum_matchings(&g, &ConstraintPair::empty(), 24).unwrap();
        (g, p, class)
    }

    #[test]
    fn preference_between_matchings() {
        let (g, p, _) = setup();
        let m_cond = Matching::from_edge_ids(&g, vec![1, 4]).unwrap();
        let m_other = Matching::from_edge_ids(&g, vec![0, 3]).unwrap();
        assert!((matching_preference(&m_cond, &m_other, &p) - 0.775).abs() < 1e-15);
        assert!((matching_preference(&m_cond, &m_cond, &p) - 0.5).abs() < 1e-15);
        assert!(
            (matching_preference(&m_cond, &m_other, &p)
                + matching_preference(&m_other, &m_cond, &p)
                - 1.0)
                .abs()
                < 1e-15
        );
    }

    #[test]
    fn borda_scores_match_known_values() {
        let (g, p, class) = setup();
        let borda = Matching::from_edge_ids(&g, vec![0, 4]).unwrap();
        let cond = Matching::from_edge_ids(&g, vec![1, 4]).unwrap();
        assert!((borda_score(&borda, &p, &class) - 0.64).abs() < 1e-12);
        assert!((borda_score(&cond, &p, &class) - 0.615).abs() < 1e-12);
    }

    #[test]
    fn borda_scores_sum_to_half_class_size() {
        let (_, p, class) = setup();
        let total: f64 = class.iter().map(|m| borda_score(m, &p, &class)).sum();
        assert!((total - class.len() as f64 / 2.0).abs() < 1e-12);
    }

    #[test]
    fn edge_rewards_match_direct_enumeration() {
        let (g, p, class) = setup();
        let w = edge_rewards(&g, &p, &class);
        let expected = [0.58, 0.53, 0.28, 0.2, 0.7];
        for (e, &want) in expected.iter().enumerate() {
            assert!((w[e] - want).abs() < 1e-12, "w[{e}] = {} != {want}", w[e]);
        }
        // w({e0,e4}) = 1.28 = 2 * 0.64.
        assert!((w[0] + w[4] - 1.28).abs() < 1e-12);
    }

    #[test]
    fn reward_sum_identity() {
        let (g, p, class) = setup();
        let w = edge_rewards(&g, &p, &class);
        let l = g.n_positions() as f64;
        for m in &class {
            let lhs = m.total_weight(&w);
            let rhs = l * borda_score(m, &p, &class);
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn winners_are_as_expected() {
        let (g, p, class) = setup();
        let borda = find_borda_winner(&p, &class).unwrap();
        assert_eq!(borda.edge_ids(), &[0, 4]);
        let cond = find_condorcet_winner(&p, &class).unwrap();
        assert_eq!(cond.edge_ids(), &[1, 4]);
        let _ = g;
    }

    #[test]
    fn symmetric_preference_has_no_unique_winner() {
        let g = demo::demo_graph();
        let entries = vec![(0, 1, 0.5), (0, 2, 0.5), (1, 2, 0.5), (3, 4, 0.5)];
        let p = PreferenceMatrix::from_entries(&g, &entries).unwrap();
        let class = enumerate_maximum_matchings(&g, &ConstraintPair::empty(), 24).unwrap();
        assert!(matches!(
            find_borda_winner(&p, &class),
            Err(Error::NonUniqueWinner { .. })
        ));
        assert!(find_condorcet_winner(&p, &class).is_none());
    }

    #[test]
    fn cyclic_single_position_has_no_condorcet_winner() {
        let g = BipartiteGraph::new(3, 1, vec![(0, 0), (1, 0), (2, 0)]).unwrap();
        // a beats b, b beats c, c beats a, all at 0.6.
        let p =
            PreferenceMatrix::from_entries(&g, &[(0, 1, 0.6), (1, 2, 0.6), (0, 2, 0.4)]).unwrap();
        let class = enumerate_maximum_matchings(&g, &ConstraintPair::empty(), 24).unwrap();
        assert!(find_condorcet_winner(&p, &class).is_none());
    }

    #[test]
    fn two_matching_instance_picks_higher_borda() {
        let g = BipartiteGraph::new(2, 1, vec![(0, 0), (1, 0)]).unwrap();
        let p = PreferenceMatrix::from_entries(&g, &[(0, 1, 0.7)]).unwrap();
        let class = enumerate_maximum_matchings(&g, &ConstraintPair::empty(), 24).unwrap();
        let winner = find_borda_winner(&p, &class).unwrap();
        assert_eq!(winner.edge_ids(), &[0]);
    }

    #[test]
    fn gap_report_matches_hand_computation() {
        let (g, p, class) = setup();
        let w = width(&g, 24).unwrap();
        let report = compute_gaps(&g, &p, &class, w).unwrap();
        let expect = [0.05, 0.05, 0.3, 0.5, 0.5];
        for (e, &want) in expect.iter().enumerate() {
            let got = report.borda_gap[e].unwrap();
            assert!((got - want).abs() < 1e-12, "borda gap {e}: {got} vs {want}");
        }
        assert!((report.h_borda - 819.111111111111).abs() < 1e-2);
        assert!((report.borda_min_gap.unwrap() - 0.05).abs() < 1e-12);

        let cg = report.condorcet_gap.as_ref().unwrap();
        assert!((cg[4].unwrap() - 0.25).abs() < 1e-12);
        assert!((cg[0].unwrap() - 0.025).abs() < 1e-12);
        // Verification gap for edge e0: min(0.275, 0.05) = 0.05.
        let ver = report.verification_gap.as_ref().unwrap();
        let (_, v0) = ver.iter().find(|&&(e, _)| e == 0).unwrap();
        assert!((v0.unwrap() - 0.05).abs() < 1e-12);
        // Pair gaps obey the max rule.
        for &(a, b, pg) in report.pair_gap.as_ref().unwrap() {
            let want = cg[a].unwrap().max(cg[b].unwrap());
            assert!((pg.unwrap() - want).abs() < 1e-15);
        }
        // All gaps positive when winners are unique.
        assert!(report.borda_gap.iter().flatten().all(|&g| g > 0.0));
        assert!(cg.iter().flatten().all(|&g| g > 0.0));
    }

    #[test]
    fn h_borda_eps_caps_small_gaps() {
        let (g, p, class) = setup();
        let w = width(&g, 24).unwrap();
        let report = compute_gaps(&g, &p, &class, w).unwrap();
        // With a huge eps every term is capped by 1/eps^2.
        let capped = report.h_borda_eps(1.0);
        assert!(capped <= g.m() as f64);
        // With a tiny eps the width term wins: sum of width^2 / gap^2.
        let uncapped = report.h_borda_eps(1e-9);
        let w2 = (report.width * report.width) as f64;
        assert!((uncapped - w2 * report.h_borda).abs() < 1e-3);
    }

    #[test]
    fn matrix_validation_rejects_bad_input() {
        let g = demo::demo_graph();
        // Missing comparable pair.
        assert!(PreferenceMatrix::from_entries(&g, &[(0, 1, 0.4)]).is_err());
        // Incomparable pair provided.
        assert!(PreferenceMatrix::from_entries(
            &g,
            &[(0, 1, 0.45), (0, 2, 1.0), (1, 2, 0.55), (3, 4, 0.0), (0, 3, 0.5)]
        )
        .is_err());
        // Antisymmetry violation in a full matrix.
        let (g, p) = demo::demo_instance();
        let mut mat = p.matrix().clone();
        mat.set(0, 1, 0.7);
        assert!(PreferenceMatrix::from_full(&g, mat).is_err());
    }

    #[test]
    fn spec_round_trip() {
        let (g, p) = demo::demo_instance();
        let spec = p.to_spec(&g);
        let back = PreferenceMatrix::from_spec(&g, &spec).unwrap();
        assert_eq!(back.matrix().data(), p.matrix().data());
    }
}
