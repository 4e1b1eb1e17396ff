//! Brute-force verification oracles and instance generators.
//!
//! Nothing here is on any algorithm's execution path: these are independent
//! references the test suites compare against, plus seeded generators for
//! random desk-scale instances.

use crate::error::{Error, Result};
use crate::graph::{BipartiteGraph, Matching};
use crate::preference::PreferenceMatrix;
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Exact Euclidean projection of `p` onto the convex hull of the given
/// vertices, by exhaustive search over support subsets: for every subset the
/// affinely optimal combination is solved in closed form, kept when its
/// weights are a valid convex combination, and the closest survivor wins.
/// Exponential in the vertex count; intended for hulls of at most ~12
/// vertices.
pub fn exact_projection(vertices: &[Vec<f64>], p: &[f64]) -> Result<Vec<f64>> {
    if vertices.is_empty() {
        return Err(Error::invalid("projection needs at least one vertex"));
    }
    if vertices.len() > 16 {
        return Err(Error::InstanceTooLarge {
            edges: vertices.len(),
            cap: 16,
        });
    }
    let dim = p.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1u32..(1 << vertices.len()) {
        let subset: Vec<&Vec<f64>> = (0..vertices.len())
            .filter(|&i| mask & (1 << i) != 0)
            .map(|i| &vertices[i])
            .collect();
        let Some(lambda) = affine_least_squares(&subset, p) else {
            continue;
        };
        if lambda.iter().any(|&w| w < -1e-9) {
            continue;
        }
        let mut point = vec![0.0; dim];
        for (v, &w) in subset.iter().zip(&lambda) {
            for (x, &vi) in point.iter_mut().zip(v.iter()) {
                *x += w * vi;
            }
        }
        let dist: f64 = point
            .iter()
            .zip(p)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        if best.as_ref().is_none_or(|(d, _)| dist < *d) {
            best = Some((dist, point));
        }
    }
    Ok(best.expect("singleton subsets always qualify").1)
}

/// Minimizes `|| sum_i lambda_i v_i - p ||` subject to `sum lambda = 1`
/// (no sign constraint), via the KKT system solved by Gaussian elimination.
/// Returns `None` for singular systems (degenerate subsets).
fn affine_least_squares(vertices: &[&Vec<f64>], p: &[f64]) -> Option<Vec<f64>> {
    let k = vertices.len();
    // Normal equations with a Lagrange multiplier for the sum constraint:
    // [ G  1 ] [lambda]   [ V p ]
    // [ 1' 0 ] [  mu  ] = [  1  ]
    let n = k + 1;
    let mut a = vec![0.0f64; n * n];
    let mut b = vec![0.0f64; n];
    for i in 0..k {
        for j in 0..k {
            a[i * n + j] = dot(vertices[i], vertices[j]);
        }
        a[i * n + k] = 1.0;
        a[k * n + i] = 1.0;
        b[i] = dot(vertices[i], p);
    }
    b[k] = 1.0;
    solve_dense(&mut a, &mut b, n).map(|mut sol| {
        sol.truncate(k);
        sol
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gaussian elimination with partial pivoting; `None` when singular.
fn solve_dense(a: &mut [f64], b: &mut [f64], n: usize) -> Option<Vec<f64>> {
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| {
            a[i * n + col]
                .abs()
                .partial_cmp(&a[j * n + col].abs())
                .unwrap()
        })?;
        if a[pivot * n + col].abs() < 1e-12 {
            return None;
        }
        if pivot != col {
            for j in 0..n {
                a.swap(col * n + j, pivot * n + j);
            }
            b.swap(col, pivot);
        }
        let inv = 1.0 / a[col * n + col];
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = a[row * n + col] * inv;
            if factor == 0.0 {
                continue;
            }
            for j in col..n {
                a[row * n + j] -= factor * a[col * n + j];
            }
            b[row] -= factor * b[col];
        }
    }
    Some((0..n).map(|i| b[i] / a[i * n + i]).collect())
}

/// Dense vertex vectors of a list of matchings.
pub fn vertex_vectors(class: &[Matching], n_edges: usize) -> Vec<Vec<f64>> {
    class
        .iter()
        .map(|m| {
            let mut v = vec![0.0; n_edges];
            for &e in m.edge_ids() {
                v[e] = 1.0;
            }
            v
        })
        .collect()
}

/// Chi-square goodness-of-fit against the uniform distribution.
#[derive(Debug, Clone, Copy)]
pub struct ChiSquareReport {
    pub statistic: f64,
    pub degrees: usize,
    pub critical: f64,
    pub pass: bool,
}

/// Tests uniformity of observed counts at the given significance level.
pub fn chi_square_uniform(counts: &[u64], significance: f64) -> ChiSquareReport {
    let k = counts.len();
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / k as f64;
    let statistic = counts
        .iter()
        .map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum();
    let degrees = k - 1;
    let dist = ChiSquared::new(degrees as f64).expect("valid degrees of freedom");
    let critical = dist.inverse_cdf(1.0 - significance);
    ChiSquareReport {
        statistic,
        degrees,
        critical,
        pass: statistic < critical,
    }
}

/// Random bipartite graph with `n` candidates, `l` positions, and roughly
/// `extra` edges beyond a planted perfect assignment (which guarantees
/// feasibility). Duplicate proposals are dropped.
pub fn random_graph<R: Rng>(rng: &mut R, n: usize, l: usize, extra: usize) -> BipartiteGraph {
    assert!(l >= 1 && n >= l);
    let mut edges = Vec::new();
    // Planted assignment: a random distinct candidate per position.
    let mut candidates: Vec<usize> = (0..n).collect();
    for j in 0..l {
        let pick = rng.random_range(j..n);
        candidates.swap(j, pick);
        edges.push((candidates[j], j));
    }
    for _ in 0..extra {
        let c = rng.random_range(0..n);
        let j = rng.random_range(0..l);
        if !edges.contains(&(c, j)) {
            edges.push((c, j));
        }
    }
    BipartiteGraph::new(n, l, edges).expect("planted assignment keeps the graph feasible")
}

/// Random preference matrix with entries in `[0.5 - spread, 0.5 + spread]`.
pub fn random_preference<R: Rng>(
    rng: &mut R,
    g: &BipartiteGraph,
    spread: f64,
) -> PreferenceMatrix {
    let entries: Vec<(usize, usize, f64)> = g
        .comparable_pairs()
        .into_iter()
        .map(|(i, j)| (i, j, 0.5 + spread * (2.0 * rng.random::<f64>() - 1.0)))
        .collect();
    PreferenceMatrix::from_entries(g, &entries).expect("entries are valid probabilities")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demo;
    use crate::graph::{enumerate_maximum_matchings, ConstraintPair};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn projection_of_member_is_identity() {
        let g = demo::demo_graph();
        let class = enumerate_maximum_matchings(&g, &ConstraintPair::empty(), 24).unwrap();
        let vs = vertex_vectors(&class, g.m());
        let proj = exact_projection(&vs, &vs[2]).unwrap();
        let err: f64 = proj
            .iter()
            .zip(&vs[2])
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        assert!(err < 1e-9);
    }

    #[test]
    fn projection_onto_segment() {
        // Hull of two points in the plane; project a point off the segment.
        let vs = vec![vec![0.0, 0.0], vec![1.0, 0.0]];
        let proj = exact_projection(&vs, &[0.3, 2.0]).unwrap();
        assert!((proj[0] - 0.3).abs() < 1e-12);
        assert!(proj[1].abs() < 1e-12);
        // Beyond an endpoint clamps to the vertex.
        let proj = exact_projection(&vs, &[2.0, 1.0]).unwrap();
        assert!((proj[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn projection_satisfies_optimality_inequality() {
        let g = demo::demo_graph();
        let class = enumerate_maximum_matchings(&g, &ConstraintPair::empty(), 24).unwrap();
        let vs = vertex_vectors(&class, g.m());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..25 {
            let p: Vec<f64> = (0..g.m()).map(|_| 2.0 * rng.random::<f64>() - 0.5).collect();
            let proj = exact_projection(&vs, &p).unwrap();
            // (p - proj) . (v - proj) <= 0 for every vertex v.
            for v in &vs {
                let inner: f64 = (0..g.m())
                    .map(|e| (p[e] - proj[e]) * (v[e] - proj[e]))
                    .sum();
                assert!(inner <= 1e-7, "optimality violated: {inner}");
            }
        }
    }

    #[test]
    fn chi_square_detects_and_accepts() {
        let uniform = [10_000u64, 10_050, 9_950, 10_020, 9_980];
        let report = chi_square_uniform(&uniform, 0.001);
        assert!(report.pass);
        assert_eq!(report.degrees, 4);
        assert!((report.critical - 18.4668).abs() < 1e-3);
        let skewed = [20_000u64, 5_000, 5_000, 10_000, 10_000];
        assert!(!chi_square_uniform(&skewed, 0.001).pass);
    }

    #[test]
    fn random_instances_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let g = random_graph(&mut rng, 5, 3, 6);
            assert!(g.m() <= 3 + 6 + 3);
            let p = random_preference(&mut rng, &g, 0.4);
            assert_eq!(p.dim(), g.m());
            // Enumeration works and the class is nonempty.
            let class = enumerate_maximum_matchings(&g, &ConstraintPair::empty(), 24).unwrap();
            assert!(!class.is_empty());
        }
    }
}
