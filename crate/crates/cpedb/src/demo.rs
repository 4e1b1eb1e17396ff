//! A small built-in instance used by examples and tests.
//!
//! Four candidates compete for two positions. Candidates c1..c3 can fill
//! position s1 (edges e0..e2), candidates c3 and c4 can fill position s2
//! (edges e3, e4). The pairwise win probabilities are chosen so that the
//! Borda winner {e0, e4} and the Condorcet winner {e1, e4} differ, which
//! makes the instance a useful smoke test for every algorithm in the crate.

use crate::graph::BipartiteGraph;
use crate::preference::PreferenceMatrix;

/// The demo graph: 4 candidates, 2 positions, 5 edges.
pub fn demo_graph() -> BipartiteGraph {
    BipartiteGraph::new(4, 2, vec![(0, 0), (1, 0), (2, 0), (2, 1), (3, 1)])
        .expect("demo graph is valid")
}

/// The demo preference matrix. Row i, column j holds the probability that
/// edge i beats edge j in a duel; incomparable entries are zero.
pub fn demo_preference(g: &BipartiteGraph) -> PreferenceMatrix {
    // Upper-triangle comparable entries (i < j).
    let entries = vec![
        (0, 1, 0.45),
        (0, 2, 1.0),
        (1, 2, 0.55),
        (3, 4, 0.0),
    ];
    PreferenceMatrix::from_entries(g, &entries).expect("demo preference is valid")
}

/// Graph plus preference matrix in one call.
pub fn demo_instance() -> (BipartiteGraph, PreferenceMatrix) {
    let g = demo_graph();
    let p = demo_preference(&g);
    (g, p)
}

/// The demo preference with every off-diagonal entry pulled toward 1/2 by
/// `factor` (0 < factor <= 1). Shrinking the margins makes identification
/// strictly harder.
pub fn demo_preference_scaled(g: &BipartiteGraph, factor: f64) -> PreferenceMatrix {
    let entries = vec![
        (0, 1, 0.5 + (0.45 - 0.5) * factor),
        (0, 2, 0.5 + (1.0 - 0.5) * factor),
        (1, 2, 0.5 + (0.55 - 0.5) * factor),
        (3, 4, 0.5 + (0.0 - 0.5) * factor),
    ];
    PreferenceMatrix::from_entries(g, &entries).expect("scaled demo preference is valid")
}
