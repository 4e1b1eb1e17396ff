//! The matching oracles behind every algorithm: constrained enumeration,
//! max-weight and min-cost matching with lexicographic tie-breaking, and the
//! width of the graph.
//!
//!     cargo run --example matching_oracles

use cpedb::demo::demo_graph;
use cpedb::graph::{
    enumerate_maximum_matchings, min_cost_maximum_matching, mwmc, restrict, width,
    ConstraintPair, EdgeWeights,
};

fn main() -> cpedb::Result<()> {
    let g = demo_graph();
    println!("graph: {} candidates, {} positions, edges {:?}", g.n_candidates(), g.n_positions(), g.edges());

    let all = enumerate_maximum_matchings(&g, &ConstraintPair::empty(), 24)?;
    println!("\nall maximum matchings:");
    for m in &all {
        println!("  {:?}", m.edge_ids());
    }

    // Force edge 1 into the matching; the class shrinks to two.
    let force = ConstraintPair::new(&g, vec![1], vec![])?;
    let constrained = enumerate_maximum_matchings(&g, &force, 24)?;
    println!("\nmatchings containing edge 1:");
    for m in &constrained {
        println!("  {:?}", m.edge_ids());
    }
    let (sub, index_map) = restrict(&g, &force)?;
    println!("restricted graph keeps {} of {} edges (map {:?})", sub.m(), g.m(), index_map);

    let w = EdgeWeights::new(vec![0.58, 0.53, 0.28, 0.2, 0.7])?;
    let best = mwmc(&g, &w, &ConstraintPair::empty())?;
    println!(
        "\nmax-weight matching under the demo edge rewards: {:?} (weight {:.2})",
        best.edge_ids(),
        best.total_weight(w.as_slice())
    );

    let flat = EdgeWeights::new(vec![1.0; 5])?;
    let tied = mwmc(&g, &flat, &ConstraintPair::empty())?;
    println!("all-equal weights break ties to the smallest edge set: {:?}", tied.edge_ids());

    let costs = EdgeWeights::new(vec![1.0, 2.0, 3.0, 4.0, 5.0])?;
    let cheap = min_cost_maximum_matching(&g, &costs, &ConstraintPair::empty())?;
    println!("min-cost matching with index costs: {:?} (cost {})", cheap.edge_ids(), cheap.total_weight(costs.as_slice()));

    println!("\nwidth of the graph: {}", width(&g, 24)?);
    Ok(())
}
