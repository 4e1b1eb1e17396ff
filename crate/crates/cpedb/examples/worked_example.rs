//! Ground-truth tour of the built-in demo instance: Borda scores, both
//! winners, and every gap/hardness quantity.
//!
//!     cargo run --example worked_example

use cpedb::demo::demo_instance;
use cpedb::graph::{enumerate_maximum_matchings, width, ConstraintPair};
use cpedb::preference::{
    borda_score, compute_gaps, edge_rewards, find_borda_winner, find_condorcet_winner,
    matching_preference,
};

fn main() -> cpedb::Result<()> {
    let (g, p) = demo_instance();
    let class = enumerate_maximum_matchings(&g, &ConstraintPair::empty(), 24)?;

    println!("decision class ({} maximum matchings):", class.len());
    for m in &class {
        println!(
            "  {:?}  borda score {:.4}",
            m.edge_ids(),
            borda_score(m, &p, &class)
        );
    }

    let borda = find_borda_winner(&p, &class)?;
    let condorcet = find_condorcet_winner(&p, &class).expect("demo instance has one");
    println!("\nborda winner:     {:?}", borda.edge_ids());
    println!("condorcet winner: {:?}", condorcet.edge_ids());
    println!(
        "head to head: f(condorcet, borda) = {:.4}",
        matching_preference(&condorcet, &borda, &p)
    );

    let w = edge_rewards(&g, &p, &class);
    println!("\nedge rewards (sum over a matching = 2 x its borda score):");
    println!("  {w:?}");

    let gaps = compute_gaps(&g, &p, &class, width(&g, 24)?)?;
    println!("\nborda gaps:      {:?}", gaps.borda_gap);
    println!("condorcet gaps:  {:?}", gaps.condorcet_gap.as_ref().unwrap());
    println!("h_borda = {:.4}", gaps.h_borda);
    println!("h_borda_eps(0.05) = {:.4}", gaps.h_borda_eps(0.05));
    println!("h_condorcet_verify = {:.4}", gaps.h_condorcet_verify.unwrap());
    Ok(())
}
