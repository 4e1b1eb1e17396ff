//! The approximate minimax oracle versus the brute-force game solver on a
//! grid of constraint sets.
//!
//!     cargo run --release --example minimax_oracle

use cpedb::demo::demo_instance;
use cpedb::graph::ConstraintPair;
use cpedb::oracle::{exact_game_value, minimax_oracle, OracleConfig};

fn main() -> cpedb::Result<()> {
    let (g, p) = demo_instance();
    let cfg = OracleConfig::default();
    let eps = 0.05;
    let free = ConstraintPair::empty();

    println!("max-min game value over constrained matching hulls (eps = {eps}):\n");
    let mut cases: Vec<(String, ConstraintPair)> =
        vec![("unconstrained".into(), ConstraintPair::empty())];
    for e in 0..g.m() {
        cases.push((format!("force edge {e}"), ConstraintPair::new(&g, vec![e], vec![])?));
        cases.push((format!("forbid edge {e}"), ConstraintPair::new(&g, vec![], vec![e])?));
    }

    for (label, c1) in cases {
        let exact = exact_game_value(&g, &c1, &free, p.matrix(), eps / 25.0, 24)?;
        let r = minimax_oracle(&g, &c1, &free, p.matrix(), eps, &cfg)?;
        println!(
            "  {label:<16} oracle {:.4} in [{:.4}, {:.4}]  exact {:.4}  |diff| {:.4}  ({} iters, {} projections)",
            r.value,
            r.lower,
            r.upper,
            exact,
            (r.value - exact).abs(),
            r.iterations,
            r.projection_calls
        );
        assert!((r.value - exact).abs() <= eps);
    }

    println!("\nthe unconstrained value 0.5 certifies the existence of a matching");
    println!("that never loses on average: the condorcet winner's security level.");
    Ok(())
}
