//! Frank-Wolfe approximate projection onto the matching polytope, checked
//! against the exhaustive active-set reference.
//!
//!     cargo run --release --example projection

use cpedb::demo::demo_graph;
use cpedb::graph::{enumerate_maximum_matchings, ConstraintPair};
use cpedb::oracle::approx_project;
use cpedb::reference::{exact_projection, vertex_vectors};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> cpedb::Result<()> {
    let g = demo_graph();
    let class = enumerate_maximum_matchings(&g, &ConstraintPair::empty(), 24)?;
    let vertices = vertex_vectors(&class, g.m());
    let eps = 0.05;
    let mut rng = ChaCha8Rng::seed_from_u64(3);

    println!("projecting random points onto the {}-vertex hull (eps = {eps}):\n", class.len());
    for trial in 0..8 {
        let p: Vec<f64> = (0..g.m()).map(|_| 2.0 * rng.random::<f64>() - 0.5).collect();
        let approx = approx_project(&p, &g, &ConstraintPair::empty(), eps)?;
        let exact = exact_projection(&vertices, &p)?;
        let err: f64 = approx
            .dense()
            .iter()
            .zip(&exact)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        println!(
            "  point {trial}: ||approx - exact|| = {:.5}  (support size {})",
            err,
            approx.support().len()
        );
        assert!(err <= eps);
    }

    // The zero vector projects to the "most spread out" hull point.
    let zero = vec![0.0; g.m()];
    let proj = approx_project(&zero, &g, &ConstraintPair::empty(), eps)?;
    println!("\nprojection of the zero vector: {:?}", proj.dense());
    println!("support:");
    for (m, w) in proj.support() {
        println!("  {:?} with weight {:.4}", m.edge_ids(), w);
    }
    Ok(())
}
