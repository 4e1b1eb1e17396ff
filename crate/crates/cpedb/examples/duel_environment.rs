//! The simulated duel environment and the confidence-bound machinery: seeded
//! Bernoulli duels, per-pair radii, and the clamped bound matrices.
//!
//!     cargo run --example duel_environment

use cpedb::demo::demo_instance;
use cpedb::env::{confidence_radius, DuelEnvironment, DuelStats};

fn main() -> cpedb::Result<()> {
    let (g, p) = demo_instance();
    let mut env = DuelEnvironment::new(p, 42);
    println!("environment metadata: {:?}", env.metadata());

    let mut stats = DuelStats::new(g.m());
    for round in 1..=500u64 {
        for (a, b) in g.comparable_pairs() {
            let won = env.sample_duel(a, b)?;
            stats.record_pair(a, b, won);
        }
        stats.round = round;
    }
    println!("total samples: {}", env.total_samples());

    println!("\nempirical means vs radii (t = 500, delta = 0.1):");
    for (a, b) in g.comparable_pairs() {
        println!(
            "  p({a} beats {b}) ~ {:.3} +/- {:.3} over {} duels",
            stats.pair_mean(a, b),
            stats.pair_radius(a, b, 500, 0.1, g.duel_count()),
            stats.pair_count(a, b)
        );
    }

    let (upper, lower) = stats.bound_matrices(&g, 500, 0.1);
    println!("\nhidden truth inside the bound matrices: {}", env.truth_within_bounds(&upper, &lower));

    println!("\nradius shrinks with the observation count (t = 1, delta = 0.1, K = 10):");
    for t_obs in [0u64, 50, 200, 800] {
        println!("  T = {t_obs:4} -> {:.4}", confidence_radius(1, t_obs, 0.1, 10));
    }
    Ok(())
}
