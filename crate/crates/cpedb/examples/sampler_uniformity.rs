//! Compares the exact and walk-based matching samplers against the uniform
//! target: per-matching frequencies, total variation, and a chi-square test.
//!
//!     cargo run --release --example sampler_uniformity

use cpedb::demo::demo_graph;
use cpedb::graph::{enumerate_maximum_matchings, ConstraintPair};
use cpedb::reference::chi_square_uniform;
use cpedb::sampler::{
    augment, default_mcmc_steps, tv_distance_uniform, MatchingSampler, SamplerConfig,
};

fn main() -> cpedb::Result<()> {
    let g = demo_graph();
    let class = enumerate_maximum_matchings(&g, &ConstraintPair::empty(), 24)?;
    let aug = augment(&g);
    println!(
        "augmentation: {} fictitious positions, {} edges total",
        aug.fictitious_positions(),
        aug.graph().m()
    );

    for (label, cfg, draws) in [
        ("exact", SamplerConfig::exact(7), 50_000u32),
        (
            "mcmc",
            SamplerConfig::mcmc(7, 0.05, default_mcmc_steps(&g)),
            20_000u32,
        ),
    ] {
        let mut sampler = MatchingSampler::new(&g, cfg)?;
        let mut counts = vec![0u64; class.len()];
        for _ in 0..draws {
            let m = sampler.sample()?;
            let idx = class.iter().position(|x| x == &m).expect("member of the class");
            counts[idx] += 1;
        }
        println!("\n{label} sampler, {draws} draws:");
        for (m, c) in class.iter().zip(&counts) {
            println!(
                "  {:?}: {:.4} (target {:.4})",
                m.edge_ids(),
                *c as f64 / draws as f64,
                1.0 / class.len() as f64
            );
        }
        println!("  tv distance to uniform: {:.4}", tv_distance_uniform(&counts));
        let chi = chi_square_uniform(&counts, 0.001);
        println!(
            "  chi-square: statistic {:.3} vs critical {:.3} (df {}) -> {}",
            chi.statistic,
            chi.critical,
            chi.degrees,
            if chi.pass { "pass" } else { "fail" }
        );
    }
    Ok(())
}
