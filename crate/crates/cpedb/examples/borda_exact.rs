//! Exact Borda-winner identification: the epoch ladder with halving accuracy
//! and the strict-equality stop.
//!
//!     cargo run --release --example borda_exact

use cpedb::borda::clucb_borda_exact;
use cpedb::demo::demo_instance;
use cpedb::env::DuelEnvironment;
use cpedb::sampler::SamplerConfig;

fn main() -> cpedb::Result<()> {
    let (g, p) = demo_instance();
    let mut env = DuelEnvironment::new(p, 4242);
    let (m, trace) = clucb_borda_exact(&mut env, &g, 0.1, SamplerConfig::exact(17), 100_000_000)?;

    println!("returned {:?} via {:?}", m.edge_ids(), trace.stop);
    println!("total: {} rounds, {} samples\n", trace.rounds, trace.samples);
    println!("epoch ladder:");
    for e in &trace.epochs {
        println!(
            "  q = {:2}  epsilon = {:.6}  delta_q = {:.6}  rounds = {}",
            e.q, e.epsilon, e.delta, e.rounds
        );
    }
    println!("\npulls per edge: {:?}", trace.pulls);
    Ok(())
}
