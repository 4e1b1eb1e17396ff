//! Verification-based identification: a single verifier run, then the
//! parallel interleaving of verifiers at geometric confidences.
//!
//!     cargo run --release --example car_verify_parallel

use cpedb::condorcet::{
    car_parallel, car_verify, parallel_schedule, CondConfig, VerifyOutcome,
};
use cpedb::demo::demo_instance;
use cpedb::env::DuelEnvironment;

fn main() -> cpedb::Result<()> {
    let (g, p) = demo_instance();
    let delta = 0.005;
    let cfg = CondConfig::new(delta);

    let mut env = DuelEnvironment::new(p.clone(), 7);
    let (out, trace) = car_verify(&mut env, &g, delta, cfg)?;
    match out {
        VerifyOutcome::Winner(m) => println!("verify: confirmed {:?}", m.edge_ids()),
        VerifyOutcome::Rejected => println!("verify: hypothesis rejected"),
    }
    println!(
        "  exploration used {} samples, verification {} samples over {} rounds\n",
        trace.explore_samples, trace.verify_samples, trace.verify_rounds
    );

    println!("parallel schedule for the first 12 ticks:");
    for t in 1..=12u64 {
        println!("  t = {t:2}: advance instances {:?}", parallel_schedule(t));
    }

    let mut env = DuelEnvironment::new(p, 8);
    let (m, ptrace) = car_parallel(&mut env, &g, delta, cfg)?;
    println!(
        "\nparallel: instance {} answered {:?} after {} ticks, {} samples",
        ptrace.winner_instance,
        m.edge_ids(),
        ptrace.ticks,
        ptrace.samples
    );
    if !ptrace.retired.is_empty() {
        println!("  retired instances: {:?}", ptrace.retired);
    }
    Ok(())
}
