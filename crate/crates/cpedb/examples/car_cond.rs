//! Condorcet-winner identification by accept/reject exploration, with the
//! per-edge classification timeline.
//!
//!     cargo run --release --example car_cond

use cpedb::condorcet::{car_cond, CondConfig};
use cpedb::demo::demo_instance;
use cpedb::env::DuelEnvironment;

fn main() -> cpedb::Result<()> {
    let (g, p) = demo_instance();
    let mut env = DuelEnvironment::new(p, 2024);
    let (m, trace) = car_cond(&mut env, &g, CondConfig::new(0.1))?;

    println!("returned {:?}", m.edge_ids());
    println!(
        "{} rounds, {} samples, {} edge checks, {} oracle calls",
        trace.rounds, trace.samples, trace.edge_checks, trace.oracle_calls
    );
    println!("truth stayed inside the bounds: {}\n", trace.coverage_ok);

    println!("classification timeline:");
    for ev in &trace.events {
        println!(
            "  round {:>6} (epoch {}): edge {} {}",
            ev.round,
            ev.epoch,
            ev.edge,
            if ev.accepted { "accepted" } else { "rejected" }
        );
    }
    Ok(())
}
