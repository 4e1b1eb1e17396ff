//! PAC Borda-winner identification on the demo instance across several
//! seeds, with per-run sample counts and pull profiles.
//!
//!     cargo run --release --example borda_pac

use cpedb::borda::clucb_borda_pac;
use cpedb::demo::demo_instance;
use cpedb::env::DuelEnvironment;
use cpedb::sampler::SamplerConfig;

fn main() -> cpedb::Result<()> {
    let (g, p) = demo_instance();
    let (delta, epsilon) = (0.1, 0.05);
    println!("target: borda winner [0, 4] with delta {delta}, epsilon {epsilon}\n");

    let mut correct = 0;
    for seed in 0..10u64 {
        let mut env = DuelEnvironment::new(p.clone(), seed);
        let (m, trace) = clucb_borda_pac(
            &mut env,
            &g,
            delta,
            epsilon,
            SamplerConfig::exact(seed ^ 0xbeef),
            100_000_000,
        )?;
        let ok = m.edge_ids() == [0, 4];
        correct += ok as u32;
        println!(
            "seed {seed}: returned {:?} ({}) after {} rounds, {} samples, {} self-duels; pulls {:?}",
            m.edge_ids(),
            if ok { "correct" } else { "wrong" },
            trace.rounds,
            trace.samples,
            trace.self_duels,
            trace.pulls
        );
    }
    println!("\n{correct}/10 correct");
    Ok(())
}
