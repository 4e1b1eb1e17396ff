//! The experiment harness as a library: seeded multi-trial runs, ground
//! truth, aggregation, and report emission.
//!
//!     cargo run --release --example experiment_harness

use cpedb::demo::demo_instance;
use cpedb::experiment::{
    run_experiment, to_csv, Algorithm, ExperimentConfig,
};

fn main() -> cpedb::Result<()> {
    let (g, p) = demo_instance();
    let cfg = ExperimentConfig {
        algorithm: Algorithm::CarCond,
        delta: 0.1,
        trials: 8,
        base_seed: 3000,
        ..ExperimentConfig::default()
    };
    let report = run_experiment(&cfg, &g, &p)?;

    let truth = report.ground_truth.as_ref().unwrap();
    println!(
        "ground truth: borda {:?}, condorcet {:?}, width {}, h_borda {:.2}",
        truth.borda_winner.as_ref().unwrap(),
        truth.condorcet_winner.as_ref().unwrap(),
        truth.width,
        truth.gaps.as_ref().unwrap().h_borda
    );

    println!("\ncsv report:\n{}", to_csv(&report));
    let s = &report.summary;
    println!(
        "success {}/{} (wilson ci [{:.3}, {:.3}]), samples mean {:.0} median {} max {}",
        s.successes, s.trials, s.success_ci_low, s.success_ci_high,
        s.samples_mean, s.samples_median, s.samples_max
    );
    Ok(())
}
