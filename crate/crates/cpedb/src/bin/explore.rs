//! Config-driven experiment runner. `explore run` executes seeded trials of
//! one algorithm on an instance and writes a CSV or JSON report; `explore
//! truth` prints the brute-force ground truth of an instance.
//!
//! Exit codes: 0 success, 2 config or input error, 3 when some trials ended
//! in budget exhaustion.

use clap::{Args, Parser, Subcommand, ValueEnum};
use cpedb::experiment::{
    emit_report, load_instance_file, run_experiment, Algorithm, ConstraintsSpec, ExperimentConfig,
    ReportFormat,
};
use cpedb::sampler::SamplerMode;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "explore", about = "Duel-based best-matching identification experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run seeded trials from a config file.
    Run(RunArgs),
    /// Print winners, gaps, width, and hardness of an instance.
    Truth(TruthArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Report output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    /// Override the instance path from the config.
    #[arg(long)]
    instance: Option<PathBuf>,
    /// Override the algorithm (borda-pac, borda-exact, car-cond,
    /// car-verify, car-parallel, oracle-eval).
    #[arg(long)]
    algorithm: Option<String>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Base seed; trial i uses seed + i.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    sample_cap: Option<u64>,
    /// Sampler mode for the Borda algorithms.
    #[arg(long, value_enum)]
    sampler: Option<SamplerArg>,
    #[arg(long)]
    mcmc_steps: Option<u64>,
    /// Sampler bias bound.
    #[arg(long)]
    eta: Option<f64>,
    /// oracle-eval accuracy.
    #[arg(long)]
    eps: Option<f64>,
    /// oracle-eval constraint sets, e.g.
    /// '{"accepted":[1],"rejected":[],"min_accepted":[],"min_rejected":[]}'.
    #[arg(long)]
    constraints: Option<String>,
}

#[derive(Args)]
struct TruthArgs {
    /// Instance file (JSON).
    #[arg(long)]
    instance: PathBuf,
    /// Emit JSON instead of the table.
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum SamplerArg {
    Exact,
    Mcmc,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Truth(args) => truth(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(args: RunArgs) -> cpedb::Result<ExitCode> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| cpedb::Error::Config(format!("{}: {e}", args.config.display())))?;
    let mut cfg = ExperimentConfig::from_json(&text)?;

    if let Some(path) = &args.instance {
        cfg.instance = path.display().to_string();
    }
    if let Some(name) = &args.algorithm {
        cfg.algorithm = Algorithm::parse(name)?;
    }
    if let Some(v) = args.delta {
        cfg.delta = v;
    }
    if let Some(v) = args.epsilon {
        cfg.epsilon = Some(v);
    }
    if let Some(v) = args.trials {
        cfg.trials = v;
    }
    if let Some(v) = args.seed {
        cfg.base_seed = v;
    }
    if let Some(v) = args.sample_cap {
        cfg.sample_cap = v;
    }
    if let Some(mode) = args.sampler {
        cfg.sampler.mode = match mode {
            SamplerArg::Exact => SamplerMode::Exact,
            SamplerArg::Mcmc => SamplerMode::Mcmc,
        };
    }
    if let Some(v) = args.mcmc_steps {
        cfg.sampler.mcmc_steps = v;
    }
    if let Some(v) = args.eta {
        cfg.sampler.eta = v;
    }
    if let Some(v) = args.eps {
        cfg.oracle_eps = v;
    }
    if let Some(text) = &args.constraints {
        cfg.constraints = serde_json::from_str::<ConstraintsSpec>(text)
            .map_err(|e| cpedb::Error::Config(format!("--constraints: {e}")))?;
    }
    cfg.validate()?;

    // Instance paths resolve relative to the config file.
    let instance_path = resolve(&args.config, &cfg.instance);
    let (g, p, _) = load_instance_file(&instance_path)?;
    let report = run_experiment(&cfg, &g, &p)?;

    let format = match args.format {
        FormatArg::Csv => ReportFormat::Csv,
        FormatArg::Json => ReportFormat::Json,
    };
    match &args.out {
        Some(path) => emit_report(&report, format, path)?,
        None => match format {
            ReportFormat::Csv => print!("{}", cpedb::experiment::to_csv(&report)),
            ReportFormat::Json => println!("{}", cpedb::experiment::to_json(&report)?),
        },
    }

    let s = &report.summary;
    eprintln!(
        "{} trials: {} correct, {} wrong, {} unknown; success rate {:.3} (ci [{:.3}, {:.3}]); samples mean {:.0}, median {}, max {}",
        s.trials,
        s.successes,
        s.failures,
        s.trials - s.successes - s.failures,
        s.success_rate,
        s.success_ci_low,
        s.success_ci_high,
        s.samples_mean,
        s.samples_median,
        s.samples_max
    );
    if s.budget_failures > 0 {
        eprintln!("{} trials exhausted the sample budget", s.budget_failures);
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn resolve(config_path: &Path, instance: &str) -> PathBuf {
    let p = Path::new(instance);
    if p.is_absolute() {
        return p.to_path_buf();
    }
    config_path
        .parent()
        .map(|dir| dir.join(p))
        .unwrap_or_else(|| p.to_path_buf())
}

fn truth(args: TruthArgs) -> cpedb::Result<ExitCode> {
    let (g, p, _) = load_instance_file(&args.instance)?;
    let truth = cpedb::experiment::compute_ground_truth(&g, &p, 24, None)?;
    let Some(t) = truth else {
        eprintln!("instance above the enumeration cap; ground truth unavailable");
        return Ok(ExitCode::from(2));
    };
    if args.json {
        println!("{}", serde_json::to_string_pretty(&t)?);
        return Ok(ExitCode::SUCCESS);
    }
    println!(
        "edges: {}  positions: {}  duels: {}",
        g.m(),
        g.n_positions(),
        t.duel_count
    );
    println!("matchings: {}  width: {}", t.class_size, t.width);
    match (&t.borda_winner, t.borda_winner_score) {
        (Some(m), Some(score)) => println!("borda winner: {m:?} (score {score:.6})"),
        _ => println!("borda winner: tied"),
    }
    match &t.condorcet_winner {
        Some(m) => println!("condorcet winner: {m:?}"),
        None => println!("condorcet winner: none"),
    }
    if let Some(gaps) = &t.gaps {
        println!("h_borda: {:.4}", gaps.h_borda);
        if let Some(h) = gaps.h_condorcet_verify {
            println!("h_condorcet_verify: {h:.4}");
        }
        println!("borda gaps: {}", fmt_gaps(&gaps.borda_gap));
        if let Some(cg) = &gaps.condorcet_gap {
            println!("condorcet gaps: {}", fmt_gaps(cg));
        }
        if let Some(ver) = &gaps.verification_gap {
            let s: Vec<String> = ver
                .iter()
                .map(|(e, g)| match g {
                    Some(v) => format!("e{e}: {v:.4}"),
                    None => format!("e{e}: inf"),
                })
                .collect();
            println!("verification gaps: {}", s.join(", "));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn fmt_gaps(gaps: &[Option<f64>]) -> String {
    gaps.iter()
        .enumerate()
        .map(|(e, g)| match g {
            Some(v) => format!("e{e}: {v:.4}"),
            None => format!("e{e}: inf"),
        })
        .collect::<Vec<_>>()
        .join(", ")
}
