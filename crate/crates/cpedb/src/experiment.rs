//! Config-driven experiment runner: seeded trials of any algorithm on a
//! JSON instance, ground-truth evaluation through the brute-force oracles,
//! and machine-readable reports.

use crate::borda::{clucb_borda_exact, clucb_borda_pac};
use crate::condorcet::{car_cond, car_parallel, car_verify, CondConfig, OracleBackend, VerifyOutcome};
use crate::env::{DuelEnvironment, EnvMetadata};
use crate::error::{Error, Result};
use crate::graph::{
    enumerate_maximum_matchings, width, BipartiteGraph, ConstraintPair, GraphSpec, Matching,
    DEFAULT_ENUMERATION_CAP,
};
use crate::oracle::{exact_game_value, minimax_oracle, OracleConfig};
use crate::preference::{
    borda_score, compute_gaps, find_borda_winner, find_condorcet_winner, GapReport,
    PreferenceMatrix, PreferenceSpec,
};
use crate::sampler::{default_mcmc_steps, SamplerConfig, SamplerMode};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::time::Instant;

/// An instance file: the graph plus its preference matrix. Preference
/// entries refer to the edge order of the `edges` array as written; the
/// loader re-sorts edges into canonical order and remaps the entries.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub graph: GraphSpec,
    pub preference: PreferenceSpec,
}

/// Loads an instance, returning the graph, matrix, and the canonical
/// permutation (input edge index to canonical index).
pub fn load_instance(spec: &InstanceSpec) -> Result<(BipartiteGraph, PreferenceMatrix, Vec<usize>)> {
    let (g, perm) = BipartiteGraph::from_spec(&spec.graph)?;
    let mut remapped = Vec::with_capacity(spec.preference.entries.len());
    for &(i, j, p) in &spec.preference.entries {
        if i >= perm.len() || j >= perm.len() {
            return Err(Error::invalid(format!("preference entry ({i},{j}) out of range")));
        }
        let (ci, cj) = (perm[i], perm[j]);
        if ci < cj {
            remapped.push((ci, cj, p));
        } else {
            remapped.push((cj, ci, 1.0 - p));
        }
    }
    let pref = PreferenceMatrix::from_spec(
        &g,
        &PreferenceSpec {
            m: spec.preference.m,
            entries: remapped,
        },
    )?;
    Ok((g, pref, perm))
}

pub fn load_instance_file(path: &Path) -> Result<(BipartiteGraph, PreferenceMatrix, Vec<usize>)> {
    let text = std::fs::read_to_string(path)?;
    let spec: InstanceSpec = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    load_instance(&spec)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    BordaPac,
    BordaExact,
    CarCond,
    CarVerify,
    CarParallel,
    OracleEval,
}

impl Algorithm {
    pub const ALL: [&'static str; 6] = [
        "borda-pac",
        "borda-exact",
        "car-cond",
        "car-verify",
        "car-parallel",
        "oracle-eval",
    ];

    pub fn parse(name: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(name.to_string())).map_err(|_| {
            Error::Config(format!(
                "unknown algorithm '{name}'; valid choices: {}",
                Self::ALL.join(", ")
            ))
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::BordaPac => "borda-pac",
            Algorithm::BordaExact => "borda-exact",
            Algorithm::CarCond => "car-cond",
            Algorithm::CarVerify => "car-verify",
            Algorithm::CarParallel => "car-parallel",
            Algorithm::OracleEval => "oracle-eval",
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplerSettings {
    pub mode: SamplerMode,
    pub eta: f64,
    /// Walk length per draw; 0 means the documented default for the graph.
    pub mcmc_steps: u64,
}

impl Default for SamplerSettings {
    fn default() -> Self {
        Self {
            mode: SamplerMode::Exact,
            eta: 0.05,
            mcmc_steps: 0,
        }
    }
}

/// Constraint sets for oracle-eval, in canonical edge indices.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ConstraintsSpec {
    pub accepted: Vec<usize>,
    pub rejected: Vec<usize>,
    pub min_accepted: Vec<usize>,
    pub min_rejected: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    /// Path to the instance file, relative to the config's directory.
    pub instance: String,
    pub algorithm: Algorithm,
    pub delta: f64,
    pub epsilon: Option<f64>,
    pub sampler: SamplerSettings,
    pub trials: usize,
    pub base_seed: u64,
    pub sample_cap: u64,
    /// oracle-eval accuracy.
    pub oracle_eps: f64,
    pub constraints: ConstraintsSpec,
    pub enumeration_cap: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            instance: String::new(),
            algorithm: Algorithm::CarCond,
            delta: 0.1,
            epsilon: None,
            sampler: SamplerSettings::default(),
            trials: 1,
            base_seed: 0,
            sample_cap: 100_000_000,
            oracle_eps: 0.05,
            constraints: ConstraintsSpec::default(),
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trial count must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.delta) || self.delta == 0.0 {
            return Err(Error::Config("delta must lie in (0, 1)".into()));
        }
        if matches!(self.algorithm, Algorithm::BordaPac) && self.epsilon.is_none() {
            return Err(Error::Config("borda-pac requires epsilon".into()));
        }
        if let Some(eps) = self.epsilon {
            if eps <= 0.0 {
                return Err(Error::Config("epsilon must be positive".into()));
            }
        }
        if matches!(self.algorithm, Algorithm::CarVerify | Algorithm::CarParallel)
            && self.delta >= 0.01
        {
            return Err(Error::Config(
                "car-verify and car-parallel require delta below 0.01".into(),
            ));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Ground truth computed once per experiment through the brute-force
/// oracles; absent above the enumeration cap.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundTruth {
    pub class_size: usize,
    pub width: usize,
    pub duel_count: u64,
    pub borda_winner: Option<Vec<usize>>,
    pub borda_winner_score: Option<f64>,
    pub condorcet_winner: Option<Vec<usize>>,
    pub gaps: Option<GapReport>,
    /// Epsilon-capped Borda hardness at the configured epsilon.
    pub h_borda_eps: Option<f64>,
}

pub fn compute_ground_truth(
    g: &BipartiteGraph,
    p: &PreferenceMatrix,
    cap: usize,
    epsilon: Option<f64>,
) -> Result<Option<GroundTruth>> {
    if g.m() > cap {
        return Ok(None);
    }
    let class = enumerate_maximum_matchings(g, &ConstraintPair::empty(), cap)?;
    let w = width(g, cap)?;
    let borda = find_borda_winner(p, &class).ok();
    let condorcet = find_condorcet_winner(p, &class);
    let gaps = compute_gaps(g, p, &class, w).ok();
    let h_eps = match (&gaps, epsilon) {
        (Some(gr), Some(eps)) => Some(gr.h_borda_eps(eps)),
        _ => None,
    };
    Ok(Some(GroundTruth {
        class_size: class.len(),
        width: w,
        duel_count: g.duel_count(),
        borda_winner: borda.as_ref().map(|m| m.edge_ids().to_vec()),
        borda_winner_score: borda.as_ref().map(|m| borda_score(m, p, &class)),
        condorcet_winner: condorcet.as_ref().map(|m| m.edge_ids().to_vec()),
        gaps,
        h_borda_eps: h_eps,
    }))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialReport {
    pub seed: u64,
    pub matching: Option<Vec<usize>>,
    /// Correctness against the ground-truth winner; `None` when the oracle
    /// is unavailable (above the cap) or not applicable.
    pub correct: Option<bool>,
    pub samples: u64,
    pub wall_ms: f64,
    pub stop_reason: String,
    /// oracle-eval only: the certified value.
    pub value: Option<f64>,
    pub env: EnvMetadata,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Summary {
    pub trials: usize,
    pub successes: usize,
    pub failures: usize,
    pub success_rate: f64,
    pub success_ci_low: f64,
    pub success_ci_high: f64,
    pub samples_mean: f64,
    pub samples_median: u64,
    pub samples_max: u64,
    pub budget_failures: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AggregateReport {
    pub config: ExperimentConfig,
    pub ground_truth: Option<GroundTruth>,
    pub trials: Vec<TrialReport>,
    pub summary: Summary,
}

impl AggregateReport {
    /// Zeroes wall-clock fields; reports are otherwise deterministic under a
    /// fixed config.
    pub fn strip_volatile(&mut self) {
        for t in &mut self.trials {
            t.wall_ms = 0.0;
        }
    }
}

fn stop_name(stop: crate::borda::BordaStop) -> String {
    match stop {
        crate::borda::BordaStop::PacGapClosed => "pac-gap-closed".into(),
        crate::borda::BordaStop::ExactEquality => "exact-equality".into(),
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// The sampler stream is decoupled from the environment stream by hashing
/// the trial seed.
fn sampler_config(settings: &SamplerSettings, g: &BipartiteGraph, trial_seed: u64) -> SamplerConfig {
    let seed = splitmix64(trial_seed ^ 0x5a5a_5a5a_5a5a_5a5a);
    let steps = if settings.mcmc_steps == 0 {
        default_mcmc_steps(g)
    } else {
        settings.mcmc_steps
    };
    match settings.mode {
        SamplerMode::Exact => SamplerConfig::exact(seed).with_eta(settings.eta),
        SamplerMode::Mcmc => SamplerConfig::mcmc(seed, settings.eta, steps),
    }
}

/// Runs one seeded trial.
fn run_trial(
    cfg: &ExperimentConfig,
    g: &BipartiteGraph,
    p: &PreferenceMatrix,
    truth: Option<&GroundTruth>,
    seed: u64,
) -> Result<TrialReport> {
    let mut env = DuelEnvironment::new(p.clone(), seed);
    let meta = env.metadata();
    let start = Instant::now();
    let scfg = sampler_config(&cfg.sampler, g, seed);
    let cond_cfg = CondConfig {
        delta: cfg.delta,
        oracle: OracleConfig::default(),
        backend: OracleBackend::Fptas,
        sample_cap: cfg.sample_cap,
        use_skip_ahead: true,
        monitor_coverage: false,
        record_sampled_pairs: false,
    };

    let (matching, stop_reason, value): (Option<Matching>, String, Option<f64>) =
        match cfg.algorithm {
            Algorithm::BordaPac => {
                let eps = cfg.epsilon.expect("validated");
                match clucb_borda_pac(&mut env, g, cfg.delta, eps, scfg, cfg.sample_cap) {
                    Ok((m, trace)) => (Some(m), stop_name(trace.stop), None),
                    Err(Error::BudgetExceeded { .. }) => (None, "budget-exceeded".into(), None),
                    Err(e) => return Err(e),
                }
            }
            Algorithm::BordaExact => {
                match clucb_borda_exact(&mut env, g, cfg.delta, scfg, cfg.sample_cap) {
                    Ok((m, trace)) => (Some(m), stop_name(trace.stop), None),
                    Err(Error::BudgetExceeded { .. }) => (None, "budget-exceeded".into(), None),
                    Err(e) => return Err(e),
                }
            }
            Algorithm::CarCond => match car_cond(&mut env, g, cond_cfg) {
                Ok((m, _)) => (Some(m), "accepted-set-full".into(), None),
                Err(Error::BudgetExceeded { .. }) => (None, "budget-exceeded".into(), None),
                Err(e) => return Err(e),
            },
            Algorithm::CarVerify => match car_verify(&mut env, g, cfg.delta, cond_cfg) {
                Ok((VerifyOutcome::Winner(m), _)) => (Some(m), "verified".into(), None),
                Ok((VerifyOutcome::Rejected, _)) => (None, "verification-error".into(), None),
                Err(Error::BudgetExceeded { .. }) => (None, "budget-exceeded".into(), None),
                Err(e) => return Err(e),
            },
            Algorithm::CarParallel => match car_parallel(&mut env, g, cfg.delta, cond_cfg) {
                Ok((m, _)) => (Some(m), "verified".into(), None),
                Err(Error::BudgetExceeded { .. }) => (None, "budget-exceeded".into(), None),
                Err(e) => return Err(e),
            },
            Algorithm::OracleEval => {
                let c1 = ConstraintPair::new(
                    g,
                    cfg.constraints.accepted.clone(),
                    cfg.constraints.rejected.clone(),
                )?;
                let c2 = ConstraintPair::new(
                    g,
                    cfg.constraints.min_accepted.clone(),
                    cfg.constraints.min_rejected.clone(),
                )?;
                let r = minimax_oracle(g, &c1, &c2, p.matrix(), cfg.oracle_eps, &OracleConfig::default())?;
                (None, "oracle-eval".into(), Some(r.value))
            }
        };

    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let correct = match cfg.algorithm {
        Algorithm::BordaPac | Algorithm::BordaExact => truth
            .and_then(|t| t.borda_winner.as_ref())
            .map(|want| matching.as_ref().is_some_and(|m| m.edge_ids() == &want[..])),
        Algorithm::CarCond | Algorithm::CarVerify | Algorithm::CarParallel => truth
            .and_then(|t| t.condorcet_winner.as_ref())
            .map(|want| matching.as_ref().is_some_and(|m| m.edge_ids() == &want[..])),
        Algorithm::OracleEval => {
            if g.m() <= cfg.enumeration_cap {
                let c1 = ConstraintPair::new(
                    g,
                    cfg.constraints.accepted.clone(),
                    cfg.constraints.rejected.clone(),
                )?;
                let c2 = ConstraintPair::new(
                    g,
                    cfg.constraints.min_accepted.clone(),
                    cfg.constraints.min_rejected.clone(),
                )?;
                let exact = exact_game_value(
                    g,
                    &c1,
                    &c2,
                    p.matrix(),
                    cfg.oracle_eps / 25.0,
                    cfg.enumeration_cap,
                )?;
                value.map(|v| (v - exact).abs() <= cfg.oracle_eps)
            } else {
                None
            }
        }
    };

    Ok(TrialReport {
        seed,
        matching: matching.map(|m| m.edge_ids().to_vec()),
        correct,
        samples: env.total_samples(),
        wall_ms,
        stop_reason,
        value,
        env: meta,
    })
}

/// Runs all trials (in parallel; aggregation is seed-ordered) and computes
/// the summary.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    g: &BipartiteGraph,
    p: &PreferenceMatrix,
) -> Result<AggregateReport> {
    cfg.validate()?;
    let truth = compute_ground_truth(g, p, cfg.enumeration_cap, cfg.epsilon)?;
    let seeds: Vec<u64> = (0..cfg.trials as u64).map(|i| cfg.base_seed + i).collect();
    let mut trials: Vec<TrialReport> = seeds
        .par_iter()
        .map(|&seed| run_trial(cfg, g, p, truth.as_ref(), seed))
        .collect::<Result<Vec<_>>>()?;
    trials.sort_by_key(|t| t.seed);

    let successes = trials.iter().filter(|t| t.correct == Some(true)).count();
    let failures = trials.iter().filter(|t| t.correct == Some(false)).count();
    let budget_failures = trials
        .iter()
        .filter(|t| t.stop_reason == "budget-exceeded")
        .count();
    let mut samples: Vec<u64> = trials.iter().map(|t| t.samples).collect();
    samples.sort_unstable();
    let n = trials.len();
    let rate = successes as f64 / n as f64;
    let (ci_low, ci_high) = wilson_interval(successes, n, 1.96);
    let summary = Summary {
        trials: n,
        successes,
        failures,
        success_rate: rate,
        success_ci_low: ci_low,
        success_ci_high: ci_high,
        samples_mean: samples.iter().sum::<u64>() as f64 / n as f64,
        samples_median: samples[n / 2],
        samples_max: *samples.last().unwrap(),
        budget_failures,
    };
    Ok(AggregateReport {
        config: cfg.clone(),
        ground_truth: truth,
        trials,
        summary,
    })
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: usize, n: usize, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = (z / denom) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
}

/// CSV projection of the trial table with a stable column order.
pub fn to_csv(report: &AggregateReport) -> String {
    let mut out = String::from("seed,algorithm,delta,epsilon,samples,correct,stop_reason,wall_ms\n");
    for t in &report.trials {
        let eps = report
            .config
            .epsilon
            .map(|e| e.to_string())
            .unwrap_or_default();
        let correct = t
            .correct
            .map(|c| c.to_string())
            .unwrap_or_else(|| "unknown".into());
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{:.3}\n",
            t.seed,
            report.config.algorithm.name(),
            report.config.delta,
            eps,
            t.samples,
            correct,
            t.stop_reason,
            t.wall_ms
        ));
    }
    out
}

pub fn to_json(report: &AggregateReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(report)?)
}

/// Writes the report in the requested format.
pub fn emit_report(report: &AggregateReport, format: ReportFormat, path: &Path) -> Result<()> {
    let body = match format {
        ReportFormat::Csv => to_csv(report),
        ReportFormat::Json => to_json(report)?,
    };
    std::fs::write(path, body)?;
    Ok(())
}
