//! Best-arm identification benchmark over scenarios × algorithms × arm counts.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::output::{format_sig, read_csv, write_csv, write_json, Written};
use crate::bandit::{run_mest_lilucb, run_vanilla_lilucb, AlgorithmName, BanditRun};
use crate::error::{Error, Result};
use crate::rewards::{alpha_model_means, gaps_and_complexity, ProblemInstance, Scenario};
use crate::rng::derive_seed;

pub const BAI_CSV: &str = "bai_results.csv";
pub const BAI_SUMMARY: &str = "bai_summary.json";
pub const BAI_HEADER: [&str; 7] = ["scenario", "algorithm", "K", "trial", "correct", "total_pulls", "seed"];

const BAI_STREAM: u64 = 0xB41;

/// Seed of one trial. It does not depend on the algorithm, so every
/// algorithm sees the same reward streams.
pub fn trial_seed(base_seed: u64, scenario: Scenario, arms: usize, trial: usize) -> u64 {
    derive_seed(base_seed, &[BAI_STREAM, scenario as u64, arms as u64, trial as u64])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaiRow {
    pub scenario: Scenario,
    pub algorithm: AlgorithmName,
    pub arms: usize,
    pub trial: usize,
    /// `None` when the run hit the round cap.
    pub correct: Option<bool>,
    pub total_pulls: u64,
    pub seed: u64,
}

impl BaiRow {
    fn to_record(&self) -> Vec<String> {
        vec![
            self.scenario.to_string(),
            self.algorithm.to_string(),
            self.arms.to_string(),
            self.trial.to_string(),
            match self.correct {
                Some(true) => "1".into(),
                Some(false) => "0".into(),
                None => "NA".into(),
            },
            self.total_pulls.to_string(),
            self.seed.to_string(),
        ]
    }

    fn from_record(rec: &csv::StringRecord) -> Result<Self> {
        let field = |i: usize| rec.get(i).ok_or_else(|| Error::Audit(format!("short row {rec:?}")));
        let int = |i: usize| -> Result<u64> {
            field(i)?.parse().map_err(|_| Error::Audit(format!("bad integer in column {}", BAI_HEADER[i])))
        };
        Ok(BaiRow {
            scenario: field(0)?.parse()?,
            algorithm: field(1)?.parse()?,
            arms: int(2)? as usize,
            trial: int(3)? as usize,
            correct: match field(4)? {
                "1" => Some(true),
                "0" => Some(false),
                "NA" => None,
                other => return Err(Error::Audit(format!("bad correct value `{other}`"))),
            },
            total_pulls: int(5)?,
            seed: int(6)?,
        })
    }
}

/// The α-model instance for one scenario and arm count.
pub fn instance(cfg: &ExperimentConfig, scenario: Scenario, arms: usize) -> Result<ProblemInstance> {
    ProblemInstance::new(alpha_model_means(arms, cfg.a_model)?, cfg.reward_kind(scenario))
}

/// One run; a round-cap abort is returned as `Ok` with `terminated == false`.
pub fn run_trial(cfg: &ExperimentConfig, scenario: Scenario, algorithm: AlgorithmName, arms: usize, trial: usize) -> Result<(BanditRun, u64)> {
    let inst = instance(cfg, scenario, arms)?;
    let bandit = cfg.bandit_config(algorithm)?;
    let seed = trial_seed(cfg.base_seed, scenario, arms, trial);
    let result = match algorithm {
        AlgorithmName::Lilucb => run_vanilla_lilucb(&bandit, &inst, seed),
        _ => run_mest_lilucb(&bandit, &inst, seed),
    };
    match result {
        Ok(run) => Ok((run, seed)),
        Err(Error::NoStop { state, .. }) => Ok((*state, seed)),
        Err(e) => Err(e),
    }
}

/// All trials, in (scenario, algorithm, K, trial) order regardless of scheduling.
pub fn simulate_bai(cfg: &ExperimentConfig) -> Result<Vec<BaiRow>> {
    cfg.validate()?;
    let mut jobs = Vec::new();
    for &scenario in &cfg.scenarios {
        for &algorithm in &cfg.algorithms {
            for &arms in &cfg.arms {
                let best = instance(cfg, scenario, arms)?.best_arm()?;
                jobs.extend((0..cfg.trials).map(|trial| (scenario, algorithm, arms, trial, best)));
            }
        }
    }
    jobs.into_par_iter()
        .map(|(scenario, algorithm, arms, trial, best)| {
            let (run, seed) = run_trial(cfg, scenario, algorithm, arms, trial)?;
            Ok(BaiRow {
                scenario,
                algorithm,
                arms,
                trial,
                correct: run.terminated.then(|| run.returned_arm == Some(best)),
                total_pulls: run.total_pulls(),
                seed,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaiCell {
    pub scenario: Scenario,
    pub algorithm: AlgorithmName,
    #[serde(rename = "K")]
    pub arms: usize,
    pub trials: usize,
    pub correct: usize,
    pub no_stop: usize,
    /// `correct / trials`; runs that hit the round cap count as failures.
    pub correct_proportion: f64,
    pub pulls_mean: f64,
    pub pulls_min: u64,
    pub pulls_max: u64,
    pub h1: f64,
    pub h2: f64,
    pub pulls_over_h1_mean: f64,
    pub pulls_over_h1_min: f64,
    pub pulls_over_h1_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmSettings {
    pub algorithm: AlgorithmName,
    pub delta: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub n0: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaiSummary {
    pub base_seed: u64,
    pub trials: usize,
    pub rows: usize,
    pub no_stop_total: usize,
    pub reward_scale: f64,
    /// Scale used in the exploration constant γ, as opposed to the loss's own σ.
    pub gamma_sigma: f64,
    pub settings: Vec<AlgorithmSettings>,
    pub cells: Vec<BaiCell>,
}

pub fn summarize_bai(cfg: &ExperimentConfig, rows: &[BaiRow]) -> Result<BaiSummary> {
    let mut groups: BTreeMap<(usize, usize, usize), Vec<&BaiRow>> = BTreeMap::new();
    let order = |s: Scenario, a: AlgorithmName| {
        let si = cfg.scenarios.iter().position(|&x| x == s).unwrap_or(usize::MAX);
        let ai = cfg.algorithms.iter().position(|&x| x == a).unwrap_or(usize::MAX);
        (si, ai)
    };
    for row in rows {
        let (si, ai) = order(row.scenario, row.algorithm);
        let ki = cfg.arms.iter().position(|&k| k == row.arms).unwrap_or(usize::MAX);
        groups.entry((si, ai, ki)).or_default().push(row);
    }
    let mut cells = Vec::with_capacity(groups.len());
    for group in groups.values() {
        let first = group[0];
        let complexity = gaps_and_complexity(&instance(cfg, first.scenario, first.arms)?)?;
        let pulls: Vec<u64> = group.iter().map(|r| r.total_pulls).collect();
        let correct = group.iter().filter(|r| r.correct == Some(true)).count();
        let no_stop = group.iter().filter(|r| r.correct.is_none()).count();
        let mean = pulls.iter().map(|&p| p as f64).sum::<f64>() / pulls.len() as f64;
        let (min, max) = (*pulls.iter().min().unwrap(), *pulls.iter().max().unwrap());
        cells.push(BaiCell {
            scenario: first.scenario,
            algorithm: first.algorithm,
            arms: first.arms,
            trials: group.len(),
            correct,
            no_stop,
            correct_proportion: correct as f64 / group.len() as f64,
            pulls_mean: mean,
            pulls_min: min,
            pulls_max: max,
            h1: complexity.h1,
            h2: complexity.h2,
            pulls_over_h1_mean: mean / complexity.h1,
            pulls_over_h1_min: min as f64 / complexity.h1,
            pulls_over_h1_max: max as f64 / complexity.h1,
        });
    }
    let settings = cfg
        .algorithms
        .iter()
        .map(|&a| {
            let b = cfg.bandit_config(a)?;
            Ok(AlgorithmSettings {
                algorithm: a,
                delta: b.delta(),
                gamma: b.gamma,
                lambda: b.lambda,
                n0: b.n0,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BaiSummary {
        base_seed: cfg.base_seed,
        trials: cfg.trials,
        rows: rows.len(),
        no_stop_total: rows.iter().filter(|r| r.correct.is_none()).count(),
        reward_scale: cfg.reward_scale,
        gamma_sigma: cfg.sigma,
        settings,
        cells,
    })
}

/// Runs the benchmark, writes `bai_results.csv` and `bai_summary.json`
/// under `out_dir`, then re-reads the CSV and checks the summary against it.
pub fn run_bai_experiment(cfg: &ExperimentConfig) -> Result<(Written, BaiSummary)> {
    let rows = simulate_bai(cfg)?;
    let summary = summarize_bai(cfg, &rows)?;
    let csv_path = cfg.out_dir.join(BAI_CSV);
    let json_path = cfg.out_dir.join(BAI_SUMMARY);
    write_csv(&csv_path, &BAI_HEADER, rows.iter().map(BaiRow::to_record))?;
    write_json(&json_path, &summary)?;
    audit_bai(cfg, &csv_path, &summary)?;
    Ok((
        Written {
            files: vec![csv_path],
            summary: json_path,
            incomplete: summary.no_stop_total,
        },
        summary,
    ))
}

pub fn read_bai_rows(path: &Path) -> Result<Vec<BaiRow>> {
    read_csv(path, &BAI_HEADER)?.iter().map(BaiRow::from_record).collect()
}

fn audit_bai(cfg: &ExperimentConfig, csv_path: &Path, summary: &BaiSummary) -> Result<()> {
    let rows = read_bai_rows(csv_path)?;
    let again = summarize_bai(cfg, &rows)?;
    if &again != summary {
        return Err(Error::Audit(format!("{} disagrees with the summary", csv_path.display())));
    }
    Ok(())
}

/// Table-style text: correct proportion per scenario × algorithm × K.
pub fn proportion_table(summary: &BaiSummary) -> String {
    let mut out = String::new();
    for cell in &summary.cells {
        out.push_str(&format!(
            "{} {} K={} correct={} pulls/H1={}\n",
            cell.scenario,
            cell.algorithm,
            cell.arms,
            format_sig(cell.correct_proportion),
            format_sig(cell.pulls_over_h1_mean)
        ));
    }
    out
}
