use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use anylil::experiments::{self, ExperimentConfig, Written};
use anylil::{AlgorithmName, Scenario};

#[derive(Parser)]
#[command(name = "anylil", version, about = "Anytime LIL confidence sequences and M-estimator lil'UCB experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bound comparisons.
    #[command(subcommand)]
    Bounds(BoundsCommand),
    /// Best-arm identification.
    #[command(subcommand)]
    Bandit(BanditCommand),
    /// Anytime coverage of the confidence sequences.
    #[command(subcommand)]
    Coverage(CoverageCommand),
}

#[derive(Subcommand)]
enum BoundsCommand {
    /// Write bounds.csv and sum_bounds.csv.
    Compare(Common),
}

#[derive(Subcommand)]
enum BanditCommand {
    /// One run, printed as JSON.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "gaussian")]
        scenario: Scenario,
        #[arg(long, default_value = "median_lilucb")]
        algorithm: AlgorithmName,
        #[arg(long = "arms", short = 'k', default_value_t = 2)]
        arms: usize,
        /// Trial index used to derive the run's seed.
        #[arg(long, default_value_t = 0)]
        trial: usize,
    },
    /// Full benchmark over scenarios, algorithms and arm counts.
    Bai(Common),
}

#[derive(Subcommand)]
enum CoverageCommand {
    /// One-dimensional M-estimator.
    Mest(Common),
    /// Ridge-penalized vector estimator.
    Multivariate(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Paper,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML file; missing keys take the published defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<Preset>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Warm-up pulls per arm, replacing the computed value.
    #[arg(long)]
    n0_override: Option<u64>,
    /// Exit with status 3 if any trial hit the round cap or failed to converge.
    #[arg(long)]
    strict: bool,
}

impl Common {
    fn load(&self) -> anylil::Result<ExperimentConfig> {
        let mut cfg = match (&self.config, self.preset) {
            (Some(path), _) => ExperimentConfig::from_file(path).map_err(|e| match e {
                anylil::Error::Io(io) => anylil::Error::Config(format!("{}: {io}", path.display())),
                other => other,
            })?,
            (None, Some(Preset::Paper)) | (None, None) => ExperimentConfig::published(),
        };
        if let Some(seed) = self.seed {
            cfg.base_seed = seed;
        }
        if let Some(trials) = self.trials {
            cfg.trials = trials;
        }
        if let Some(out) = &self.out {
            cfg.out_dir = out.clone();
        }
        if let Some(n0) = self.n0_override {
            cfg.n0 = Some(n0);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

const EXIT_CONFIG: u8 = 2;
const EXIT_INCOMPLETE: u8 = 3;

fn report<S: serde::Serialize>(written: &Written, summary: &S) -> Result<()> {
    for f in &written.files {
        eprintln!("wrote {}", f.display());
    }
    eprintln!("wrote {}", written.summary.display());
    println!("{}", serde_json::to_string_pretty(summary)?);
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    let (common, written) = match cli.command {
        Command::Bounds(BoundsCommand::Compare(common)) => {
            let cfg = common.load()?;
            let (w, s) = experiments::run_bound_comparison(&cfg)?;
            report(&w, &s)?;
            (common, w)
        }
        Command::Bandit(BanditCommand::Bai(common)) => {
            let cfg = common.load()?;
            let (w, s) = experiments::run_bai_experiment(&cfg)?;
            report(&w, &s)?;
            eprint!("{}", experiments::proportion_table(&s));
            (common, w)
        }
        Command::Bandit(BanditCommand::Run {
            common,
            scenario,
            algorithm,
            arms,
            trial,
        }) => {
            let cfg = common.load()?;
            let inst = experiments::instance(&cfg, scenario, arms)?;
            let (run, seed) = experiments::run_trial(&cfg, scenario, algorithm, arms, trial)?;
            let best = inst.best_arm()?;
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({
                    "scenario": scenario,
                    "algorithm": algorithm,
                    "K": arms,
                    "trial": trial,
                    "seed": seed,
                    "means": inst.means,
                    "best_arm": best,
                    "terminated": run.terminated,
                    "returned_arm": run.returned_arm,
                    "correct": run.terminated.then(|| run.returned_arm == Some(best)),
                    "total_pulls": run.total_pulls(),
                    "pulls": run.pulls,
                    "estimates": run.estimates,
                }))?
            );
            if common.strict && !run.terminated {
                return Ok(ExitCode::from(EXIT_INCOMPLETE));
            }
            return Ok(ExitCode::SUCCESS);
        }
        Command::Coverage(CoverageCommand::Mest(common)) => {
            let cfg = common.load()?;
            let (w, s) = experiments::run_coverage_1d(&cfg)?;
            report(&w, &s)?;
            (common, w)
        }
        Command::Coverage(CoverageCommand::Multivariate(common)) => {
            let cfg = common.load()?;
            let (w, s) = experiments::run_coverage_multivariate(&cfg)?;
            report(&w, &s)?;
            (common, w)
        }
    };
    if written.incomplete > 0 {
        eprintln!("{} trial(s) did not finish", written.incomplete);
        if common.strict {
            return Ok(ExitCode::from(EXIT_INCOMPLETE));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli).context("anylil failed") {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            let config_error = err.chain().any(|cause| {
                matches!(
                    cause.downcast_ref::<anylil::Error>(),
                    Some(anylil::Error::Config(_) | anylil::Error::InvalidParameter { .. })
                )
            });
            ExitCode::from(if config_error { EXIT_CONFIG } else { 1 })
        }
    }
}
