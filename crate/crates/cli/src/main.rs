//! `eerlab`: run, sweep, analyze and report active-learning experiments.
//!
//! Exit codes: 0 success, 1 runtime failure (or a failed check), 2 usage or
//! configuration error.

mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use eerlab::analysis::{run_analysis, Analysis};
use eerlab::engine::{aggregate, run_experiment, run_sweep, write_run, write_sweep, EngineError, ExperimentConfig};
use eerlab::strategies::Strategy;

#[derive(Debug, Parser)]
#[command(name = "eerlab", version, about = "Bayesian active learning with retraining-free expected error reduction")]
struct Cli {
    /// Output directory.
    #[arg(long, global = true, env = "EERLAB_OUT", default_value = "results")]
    out: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one experiment.
    Run {
        #[command(flatten)]
        config: ConfigArgs,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the config strategy.
        #[arg(long)]
        strategy: Option<String>,
    },
    /// Run every strategy × seed cell and aggregate.
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        /// Comma-separated strategy ids; defaults to the config strategy.
        #[arg(long, value_delimiter = ',')]
        strategies: Vec<String>,
        /// Comma-separated seeds, or a half-open range `a..b`.
        #[arg(long, default_value = "0")]
        seeds: String,
        /// Cells run at once.
        #[arg(long, default_value_t = 1)]
        parallel: usize,
    },
    /// Run exact checks of the information identities.
    Analyze {
        #[arg(value_enum)]
        which: Which,
    },
    /// Learning-curve SVGs and AUC tables from run directories.
    Report {
        #[arg(required = true)]
        run_dirs: Vec<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct ConfigArgs {
    #[arg(long)]
    config: PathBuf,
    /// `key=value`, repeatable. Dotted keys address sections.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Which {
    Decomposition,
    Xor,
    MezlFailure,
    Prop1,
    All,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        if e.is_config() {
            Failure::Usage(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type Result<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { config, seed, strategy } => cmd_run(&config, seed, strategy.as_deref(), &cli.out),
        Command::Sweep { config, strategies, seeds, parallel } => {
            cmd_sweep(&config, &strategies, &seeds, parallel, &cli.out)
        }
        Command::Analyze { which } => cmd_analyze(which, &cli.out),
        Command::Report { run_dirs } => report::cmd_report(&run_dirs, &cli.out),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}

fn load(args: &ConfigArgs) -> Result<ExperimentConfig> {
    Ok(ExperimentConfig::load(&args.config, &args.overrides)?)
}

fn parse_strategy(s: &str) -> Result<Strategy> {
    s.trim().parse().map_err(|e: eerlab::strategies::StrategyError| Failure::Usage(e.to_string()))
}

fn parse_seeds(spec: &str) -> Result<Vec<u64>> {
    let bad = || Failure::Usage(format!("bad seed list {spec:?}"));
    if let Some((a, b)) = spec.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().parse().map_err(|_| bad())?;
        let seeds: Vec<u64> = (a..b).collect();
        return if seeds.is_empty() { Err(bad()) } else { Ok(seeds) };
    }
    spec.split(',').map(|s| s.trim().parse().map_err(|_| bad())).collect()
}

fn cmd_run(args: &ConfigArgs, seed: Option<u64>, strategy: Option<&str>, out: &Path) -> Result<bool> {
    let mut cfg = load(args)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(s) = strategy {
        cfg.strategy = parse_strategy(s)?;
        cfg.validate()?;
    }
    let result = run_experiment(&cfg)?;
    let path = write_run(out, &result)?;
    println!("{} seed {}: AUC {:.6} -> {}", result.strategy, result.seed, result.auc, path.display());
    Ok(true)
}

fn cmd_sweep(args: &ConfigArgs, strategies: &[String], seeds: &str, parallel: usize, out: &Path) -> Result<bool> {
    let base = load(args)?;
    let strategies: Vec<Strategy> = if strategies.is_empty() {
        vec![base.strategy]
    } else {
        strategies.iter().map(|s| parse_strategy(s)).collect::<Result<_>>()?
    };
    let seeds = parse_seeds(seeds)?;
    for &strategy in &strategies {
        ExperimentConfig { strategy, ..base.clone() }.validate()?;
    }
    let report = run_sweep(&base, &strategies, &seeds, parallel)?;
    write_sweep(out, &report)?;
    for row in aggregate(&report.results) {
        println!(
            "{:<12} AUC {:.6} ± {:.6} ({} seeds)",
            row.strategy.to_string(),
            row.mean_auc,
            row.std_auc,
            row.n_seeds
        );
    }
    for f in &report.failures {
        eprintln!("cell {} seed {} failed: {}", f.strategy, f.seed, f.error);
    }
    Ok(report.failures.is_empty())
}

fn cmd_analyze(which: Which, out: &Path) -> Result<bool> {
    let analyses = match which {
        Which::Decomposition => vec![Analysis::Decomposition],
        Which::Xor => vec![Analysis::Xor],
        Which::MezlFailure => vec![Analysis::MezlFailure],
        Which::Prop1 => vec![Analysis::Prop1],
        Which::All => Analysis::ALL.to_vec(),
    };
    fs::create_dir_all(out)?;
    let mut all_passed = true;
    for a in analyses {
        let report = run_analysis(a).map_err(|e| Failure::Runtime(e.to_string()))?;
        let json = serde_json::to_string_pretty(&report).map_err(|e| Failure::Runtime(e.to_string()))?;
        fs::write(out.join(format!("{a}.json")), json + "\n")?;
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        if failed.is_empty() {
            println!("{a}: pass ({} checks)", report.checks.len());
        } else {
            println!("{a}: FAIL ({})", failed.join(", "));
        }
        all_passed &= report.passed;
    }
    Ok(all_passed)
}
