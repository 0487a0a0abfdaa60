//! Experiment runner CLI.
//!
//! `colanet train` loads a `key = value` config (flags override file values),
//! trains the selected engine(s) on the ten one-vs-rest digit tasks, and
//! writes `runs.csv`, `comparison.csv` (both engines), and `summary.txt`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use colanet_core::harness::{
    emit_report, parse_list, parse_subsample, run_experiment, ExperimentConfig,
};

#[derive(Parser)]
#[command(name = "colanet", version, about = "Columnar spiking network classification workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train and evaluate on the ten one-vs-rest MNIST tasks.
    Train {
        /// Engine to run: digital, snn, or both.
        #[arg(long)]
        engine: Option<String>,
        /// Line-oriented `key = value` config file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Directory holding the four MNIST IDX files (optionally .gz).
        #[arg(long)]
        data_dir: Option<PathBuf>,
        /// Output directory for reports.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Use only the first N train and M test examples, as `N,M`.
        #[arg(long)]
        subsample: Option<String>,
        /// Comma-separated SNN seeds, e.g. `1,2,3,4`.
        #[arg(long)]
        seed_list: Option<String>,
        /// Membership test inside the update branches: literal | uniform_gt0.
        #[arg(long)]
        count_threshold: Option<String>,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> colanet_core::Result<()> {
    match cli.command {
        Command::Train {
            engine,
            config,
            data_dir,
            out,
            subsample,
            seed_list,
            count_threshold,
        } => {
            let mut config = match config {
                Some(path) => ExperimentConfig::from_file(&path)?,
                None => ExperimentConfig::default(),
            };
            if let Some(engine) = engine {
                config.engine = engine.parse()?;
            }
            if let Some(dir) = data_dir {
                config.data_dir = dir;
            }
            if let Some(dir) = out {
                config.out_dir = dir;
            }
            if let Some(pair) = subsample {
                config.subsample = Some(parse_subsample(&pair)?);
            }
            if let Some(seeds) = seed_list {
                config.seeds = parse_list(&seeds)?;
            }
            if let Some(mode) = count_threshold {
                config.count_threshold = mode.parse()?;
            }

            let started = std::time::Instant::now();
            let (results, report) = run_experiment(&config)?;
            emit_report(&results, report.as_ref(), &config.out_dir)?;

            for r in &results {
                println!(
                    "task {} {:>7} seed {} accuracy {:6.2}%",
                    r.task, r.engine.to_string(), r.seed, r.accuracy
                );
            }
            if let Some(report) = &report {
                let t = &report.t_test;
                println!(
                    "paired t-test over {} tasks: mean={:.4} sd={:.4} t={:.4} df={} p={:.4}",
                    report.rows.len(),
                    t.mean,
                    t.sd,
                    t.t_statistic,
                    t.degrees_of_freedom,
                    t.p_value
                );
            }
            println!(
                "reports written to {} ({:.1}s)",
                config.out_dir.display(),
                started.elapsed().as_secs_f64()
            );
            Ok(())
        }
    }
}
