use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use junta_core::{ExecMode, TesterKind};
use junta_lab::{certify_text, run_experiment, spectrum_text, ExperimentConfig, LabError};

/// Worker-count override for the trial pool.
const WORKERS_ENV: &str = "JUNTA_LAB_WORKERS";

#[derive(Parser)]
#[command(name = "junta-lab", version, about = "Tolerant junta testing experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        tester: Option<TesterKind>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        /// CSV output path; the JSON summary goes next to it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact distance of a truth table or matrix to the k-junta class.
    Certify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0.0)]
        epsilon1: f64,
        #[arg(long, default_value_t = 1.0)]
        epsilon2: f64,
    },
    /// Largest Pauli weights of a matrix (or embedded truth table).
    Spectrum {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 10)]
        top: usize,
    },
}

fn read(path: &PathBuf) -> Result<String, LabError> {
    std::fs::read_to_string(path).map_err(|source| LabError::Io {
        path: path.clone(),
        source,
    })
}

fn init_pool() -> Result<(), LabError> {
    let Ok(value) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let workers: usize = value
        .parse()
        .map_err(|_| LabError::Parameter(format!("{WORKERS_ENV}={value:?} is not a count")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
        .map_err(|e| LabError::Parameter(e.to_string()))
}

fn execute(cli: Cli) -> Result<(), LabError> {
    match cli.command {
        Command::Run {
            config,
            tester,
            seed,
            trials,
            out,
        } => {
            init_pool()?;
            let mut config = ExperimentConfig::load(&config)?;
            if let Some(t) = tester {
                config.tester = t;
            }
            if let Some(s) = seed {
                config.seed = s;
            }
            if let Some(t) = trials {
                config.trials = t;
            }
            if let Some(o) = out {
                config.output_path = o;
            }
            let summary = run_experiment(&config, ExecMode::Parallel)?;
            match summary.success_fraction {
                Some(f) => println!(
                    "{} trials, {}/{} certified trials correct ({f:.3})",
                    summary.trials_completed,
                    summary.correct,
                    summary.certified_yes + summary.certified_no
                ),
                None => println!("{} trials", summary.trials_completed),
            }
            println!("wrote {}", config.output_path.display());
        }
        Command::Certify {
            input,
            k,
            epsilon1,
            epsilon2,
        } => print!("{}", certify_text(&read(&input)?, k, epsilon1, epsilon2)?),
        Command::Spectrum { input, top } => print!("{}", spectrum_text(&read(&input)?, top)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
