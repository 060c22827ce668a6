use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use linas_moo::commands::{cmd_hypervolume, cmd_pareto, cmd_spaces, parse_directions, parse_point};
use linas_moo::experiment::{cmd_predictor_analysis, cmd_search};
use linas_moo::formats::trace_csv_string;
use linas_moo::{LoadedConfig, Result};

/// Predictor-accelerated multi-objective architecture search.
#[derive(Debug, Parser)]
#[command(name = "linas-moo", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every (algorithm, seed) arm of an experiment config.
    Search {
        #[arg(short, long)]
        config: PathBuf,
        /// Arms run concurrently on this many threads.
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Compare predictors on a sampled dataset.
    PredictorAnalysis {
        #[arg(short, long)]
        config: PathBuf,
    },
    /// Write the non-dominated records of a store as CSV.
    Pareto {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Comma-separated `max`/`min` per objective.
        #[arg(long, default_value = "max,min")]
        directions: String,
    },
    /// Print the hypervolume trace of a store as CSV.
    Hypervolume {
        #[arg(short, long)]
        input: PathBuf,
        /// Reference point in raw objective units, e.g. `70,60`.
        #[arg(long = "ref", allow_hyphen_values = true)]
        reference: Option<String>,
        #[arg(long)]
        normalized: bool,
        #[arg(long, default_value_t = 10)]
        stride: usize,
        #[arg(long, default_value = "max,min")]
        directions: String,
    },
    /// Print a space definition and its cardinality.
    Spaces {
        /// Built-in space name or space JSON file.
        kind: String,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Search { config, threads } => {
            let cfg = LoadedConfig::load(&config)?;
            let report = cmd_search(&cfg, threads.max(1))?;
            println!("{}", report.output_dir.join("manifest.json").display());
            if let Some(e) = report.first_error() {
                let code = e.exit_code();
                eprintln!("error: {e}");
                std::process::exit(code);
            }
        }
        Command::PredictorAnalysis { config } => {
            let cfg = LoadedConfig::load(&config)?;
            cmd_predictor_analysis(&cfg)?;
            println!("{}", cfg.output_dir().join("predictor_report.csv").display());
        }
        Command::Pareto { input, output, directions } => {
            let objectives = parse_directions(&directions)?;
            let n = cmd_pareto(&input, &output, &objectives)?;
            println!("{n} non-dominated records written to {}", output.display());
        }
        Command::Hypervolume { input, reference, normalized, stride, directions } => {
            let objectives = parse_directions(&directions)?;
            let reference = reference.map(|r| parse_point(&r, "--ref")).transpose()?;
            let trace = cmd_hypervolume(&input, &objectives, reference.as_deref(), normalized, stride)?;
            print!("{}", trace_csv_string(&trace));
        }
        Command::Spaces { kind } => print!("{}", cmd_spaces(&kind)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
