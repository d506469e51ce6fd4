use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use gridnet::report::{table, write_outputs, TABLE_NAMES};
use gridnet::{analyze_path, AnalysisBundle, AnalyzeError, AnalyzeOptions};

#[derive(Parser)]
#[command(name = "gridnet", version, about = "Complex-network analysis of power distribution grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyse a grid (a directory with nodes.csv and edges.csv, or a JSON file).
    Analyze {
        /// Grid directory or JSON file.
        input: PathBuf,
        /// Directory for bundle.json and the CSV outputs.
        #[arg(short, long, default_value = "gridnet-out")]
        out: PathBuf,
        /// Seed for random baselines, random removal and cost sampling.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Compute the trading-cost parameters and the price surface.
        #[arg(long)]
        cost: bool,
        /// Random graphs averaged per baseline comparison.
        #[arg(long, default_value_t = 10)]
        baseline_trials: usize,
        /// Fraction of the original nodes removed per resilience step.
        #[arg(long, default_value_t = 0.05)]
        removal_step: f64,
        /// Skip the node-removal simulations.
        #[arg(long)]
        no_resilience: bool,
        /// Print a table after the run (metrics, weighted, critical, centrality).
        #[arg(long, value_parser = TABLE_NAMES)]
        table: Vec<String>,
    },
    /// Print a table from a saved bundle.
    Table {
        /// bundle.json written by `analyze`.
        bundle: PathBuf,
        #[arg(value_parser = TABLE_NAMES)]
        name: String,
    },
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("GRIDNET_THREADS") {
        let n: usize = v.parse().with_context(|| format!("GRIDNET_THREADS must be a positive integer, got {v:?}"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), (u8, anyhow::Error)> {
    configure_threads().map_err(|e| (2, e))?;
    match cli.command {
        Command::Analyze {
            input,
            out,
            seed,
            cost,
            baseline_trials,
            removal_step,
            no_resilience,
            table: tables,
        } => {
            let opts = AnalyzeOptions {
                seed,
                cost,
                baseline_trials,
                removal_step,
                resilience: !no_resilience,
            };
            let bundle = analyze_path(&input, &opts).map_err(|e: AnalyzeError| (e.exit_code(), e.into()))?;
            write_outputs(&bundle, &out).map_err(|e| (1, e))?;
            for name in &tables {
                print!("{}", table(&bundle, name).expect("validated by clap"));
            }
            eprintln!("wrote {}", out.join("bundle.json").display());
            Ok(())
        }
        Command::Table { bundle, name } => {
            let text = std::fs::read_to_string(&bundle)
                .with_context(|| format!("reading {}", bundle.display()))
                .map_err(|e| (1, e))?;
            let b = AnalysisBundle::from_json(&text)
                .with_context(|| format!("{} is not an analysis bundle", bundle.display()))
                .map_err(|e| (2, e))?;
            print!("{}", table(&b, &name).expect("validated by clap"));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}
