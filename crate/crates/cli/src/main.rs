mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use neurodecide::nav::{COARSE_ND, MIN_BENCH_REPEATS, PF, VISION_ND};

/// Neural decision dynamics experiments.
#[derive(Debug, Parser)]
#[command(name = "neurodecide", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Closed-loop runs of one controller over consecutive seeds.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_parser = [VISION_ND, COARSE_ND, PF])]
        mode: String,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        seeds: u64,
        #[arg(long)]
        out: PathBuf,
        /// Fail when any seed exhausts `max_steps` without a capture.
        #[arg(long)]
        strict: bool,
    },
    /// Two-option branch diagram and critical point.
    Bifurcation {
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 0.8)]
        a: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        cbar: f64,
        #[arg(long, default_value_t = 0.5)]
        mu_min: f64,
        #[arg(long, default_value_t = 2.0)]
        mu_max: f64,
        #[arg(long, default_value_t = 512)]
        points: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Mean per-step wall time of the full and coarse neural updates.
    Bench {
        /// Comma-separated population sizes.
        #[arg(long, value_delimiter = ',', required = true, value_parser = clap::value_parser!(u64).range(2..))]
        k: Vec<u64>,
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(MIN_BENCH_REPEATS as u64..))]
        repeats: u64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let args: Vec<String> = std::env::args().collect();
    let result = match cli.command {
        Cmd::Run {
            config,
            mode,
            seeds,
            out,
            strict,
        } => commands::run(&args, &config, &mode, seeds, &out, strict),
        Cmd::Bifurcation {
            alpha,
            a,
            cbar,
            mu_min,
            mu_max,
            points,
            out,
        } => commands::bifurcation(
            &args,
            commands::BifurcationArgs {
                alpha,
                a,
                cbar,
                mu_range: (mu_min, mu_max),
                points,
            },
            &out,
        ),
        Cmd::Bench { k, repeats, out } => {
            let k: Vec<usize> = k.into_iter().map(|x| x as usize).collect();
            commands::bench(&args, &k, repeats as usize, &out)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
