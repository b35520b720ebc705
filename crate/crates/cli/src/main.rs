//! `dca`: command-line front end for the DCA rate analysis.
//!
//! Exit codes: 0 success, 1 a check reported failure, 2 invalid input.

mod commands;
mod render;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use render::Format;

#[derive(Parser, Debug)]
#[command(name = "dca", version, about = "Tight one-step analysis of the difference-of-convex algorithm")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, global = true, default_value = "human")]
    output: Format,

    /// Write the result to a file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed of randomized commands (`spca`, `verify`); required with
    /// `--output json` there.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Regime, decrease coefficients and rate denominator of a splitting.
    #[command(allow_negative_numbers = true)]
    Classify(commands::ClassifyArgs),
    /// Bound on the smallest residual after N steps.
    #[command(allow_negative_numbers = true)]
    Rate(commands::RateArgs),
    /// Curvature shift that maximizes the rate denominator.
    #[command(allow_negative_numbers = true)]
    Shift(commands::ShiftArgs),
    /// Regime map over a (mu2, L2) grid for fixed (mu1, L1).
    #[command(allow_negative_numbers = true)]
    Contour(commands::ContourArgs),
    /// Builds a worst-case instance, runs DCA on it and compares with the bound.
    #[command(allow_negative_numbers = true)]
    Worstcase(commands::WorstcaseArgs),
    /// Regime of proximal gradient over a stepsize sweep.
    #[command(name = "pgd-map", allow_negative_numbers = true)]
    PgdMap(commands::PgdMapArgs),
    /// Decrease coefficient of one proximal gradient step.
    #[command(name = "pgd-sigma", allow_negative_numbers = true)]
    PgdSigma(commands::PgdSigmaArgs),
    /// Runs proximal gradient on a 1-D quadratic plus l1 problem and its DCA form.
    #[command(name = "pgd-run", allow_negative_numbers = true)]
    PgdRun(commands::PgdRunArgs),
    /// Sparse PCA iteration counts under several curvature shifts.
    #[command(allow_negative_numbers = true)]
    Spca(commands::SpcaArgs),
    /// Randomized self-checks of the analysis.
    Verify(commands::VerifyArgs),
}

fn seed_for(cli: &Cli) -> anyhow::Result<u64> {
    match (cli.seed, cli.output) {
        (Some(s), _) => Ok(s),
        (None, Format::Json) => anyhow::bail!("--seed is required with --output json for randomized commands"),
        (None, _) => Ok(0),
    }
}

fn run(cli: &Cli) -> anyhow::Result<render::Rendered> {
    let f = cli.output;
    match &cli.command {
        Command::Classify(a) => commands::classify(a, f),
        Command::Rate(a) => commands::rate(a, f),
        Command::Shift(a) => commands::shift(a, f),
        Command::Contour(a) => commands::contour(a, f),
        Command::Worstcase(a) => commands::worstcase(a, f),
        Command::PgdMap(a) => commands::pgd_map(a, f),
        Command::PgdSigma(a) => commands::pgd_sigma(a, f),
        Command::PgdRun(a) => commands::pgd_run(a, f),
        Command::Spca(a) => commands::spca(a, seed_for(cli)?, f),
        Command::Verify(a) => commands::verify(a, seed_for(cli)?, f),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let rendered = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let written = match &cli.out {
        Some(path) => fs::write(path, &rendered.text),
        None => std::io::stdout().write_all(rendered.text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: could not write output: {e}");
        return ExitCode::from(2);
    }
    if rendered.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
