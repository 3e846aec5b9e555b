//! `textmix`: estimate what fraction of a text corpus is AI-generated.
//!
//! Exit codes form a stable scripting contract:
//!   0  success
//!   2  input or configuration error (including auth)
//!   3  degenerate estimate (mixture proportion unidentifiable)
//!   4  train/validation leakage
//!   5  transport failure against the generation endpoint

mod args;
mod commands;
mod manifest;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use manifest::ManifestBuilder;
use textmix::Error;

#[derive(Parser)]
#[command(
    name = "textmix",
    version,
    about = "Corpus-level estimation of the fraction of AI-generated text"
)]
struct Cli {
    /// Cap worker threads for parallel sections (bootstrap, validation grid).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Also write the run manifest JSON to this path (always logged to stderr).
    #[arg(long, global = true)]
    manifest_out: Option<std::path::PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    Fit(commands::fit::FitArgs),
    Estimate(commands::estimate::EstimateArgs),
    Validate(commands::validate::ValidateArgs),
    /// Corpus-level reports over a fitted model
    #[command(subcommand)]
    Report(commands::report::ReportCmd),
    Generate(commands::generate::GenerateArgs),
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::DegenerateLikelihood => 3,
        Error::Leakage { .. } => 4,
        Error::Transport(_) => 5,
        _ => 2,
    }
}

fn dispatch(command: &Command) -> (ManifestBuilder, textmix::Result<()>) {
    match command {
        Command::Fit(args) => {
            let mut mb = ManifestBuilder::new("fit", args);
            let result = commands::fit::run(args, &mut mb);
            (mb, result)
        }
        Command::Estimate(args) => {
            let mut mb = ManifestBuilder::new("estimate", args);
            let result = commands::estimate::run(args, &mut mb);
            (mb, result)
        }
        Command::Validate(args) => {
            let mut mb = ManifestBuilder::new("validate", args);
            let result = commands::validate::run(args, &mut mb);
            (mb, result)
        }
        Command::Report(cmd) => match cmd {
            commands::report::ReportCmd::TokenShift(args) => {
                let mut mb = ManifestBuilder::new("report token-shift", args);
                let result = commands::report::run_token_shift(args, &mut mb);
                (mb, result)
            }
            commands::report::ReportCmd::Strata(args) => {
                let mut mb = ManifestBuilder::new("report strata", args);
                let result = commands::report::run_strata(args, &mut mb);
                (mb, result)
            }
        },
        Command::Generate(args) => {
            let mut mb = ManifestBuilder::new("generate", args);
            let result = commands::generate::run(args, &mut mb);
            (mb, result)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            log::warn!("could not configure thread pool: {e}");
        }
    }

    let (mb, result) = dispatch(&cli.command);
    match result {
        Ok(()) => {
            if let Err(e) = mb.finish().emit(cli.manifest_out.as_deref()) {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
