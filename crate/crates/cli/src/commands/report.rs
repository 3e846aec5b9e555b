use std::fs;
use std::path::PathBuf;

use clap::{Args, Subcommand};
use serde::Serialize;

use textmix::analysis::{
    stratified_estimate, token_shift_csv, token_shift_report, Predicate, ShiftDirection,
};
use textmix::corpus::load_target_corpus;
use textmix::distribution::OccurrenceModel;
use textmix::estimator::SolverConfig;
use textmix::{Error, Result};

use crate::args::{text_norm, DirectionArg, UnitArg};
use crate::manifest::ManifestBuilder;

#[derive(Debug, Subcommand, Serialize)]
pub enum ReportCmd {
    /// Rank vocabulary tokens by their AI-vs-human occurrence fold change.
    TokenShift(TokenShiftArgs),
    /// Estimate the AI fraction separately on a metadata-defined partition.
    Strata(StrataArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct TokenShiftArgs {
    /// Fitted model JSON.
    #[arg(long)]
    pub model: PathBuf,
    /// Number of tokens to report.
    #[arg(long, default_value_t = 100)]
    pub top: usize,
    /// Which direction of shift to rank.
    #[arg(long, value_enum, default_value = "ai")]
    pub direction: DirectionArg,
    /// Also write the rows as token,p,q,ratio CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Emit rows as JSON on stdout instead of a table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct StrataArgs {
    /// Fitted model JSON.
    #[arg(long)]
    pub model: PathBuf,
    /// Target corpus (JSONL) with the metadata the predicate references.
    #[arg(long)]
    pub target: PathBuf,
    #[arg(long, value_enum, default_value = "sentence")]
    pub unit: UnitArg,
    /// Partition predicate, e.g. "meta.days_before_deadline <= 3".
    #[arg(long)]
    pub predicate: String,
    #[arg(long, default_value_t = 1000)]
    pub bootstrap: usize,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub min_token_len: usize,
    #[arg(long)]
    pub keep_case: bool,
    /// Emit the report as JSON on stdout instead of a summary.
    #[arg(long)]
    pub json: bool,
}

pub fn run_token_shift(args: &TokenShiftArgs, mb: &mut ManifestBuilder) -> Result<()> {
    mb.hash_input(&args.model)?;
    let model = OccurrenceModel::read_json(&args.model)?;
    mb.model_fingerprint(model.fingerprint());
    let direction = match args.direction {
        DirectionArg::Ai => ShiftDirection::AiFavored,
        DirectionArg::Human => ShiftDirection::HumanFavored,
    };
    let rows = token_shift_report(&model, args.top, direction);
    if let Some(path) = &args.csv {
        fs::write(path, token_shift_csv(&rows)).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        })?;
    }
    if args.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&rows).expect("rows serialize")
        );
    } else {
        println!(
            "{:<24} {:>10} {:>10} {:>9}",
            "token", "p_hat", "q_hat", "ratio"
        );
        for row in &rows {
            println!(
                "{:<24} {:>10.6} {:>10.6} {:>9.3}",
                row.token, row.p_hat, row.q_hat, row.ratio
            );
        }
    }
    Ok(())
}

pub fn run_strata(args: &StrataArgs, mb: &mut ManifestBuilder) -> Result<()> {
    mb.hash_input(&args.model)?;
    mb.hash_input(&args.target)?;
    let model = OccurrenceModel::read_json(&args.model)?;
    mb.model_fingerprint(model.fingerprint());

    let norm = text_norm(args.min_token_len, args.keep_case);
    let corpus = load_target_corpus(&args.target, args.unit.into(), &norm, model.vocab())?;
    let predicate = Predicate::parse(&args.predicate)?;
    mb.seed("root", args.seed);
    let report = stratified_estimate(
        &corpus,
        &model,
        &predicate,
        &SolverConfig::default(),
        args.bootstrap,
        args.level,
        args.seed,
    )?;
    if args.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&report).expect("report serializes")
        );
    } else {
        for stratum in &report.strata {
            let est = &stratum.estimate;
            println!(
                "{:<6} {:<40} n={:<7} alpha={:.4} CI=[{:.4}, {:.4}]",
                stratum.name,
                stratum.predicate_desc,
                stratum.n_docs,
                est.alpha_hat,
                est.ci_low.unwrap_or(f64::NAN),
                est.ci_high.unwrap_or(f64::NAN),
            );
        }
    }
    Ok(())
}
