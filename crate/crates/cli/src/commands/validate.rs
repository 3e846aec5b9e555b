use std::fs;
use std::path::PathBuf;

use clap::Args;
use serde::Serialize;

use textmix::corpus::load_target_corpus;
use textmix::distribution::OccurrenceModel;
use textmix::validation::{run_validation_grid, TrainingManifest, ValidationConfig};
use textmix::{Error, Result};

use crate::args::{parse_grid, text_norm, UnitArg};
use crate::commands::fit::default_manifest_path;
use crate::manifest::ManifestBuilder;

/// Validate the estimator on synthesized mixtures with known AI fractions.
#[derive(Debug, Args, Serialize)]
pub struct ValidateArgs {
    /// Fitted model JSON.
    #[arg(long)]
    pub model: PathBuf,
    /// Training manifest written by `fit` [default: <model>.manifest.json].
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Held-out human pool (JSONL), disjoint from training.
    #[arg(long)]
    pub human_val: PathBuf,
    /// Held-out AI pool (JSONL), disjoint from training.
    #[arg(long)]
    pub ai_val: PathBuf,
    #[arg(long, value_enum, default_value = "sentence")]
    pub unit: UnitArg,
    /// Ground-truth grid: start:end:step or a comma-separated list.
    #[arg(long, default_value = "0:0.25:0.025")]
    pub grid: String,
    /// Size of each synthesized target corpus.
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Mixtures per grid value.
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Bootstrap replicates per mixture.
    #[arg(long, default_value_t = 200)]
    pub bootstrap: usize,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    #[arg(long, default_value_t = 1)]
    pub min_token_len: usize,
    #[arg(long)]
    pub keep_case: bool,
    /// Report JSON path; printed to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the plain-text table here.
    #[arg(long)]
    pub table_out: Option<PathBuf>,
    /// Also write an SVG plot of estimated vs. true fractions here.
    #[arg(long)]
    pub svg_out: Option<PathBuf>,
}

pub fn run(args: &ValidateArgs, mb: &mut ManifestBuilder) -> Result<()> {
    let manifest_path = args
        .manifest
        .clone()
        .unwrap_or_else(|| default_manifest_path(&args.model));
    mb.hash_input(&args.model)?;
    mb.hash_input(&manifest_path)?;
    mb.hash_input(&args.human_val)?;
    mb.hash_input(&args.ai_val)?;

    let model = OccurrenceModel::read_json(&args.model)?;
    mb.model_fingerprint(model.fingerprint());
    let training = TrainingManifest::read_json(&manifest_path)?;

    let norm = text_norm(args.min_token_len, args.keep_case);
    let human_val = load_target_corpus(&args.human_val, args.unit.into(), &norm, model.vocab())?;
    let ai_val = load_target_corpus(&args.ai_val, args.unit.into(), &norm, model.vocab())?;

    let cfg = ValidationConfig {
        alpha_grid: parse_grid(&args.grid)?,
        n_target: args.n,
        repeats: args.repeats,
        seed: args.seed,
        bootstrap_b: args.bootstrap,
        bootstrap_level: args.level,
        ..ValidationConfig::default()
    };
    mb.seed("root", args.seed);

    let report = run_validation_grid(&model, &human_val, &ai_val, &cfg, &training)?;

    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    match &args.out {
        Some(path) => {
            fs::write(path, &json).map_err(|e| Error::Io {
                path: path.clone(),
                source: e,
            })?;
            log::info!("report written to {}", path.display());
        }
        None => println!("{json}"),
    }
    if let Some(path) = &args.table_out {
        fs::write(path, report.to_text_table()).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        })?;
    }
    if let Some(path) = &args.svg_out {
        fs::write(path, report.to_svg()).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        })?;
    }
    Ok(())
}
