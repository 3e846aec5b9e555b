use std::path::PathBuf;

use clap::Args;
use serde::Serialize;

use textmix::corpus::{load_corpus_into, Vocabulary};
use textmix::distribution::{fit_occurrence_model, SmoothingConfig};
use textmix::validation::TrainingManifest;
use textmix::Result;

use crate::args::{build_filter, PosArg, UnitArg};
use crate::manifest::ManifestBuilder;

/// Fit the occurrence model from reference corpora.
#[derive(Debug, Args, Serialize)]
pub struct FitArgs {
    /// Human-written reference corpus (JSONL).
    #[arg(long)]
    pub human: PathBuf,
    /// AI-generated reference corpus (JSONL).
    #[arg(long)]
    pub ai: PathBuf,
    /// Analysis unit the corpora are split into.
    #[arg(long, value_enum, default_value = "sentence")]
    pub unit: UnitArg,
    /// Part of speech kept by the vocabulary filter.
    #[arg(long, value_enum, default_value = "adjective")]
    pub pos: PosArg,
    /// word<TAB>POS lexicon file (POS in ADJ, ADV, VERB, NOUN).
    #[arg(long)]
    pub lexicon: PathBuf,
    /// Tokens to exclude (e.g. technical keywords), one per line.
    #[arg(long)]
    pub exclude: Option<PathBuf>,
    /// Additive smoothing pseudocount.
    #[arg(long, default_value_t = 1.0)]
    pub pseudocount: f64,
    #[arg(long, default_value_t = 1)]
    pub min_token_len: usize,
    /// Keep original token casing (POS lookup stays case-insensitive).
    #[arg(long)]
    pub keep_case: bool,
    /// Where to write the model JSON.
    #[arg(long)]
    pub out: PathBuf,
    /// Training-manifest path [default: <out>.manifest.json].
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

pub fn default_manifest_path(model_path: &std::path::Path) -> PathBuf {
    let mut name = model_path.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

#[derive(Serialize)]
struct FitSummary<'a> {
    model: String,
    training_manifest: String,
    model_fingerprint: &'a str,
    vocab_size: usize,
    n_human: usize,
    n_ai: usize,
}

pub fn run(args: &FitArgs, mb: &mut ManifestBuilder) -> Result<()> {
    let filter = build_filter(
        &args.lexicon,
        args.pos,
        args.exclude.as_ref(),
        args.min_token_len,
        args.keep_case,
    )?;

    // One vocabulary spanning both references, human ids first.
    let mut vocab = Vocabulary::new();
    let human = load_corpus_into(&args.human, args.unit.into(), &filter, &mut vocab)?;
    let ai = load_corpus_into(&args.ai, args.unit.into(), &filter, &mut vocab)?;

    mb.hash_input(&args.human)?;
    mb.hash_input(&args.ai)?;
    mb.hash_input(&args.lexicon)?;
    if let Some(exclude) = &args.exclude {
        mb.hash_input(exclude)?;
    }

    let model = fit_occurrence_model(
        &human,
        &ai,
        &vocab,
        SmoothingConfig {
            pseudocount: args.pseudocount,
        },
    )?;
    model.write_json(&args.out)?;

    let manifest_path = args
        .manifest
        .clone()
        .unwrap_or_else(|| default_manifest_path(&args.out));
    TrainingManifest::new(&model, human.iter().chain(&ai)).write_json(&manifest_path)?;

    mb.model_fingerprint(model.fingerprint());
    let summary = FitSummary {
        model: args.out.display().to_string(),
        training_manifest: manifest_path.display().to_string(),
        model_fingerprint: model.fingerprint(),
        vocab_size: vocab.len(),
        n_human: human.len(),
        n_ai: ai.len(),
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&summary).expect("summary serializes")
    );
    Ok(())
}
