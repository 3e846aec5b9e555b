use std::path::PathBuf;

use clap::Args;
use serde::Serialize;

use textmix::corpus::load_target_corpus;
use textmix::distribution::{build_likelihood_table, OccurrenceModel};
use textmix::estimator::{
    bootstrap_ci, kappa_diagnostic, mle_alpha, KappaDiagnostic, SolverConfig,
};
use textmix::rng::substream_seed;
use textmix::Result;

use crate::args::{text_norm, UnitArg};
use crate::manifest::ManifestBuilder;

/// Estimate the AI-generated fraction of a target corpus.
#[derive(Debug, Args, Serialize)]
pub struct EstimateArgs {
    /// Fitted model JSON.
    #[arg(long)]
    pub model: PathBuf,
    /// Target corpus (JSONL).
    #[arg(long)]
    pub target: PathBuf,
    /// Analysis unit; must match how the model was fitted.
    #[arg(long, value_enum, default_value = "sentence")]
    pub unit: UnitArg,
    /// Bootstrap replicates for the confidence interval.
    #[arg(long, default_value_t = 1000)]
    pub bootstrap: usize,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Failure probability for the separation diagnostic's bound.
    #[arg(long, default_value_t = 0.05)]
    pub kappa_delta: f64,
    #[arg(long, default_value_t = 1)]
    pub min_token_len: usize,
    #[arg(long)]
    pub keep_case: bool,
    /// Emit the estimate as JSON on stdout instead of a summary.
    #[arg(long)]
    pub json: bool,
}

#[derive(Serialize)]
pub struct EstimateOutput<'a> {
    pub alpha_hat: f64,
    pub ci: [f64; 2],
    pub level: f64,
    #[serde(rename = "B")]
    pub b: usize,
    pub n_docs: usize,
    pub log_likelihood: f64,
    pub at_boundary: bool,
    pub kappa: &'a KappaDiagnostic,
    pub model_fingerprint: &'a str,
}

pub fn run(args: &EstimateArgs, mb: &mut ManifestBuilder) -> Result<()> {
    mb.hash_input(&args.model)?;
    mb.hash_input(&args.target)?;
    let model = OccurrenceModel::read_json(&args.model)?;
    mb.model_fingerprint(model.fingerprint());

    let norm = text_norm(args.min_token_len, args.keep_case);
    let target = load_target_corpus(&args.target, args.unit.into(), &norm, model.vocab())?;
    let table = build_likelihood_table(&model, &target)?;

    let solver = SolverConfig::default();
    let mut estimate = mle_alpha(&table, &solver)?;
    let boot_seed = substream_seed(args.seed, "bootstrap");
    mb.seed("bootstrap", boot_seed);
    let (lo, hi) = bootstrap_ci(&table, &solver, args.bootstrap, args.level, boot_seed)?;
    estimate.attach_ci(lo, hi);
    let (ci_low, ci_high) = (estimate.ci_low.unwrap(), estimate.ci_high.unwrap());
    let kappa = kappa_diagnostic(&table, args.kappa_delta);

    let output = EstimateOutput {
        alpha_hat: estimate.alpha_hat,
        ci: [ci_low, ci_high],
        level: args.level,
        b: args.bootstrap,
        n_docs: estimate.n_docs,
        log_likelihood: estimate.log_likelihood,
        at_boundary: estimate.at_boundary,
        kappa: &kappa,
        model_fingerprint: model.fingerprint(),
    };
    if args.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&output).expect("estimate serializes")
        );
    } else {
        println!("alpha_hat       {:.6}", output.alpha_hat);
        println!(
            "{:.0}% CI          [{:.6}, {:.6}]  (B={})",
            output.level * 100.0,
            ci_low,
            ci_high,
            output.b
        );
        println!("n_docs          {}", output.n_docs);
        println!("log_likelihood  {:.4}", output.log_likelihood);
        println!("at_boundary     {}", output.at_boundary);
        match (kappa.kappa_hat, kappa.bound_value) {
            (Some(k), Some(bound)) => println!(
                "kappa_hat       {k:.6}  (bound {bound:.4} at delta {}, {:.1}% separated)",
                kappa.delta,
                kappa.frac_separated * 100.0
            ),
            (k, _) => println!(
                "kappa_hat       {k:?}  ({:.1}% separated)",
                kappa.frac_separated * 100.0
            ),
        }
        println!("model           {}", output.model_fingerprint);
    }
    Ok(())
}
