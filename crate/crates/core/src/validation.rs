//! End-to-end validation on mixtures with known composition.
//!
//! Held-out human and AI documents are resampled into target corpora with a
//! chosen ground-truth AI fraction; the estimator then runs blind and the
//! report compares estimates against the truth across a grid of fractions.
//! A fully synthetic Bernoulli generator is also provided: it matches the
//! occurrence-model family exactly, isolating estimator correctness from
//! model misspecification, and it returns its ground-truth probability
//! vectors for oracle checks.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Beta, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Document, MetaValue, Metadata, TokenId, Unit, Vocabulary};
use crate::distribution::{build_likelihood_table, OccurrenceModel};
use crate::error::{Error, Result};
use crate::estimator::{bootstrap_ci, mle_alpha, SolverConfig};
use crate::rng::{seeded, substream};

/// Configuration of a validation run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationConfig {
    /// Ground-truth AI fractions to synthesize, sorted and distinct.
    pub alpha_grid: Vec<f64>,
    /// Size of each synthesized target corpus.
    pub n_target: usize,
    /// Mixtures synthesized (and estimated) per grid value.
    pub repeats: usize,
    pub seed: u64,
    /// Train share when splitting reference corpora.
    pub split_fraction: f64,
    /// Bootstrap replicates per mixture; kept modest here since the grid
    /// multiplies it by `alpha_grid.len() * repeats`.
    pub bootstrap_b: usize,
    pub bootstrap_level: f64,
}

/// The default grid: 0 to 0.25 in steps of 0.025.
pub fn default_alpha_grid() -> Vec<f64> {
    (0..=10).map(|i| i as f64 * 0.025).collect()
}

impl Default for ValidationConfig {
    fn default() -> Self {
        ValidationConfig {
            alpha_grid: default_alpha_grid(),
            n_target: 1000,
            repeats: 5,
            seed: 0,
            split_fraction: 0.8,
            bootstrap_b: 200,
            bootstrap_level: 0.95,
        }
    }
}

impl ValidationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.alpha_grid.is_empty() {
            return Err(Error::InvalidConfig("alpha grid is empty".into()));
        }
        let sorted = self.alpha_grid.windows(2).all(|w| w[0] < w[1]);
        if !sorted {
            return Err(Error::InvalidConfig(
                "alpha grid must be sorted and distinct".into(),
            ));
        }
        if self.alpha_grid.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return Err(Error::InvalidConfig(
                "alpha grid values must lie in [0, 1]".into(),
            ));
        }
        if !(self.split_fraction > 0.0 && self.split_fraction < 1.0) {
            return Err(Error::InvalidConfig(
                "split fraction must lie strictly between 0 and 1".into(),
            ));
        }
        if self.n_target == 0 || self.repeats == 0 {
            return Err(Error::InvalidConfig(
                "n_target and repeats must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Record of which document ids a model was fitted on.
///
/// Validation refuses to run when its pools intersect these ids, and when
/// the manifest's fingerprint does not match the model in hand.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainingManifest {
    pub model_fingerprint: String,
    pub train_ids: BTreeSet<String>,
}

impl TrainingManifest {
    pub fn new<'a>(
        model: &OccurrenceModel,
        train_docs: impl IntoIterator<Item = &'a Document>,
    ) -> Self {
        TrainingManifest {
            model_fingerprint: model.fingerprint().to_string(),
            train_ids: train_docs.into_iter().map(|d| d.id.clone()).collect(),
        }
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self).expect("manifest serialization cannot fail");
        fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::parse(path, e.line(), e.to_string()))
    }
}

/// Seeded shuffle-and-split of a corpus into train and validation parts.
///
/// The train part receives `floor(n * fraction)` documents; the split is
/// disjoint and exhaustive, and identical for identical seeds.
pub fn split_corpus(docs: &[Document], fraction: f64, seed: u64) -> (Vec<Document>, Vec<Document>) {
    let mut shuffled: Vec<Document> = docs.to_vec();
    shuffled.shuffle(&mut substream(seed, "split"));
    let n_train = (docs.len() as f64 * fraction).floor() as usize;
    let validation = shuffled.split_off(n_train);
    (shuffled, validation)
}

/// Metadata key tagging the source pool of a synthesized document.
pub const META_MIX_SOURCE: &str = "mix_source";
/// Metadata key holding the id the document had in its source pool.
pub const META_ORIGIN_ID: &str = "origin_id";

fn resample_tagged(
    pool: &[Document],
    count: usize,
    source: &str,
    rng: &mut impl Rng,
    out: &mut Vec<Document>,
) {
    for _ in 0..count {
        let picked = &pool[rng.random_range(0..pool.len())];
        let mut doc = picked.clone();
        doc.meta.insert(
            META_ORIGIN_ID.to_string(),
            MetaValue::Str(picked.id.clone()),
        );
        doc.meta
            .insert(META_MIX_SOURCE.to_string(), MetaValue::Str(source.into()));
        out.push(doc);
    }
}

/// Synthesize a target corpus of size `n` with a known AI fraction.
///
/// Samples (with replacement) `round_ties_even(alpha * n)` documents from
/// the AI pool and the rest from the human pool, then shuffles, all from one
/// seeded stream. Each output document is re-identified as `mix{k}` and
/// tagged with its source pool and original id in metadata.
pub fn synthesize_mixture(
    human_val: &[Document],
    ai_val: &[Document],
    alpha: f64,
    n: usize,
    seed: u64,
) -> Vec<Document> {
    assert!(
        (0.0..=1.0).contains(&alpha),
        "alpha must lie in [0, 1], got {alpha}"
    );
    assert!(
        !human_val.is_empty() && !ai_val.is_empty(),
        "both validation pools must be non-empty"
    );
    let mut rng = substream(seed, "mixture");
    let n_ai = ((alpha * n as f64).round_ties_even() as usize).min(n);
    let mut docs = Vec::with_capacity(n);
    resample_tagged(ai_val, n_ai, "ai", &mut rng, &mut docs);
    resample_tagged(human_val, n - n_ai, "human", &mut rng, &mut docs);
    docs.shuffle(&mut rng);
    for (k, doc) in docs.iter_mut().enumerate() {
        doc.id = format!("mix{k:06}");
    }
    docs
}

/// One grid cell of a validation report.
///
/// Estimate fields are absent when every repeat failed as degenerate.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationRow {
    pub alpha_true: f64,
    pub alpha_hat_mean: Option<f64>,
    pub ci_mean: Option<[f64; 2]>,
    pub prediction_error: Option<f64>,
    pub repeats: usize,
    pub failed_repeats: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub rows: Vec<ValidationRow>,
    pub config: ValidationConfig,
    pub model_fingerprint: String,
}

/// Run the full validation protocol over a grid of ground-truth fractions.
///
/// For each grid value, `repeats` mixtures are synthesized from the held-out
/// pools and estimated with bootstrap intervals; the report aggregates
/// means and absolute prediction errors. Fails up front if the manifest does
/// not match the model or if any pool document was used in training.
pub fn run_validation_grid(
    model: &OccurrenceModel,
    human_val: &[Document],
    ai_val: &[Document],
    cfg: &ValidationConfig,
    manifest: &TrainingManifest,
) -> Result<ValidationReport> {
    cfg.validate()?;
    if manifest.model_fingerprint != model.fingerprint() {
        return Err(Error::FingerprintMismatch {
            expected: manifest.model_fingerprint.clone(),
            actual: model.fingerprint().to_string(),
        });
    }
    if human_val.is_empty() {
        return Err(Error::EmptyCorpus("human validation pool".into()));
    }
    if ai_val.is_empty() {
        return Err(Error::EmptyCorpus("ai validation pool".into()));
    }
    let overlapping: Vec<&str> = human_val
        .iter()
        .chain(ai_val)
        .filter(|d| manifest.train_ids.contains(&d.id))
        .map(|d| d.id.as_str())
        .collect();
    if let Some(first) = overlapping.first() {
        return Err(Error::Leakage {
            overlap: overlapping.len(),
            example_id: first.to_string(),
        });
    }

    let solver = SolverConfig::default();
    let rows: Vec<ValidationRow> = cfg
        .alpha_grid
        .par_iter()
        .enumerate()
        .map(|(gi, &alpha_true)| {
            let mut alphas = Vec::with_capacity(cfg.repeats);
            let mut los = Vec::with_capacity(cfg.repeats);
            let mut his = Vec::with_capacity(cfg.repeats);
            let mut failed = 0usize;
            for rep in 0..cfg.repeats {
                let mix_seed = crate::rng::substream_seed(cfg.seed, &format!("mixture:{gi}:{rep}"));
                let boot_seed =
                    crate::rng::substream_seed(cfg.seed, &format!("bootstrap:{gi}:{rep}"));
                let target =
                    synthesize_mixture(human_val, ai_val, alpha_true, cfg.n_target, mix_seed);
                let table = build_likelihood_table(model, &target)?;
                let est = match mle_alpha(&table, &solver) {
                    Ok(est) => est,
                    Err(Error::DegenerateLikelihood) => {
                        failed += 1;
                        continue;
                    }
                    Err(other) => return Err(other),
                };
                let ci = match bootstrap_ci(
                    &table,
                    &solver,
                    cfg.bootstrap_b,
                    cfg.bootstrap_level,
                    boot_seed,
                ) {
                    Ok(ci) => ci,
                    Err(Error::DegenerateLikelihood) => {
                        failed += 1;
                        continue;
                    }
                    Err(other) => return Err(other),
                };
                alphas.push(est.alpha_hat);
                los.push(ci.0);
                his.push(ci.1);
            }
            let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
            let row = if alphas.is_empty() {
                ValidationRow {
                    alpha_true,
                    alpha_hat_mean: None,
                    ci_mean: None,
                    prediction_error: None,
                    repeats: cfg.repeats,
                    failed_repeats: failed,
                }
            } else {
                let m = mean(&alphas);
                ValidationRow {
                    alpha_true,
                    alpha_hat_mean: Some(m),
                    ci_mean: Some([mean(&los), mean(&his)]),
                    prediction_error: Some((m - alpha_true).abs()),
                    repeats: cfg.repeats,
                    failed_repeats: failed,
                }
            };
            log::info!(
                "validation alpha={:.3}: mean estimate {:?}, {} failed repeat(s)",
                alpha_true,
                row.alpha_hat_mean,
                failed
            );
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ValidationReport {
        rows,
        config: cfg.clone(),
        model_fingerprint: model.fingerprint().to_string(),
    })
}

impl ValidationReport {
    /// Aligned plain-text table: alpha_true, alpha_hat, CI half-width, error.
    pub fn to_text_table(&self) -> String {
        let mut out = String::from("alpha_true  alpha_hat   CI(+/-)     error\n");
        for row in &self.rows {
            match (row.alpha_hat_mean, row.ci_mean, row.prediction_error) {
                (Some(mean), Some([lo, hi]), Some(err)) => {
                    out.push_str(&format!(
                        "{:<11.4} {:<11.4} {:<11.4} {:<.4}\n",
                        row.alpha_true,
                        mean,
                        (hi - lo) / 2.0,
                        err
                    ));
                }
                _ => {
                    out.push_str(&format!(
                        "{:<11.4} degenerate ({} of {} repeats failed)\n",
                        row.alpha_true, row.failed_repeats, row.repeats
                    ));
                }
            }
        }
        out
    }

    /// Line plot of estimated vs. true fraction with a y=x guide.
    pub fn to_svg(&self) -> String {
        const W: f64 = 480.0;
        const H: f64 = 360.0;
        const ML: f64 = 56.0; // left margin
        const MB: f64 = 44.0; // bottom margin
        const MT: f64 = 14.0;
        const MR: f64 = 14.0;

        let mut vmax = 0.0f64;
        for row in &self.rows {
            vmax = vmax.max(row.alpha_true);
            if let Some(m) = row.alpha_hat_mean {
                vmax = vmax.max(m);
            }
            if let Some([_, hi]) = row.ci_mean {
                vmax = vmax.max(hi);
            }
        }
        if vmax <= 0.0 {
            vmax = 1.0;
        }
        vmax *= 1.08;

        let x = |v: f64| ML + v / vmax * (W - ML - MR);
        let y = |v: f64| H - MB - v / vmax * (H - MB - MT);

        let mut svg = String::new();
        svg.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
        ));
        svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
        // axes
        svg.push_str(&format!(
            "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"black\"/>\n",
            x(0.0),
            y(0.0),
            x(vmax),
            y(0.0)
        ));
        svg.push_str(&format!(
            "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"black\"/>\n",
            x(0.0),
            y(0.0),
            x(0.0),
            y(vmax)
        ));
        // y = x guide
        svg.push_str(&format!(
            "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"gray\" stroke-dasharray=\"5,4\"/>\n",
            x(0.0),
            y(0.0),
            x(vmax),
            y(vmax)
        ));
        // tick labels on both axes at the grid values
        for row in &self.rows {
            let v = row.alpha_true;
            svg.push_str(&format!(
                "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"9\" text-anchor=\"middle\">{:.3}</text>\n",
                x(v),
                H - MB + 14.0,
                v
            ));
            svg.push_str(&format!(
                "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"9\" text-anchor=\"end\">{:.3}</text>\n",
                ML - 6.0,
                y(v) + 3.0,
                v
            ));
        }
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" text-anchor=\"middle\">true fraction</text>\n",
            (ML + W - MR) / 2.0,
            H - 8.0
        ));
        svg.push_str(&format!(
            "<text x=\"12\" y=\"{:.1}\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 12 {:.1})\">estimated fraction</text>\n",
            (MT + H - MB) / 2.0,
            (MT + H - MB) / 2.0
        ));

        let points: Vec<(f64, f64, Option<[f64; 2]>)> = self
            .rows
            .iter()
            .filter_map(|r| r.alpha_hat_mean.map(|m| (r.alpha_true, m, r.ci_mean)))
            .collect();
        if points.len() > 1 {
            let path: Vec<String> = points
                .iter()
                .map(|&(t, m, _)| format!("{:.1},{:.1}", x(t), y(m)))
                .collect();
            svg.push_str(&format!(
                "<polyline points=\"{}\" fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"1.5\"/>\n",
                path.join(" ")
            ));
        }
        for &(t, m, ci) in &points {
            if let Some([lo, hi]) = ci {
                svg.push_str(&format!(
                    "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"#1f6fb2\"/>\n",
                    x(t),
                    y(lo),
                    x(t),
                    y(hi)
                ));
            }
            svg.push_str(&format!(
                "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"3\" fill=\"#1f6fb2\"/>\n",
                x(t),
                y(m)
            ));
        }
        svg.push_str("</svg>\n");
        svg
    }
}

/// Parameters of the fully synthetic Bernoulli corpus generator.
///
/// Human occurrence probabilities are sampled from Beta(beta_a, beta_b);
/// the AI side boosts `boosted_count` randomly chosen tokens by
/// `boost_factor` (clipped at `clip_max`) and leaves the rest identical.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub vocab_size: usize,
    pub beta_a: f64,
    pub beta_b: f64,
    pub boosted_count: usize,
    pub boost_factor: f64,
    pub clip_max: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            vocab_size: 300,
            beta_a: 2.0,
            beta_b: 50.0,
            boosted_count: 30,
            boost_factor: 5.0,
            clip_max: 0.9,
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.vocab_size == 0 {
            return Err(Error::InvalidConfig("vocab_size must be positive".into()));
        }
        if self.boosted_count > self.vocab_size {
            return Err(Error::InvalidConfig(
                "boosted_count cannot exceed vocab_size".into(),
            ));
        }
        if self.boost_factor.is_nan() || self.boost_factor < 1.0 {
            return Err(Error::InvalidConfig("boost_factor must be >= 1".into()));
        }
        if !(self.clip_max > 0.0 && self.clip_max < 1.0) {
            return Err(Error::InvalidConfig(
                "clip_max must lie strictly between 0 and 1".into(),
            ));
        }
        if !(self.beta_a > 0.0 && self.beta_b > 0.0) {
            return Err(Error::InvalidConfig(
                "beta parameters must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Synthetic reference corpora plus their generating ground truth.
#[derive(Debug, Clone)]
pub struct SyntheticCorpora {
    pub vocab: Vocabulary,
    pub human: Vec<Document>,
    pub ai: Vec<Document>,
    pub true_p: Vec<f64>,
    pub true_q: Vec<f64>,
    /// Indices of the boosted tokens, sorted.
    pub boosted: Vec<usize>,
}

fn bernoulli_tokens(probs: &[f64], rng: &mut impl Rng) -> Vec<TokenId> {
    let mut tokens = Vec::new();
    for (t, &p) in probs.iter().enumerate() {
        if rng.random::<f64>() < p {
            tokens.push(TokenId(t as u32));
        }
    }
    tokens
}

fn bernoulli_doc(id: String, probs: &[f64], rng: &mut impl Rng) -> Document {
    Document::new(
        id,
        bernoulli_tokens(probs, rng),
        Metadata::new(),
        Unit::Document,
    )
}

/// Generate `n_docs` human and `n_docs` AI documents from a synthetic spec.
///
/// Fully deterministic for a fixed spec; the returned probability vectors
/// and boosted set are the generating ground truth for oracle checks.
pub fn synthetic_corpora(spec: &SyntheticSpec, n_docs: usize) -> Result<SyntheticCorpora> {
    spec.validate()?;
    if n_docs == 0 {
        return Err(Error::InvalidConfig("n_docs must be positive".into()));
    }
    let mut rng = seeded(spec.seed);
    let beta = Beta::new(spec.beta_a, spec.beta_b)
        .map_err(|e| Error::InvalidConfig(format!("invalid beta parameters: {e}")))?;
    let true_p: Vec<f64> = (0..spec.vocab_size)
        .map(|_| {
            // keep strictly interior so the vectors are usable as a model
            beta.sample(&mut rng).clamp(1e-9, 1.0 - 1e-9)
        })
        .collect();
    let mut boosted: Vec<usize> =
        rand::seq::index::sample(&mut rng, spec.vocab_size, spec.boosted_count).into_vec();
    boosted.sort_unstable();
    let mut true_q = true_p.clone();
    for &t in &boosted {
        true_q[t] = (true_q[t] * spec.boost_factor).min(spec.clip_max);
    }

    let vocab = Vocabulary::from_tokens((0..spec.vocab_size).map(|t| format!("t{t:04}")))?;
    let human: Vec<Document> = (0..n_docs)
        .map(|k| bernoulli_doc(format!("h{k:05}"), &true_p, &mut rng))
        .collect();
    let ai: Vec<Document> = (0..n_docs)
        .map(|k| bernoulli_doc(format!("a{k:05}"), &true_q, &mut rng))
        .collect();
    Ok(SyntheticCorpora {
        vocab,
        human,
        ai,
        true_p,
        true_q,
        boosted,
    })
}

/// Draw `n` documents i.i.d. from the mixture with the given AI fraction,
/// using known per-token probabilities for both components.
///
/// Unlike [`synthesize_mixture`], the realized AI count is binomial rather
/// than fixed; this matches the mixture sampling model exactly and is the
/// right target generator for coverage and convergence experiments.
pub fn sample_mixture_iid(
    true_p: &[f64],
    true_q: &[f64],
    alpha: f64,
    n: usize,
    seed: u64,
) -> Vec<Document> {
    assert_eq!(true_p.len(), true_q.len());
    assert!((0.0..=1.0).contains(&alpha));
    let mut rng = substream(seed, "iid-mixture");
    (0..n)
        .map(|k| {
            let from_ai = rng.random::<f64>() < alpha;
            let probs = if from_ai { true_q } else { true_p };
            let mut doc = bernoulli_doc(format!("x{k:06}"), probs, &mut rng);
            doc.meta.insert(
                META_MIX_SOURCE.to_string(),
                MetaValue::Str(if from_ai { "ai" } else { "human" }.into()),
            );
            doc
        })
        .collect()
}
