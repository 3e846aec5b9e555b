//! Smoothed token occurrence models and document log-likelihoods.
//!
//! Each reference distribution is a product of independent per-token
//! Bernoullis: a document's likelihood is the product of p̂(t) over tokens
//! it contains and (1 − p̂(t)) over vocabulary tokens it does not. The
//! occurrence probability of a token is estimated from the fraction of
//! reference documents containing it, with an additive pseudocount keeping
//! every probability strictly inside (0, 1) so log-likelihoods stay finite:
//!
//! ```text
//! p̂(t) = (#docs containing t + c) / (#docs + 2c)
//! ```
//!
//! Likelihoods are only ever handled in log space. With the vocabulary-wide
//! sum of ln(1 − p̂) precomputed, a document costs O(#tokens present)
//! instead of O(|V|):
//!
//! ```text
//! log P(x) = Σ_{t∈x} ln p̂(t) + [Σ_{t∈V} ln(1−p̂(t)) − Σ_{t∈x} ln(1−p̂(t))]
//! ```

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{Document, TokenId, Vocabulary};
use crate::error::{Error, Result};

/// Additive smoothing applied to occurrence counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothingConfig {
    pub pseudocount: f64,
}

impl Default for SmoothingConfig {
    fn default() -> Self {
        SmoothingConfig { pseudocount: 1.0 }
    }
}

impl SmoothingConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.pseudocount.is_finite() || self.pseudocount <= 0.0 {
            return Err(Error::InvalidConfig(
                "smoothing pseudocount must be a positive finite number".into(),
            ));
        }
        Ok(())
    }
}

/// Fitted per-token occurrence probabilities for both references.
///
/// Immutable after fitting. Log arrays and vocabulary-wide sums are
/// precomputed; `fingerprint` identifies the fit so tables and models from
/// different fits cannot be mixed silently.
#[derive(Debug, Clone)]
pub struct OccurrenceModel {
    vocab: Vocabulary,
    p: Vec<f64>,
    q: Vec<f64>,
    log_p: Vec<f64>,
    log_1mp: Vec<f64>,
    log_q: Vec<f64>,
    log_1mq: Vec<f64>,
    sum_log_1mp: f64,
    sum_log_1mq: f64,
    smoothing: SmoothingConfig,
    n_human: usize,
    n_ai: usize,
    fingerprint: String,
}

/// On-disk form of a model: probabilities, not logs, for readability.
#[derive(Serialize, Deserialize)]
struct ModelFile {
    vocab: Vec<String>,
    p: Vec<f64>,
    q: Vec<f64>,
    smoothing: SmoothingConfig,
    n_human: usize,
    n_ai: usize,
    fingerprint: String,
}

#[derive(Serialize)]
struct CanonicalModel<'a> {
    vocab: &'a [String],
    p: &'a [f64],
    q: &'a [f64],
    smoothing: &'a SmoothingConfig,
    n_human: usize,
    n_ai: usize,
}

fn fingerprint_of(canonical: &CanonicalModel) -> String {
    let bytes = serde_json::to_vec(canonical).expect("model serialization cannot fail");
    let digest = Sha256::digest(&bytes);
    let mut word = [0u8; 8];
    word.copy_from_slice(&digest[..8]);
    format!("{:016x}", u64::from_be_bytes(word))
}

/// Fit occurrence models for both references over a shared vocabulary.
///
/// `count(t)` is the number of documents containing `t` (occurrence, not
/// frequency), smoothed as `(count + c) / (n + 2c)`.
pub fn fit_occurrence_model(
    human: &[Document],
    ai: &[Document],
    vocab: &Vocabulary,
    smoothing: SmoothingConfig,
) -> Result<OccurrenceModel> {
    smoothing.validate()?;
    if human.is_empty() {
        return Err(Error::EmptyCorpus("human reference corpus".into()));
    }
    if ai.is_empty() {
        return Err(Error::EmptyCorpus("ai reference corpus".into()));
    }

    let count = |docs: &[Document]| -> Result<Vec<usize>> {
        let mut counts = vec![0usize; vocab.len()];
        for doc in docs {
            for &token in doc.tokens() {
                let slot = counts.get_mut(token.idx()).ok_or(Error::UnknownToken {
                    token_id: token.0,
                    vocab_size: vocab.len(),
                    doc_id: doc.id.clone(),
                })?;
                *slot += 1;
            }
        }
        Ok(counts)
    };

    let smooth = |counts: &[usize], n: usize| -> Vec<f64> {
        let c = smoothing.pseudocount;
        counts
            .iter()
            .map(|&k| (k as f64 + c) / (n as f64 + 2.0 * c))
            .collect()
    };

    let p = smooth(&count(human)?, human.len());
    let q = smooth(&count(ai)?, ai.len());
    OccurrenceModel::from_probabilities_full(vocab.clone(), p, q, smoothing, human.len(), ai.len())
}

impl OccurrenceModel {
    /// Build a model directly from known occurrence probabilities.
    ///
    /// Every probability must lie strictly inside (0, 1).
    pub fn from_probabilities(
        vocab: Vocabulary,
        p: Vec<f64>,
        q: Vec<f64>,
    ) -> Result<OccurrenceModel> {
        Self::from_probabilities_full(vocab, p, q, SmoothingConfig::default(), 0, 0)
    }

    fn from_probabilities_full(
        vocab: Vocabulary,
        p: Vec<f64>,
        q: Vec<f64>,
        smoothing: SmoothingConfig,
        n_human: usize,
        n_ai: usize,
    ) -> Result<OccurrenceModel> {
        if p.len() != vocab.len() || q.len() != vocab.len() {
            return Err(Error::InvalidConfig(format!(
                "probability arrays ({}, {}) do not match vocabulary size {}",
                p.len(),
                q.len(),
                vocab.len()
            )));
        }
        for (name, arr) in [("p", &p), ("q", &q)] {
            if let Some(bad) = arr.iter().find(|v| !(**v > 0.0 && **v < 1.0)) {
                return Err(Error::InvalidConfig(format!(
                    "{name} contains {bad}, outside the open interval (0, 1)"
                )));
            }
        }

        let logs = |arr: &[f64]| -> (Vec<f64>, Vec<f64>, f64) {
            let log: Vec<f64> = arr.iter().map(|&v| v.ln()).collect();
            // ln(1 - v) via ln_1p for accuracy near v ~ 0.
            let log_1m: Vec<f64> = arr.iter().map(|&v| (-v).ln_1p()).collect();
            let sum = log_1m.iter().sum();
            (log, log_1m, sum)
        };
        let (log_p, log_1mp, sum_log_1mp) = logs(&p);
        let (log_q, log_1mq, sum_log_1mq) = logs(&q);

        let fingerprint = fingerprint_of(&CanonicalModel {
            vocab: vocab.tokens(),
            p: &p,
            q: &q,
            smoothing: &smoothing,
            n_human,
            n_ai,
        });

        Ok(OccurrenceModel {
            vocab,
            p,
            q,
            log_p,
            log_1mp,
            log_q,
            log_1mq,
            sum_log_1mp,
            sum_log_1mq,
            smoothing,
            n_human,
            n_ai,
            fingerprint,
        })
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn p_hat(&self, token: TokenId) -> f64 {
        self.p[token.idx()]
    }

    pub fn q_hat(&self, token: TokenId) -> f64 {
        self.q[token.idx()]
    }

    pub fn smoothing(&self) -> SmoothingConfig {
        self.smoothing
    }

    pub fn n_human(&self) -> usize {
        self.n_human
    }

    pub fn n_ai(&self) -> usize {
        self.n_ai
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn sum_log_1mp(&self) -> f64 {
        self.sum_log_1mp
    }

    pub fn sum_log_1mq(&self) -> f64 {
        self.sum_log_1mq
    }

    /// Log-likelihood of a document under both references.
    ///
    /// Computed as the all-absent baseline plus, per present token,
    /// `ln p̂ − ln(1−p̂)`.
    pub fn doc_log_likelihoods(&self, doc: &Document) -> Result<(f64, f64)> {
        let mut log_p = self.sum_log_1mp;
        let mut log_q = self.sum_log_1mq;
        for &token in doc.tokens() {
            let i = token.idx();
            if i >= self.vocab.len() {
                return Err(Error::UnknownToken {
                    token_id: token.0,
                    vocab_size: self.vocab.len(),
                    doc_id: doc.id.clone(),
                });
            }
            log_p += self.log_p[i] - self.log_1mp[i];
            log_q += self.log_q[i] - self.log_1mq[i];
        }
        Ok((log_p, log_q))
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let file = ModelFile {
            vocab: self.vocab.tokens().to_vec(),
            p: self.p.clone(),
            q: self.q.clone(),
            smoothing: self.smoothing,
            n_human: self.n_human,
            n_ai: self.n_ai,
            fingerprint: self.fingerprint.clone(),
        };
        let json = serde_json::to_string_pretty(&file).expect("model serialization cannot fail");
        fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn read_json(path: &Path) -> Result<OccurrenceModel> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: ModelFile =
            serde_json::from_str(&text).map_err(|e| Error::parse(path, e.line(), e.to_string()))?;
        let vocab = Vocabulary::from_tokens(file.vocab)?;
        let model = OccurrenceModel::from_probabilities_full(
            vocab,
            file.p,
            file.q,
            file.smoothing,
            file.n_human,
            file.n_ai,
        )?;
        if model.fingerprint != file.fingerprint {
            return Err(Error::FingerprintMismatch {
                expected: file.fingerprint,
                actual: model.fingerprint,
            });
        }
        Ok(model)
    }
}

/// Precomputed per-document log-likelihood pairs for a target corpus.
#[derive(Debug, Clone, Serialize)]
pub struct LikelihoodTable {
    entries: Vec<LikelihoodEntry>,
    model_fingerprint: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct LikelihoodEntry {
    pub doc_id: String,
    pub log_p: f64,
    pub log_q: f64,
}

impl LikelihoodTable {
    /// Assemble a table from raw entries (useful for constructed fixtures).
    pub fn from_entries(entries: Vec<LikelihoodEntry>, model_fingerprint: String) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyCorpus("likelihood table".into()));
        }
        if let Some(bad) = entries
            .iter()
            .find(|e| !e.log_p.is_finite() || !e.log_q.is_finite())
        {
            return Err(Error::InvalidConfig(format!(
                "non-finite log-likelihood for document {}",
                bad.doc_id
            )));
        }
        Ok(LikelihoodTable {
            entries,
            model_fingerprint,
        })
    }

    pub fn entries(&self) -> &[LikelihoodEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn model_fingerprint(&self) -> &str {
        &self.model_fingerprint
    }
}

/// Evaluate the model on every document of a corpus, order preserved.
pub fn build_likelihood_table(
    model: &OccurrenceModel,
    corpus: &[Document],
) -> Result<LikelihoodTable> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus("target corpus".into()));
    }
    let mut entries = Vec::with_capacity(corpus.len());
    for doc in corpus {
        let (log_p, log_q) = model.doc_log_likelihoods(doc)?;
        debug_assert!(log_p.is_finite() && log_q.is_finite());
        entries.push(LikelihoodEntry {
            doc_id: doc.id.clone(),
            log_p,
            log_q,
        });
    }
    LikelihoodTable::from_entries(entries, model.fingerprint().to_string())
}
