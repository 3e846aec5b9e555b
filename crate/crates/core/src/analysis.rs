//! Corpus-level reports on a fitted model.
//!
//! Token-shift ranking surfaces the vocabulary tokens the AI reference uses
//! disproportionately (the per-token fold change q̂/p̂ in the probability of
//! occurring in an analysis unit), and stratified estimation runs the full
//! estimator separately on corpus partitions defined by a metadata
//! predicate (deadline proximity, citation presence, confidence, ...).

use serde::Serialize;

use crate::corpus::{Document, MetaValue, TokenId};
use crate::distribution::{build_likelihood_table, OccurrenceModel};
use crate::error::{Error, Result};
use crate::estimator::{bootstrap_ci, mle_alpha, MixtureEstimate, SolverConfig};
use crate::rng::substream_seed;

/// One token's occurrence probabilities under both references and their ratio.
#[derive(Debug, Clone, Serialize)]
pub struct TokenShiftRow {
    pub token: String,
    pub p_hat: f64,
    pub q_hat: f64,
    /// Fold change q̂/p̂; > 1 means AI-favored. Smoothing keeps it finite
    /// and positive.
    pub ratio: f64,
    /// The same ratio, annotated for reporting as the fold increase in the
    /// probability of occurring in an analysis unit.
    pub fold_in_sentence_prob: f64,
}

/// Ranking direction for the token-shift report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ShiftDirection {
    /// Largest q̂/p̂ first: tokens the AI reference over-uses.
    AiFavored,
    /// Smallest q̂/p̂ first: tokens the human reference over-uses.
    HumanFavored,
}

/// Rank vocabulary tokens by their occurrence-probability fold change.
///
/// Rows are sorted by ratio (descending for [`ShiftDirection::AiFavored`],
/// ascending otherwise) with ties broken lexicographically; at most `top_k`
/// rows are returned.
pub fn token_shift_report(
    model: &OccurrenceModel,
    top_k: usize,
    direction: ShiftDirection,
) -> Vec<TokenShiftRow> {
    let vocab = model.vocab();
    let mut rows: Vec<TokenShiftRow> = (0..vocab.len())
        .map(|i| {
            let id = TokenId(i as u32);
            let p_hat = model.p_hat(id);
            let q_hat = model.q_hat(id);
            let ratio = q_hat / p_hat;
            TokenShiftRow {
                token: vocab.token(id).expect("id within vocabulary").to_string(),
                p_hat,
                q_hat,
                ratio,
                fold_in_sentence_prob: ratio,
            }
        })
        .collect();
    rows.sort_by(|a, b| match direction {
        ShiftDirection::AiFavored => b
            .ratio
            .total_cmp(&a.ratio)
            .then_with(|| a.token.cmp(&b.token)),
        ShiftDirection::HumanFavored => a
            .ratio
            .total_cmp(&b.ratio)
            .then_with(|| a.token.cmp(&b.token)),
    });
    rows.truncate(top_k.min(vocab.len()));
    rows
}

/// Render token-shift rows as `token,p,q,ratio` CSV.
pub fn token_shift_csv(rows: &[TokenShiftRow]) -> String {
    let mut out = String::from("token,p,q,ratio\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            row.token, row.p_hat, row.q_hat, row.ratio
        ));
    }
    out
}

/// Comparison operator of a metadata predicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PredOp {
    Eq,
    Le,
    Ge,
    Lt,
    Gt,
    Contains,
}

#[derive(Debug, Clone, PartialEq)]
enum Literal {
    Num(f64),
    Bool(bool),
    Str(String),
}

/// A parsed `meta.<key> <op> <literal>` predicate.
///
/// The grammar is deliberately minimal: one key, one comparison, one
/// literal; no boolean composition. Ordering operators apply to numbers,
/// `contains` to strings, `==` to all three scalar kinds.
#[derive(Debug, Clone)]
pub struct Predicate {
    key: String,
    op: PredOp,
    literal: Literal,
    raw: String,
}

impl Predicate {
    pub fn parse(expr: &str) -> Result<Predicate> {
        let trimmed = expr.trim();
        let mut parts = trimmed.splitn(3, char::is_whitespace);
        let key_part = parts
            .next()
            .filter(|s| !s.is_empty())
            .ok_or_else(|| Error::InvalidPredicate("empty expression".into()))?;
        let op_part = parts
            .next()
            .ok_or_else(|| Error::InvalidPredicate(format!("missing operator in {trimmed:?}")))?;
        let lit_part = parts
            .next()
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .ok_or_else(|| Error::InvalidPredicate(format!("missing literal in {trimmed:?}")))?;

        let key = key_part
            .strip_prefix("meta.")
            .filter(|k| !k.is_empty())
            .ok_or_else(|| {
                Error::InvalidPredicate(format!(
                    "key must take the form meta.<name>, got {key_part:?}"
                ))
            })?
            .to_string();

        let op = match op_part {
            "==" => PredOp::Eq,
            "<=" => PredOp::Le,
            ">=" => PredOp::Ge,
            "<" => PredOp::Lt,
            ">" => PredOp::Gt,
            "contains" => PredOp::Contains,
            other => {
                return Err(Error::InvalidPredicate(format!(
                    "unknown operator {other:?} (expected ==, <=, >=, <, > or contains)"
                )))
            }
        };

        let literal = if (lit_part.starts_with('"') && lit_part.ends_with('"')
            || lit_part.starts_with('\'') && lit_part.ends_with('\''))
            && lit_part.len() >= 2
        {
            Literal::Str(lit_part[1..lit_part.len() - 1].to_string())
        } else if lit_part == "true" {
            Literal::Bool(true)
        } else if lit_part == "false" {
            Literal::Bool(false)
        } else if let Ok(num) = lit_part.parse::<f64>() {
            Literal::Num(num)
        } else {
            Literal::Str(lit_part.to_string())
        };

        match (op, &literal) {
            (PredOp::Contains, Literal::Str(_)) => {}
            (PredOp::Contains, _) => {
                return Err(Error::InvalidPredicate(
                    "contains requires a string literal".into(),
                ))
            }
            (PredOp::Le | PredOp::Ge | PredOp::Lt | PredOp::Gt, Literal::Num(_)) => {}
            (PredOp::Le | PredOp::Ge | PredOp::Lt | PredOp::Gt, _) => {
                return Err(Error::InvalidPredicate(
                    "ordering operators require a numeric literal".into(),
                ))
            }
            (PredOp::Eq, _) => {}
        }

        Ok(Predicate {
            key,
            op,
            literal,
            raw: trimmed.to_string(),
        })
    }

    /// The expression as written.
    pub fn raw(&self) -> &str {
        &self.raw
    }

    /// Evaluate against one document's metadata.
    pub fn eval(&self, doc: &Document) -> Result<bool> {
        let value = doc
            .meta
            .get(&self.key)
            .ok_or_else(|| Error::UnknownMetadataKey {
                key: self.key.clone(),
                doc_id: doc.id.clone(),
            })?;
        let mismatch = || {
            Error::InvalidPredicate(format!(
                "type mismatch on key {:?} for document {}: metadata holds {:?}",
                self.key, doc.id, value
            ))
        };
        match (&self.literal, value) {
            (Literal::Num(lit), MetaValue::Num(v)) => Ok(match self.op {
                PredOp::Eq => v == lit,
                PredOp::Le => v <= lit,
                PredOp::Ge => v >= lit,
                PredOp::Lt => v < lit,
                PredOp::Gt => v > lit,
                PredOp::Contains => return Err(mismatch()),
            }),
            (Literal::Bool(lit), MetaValue::Bool(v)) => match self.op {
                PredOp::Eq => Ok(v == lit),
                _ => Err(mismatch()),
            },
            (Literal::Str(lit), MetaValue::Str(v)) => match self.op {
                PredOp::Eq => Ok(v == lit),
                PredOp::Contains => Ok(v.contains(lit.as_str())),
                _ => Err(mismatch()),
            },
            _ => Err(mismatch()),
        }
    }
}

/// Estimate for one partition cell of a stratified analysis.
#[derive(Debug, Clone, Serialize)]
pub struct Stratum {
    pub name: String,
    pub predicate_desc: String,
    /// How the stratum was defined. `"predicate"` for partitions computed
    /// here; reserved for external labelers feeding strata in as metadata.
    pub source: String,
    pub n_docs: usize,
    pub estimate: MixtureEstimate,
}

#[derive(Debug, Clone, Serialize)]
pub struct StratumReport {
    pub strata: Vec<Stratum>,
    pub model_fingerprint: String,
}

/// Partition a corpus by predicate truth value and estimate each stratum.
///
/// Both strata must be non-empty. The two cells are disjoint and exhaustive
/// by construction; bootstrap seeds are derived per stratum from `seed`.
pub fn stratified_estimate(
    corpus: &[Document],
    model: &OccurrenceModel,
    predicate: &Predicate,
    cfg: &SolverConfig,
    b: usize,
    level: f64,
    seed: u64,
) -> Result<StratumReport> {
    let mut matched = Vec::new();
    let mut rest = Vec::new();
    for doc in corpus {
        if predicate.eval(doc)? {
            matched.push(doc.clone());
        } else {
            rest.push(doc.clone());
        }
    }
    let cells = [
        ("match", predicate.raw().to_string(), matched),
        ("rest", format!("not ({})", predicate.raw()), rest),
    ];

    let mut strata = Vec::with_capacity(2);
    for (name, desc, docs) in cells {
        if docs.is_empty() {
            return Err(Error::EmptyStratum { name: name.into() });
        }
        let table = build_likelihood_table(model, &docs)?;
        let mut estimate = mle_alpha(&table, cfg)?;
        let (lo, hi) = bootstrap_ci(
            &table,
            cfg,
            b,
            level,
            substream_seed(seed, &format!("stratum:{name}")),
        )?;
        estimate.attach_ci(lo, hi);
        strata.push(Stratum {
            name: name.to_string(),
            predicate_desc: desc,
            source: "predicate".to_string(),
            n_docs: estimate.n_docs,
            estimate,
        });
    }
    Ok(StratumReport {
        strata,
        model_fingerprint: model.fingerprint().to_string(),
    })
}
