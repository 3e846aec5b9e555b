//! Maximum-likelihood estimation of the AI mixture proportion.
//!
//! Under the two-component mixture, the corpus log-likelihood at proportion
//! `alpha` is
//!
//! ```text
//! L(alpha) = Σ_i ln((1-alpha) P(x_i) + alpha Q(x_i))
//! ```
//!
//! accumulated in log space via pairwise log-sum-exp. L is concave in
//! `alpha` (its second derivative is -[(Q-P)/((1-a)P+aQ)]² ≤ 0), so a
//! golden-section search over [0, 1] finds the global maximizer without
//! derivatives and behaves well at the boundaries. Percentile bootstrap
//! over document resamples yields confidence intervals, and the kappa
//! diagnostic summarizes how separated the two references are on the
//! target corpus, which governs how fast the estimate concentrates.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::distribution::LikelihoodTable;
use crate::error::{Error, Result};
use crate::rng::seeded;

/// Two documents' log-likelihoods closer than this are treated as
/// coincident, both for the degeneracy check and for `frac_separated`.
pub const SEPARATION_EPS: f64 = 1e-12;

/// Numerically stable ln(e^a + e^b).
#[inline]
pub fn logsumexp2(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY && b == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if a >= b {
        a + (b - a).exp().ln_1p()
    } else {
        b + (a - b).exp().ln_1p()
    }
}

/// Scalar search strategy for the concave log-likelihood.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverMethod {
    GoldenSection,
    /// Coarse grid scan, then golden-section refinement of the best cell.
    /// Kept as a cross-check for the direct search.
    GridThenRefine,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SolverConfig {
    pub method: SolverMethod,
    /// Absolute tolerance on the maximizer; the search interval is [0, 1].
    pub tol_alpha: f64,
    pub max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            method: SolverMethod::GoldenSection,
            tol_alpha: 1e-6,
            max_iter: 200,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_alpha > 0.0 && self.tol_alpha < 1.0) {
            return Err(Error::InvalidConfig(
                "tol_alpha must lie strictly between 0 and 1".into(),
            ));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be positive".into()));
        }
        Ok(())
    }
}

/// Result of maximizing the mixture likelihood.
#[derive(Debug, Clone, Serialize)]
pub struct MixtureEstimate {
    pub alpha_hat: f64,
    pub log_likelihood: f64,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub n_docs: usize,
    pub solver_iters: usize,
    pub at_boundary: bool,
}

impl MixtureEstimate {
    /// Attach a bootstrap interval, widened if needed so it brackets the
    /// point estimate. A widening means the bootstrap distribution sits
    /// away from the full-sample maximizer; it is logged, not hidden.
    pub fn attach_ci(&mut self, lo: f64, hi: f64) {
        if lo > self.alpha_hat || hi < self.alpha_hat {
            log::debug!(
                "bootstrap interval [{lo}, {hi}] widened to bracket alpha_hat {}",
                self.alpha_hat
            );
        }
        self.ci_low = Some(lo.min(self.alpha_hat));
        self.ci_high = Some(hi.max(self.alpha_hat));
    }
}

/// Per-document log-likelihood pair, stripped of identifiers for the solver.
#[derive(Debug, Clone, Copy)]
struct LogPair {
    p: f64,
    q: f64,
}

fn pairs_of(table: &LikelihoodTable) -> Vec<LogPair> {
    table
        .entries()
        .iter()
        .map(|e| LogPair {
            p: e.log_p,
            q: e.log_q,
        })
        .collect()
}

fn ll(pairs: &[LogPair], alpha: f64) -> f64 {
    // The vanished branch is dropped analytically at the endpoints rather
    // than evaluating ln(0).
    if alpha == 0.0 {
        return pairs.iter().map(|e| e.p).sum();
    }
    if alpha == 1.0 {
        return pairs.iter().map(|e| e.q).sum();
    }
    let ln_alpha = alpha.ln();
    let ln_1m_alpha = (-alpha).ln_1p();
    pairs
        .iter()
        .map(|e| logsumexp2(ln_1m_alpha + e.p, ln_alpha + e.q))
        .sum()
}

/// Corpus log-likelihood at a given mixture proportion.
///
/// `alpha` must lie in [0, 1]; the table invariant guarantees a finite result.
pub fn corpus_log_likelihood(table: &LikelihoodTable, alpha: f64) -> f64 {
    assert!(
        (0.0..=1.0).contains(&alpha),
        "alpha must lie in [0, 1], got {alpha}"
    );
    ll(&pairs_of(table), alpha)
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for the maximum of a concave `f` on `[lo, hi]`.
fn golden_section_max(
    f: impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    max_iter: usize,
) -> (f64, usize) {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut iters = 0usize;
    while hi - lo > tol && iters < max_iter {
        if f1 > f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
        iters += 1;
    }
    ((lo + hi) / 2.0, iters)
}

struct SolveOutcome {
    alpha: f64,
    log_likelihood: f64,
    iters: usize,
    at_boundary: bool,
}

fn solve(pairs: &[LogPair], cfg: &SolverConfig) -> Result<SolveOutcome> {
    cfg.validate()?;
    if pairs.is_empty() {
        return Err(Error::EmptyCorpus("likelihood table".into()));
    }
    if pairs.iter().all(|e| (e.p - e.q).abs() <= SEPARATION_EPS) {
        // L is constant in alpha: refuse to guess.
        return Err(Error::DegenerateLikelihood);
    }

    let f = |alpha: f64| ll(pairs, alpha);
    let (mut alpha, iters) = match cfg.method {
        SolverMethod::GoldenSection => golden_section_max(f, 0.0, 1.0, cfg.tol_alpha, cfg.max_iter),
        SolverMethod::GridThenRefine => {
            const COARSE: usize = 1000;
            let best = (0..=COARSE)
                .map(|i| i as f64 / COARSE as f64)
                .max_by(|&a, &b| f(a).total_cmp(&f(b)))
                .expect("non-empty grid");
            let lo = (best - 1.0 / COARSE as f64).max(0.0);
            let hi = (best + 1.0 / COARSE as f64).min(1.0);
            let (alpha, iters) = golden_section_max(f, lo, hi, cfg.tol_alpha, cfg.max_iter);
            (alpha, iters + COARSE + 1)
        }
    };

    // Snap to an endpoint when it dominates: a monotone likelihood has its
    // maximizer exactly at the boundary.
    let mut best_ll = f(alpha);
    for endpoint in [0.0, 1.0] {
        let v = f(endpoint);
        if v >= best_ll {
            alpha = endpoint;
            best_ll = v;
        }
    }
    let at_boundary = alpha <= cfg.tol_alpha || alpha >= 1.0 - cfg.tol_alpha;

    Ok(SolveOutcome {
        alpha,
        log_likelihood: best_ll,
        iters,
        at_boundary,
    })
}

/// Maximize the mixture log-likelihood over [0, 1].
///
/// Fails with `DegenerateLikelihood` when every document is equally likely
/// under both references, in which case the proportion is unidentifiable.
/// Confidence fields are left empty; see [`bootstrap_ci`].
pub fn mle_alpha(table: &LikelihoodTable, cfg: &SolverConfig) -> Result<MixtureEstimate> {
    let pairs = pairs_of(table);
    let outcome = solve(&pairs, cfg)?;
    Ok(MixtureEstimate {
        alpha_hat: outcome.alpha,
        log_likelihood: outcome.log_likelihood,
        ci_low: None,
        ci_high: None,
        n_docs: table.len(),
        solver_iters: outcome.iters,
        at_boundary: outcome.at_boundary,
    })
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let rank = q * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (sorted[hi] - sorted[lo]) * (rank - lo as f64)
    }
}

/// Percentile bootstrap confidence interval for the mixture proportion.
///
/// Documents (table rows) are resampled with replacement `b` times and the
/// MLE recomputed per replicate; the interval is the
/// ((1-level)/2, 1-(1-level)/2) percentile pair. Replicate RNG streams are
/// derived as seed + replicate index, so results do not depend on the
/// parallel schedule. Degenerate replicates are tolerated unless they are
/// the majority.
pub fn bootstrap_ci(
    table: &LikelihoodTable,
    cfg: &SolverConfig,
    b: usize,
    level: f64,
    seed: u64,
) -> Result<(f64, f64)> {
    if b < 100 {
        return Err(Error::InvalidConfig(format!(
            "bootstrap needs at least 100 replicates, got {b}"
        )));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidConfig(
            "confidence level must lie strictly between 0 and 1".into(),
        ));
    }
    let pairs = pairs_of(table);
    let n = pairs.len();
    let replicates: Vec<Option<f64>> = (0..b)
        .into_par_iter()
        .map(|rep| {
            let mut rng = seeded(seed.wrapping_add(rep as u64));
            let sample: Vec<LogPair> = (0..n).map(|_| pairs[rng.random_range(0..n)]).collect();
            solve(&sample, cfg).ok().map(|o| o.alpha)
        })
        .collect();

    let mut alphas: Vec<f64> = replicates.iter().filter_map(|a| *a).collect();
    let degenerate = b - alphas.len();
    if 2 * degenerate > b {
        return Err(Error::DegenerateLikelihood);
    }
    alphas.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    Ok((percentile(&alphas, tail), percentile(&alphas, 1.0 - tail)))
}

/// Separation diagnostic for the error bound of the estimate.
///
/// `kappa_hat` is the empirical minimum over documents of
/// |P(x) - Q(x)| / max(P(x)², Q(x)²), evaluated in log space so the ratio
/// survives likelihoods far below f64 range. `bound_value` is
/// (ln(1/delta))^¼ / (n^¼ · kappa^½) with unit constant: the asymptotic
/// error-bound shape with no calibrated constant, reported as a scale
/// indicator only, never a certificate. Non-finite values serialize as null.
#[derive(Debug, Clone, Serialize)]
pub struct KappaDiagnostic {
    pub kappa_hat: Option<f64>,
    /// Fraction of documents whose two log-likelihoods differ by more
    /// than [`SEPARATION_EPS`].
    pub frac_separated: f64,
    pub n: usize,
    pub delta: f64,
    pub bound_value: Option<f64>,
    /// Largest |log P(x)| over the corpus; a boundedness indicator for the
    /// concentration argument behind the bound.
    pub max_abs_log_p: f64,
    pub max_abs_log_q: f64,
}

/// Compute the kappa separation diagnostic on a likelihood table.
pub fn kappa_diagnostic(table: &LikelihoodTable, delta: f64) -> KappaDiagnostic {
    assert!(
        delta > 0.0 && delta < 1.0,
        "delta must lie strictly between 0 and 1, got {delta}"
    );
    let n = table.len();
    let mut log_kappa_min = f64::INFINITY;
    let mut separated = 0usize;
    let mut max_abs_log_p: f64 = 0.0;
    let mut max_abs_log_q: f64 = 0.0;
    for e in table.entries() {
        max_abs_log_p = max_abs_log_p.max(e.log_p.abs());
        max_abs_log_q = max_abs_log_q.max(e.log_q.abs());
        let gap = (e.log_p - e.log_q).abs();
        if gap <= SEPARATION_EPS {
            log_kappa_min = f64::NEG_INFINITY;
            continue;
        }
        separated += 1;
        // ln(|e^a - e^b| / max(e^a, e^b)²) = -max(a,b) + ln(1 - e^{-|a-b|})
        let log_kappa = -e.log_p.max(e.log_q) + (-(-gap).exp()).ln_1p();
        log_kappa_min = log_kappa_min.min(log_kappa);
    }

    let kappa_hat = match log_kappa_min.exp() {
        v if v.is_finite() => Some(v),
        _ => None,
    };
    // ln bound = ¼ ln ln(1/delta) - ¼ ln n - ½ ln kappa
    let log_bound = 0.25 * (1.0 / delta).ln().ln() - 0.25 * (n as f64).ln() - 0.5 * log_kappa_min;
    let bound_value = match log_bound.exp() {
        v if v.is_finite() => Some(v),
        _ => None,
    };

    KappaDiagnostic {
        kappa_hat,
        frac_separated: separated as f64 / n as f64,
        n,
        delta,
        bound_value,
        max_abs_log_p,
        max_abs_log_q,
    }
}
