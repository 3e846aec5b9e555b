//! Estimate what fraction of a text corpus was drawn from an AI-generated
//! reference distribution rather than a human-written one.
//!
//! The pipeline: reduce every analysis unit (document or sentence) to the
//! set of filtered vocabulary tokens it contains; fit smoothed per-token
//! occurrence probabilities on human and AI reference corpora; then maximize
//! the corpus log-likelihood of the target under the two-component mixture
//! over the AI fraction. Bootstrap resampling provides confidence intervals,
//! and a synthetic-mixture validation protocol checks the whole system
//! end to end before an estimate is trusted.

pub mod analysis;
pub mod corpus;
pub mod distribution;
pub mod error;
pub mod estimator;
pub mod rng;
pub mod validation;

pub use error::{Error, Result};
