//! Adapt pointwise relevance scorers into binary relevance judges, measure
//! their agreement with human assessors, and quantify how they bias system
//! rankings.
//!
//! The pipeline: [`trec_io`] loads qrels, runs and score tables; [`adapt`]
//! turns scores into binary qrels by generated token or by threshold (with a
//! grid sweep and cross-dataset transfer); [`metrics`] computes
//! trec_eval-compatible effectiveness; [`agreement`] measures Cohen's kappa
//! and Kendall's tau; [`bias`] cross-evaluates a system set under every
//! judge.

pub mod adapt;
pub mod agreement;
pub mod bias;
pub mod cli;
pub mod error;
pub mod metrics;
pub mod trec_io;

pub use error::{Error, Result};
