//! Meta-evaluation of explanation robustness metrics on a synthetic benchmark.
//!
//! The crate answers a simple question: when a robustness metric scores an
//! explanation method, can the metric itself be trusted? It provides two
//! ground-truth stress tests:
//!
//! * **PET** (perfect explanation test) — a transparent regression tree whose
//!   local explanations are exact; a sound metric must report (near-)zero
//!   sensitivity.
//! * **ROT** (random output test) — explanations and predictions are pure
//!   noise; a sound metric must report sensitivity bounded away from zero.
//!
//! A metric is *certified* only if it passes both. The pieces:
//!
//! * [`sab`] — synthetic attribution benchmark: procedurally textured images
//!   with geometric patterns, a monotone target function, and exact per-pixel
//!   ground-truth attributions.
//! * [`tree`] — CART regression tree with path-based local explanations.
//! * [`metrics`] — MAX-/AVG-sensitivity under Monte-Carlo neighborhood
//!   sampling, plus MAE/MSE performance measures.
//! * [`meta`] — PET/ROT runners, confidence intervals, certification verdict.
//! * [`pipeline`] — file-producing steps behind the `stabench` CLI
//!   (`gen-data`, `train`, `eval`, `report`).
//!
//! Everything is deterministic under a master seed: each sample or instance
//! derives its own sub-seed from (seed, index), so parallel and sequential
//! runs produce byte-identical artifacts.

pub mod config;
pub mod data;
pub mod error;
pub mod meta;
pub mod metrics;
pub mod parallel;
pub mod pipeline;
pub mod sab;
pub mod seeding;
pub mod tree;

pub use error::{Error, Result};
