// SPDX-License-Identifier: Apache-2.0

//! Benchmarking fraud detectors on labeled graphs under protected
//! differential privacy.
//!
//! The crate is organised around the release pipeline:
//!
//! * [`graph`]: labeled graph model, ingestion, SBM sampling, clique
//!   injection, degree truncation and sufficient statistics.
//! * [`detectors`]: deterministic fraud scoring procedures.
//! * [`metrics`]: AUC / F1 and release-error metrics.
//! * [`dp`]: Laplace noise, sensitivity bounds, budget ledger, noisy argmax.
//! * [`pda`]: Partition-Duplicate-Aggregate release and its SBM bias model.
//! * [`synth`]: node-private synthetic graph generators.
//! * [`attack`]: the accuracy-encoding membership attack and its ROC harness.
//! * [`harness`]: config-driven experiments and CSV/JSON output.
//!
//! AUC follows the strict-inequality definition: a fraud/benign pair with
//! equal scores contributes nothing. This differs from the usual half-credit
//! convention, which is used only for the attack ROC.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod attack;
pub mod detectors;
pub mod dp;
pub mod error;
pub mod graph;
pub mod harness;
pub mod metrics;
pub mod pda;
pub mod rng;
pub mod synth;

pub use error::{Error, Result};
pub use graph::{GraphStats, LabeledGraph, SbmParams};
