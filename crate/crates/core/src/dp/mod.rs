// SPDX-License-Identifier: Apache-2.0

//! Differential privacy primitives.
//!
//! Neighbouring graphs differ in the edges or metadata of one benign vertex
//! (protected DP); fraud vertices are unprotected. Mechanisms here are
//! building blocks and enforce privacy only through their sensitivity and
//! scale arguments.

mod ledger;
mod noise;
mod select;
mod sensitivity;

pub use ledger::{BudgetLedger, LedgerEntry};
pub use noise::{laplace_cdf, laplace_mechanism, sample_laplace};
pub use select::report_noisy_argmax;
pub use sensitivity::{
    beta_from_privacy, restricted_sensitivity, smooth_sensitivity_truncation, SensitivityBound,
    Statistic,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default delta for the smooth-sensitivity (synthetic data) paths.
pub const DEFAULT_DELTA: f64 = 1e-8;

#[derive(Debug, Error, PartialEq)]
pub enum DpError {
    #[error("scale must be positive, got {0}")]
    NonPositiveScale(f64),
    #[error("epsilon must be positive, got {0}")]
    NonPositiveEpsilon(f64),
    #[error("sensitivity must be non-negative, got {0}")]
    NegativeSensitivity(f64),
    #[error("delta must lie in {range}, got {delta}")]
    InvalidDelta { delta: f64, range: &'static str },
    #[error("beta must be positive, got {0}")]
    NonPositiveBeta(f64),
    #[error("unknown statistic `{0}`")]
    UnknownStatistic(String),
    #[error("charge of epsilon {0} rejected: charges must be positive")]
    NonPositiveCharge(f64),
    #[error("overdraft: charging {requested} with {remaining} of {total} remaining")]
    Overdraft {
        requested: f64,
        remaining: f64,
        total: f64,
    },
    #[error("noisy argmax over an empty set")]
    EmptySelection,
}

pub type DpResult<T> = std::result::Result<T, DpError>;

/// Privacy parameters `(epsilon, delta)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrivacyParams {
    pub epsilon: f64,
    pub delta: f64,
}

impl PrivacyParams {
    pub fn new(epsilon: f64, delta: f64) -> DpResult<Self> {
        if !(epsilon > 0.0) {
            return Err(DpError::NonPositiveEpsilon(epsilon));
        }
        if !(0.0..1.0).contains(&delta) {
            return Err(DpError::InvalidDelta {
                delta,
                range: "[0, 1)",
            });
        }
        Ok(Self { epsilon, delta })
    }

    pub fn pure(epsilon: f64) -> DpResult<Self> {
        Self::new(epsilon, 0.0)
    }
}
