// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

use crate::detectors::DetectorError;
use crate::dp::DpError;
use crate::graph::GraphError;
use crate::metrics::MetricsError;

/// Crate-level error for the composite pipelines (PDA, synthesis, attack,
/// harness). The leaf modules keep their own error types.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Detector(#[from] DetectorError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Dp(#[from] DpError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
