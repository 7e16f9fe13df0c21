// SPDX-License-Identifier: Apache-2.0

//! Sensitivity bounds under protected node privacy.
//!
//! Restricted sensitivities assume every benign vertex has degree at most
//! `D` in both neighbouring graphs. Rewiring one benign vertex `v` replaces
//! its `k <= D` incident edges with `k' <= D` others, so:
//!
//! | statistic              | bound      |
//! |------------------------|------------|
//! | edge count (any block) | `D`        |
//! | benign degree sequence | `3D` (L1)  |
//! | triangle count         | `D(D-1)`   |
//! | adjacency upper half   | `2D` (L1)  |
//!
//! Degree sequence: `v`'s own entry moves by at most `D` and at most
//! `k + k'` other entries move by one. Triangles: only those through `v`
//! change, at most `C(D,2)` lost and `C(D,2)` gained.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{DpError, DpResult};
use crate::graph::LabeledGraph;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    EdgeCount,
    EdgeCountBb,
    EdgeCountBf,
    DegreeSequence,
    TriangleCount,
    Adjacency,
}

impl Statistic {
    pub const ALL: [Statistic; 6] = [
        Statistic::EdgeCount,
        Statistic::EdgeCountBb,
        Statistic::EdgeCountBf,
        Statistic::DegreeSequence,
        Statistic::TriangleCount,
        Statistic::Adjacency,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Statistic::EdgeCount => "edge_count",
            Statistic::EdgeCountBb => "edge_count_bb",
            Statistic::EdgeCountBf => "edge_count_bf",
            Statistic::DegreeSequence => "degree_sequence",
            Statistic::TriangleCount => "triangle_count",
            Statistic::Adjacency => "adjacency",
        }
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Statistic {
    type Err = DpError;

    fn from_str(s: &str) -> DpResult<Self> {
        Statistic::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| DpError::UnknownStatistic(s.to_string()))
    }
}

/// L1 restricted sensitivity of `statistic` on graphs whose benign
/// vertices have degree at most `max_degree`.
pub fn restricted_sensitivity(statistic: Statistic, max_degree: usize) -> f64 {
    let d = max_degree as f64;
    match statistic {
        Statistic::EdgeCount | Statistic::EdgeCountBb | Statistic::EdgeCountBf => d,
        Statistic::DegreeSequence => 3.0 * d,
        Statistic::TriangleCount => d * (d - 1.0).max(0.0),
        Statistic::Adjacency => 2.0 * d,
    }
}

/// Global and restricted sensitivity of a statistic for a fixed vertex
/// partition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SensitivityBound {
    pub statistic: Statistic,
    pub global_sensitivity: f64,
}

impl SensitivityBound {
    pub fn new(statistic: Statistic, n_fraud: usize, n_benign: usize) -> Self {
        let n = (n_fraud + n_benign) as f64;
        let others = (n - 1.0).max(0.0);
        let global_sensitivity = match statistic {
            Statistic::EdgeCount | Statistic::Adjacency => others,
            Statistic::EdgeCountBb => (n_benign as f64 - 1.0).max(0.0),
            Statistic::EdgeCountBf => n_fraud as f64,
            // own entry by up to n - 1, every other benign entry by one
            Statistic::DegreeSequence => others + (n_benign as f64 - 1.0).max(0.0),
            Statistic::TriangleCount => others * (others - 1.0).max(0.0) / 2.0,
        };
        Self {
            statistic,
            global_sensitivity,
        }
    }

    /// Restricted sensitivity, capped by the global sensitivity.
    pub fn restricted(&self, max_degree: usize) -> f64 {
        restricted_sensitivity(self.statistic, max_degree).min(self.global_sensitivity)
    }
}

/// `epsilon / (2 ln(1 / (2 delta)))`, the smoothing rate for Laplace noise
/// calibrated to a smooth sensitivity bound.
pub fn beta_from_privacy(epsilon: f64, delta: f64) -> DpResult<f64> {
    if !(epsilon > 0.0) {
        return Err(DpError::NonPositiveEpsilon(epsilon));
    }
    if !(delta > 0.0 && delta < 0.5) {
        return Err(DpError::InvalidDelta {
            delta,
            range: "(0, 1/2)",
        });
    }
    Ok(epsilon / (2.0 * (1.0 / (2.0 * delta)).ln()))
}

/// Smooth sensitivity of naive degree truncation at `max_degree`:
/// `max_t e^{-beta t} (1 + t + N_t)` where `N_t` counts benign vertices of
/// degree in `[D - t, D + t + 1]`, for `t = 0..=n_B`.
pub fn smooth_sensitivity_truncation(
    graph: &LabeledGraph,
    max_degree: usize,
    beta: f64,
) -> DpResult<f64> {
    if !(beta > 0.0) {
        return Err(DpError::NonPositiveBeta(beta));
    }
    let degrees: Vec<usize> = graph
        .benign_vertices()
        .into_iter()
        .map(|v| graph.degree(v))
        .collect();
    let n_benign = degrees.len();
    let top = degrees.iter().copied().max().unwrap_or(0);
    // cumulative[k] = number of benign degrees <= k - 1
    let mut cumulative = vec![0usize; top + 2];
    for &d in &degrees {
        cumulative[d + 1] += 1;
    }
    for k in 1..cumulative.len() {
        cumulative[k] += cumulative[k - 1];
    }
    let count_in = |lo: usize, hi: usize| -> usize {
        let hi = hi.min(top);
        if lo > hi {
            0
        } else {
            cumulative[hi + 1] - cumulative[lo]
        }
    };
    // e^{-beta t} (1 + t + n_B) bounds every later term once it is
    // decreasing, i.e. past its peak at t = 1/beta - 1 - n_B.
    let peak = 1.0 / beta - 1.0 - n_benign as f64;
    let mut best = 0.0f64;
    for t in 0..=n_benign {
        let decay = (-beta * t as f64).exp();
        if t as f64 >= peak && decay * (1.0 + t as f64 + n_benign as f64) < best {
            break;
        }
        let lo = max_degree.saturating_sub(t);
        let n_t = count_in(lo, max_degree + t + 1);
        best = best.max(decay * (1.0 + t as f64 + n_t as f64));
    }
    Ok(best)
}
