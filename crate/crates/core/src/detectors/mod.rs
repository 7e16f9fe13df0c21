// SPDX-License-Identifier: Apache-2.0

//! Non-learning fraud detectors. A detector maps a graph to one score per
//! vertex; higher means more suspicious.

mod community;
mod svd;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::LabeledGraph;
use crate::rng::rng_from_seed;

pub use community::{community_sizes, CommunityDetector, LabelPropagation};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DetectorError {
    #[error("cannot score an empty graph")]
    EmptyGraph,
    #[error("rank must be at least 1")]
    ZeroRank,
    #[error("rank {rank} exceeds the {n} x {n} adjacency matrix")]
    RankTooLarge { rank: usize, n: usize },
    #[error("graph carries no metadata")]
    NoMetadata,
    #[error("weight vector of length {weights} for metadata of dimension {dim}")]
    MetadataDimension { weights: usize, dim: usize },
    #[error("aggregate detector needs at least one child")]
    EmptyAggregate,
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("non-finite score at vertex {0}")]
    NonFinite(usize),
    #[error("cannot parse detector `{0}`")]
    Parse(String),
}

pub type DetectorResult<T> = std::result::Result<T, DetectorError>;

/// One finite score per vertex, aligned with the graph's vertex order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreVector(Vec<f64>);

impl ScoreVector {
    pub fn new(scores: Vec<f64>) -> DetectorResult<Self> {
        if let Some(v) = scores.iter().position(|s| !s.is_finite()) {
            return Err(DetectorError::NonFinite(v));
        }
        Ok(Self(scores))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// A yes/no question about a graph, used by the conditional detector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphQuery {
    /// Both endpoints are present and adjacent.
    Edge { u: String, v: String },
    /// The vertex is present.
    Vertex { id: String },
}

impl GraphQuery {
    /// Evaluates the query. Identifiers absent from `graph` make it false.
    pub fn evaluate(&self, graph: &LabeledGraph) -> bool {
        match self {
            GraphQuery::Edge { u, v } => match (graph.index_of(u), graph.index_of(v)) {
                (Some(a), Some(b)) => graph.has_edge(a, b),
                _ => {
                    log::debug!("edge query ({u}, {v}) references an absent vertex");
                    false
                }
            },
            GraphQuery::Vertex { id } => graph.index_of(id).is_some(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Combine {
    /// Weighted average of the normalized child scores.
    Weighted(Vec<f64>),
    /// Elementwise maximum of the normalized child scores.
    Max,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectorKind {
    NegDegree,
    /// Raw degree. Accurate on graphs where fraud vertices are denser.
    Degree,
    NegClustering,
    SvdErrorSum {
        rank: usize,
    },
    SvdErrorMax {
        rank: usize,
    },
    CommunitySize,
    Aggregate {
        combine: Combine,
        children: Vec<DetectorSpec>,
    },
    Random {
        seed: u64,
    },
    MetadataLinear {
        weights: Vec<f64>,
    },
    /// Scores with `if_true` when the query holds on the graph, otherwise
    /// with `if_false`.
    Conditional {
        query: GraphQuery,
        if_true: Box<DetectorSpec>,
        if_false: Box<DetectorSpec>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectorSpec {
    pub name: String,
    pub kind: DetectorKind,
}

impl DetectorSpec {
    pub fn new(name: impl Into<String>, kind: DetectorKind) -> Self {
        Self {
            name: name.into(),
            kind,
        }
    }

    /// Checks structural invariants without touching a graph.
    pub fn validate(&self) -> DetectorResult<()> {
        match &self.kind {
            DetectorKind::SvdErrorSum { rank } | DetectorKind::SvdErrorMax { rank }
                if *rank == 0 =>
            {
                Err(DetectorError::ZeroRank)
            }
            DetectorKind::Aggregate { combine, children } => {
                if children.is_empty() {
                    return Err(DetectorError::EmptyAggregate);
                }
                if let Combine::Weighted(w) = combine {
                    if w.len() != children.len() {
                        return Err(DetectorError::InvalidWeights(format!(
                            "{} weights for {} children",
                            w.len(),
                            children.len()
                        )));
                    }
                    if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
                        return Err(DetectorError::InvalidWeights(
                            "weights must be finite and nonnegative".into(),
                        ));
                    }
                    if w.iter().sum::<f64>() <= 0.0 {
                        return Err(DetectorError::InvalidWeights("weights sum to zero".into()));
                    }
                }
                children.iter().try_for_each(DetectorSpec::validate)
            }
            DetectorKind::MetadataLinear { weights } if weights.iter().any(|w| !w.is_finite()) => {
                Err(DetectorError::InvalidWeights(
                    "non-finite metadata weight".into(),
                ))
            }
            DetectorKind::Conditional {
                if_true, if_false, ..
            } => {
                if_true.validate()?;
                if_false.validate()
            }
            _ => Ok(()),
        }
    }

    /// Scores `graph` with label propagation as the community detector.
    pub fn score(&self, graph: &LabeledGraph) -> DetectorResult<ScoreVector> {
        score_with(self, graph, &LabelPropagation::default())
    }
}

impl fmt::Display for DetectorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

pub fn score(spec: &DetectorSpec, graph: &LabeledGraph) -> DetectorResult<ScoreVector> {
    spec.score(graph)
}

/// Scores `graph` using `communities` for the community-size detector.
pub fn score_with(
    spec: &DetectorSpec,
    graph: &LabeledGraph,
    communities: &dyn CommunityDetector,
) -> DetectorResult<ScoreVector> {
    spec.validate()?;
    if graph.is_empty() {
        return Err(DetectorError::EmptyGraph);
    }
    let n = graph.len();
    let scores = match &spec.kind {
        DetectorKind::NegDegree => (0..n).map(|v| -(graph.degree(v) as f64)).collect(),
        DetectorKind::Degree => (0..n).map(|v| graph.degree(v) as f64).collect(),
        DetectorKind::NegClustering => local_clustering(graph).into_iter().map(|c| -c).collect(),
        DetectorKind::SvdErrorSum { rank } => {
            check_rank(*rank, n)?;
            svd::reconstruction_errors(graph, *rank).0
        }
        DetectorKind::SvdErrorMax { rank } => {
            check_rank(*rank, n)?;
            svd::reconstruction_errors(graph, *rank).1
        }
        DetectorKind::CommunitySize => community_sizes(&communities.communities(graph))
            .into_iter()
            .map(|s| -(s as f64))
            .collect(),
        DetectorKind::Aggregate { combine, children } => {
            let normalized = children
                .iter()
                .map(|c| score_with(c, graph, communities).map(|s| min_max_normalize(s.as_slice())))
                .collect::<DetectorResult<Vec<_>>>()?;
            match combine {
                Combine::Weighted(w) => {
                    let total: f64 = w.iter().sum();
                    (0..n)
                        .map(|v| {
                            normalized
                                .iter()
                                .zip(w)
                                .map(|(s, wi)| wi * s[v])
                                .sum::<f64>()
                                / total
                        })
                        .collect()
                }
                Combine::Max => (0..n)
                    .map(|v| {
                        normalized
                            .iter()
                            .map(|s| s[v])
                            .fold(f64::NEG_INFINITY, f64::max)
                    })
                    .collect(),
            }
        }
        DetectorKind::Random { seed } => {
            let mut rng = rng_from_seed(*seed);
            (0..n).map(|_| rng.gen::<f64>()).collect()
        }
        DetectorKind::MetadataLinear { weights } => {
            let meta = graph.metadata().ok_or(DetectorError::NoMetadata)?;
            if meta.dim() != weights.len() {
                return Err(DetectorError::MetadataDimension {
                    weights: weights.len(),
                    dim: meta.dim(),
                });
            }
            (0..n)
                .map(|v| meta.row(v).iter().zip(weights).map(|(x, w)| x * w).sum())
                .collect()
        }
        DetectorKind::Conditional {
            query,
            if_true,
            if_false,
        } => {
            let branch = if query.evaluate(graph) {
                if_true
            } else {
                if_false
            };
            return score_with(branch, graph, communities);
        }
    };
    ScoreVector::new(scores)
}

fn check_rank(rank: usize, n: usize) -> DetectorResult<()> {
    if rank > n {
        Err(DetectorError::RankTooLarge { rank, n })
    } else {
        Ok(())
    }
}

/// Local clustering coefficient, 0 for vertices of degree below 2.
pub fn local_clustering(graph: &LabeledGraph) -> Vec<f64> {
    (0..graph.len())
        .map(|v| {
            let nbrs = graph.neighbors(v);
            let k = nbrs.len();
            if k < 2 {
                return 0.0;
            }
            let mut links = 0usize;
            for (i, &a) in nbrs.iter().enumerate() {
                for &b in &nbrs[i + 1..] {
                    if graph.has_edge(a, b) {
                        links += 1;
                    }
                }
            }
            2.0 * links as f64 / (k * (k - 1)) as f64
        })
        .collect()
}

/// Rescales to [0, 1]; a constant vector maps to all 0.5.
pub fn min_max_normalize(scores: &[f64]) -> Vec<f64> {
    let lo = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return vec![0.5; scores.len()];
    }
    scores.iter().map(|s| (s - lo) / (hi - lo)).collect()
}

fn simple(name: &str, kind: DetectorKind) -> DetectorSpec {
    DetectorSpec::new(name, kind)
}

/// The ten-detector benchmark suite.
///
/// Aggregate members and weights:
/// * `agg_mean_local`: 0.5 neg_degree + 0.5 neg_clustering
/// * `agg_mean_spectral`: 0.5 svd_error_sum_10 + 0.25 svd_error_max_50 + 0.25 community_size
/// * `agg_max_local`: max of neg_degree, neg_clustering, community_size
/// * `agg_max_spectral`: max of svd_error_sum_10, svd_error_max_50
pub fn builtin_suite() -> Vec<DetectorSpec> {
    let neg_degree = simple("neg_degree", DetectorKind::NegDegree);
    let neg_clustering = simple("neg_clustering", DetectorKind::NegClustering);
    let svd_sum = simple("svd_error_sum_10", DetectorKind::SvdErrorSum { rank: 10 });
    let svd_max = simple("svd_error_max_50", DetectorKind::SvdErrorMax { rank: 50 });
    let community = simple("community_size", DetectorKind::CommunitySize);
    let aggregate = |name: &str, combine, children: &[&DetectorSpec]| {
        simple(
            name,
            DetectorKind::Aggregate {
                combine,
                children: children.iter().map(|&c| c.clone()).collect(),
            },
        )
    };
    vec![
        aggregate(
            "agg_mean_local",
            Combine::Weighted(vec![0.5, 0.5]),
            &[&neg_degree, &neg_clustering],
        ),
        aggregate(
            "agg_mean_spectral",
            Combine::Weighted(vec![0.5, 0.25, 0.25]),
            &[&svd_sum, &svd_max, &community],
        ),
        aggregate(
            "agg_max_local",
            Combine::Max,
            &[&neg_degree, &neg_clustering, &community],
        ),
        aggregate("agg_max_spectral", Combine::Max, &[&svd_sum, &svd_max]),
        simple("random", DetectorKind::Random { seed: 0 }),
        neg_degree,
        neg_clustering,
        svd_sum,
        svd_max,
        community,
    ]
}

fn parse_args(s: &str, head: &str) -> Option<Vec<String>> {
    let rest = s.strip_prefix(head)?.strip_prefix('(')?.strip_suffix(')')?;
    Some(rest.split(';').map(|a| a.trim().to_string()).collect())
}

impl FromStr for DetectorSpec {
    type Err = DetectorError;

    /// Accepts a builtin suite name, a parameter-free kind (`degree`,
    /// `neg_degree`, `neg_clustering`, `community_size`) or a parameterised
    /// kind: `svd_error_sum(r)`, `svd_error_max(r)`, `random(seed)`,
    /// `metadata_linear(w1;w2;...)`.
    fn from_str(s: &str) -> DetectorResult<Self> {
        let s = s.trim();
        if let Some(spec) = builtin_suite().into_iter().find(|d| d.name == s) {
            return Ok(spec);
        }
        let err = || DetectorError::Parse(s.to_string());
        let kind = match s {
            "degree" => DetectorKind::Degree,
            "neg_degree" => DetectorKind::NegDegree,
            "neg_clustering" => DetectorKind::NegClustering,
            "community_size" => DetectorKind::CommunitySize,
            _ => {
                if let Some(a) = parse_args(s, "svd_error_sum") {
                    DetectorKind::SvdErrorSum {
                        rank: a.first().and_then(|r| r.parse().ok()).ok_or_else(err)?,
                    }
                } else if let Some(a) = parse_args(s, "svd_error_max") {
                    DetectorKind::SvdErrorMax {
                        rank: a.first().and_then(|r| r.parse().ok()).ok_or_else(err)?,
                    }
                } else if let Some(a) = parse_args(s, "random") {
                    DetectorKind::Random {
                        seed: a.first().and_then(|r| r.parse().ok()).ok_or_else(err)?,
                    }
                } else if let Some(a) = parse_args(s, "metadata_linear") {
                    DetectorKind::MetadataLinear {
                        weights: a
                            .iter()
                            .map(|w| w.parse::<f64>().map_err(|_| err()))
                            .collect::<DetectorResult<_>>()?,
                    }
                } else {
                    return Err(err());
                }
            }
        };
        let spec = DetectorSpec::new(s, kind);
        spec.validate()?;
        Ok(spec)
    }
}
