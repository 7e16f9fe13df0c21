// SPDX-License-Identifier: Apache-2.0

//! Node-private synthetic graphs.
//!
//! Every generator follows the same recipe: drop benign vertices of degree
//! above `D`, compute the smooth sensitivity `S` of that truncation, release
//! the statistics the generator needs with Laplace(2 S Delta_D / eps_share)
//! noise (the budget split evenly across them) and sample a graph from the
//! noisy statistics. Fraud-only statistics are released exactly.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dp::{
    beta_from_privacy, sample_laplace, smooth_sensitivity_truncation, SensitivityBound, Statistic,
};
use crate::error::{Error, Result};
use crate::graph::{compute_stats, triangle_count, truncate_by_degree, LabeledGraph};
use crate::rng::{derive_seed, rng_from_seed, SeededRng};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SynthMethod {
    Sbm,
    Agm,
    AgmTriangles,
    TopmFilter,
}

impl SynthMethod {
    pub const ALL: [SynthMethod; 4] = [
        SynthMethod::Sbm,
        SynthMethod::Agm,
        SynthMethod::AgmTriangles,
        SynthMethod::TopmFilter,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SynthMethod::Sbm => "sbm",
            SynthMethod::Agm => "agm",
            SynthMethod::AgmTriangles => "agm_triangles",
            SynthMethod::TopmFilter => "topm_filter",
        }
    }

    /// Statistics released with noise, in the order noise is drawn.
    pub fn statistics(self) -> &'static [Statistic] {
        match self {
            SynthMethod::Sbm => &[Statistic::EdgeCountBb, Statistic::EdgeCountBf],
            SynthMethod::Agm => &[
                Statistic::EdgeCountBb,
                Statistic::EdgeCountBf,
                Statistic::DegreeSequence,
            ],
            SynthMethod::AgmTriangles => &[
                Statistic::EdgeCountBb,
                Statistic::EdgeCountBf,
                Statistic::DegreeSequence,
                Statistic::TriangleCount,
            ],
            SynthMethod::TopmFilter => &[Statistic::EdgeCount, Statistic::Adjacency],
        }
    }
}

impl fmt::Display for SynthMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SynthMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SynthMethod::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown synthesis method `{s}`")))
    }
}

/// Generation settings. The truncation threshold is
/// `floor(d_multiplier * max degree)` of the input graph.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub method: SynthMethod,
    pub d_multiplier: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub noise_enabled: bool,
}

impl SynthConfig {
    pub fn new(method: SynthMethod, d_multiplier: f64, epsilon: f64) -> Self {
        Self {
            method,
            d_multiplier,
            epsilon,
            delta: crate::dp::DEFAULT_DELTA,
            noise_enabled: true,
        }
    }

    pub fn without_noise(self) -> Self {
        Self {
            noise_enabled: false,
            ..self
        }
    }

    pub fn threshold(&self, graph: &LabeledGraph) -> Result<usize> {
        if !(self.d_multiplier > 0.0) || !self.d_multiplier.is_finite() {
            return Err(Error::Config(format!(
                "degree multiplier {} must be positive",
                self.d_multiplier
            )));
        }
        Ok((self.d_multiplier * graph.max_degree() as f64).floor() as usize)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoisyScalar {
    pub exact: f64,
    pub noisy: f64,
    pub scale: f64,
    pub epsilon_share: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoisyVector {
    pub exact: Vec<f64>,
    pub noisy: Vec<f64>,
    /// Per-entry Laplace scale.
    pub scale: f64,
    pub epsilon_share: f64,
}

/// Noise settings for the adjacency matrix. Entries are perturbed inside
/// [`topm_filter`], pair by pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdjacencyNoise {
    pub scale: f64,
    pub epsilon_share: f64,
}

/// Released statistics of a truncated graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoisyStats {
    pub method: SynthMethod,
    /// Truncation threshold `D`.
    pub max_degree: usize,
    /// Smooth sensitivity of truncation at `D`.
    pub smooth_sensitivity: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub noise_enabled: bool,
    pub n_fraud: usize,
    /// Benign vertices left after truncation.
    pub n_benign: usize,
    /// Fraud/fraud edges, exact.
    pub edge_count_ff: usize,
    pub edge_count_bb: Option<NoisyScalar>,
    pub edge_count_bf: Option<NoisyScalar>,
    /// Total edge count (Top-m-Filter).
    pub edge_count: Option<NoisyScalar>,
    /// Benign degrees in the truncated graph, clamped to `[0, D]`.
    pub degree_sequence: Option<NoisyVector>,
    pub triangle_count: Option<NoisyScalar>,
    pub adjacency: Option<AdjacencyNoise>,
}

impl NoisyStats {
    /// Sum of the epsilon shares of all released statistics.
    pub fn epsilon_spent(&self) -> f64 {
        let scalars = [
            &self.edge_count_bb,
            &self.edge_count_bf,
            &self.edge_count,
            &self.triangle_count,
        ];
        scalars
            .iter()
            .flat_map(|s| s.as_ref())
            .map(|s| s.epsilon_share)
            .sum::<f64>()
            + self
                .degree_sequence
                .as_ref()
                .map_or(0.0, |d| d.epsilon_share)
            + self.adjacency.as_ref().map_or(0.0, |a| a.epsilon_share)
    }
}

/// Truncates `graph` at `max_degree` and releases the statistics `method`
/// needs. With `noise_enabled = false` the statistics are exact.
pub fn estimate_stats_private(
    graph: &LabeledGraph,
    method: SynthMethod,
    epsilon: f64,
    delta: f64,
    max_degree: usize,
    noise_enabled: bool,
    rng: &mut SeededRng,
) -> Result<NoisyStats> {
    let beta = beta_from_privacy(epsilon, delta)?;
    let s = smooth_sensitivity_truncation(graph, max_degree, beta)?;
    let truncated = truncate_by_degree(graph, max_degree);
    let exact = compute_stats(&truncated);
    let (n_fraud, n_benign) = (truncated.n_fraud(), truncated.n_benign());
    let stats = method.statistics();
    let share = epsilon / stats.len() as f64;
    let scale_of = |st: Statistic| {
        if noise_enabled {
            2.0 * s * SensitivityBound::new(st, n_fraud, n_benign).restricted(max_degree) / share
        } else {
            0.0
        }
    };
    let draw = |scale: f64, rng: &mut SeededRng| -> Result<f64> {
        Ok(if scale > 0.0 {
            sample_laplace(scale, rng)?
        } else {
            0.0
        })
    };

    let mut out = NoisyStats {
        method,
        max_degree,
        smooth_sensitivity: s,
        beta,
        epsilon,
        delta,
        noise_enabled,
        n_fraud,
        n_benign,
        edge_count_ff: exact.edge_count_ff,
        edge_count_bb: None,
        edge_count_bf: None,
        edge_count: None,
        degree_sequence: None,
        triangle_count: None,
        adjacency: None,
    };
    for &st in stats {
        let scale = scale_of(st);
        let scalar = |value: f64, rng: &mut SeededRng| -> Result<NoisyScalar> {
            Ok(NoisyScalar {
                exact: value,
                noisy: (value + draw(scale, rng)?).max(0.0),
                scale,
                epsilon_share: share,
            })
        };
        match st {
            Statistic::EdgeCountBb => {
                out.edge_count_bb = Some(scalar(exact.edge_count_bb as f64, rng)?)
            }
            Statistic::EdgeCountBf => {
                out.edge_count_bf = Some(scalar(exact.edge_count_bf as f64, rng)?)
            }
            Statistic::EdgeCount => out.edge_count = Some(scalar(exact.edge_count() as f64, rng)?),
            Statistic::TriangleCount => {
                out.triangle_count = Some(scalar(exact.triangle_count as f64, rng)?)
            }
            Statistic::DegreeSequence => {
                let exact_deg: Vec<f64> = exact
                    .degree_sequence_benign
                    .iter()
                    .map(|&d| d as f64)
                    .collect();
                let noisy = exact_deg
                    .iter()
                    .map(|&d| Ok((d + draw(scale, rng)?).clamp(0.0, max_degree as f64)))
                    .collect::<Result<Vec<f64>>>()?;
                out.degree_sequence = Some(NoisyVector {
                    exact: exact_deg,
                    noisy,
                    scale,
                    epsilon_share: share,
                });
            }
            Statistic::Adjacency => {
                out.adjacency = Some(AdjacencyNoise {
                    scale,
                    epsilon_share: share,
                })
            }
        }
    }
    Ok(out)
}

fn pairs(n: usize) -> f64 {
    (n * n.saturating_sub(1)) as f64 / 2.0
}

fn required<'a, T>(value: &'a Option<T>, what: &str) -> Result<&'a T> {
    value
        .as_ref()
        .ok_or_else(|| Error::InvalidInput(format!("statistics lack {what}")))
}

/// Block probabilities `(p_fraud, p_benign, p_cross)` fitted to the released
/// counts, clamped to [0, 1].
pub fn fit_sbm(stats: &NoisyStats) -> Result<(f64, f64, f64)> {
    let (nf, nb) = (stats.n_fraud, stats.n_benign);
    if nf == 0 || nb == 0 {
        return Err(Error::InvalidInput(format!(
            "cannot fit blocks with {nf} fraud and {nb} benign vertices"
        )));
    }
    let bb = required(&stats.edge_count_bb, "the benign edge count")?;
    let bf = required(&stats.edge_count_bf, "the cross edge count")?;
    let ratio = |count: f64, total: f64| {
        if total > 0.0 {
            (count / total).clamp(0.0, 1.0)
        } else {
            0.0
        }
    };
    Ok((
        ratio(stats.edge_count_ff as f64, pairs(nf)),
        ratio(bb.noisy, pairs(nb)),
        ratio(bf.noisy, (nf * nb) as f64),
    ))
}

fn synthetic_ids(nf: usize, nb: usize) -> (Vec<String>, Vec<bool>) {
    let ids = (0..nf)
        .map(|i| format!("f{i}"))
        .chain((0..nb).map(|i| format!("b{i}")))
        .collect();
    (ids, (0..nf + nb).map(|v| v < nf).collect())
}

/// Fraud/fraud and fraud/benign edges with Bernoulli draws, fraud vertices
/// `0..nf` and benign vertices `nf..nf+nb`.
fn sample_fraud_blocks(
    nf: usize,
    nb: usize,
    p_fraud: f64,
    p_cross: f64,
    rng: &mut SeededRng,
) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for u in 0..nf {
        for v in u + 1..nf + nb {
            let p = if v < nf { p_fraud } else { p_cross };
            if rng.gen::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    edges
}

/// Fits a two-block SBM to the released counts and samples from it.
pub fn fit_and_sample_sbm(stats: &NoisyStats, seed: u64) -> Result<LabeledGraph> {
    let (pf, pb, px) = fit_sbm(stats)?;
    let (nf, nb) = (stats.n_fraud, stats.n_benign);
    let mut rng = rng_from_seed(seed);
    let mut edges = sample_fraud_blocks(nf, nb, pf, px, &mut rng);
    for u in nf..nf + nb {
        for v in u + 1..nf + nb {
            if rng.gen::<f64>() < pb {
                edges.push((u, v));
            }
        }
    }
    let (ids, fraud) = synthetic_ids(nf, nb);
    Ok(LabeledGraph::new(ids, fraud, edges, None)?)
}

/// Outcome of the triangle-matching pass of [`sample_agm_with_report`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrianglePass {
    pub target: f64,
    pub before: u64,
    pub after: u64,
    pub attempts: usize,
    pub accepted: usize,
}

/// Samples an AGM graph from released statistics. See
/// [`sample_agm_with_report`].
pub fn sample_agm(stats: &NoisyStats, with_triangles: bool, seed: u64) -> Result<LabeledGraph> {
    Ok(sample_agm_with_report(stats, with_triangles, seed)?.0)
}

/// Benign/benign edges follow a Chung-Lu scheme on the released degrees,
/// minus the expected number of cross edges per benign vertex: pair `(i, j)`
/// is an edge with probability `min(1, w_i w_j / (2 m_bb))`. Fraud blocks
/// are sampled as in [`fit_and_sample_sbm`]. With `with_triangles`,
/// degree-preserving swaps of two benign edges are accepted when they move
/// the triangle count toward the released target, for at most `10 n`
/// attempts or until within 5% of the target.
pub fn sample_agm_with_report(
    stats: &NoisyStats,
    with_triangles: bool,
    seed: u64,
) -> Result<(LabeledGraph, Option<TrianglePass>)> {
    let (pf, _, px) = fit_sbm(stats)?;
    let (nf, nb) = (stats.n_fraud, stats.n_benign);
    let degrees = &required(&stats.degree_sequence, "the degree sequence")?.noisy;
    let m_bb = required(&stats.edge_count_bb, "the benign edge count")?.noisy;
    let mut rng = rng_from_seed(seed);
    let mut edges = sample_fraud_blocks(nf, nb, pf, px, &mut rng);

    let expected_cross = px * nf as f64;
    let weights: Vec<f64> = degrees
        .iter()
        .map(|d| (d - expected_cross).max(0.0))
        .collect();
    let mut bb_edges = Vec::new();
    if weights.iter().all(|&w| w == 0.0) {
        let target = (m_bb.round() as usize).min(pairs(nb) as usize);
        if target > 0 {
            log::debug!("zero degree targets with {target} benign edges; sampling uniformly");
            for p in index::sample(&mut rng, pairs(nb) as usize, target) {
                bb_edges.push(unrank_pair(p, nb));
            }
        }
    } else if m_bb > 0.0 {
        for i in 0..nb {
            for j in i + 1..nb {
                let p = (weights[i] * weights[j] / (2.0 * m_bb)).min(1.0);
                if rng.gen::<f64>() < p {
                    bb_edges.push((i, j));
                }
            }
        }
    }
    edges.extend(bb_edges.iter().map(|&(i, j)| (nf + i, nf + j)));
    let (ids, fraud) = synthetic_ids(nf, nb);
    let graph = LabeledGraph::new(ids.clone(), fraud.clone(), edges, None)?;
    if !with_triangles {
        return Ok((graph, None));
    }
    let target = required(&stats.triangle_count, "the triangle count")?.noisy;
    let pass = rewire_towards_triangles(&graph, target, 10 * graph.len(), &mut rng);
    let graph = LabeledGraph::new(ids, fraud, pass.1, None)?;
    Ok((graph, Some(pass.0)))
}

/// Inverse of the lexicographic rank of pair `(i, j)`, `i < j < n`.
fn unrank_pair(mut p: usize, n: usize) -> (usize, usize) {
    let mut i = 0;
    while p >= n - 1 - i {
        p -= n - 1 - i;
        i += 1;
    }
    (i, i + 1 + p)
}

fn common(adj: &[BTreeSet<usize>], a: usize, b: usize) -> u64 {
    let (small, large) = if adj[a].len() <= adj[b].len() {
        (&adj[a], &adj[b])
    } else {
        (&adj[b], &adj[a])
    };
    small.iter().filter(|w| large.contains(w)).count() as u64
}

fn rewire_towards_triangles(
    graph: &LabeledGraph,
    target: f64,
    max_attempts: usize,
    rng: &mut SeededRng,
) -> (TrianglePass, Vec<(usize, usize)>) {
    let mut adj: Vec<BTreeSet<usize>> = (0..graph.len())
        .map(|v| graph.neighbors(v).iter().copied().collect())
        .collect();
    let mut benign_edges: Vec<(usize, usize)> = graph
        .edges()
        .filter(|&(u, v)| !graph.is_fraud(u) && !graph.is_fraud(v))
        .collect();
    let before = triangle_count(graph);
    let mut current = before as i64;
    let (mut attempts, mut accepted) = (0, 0);
    let close_enough = |t: i64| (t as f64 - target).abs() <= 0.05 * target;
    while attempts < max_attempts && benign_edges.len() >= 2 && !close_enough(current) {
        attempts += 1;
        let i = rng.gen_range(0..benign_edges.len());
        let j = rng.gen_range(0..benign_edges.len());
        let ((a, b), (c, d)) = (benign_edges[i], benign_edges[j]);
        let ((a, b), (c, d)) = if rng.gen::<bool>() {
            ((a, b), (c, d))
        } else {
            ((a, b), (d, c))
        };
        // Swap (a,b),(c,d) for (a,d),(c,b).
        if i == j || a == d || c == b || adj[a].contains(&d) || adj[c].contains(&b) {
            continue;
        }
        let mut delta = 0i64;
        adj[a].remove(&b);
        adj[b].remove(&a);
        delta -= common(&adj, a, b) as i64;
        adj[c].remove(&d);
        adj[d].remove(&c);
        delta -= common(&adj, c, d) as i64;
        delta += common(&adj, a, d) as i64;
        adj[a].insert(d);
        adj[d].insert(a);
        delta += common(&adj, c, b) as i64;
        adj[c].insert(b);
        adj[b].insert(c);
        let next = current + delta;
        if (next as f64 - target).abs() < (current as f64 - target).abs() {
            current = next;
            accepted += 1;
            benign_edges[i] = (a.min(d), a.max(d));
            benign_edges[j] = (c.min(b), c.max(b));
        } else {
            adj[c].remove(&b);
            adj[b].remove(&c);
            adj[a].remove(&d);
            adj[d].remove(&a);
            adj[a].insert(b);
            adj[b].insert(a);
            adj[c].insert(d);
            adj[d].insert(c);
        }
    }
    let edges = adj
        .iter()
        .enumerate()
        .flat_map(|(u, nbrs)| nbrs.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
        .collect();
    (
        TrianglePass {
            target,
            before,
            after: current as u64,
            attempts,
            accepted,
        },
        edges,
    )
}

/// Noisy Top-m-Filter on `graph` truncated at `stats.max_degree`.
///
/// Fraud/fraud edges are copied. Every other pair gets score
/// `1[edge] + Laplace(scale)`, and the `m - m_ff` best-scoring pairs become
/// edges, where `m` is the released edge count clamped to the feasible
/// range. Ties go to the smaller pair index. Without noise the truncated
/// graph is returned unchanged.
pub fn topm_filter(graph: &LabeledGraph, stats: &NoisyStats, seed: u64) -> Result<LabeledGraph> {
    let truncated = truncate_by_degree(graph, stats.max_degree);
    let m_total = required(&stats.edge_count, "the edge count")?.noisy;
    let scale = required(&stats.adjacency, "adjacency noise")?.scale;
    let n = truncated.len();
    let mut ff_edges = Vec::new();
    let mut scored: Vec<(f64, usize, usize)> = Vec::new();
    let mut rng = rng_from_seed(seed);
    for u in 0..n {
        for v in u + 1..n {
            let edge = truncated.has_edge(u, v);
            if truncated.is_fraud(u) && truncated.is_fraud(v) {
                if edge {
                    ff_edges.push((u, v));
                }
                continue;
            }
            let base = if edge { 1.0 } else { 0.0 };
            let noise = if scale > 0.0 {
                sample_laplace(scale, &mut rng)?
            } else {
                0.0
            };
            scored.push((base + noise, u, v));
        }
    }
    let m_ff = ff_edges.len();
    let keep = (m_total.round().max(0.0) as usize).clamp(m_ff, m_ff + scored.len()) - m_ff;
    // Pairs were pushed in index order, so a stable order on score alone
    // breaks ties by pair index.
    let cmp = |a: &(f64, usize, usize), b: &(f64, usize, usize)| {
        b.0.total_cmp(&a.0).then((a.1, a.2).cmp(&(b.1, b.2)))
    };
    if keep < scored.len() && keep > 0 {
        scored.select_nth_unstable_by(keep - 1, cmp);
    }
    scored.truncate(keep);
    let edges = ff_edges
        .into_iter()
        .chain(scored.into_iter().map(|(_, u, v)| (u, v)));
    Ok(truncated.with_edges(edges)?)
}

/// A generated graph together with the statistics it was drawn from.
#[derive(Clone, Debug)]
pub struct SynthOutput {
    pub graph: LabeledGraph,
    pub stats: NoisyStats,
}

/// Full pipeline: threshold, private statistics, sampling. Consumes
/// `config.epsilon` in total when noise is enabled (the caller charges it).
pub fn synthesize(graph: &LabeledGraph, config: &SynthConfig, seed: u64) -> Result<SynthOutput> {
    let d = config.threshold(graph)?;
    let mut rng = rng_from_seed(derive_seed(seed, &[0]));
    let stats = estimate_stats_private(
        graph,
        config.method,
        config.epsilon,
        config.delta,
        d,
        config.noise_enabled,
        &mut rng,
    )?;
    let sample_seed = derive_seed(seed, &[1]);
    let out = match config.method {
        SynthMethod::Sbm => fit_and_sample_sbm(&stats, sample_seed)?,
        SynthMethod::Agm => sample_agm(&stats, false, sample_seed)?,
        SynthMethod::AgmTriangles => sample_agm(&stats, true, sample_seed)?,
        SynthMethod::TopmFilter => topm_filter(graph, &stats, sample_seed)?,
    };
    Ok(SynthOutput { graph: out, stats })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatErrorRow {
    pub method: SynthMethod,
    pub d_multiplier: f64,
    pub statistic: String,
    pub mean_relative_error: f64,
    pub std_err: f64,
}

/// `|noisy - exact| / |exact|`, or the absolute error when `exact` is 0.
pub fn relative_error(exact: f64, noisy: f64) -> f64 {
    if exact == 0.0 {
        (noisy - exact).abs()
    } else {
        (noisy - exact).abs() / exact.abs()
    }
}

fn mean_relative_error(exact: &[f64], noisy: &[f64]) -> f64 {
    if exact.is_empty() {
        return 0.0;
    }
    exact
        .iter()
        .zip(noisy)
        .map(|(&e, &n)| relative_error(e, n))
        .sum::<f64>()
        / exact.len() as f64
}

/// Mean entrywise relative error of the perturbed adjacency entries over
/// all benign-involving pairs, and the number of pairs whose edge status
/// the Top-m-Filter output flipped, relative to the true edge count.
fn adjacency_errors(graph: &LabeledGraph, stats: &NoisyStats, seed: u64) -> Result<(f64, f64)> {
    let truncated = truncate_by_degree(graph, stats.max_degree);
    let scale = required(&stats.adjacency, "adjacency noise")?.scale;
    let mut rng = rng_from_seed(seed);
    let (mut total, mut count) = (0.0, 0usize);
    for u in 0..truncated.len() {
        for v in u + 1..truncated.len() {
            if truncated.is_fraud(u) && truncated.is_fraud(v) {
                continue;
            }
            let exact = if truncated.has_edge(u, v) { 1.0 } else { 0.0 };
            let noise = if scale > 0.0 {
                sample_laplace(scale, &mut rng)?
            } else {
                0.0
            };
            total += relative_error(exact, exact + noise);
            count += 1;
        }
    }
    let adjacency = if count > 0 { total / count as f64 } else { 0.0 };
    let filtered = topm_filter(graph, stats, seed)?;
    let flips = truncated
        .edges()
        .filter(|&(u, v)| !filtered.has_edge(u, v))
        .count()
        + filtered
            .edges()
            .filter(|&(u, v)| !truncated.has_edge(u, v))
            .count();
    let m = truncated.edge_count().max(1) as f64;
    Ok((adjacency, flips as f64 / m))
}

/// Per (method, threshold multiplier, statistic): mean over `trials` of the
/// relative error of the released statistic against its exact value on the
/// truncated graph. Vector statistics use the mean entrywise error. Top-m
/// rows include `adjacency` (perturbed entries before filtering) and
/// `adjacency_flips` (pairs flipped by the filter per true edge).
pub fn stat_error_report(
    graph: &LabeledGraph,
    methods: &[SynthMethod],
    epsilon: f64,
    delta: f64,
    d_multipliers: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<StatErrorRow>> {
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    let mut rows = Vec::new();
    for (mi, &method) in methods.iter().enumerate() {
        for (di, &mult) in d_multipliers.iter().enumerate() {
            let config = SynthConfig {
                delta,
                ..SynthConfig::new(method, mult, epsilon)
            };
            let d = config.threshold(graph)?;
            let per_trial: Vec<Vec<(String, f64)>> = (0..trials as u64)
                .into_par_iter()
                .map(|t| {
                    let trial_seed = derive_seed(seed, &[mi as u64, di as u64, t]);
                    let mut rng = rng_from_seed(derive_seed(trial_seed, &[0]));
                    let stats =
                        estimate_stats_private(graph, method, epsilon, delta, d, true, &mut rng)?;
                    let mut out = Vec::new();
                    for (name, s) in [
                        ("edge_count_bb", &stats.edge_count_bb),
                        ("edge_count_bf", &stats.edge_count_bf),
                        ("edge_count", &stats.edge_count),
                        ("triangle_count", &stats.triangle_count),
                    ] {
                        if let Some(s) = s {
                            out.push((name.to_string(), relative_error(s.exact, s.noisy)));
                        }
                    }
                    if let Some(deg) = &stats.degree_sequence {
                        out.push((
                            "degree_sequence".to_string(),
                            mean_relative_error(&deg.exact, &deg.noisy),
                        ));
                    }
                    if stats.adjacency.is_some() {
                        let (adj, flips) =
                            adjacency_errors(graph, &stats, derive_seed(trial_seed, &[1]))?;
                        out.push(("adjacency".to_string(), adj));
                        out.push(("adjacency_flips".to_string(), flips));
                    }
                    Ok(out)
                })
                .collect::<Result<_>>()?;
            for (k, (name, _)) in per_trial[0].iter().enumerate() {
                let xs: Vec<f64> = per_trial.iter().map(|r| r[k].1).collect();
                let m = xs.iter().sum::<f64>() / xs.len() as f64;
                let std_err = if xs.len() > 1 {
                    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>()
                        / ((xs.len() - 1) * xs.len()) as f64)
                        .sqrt()
                } else {
                    0.0
                };
                rows.push(StatErrorRow {
                    method,
                    d_multiplier: mult,
                    statistic: name.clone(),
                    mean_relative_error: m,
                    std_err,
                });
            }
        }
    }
    Ok(rows)
}
