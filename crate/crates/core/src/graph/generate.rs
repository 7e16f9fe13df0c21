// SPDX-License-Identifier: Apache-2.0

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{GraphError, GraphResult, LabeledGraph};
use crate::rng::rng_from_seed;

/// Two-block stochastic block model: fraud/fraud pairs connect with
/// `p_fraud`, benign/benign pairs with `p_benign`, mixed pairs with `p_cross`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SbmParams {
    pub n_fraud: usize,
    pub n_benign: usize,
    pub p_fraud: f64,
    pub p_benign: f64,
    pub p_cross: f64,
}

impl SbmParams {
    pub fn validate(&self) -> GraphResult<()> {
        for (name, p) in [
            ("p_fraud", self.p_fraud),
            ("p_benign", self.p_benign),
            ("p_cross", self.p_cross),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(GraphError::InvalidParameter(format!(
                    "{name} = {p} is not a probability"
                )));
            }
        }
        Ok(())
    }
}

/// Samples a labeled SBM graph. Fraud vertices come first (`f0`, `f1`, ...)
/// followed by benign vertices (`b0`, `b1`, ...). Every unordered pair gets
/// one Bernoulli draw, in lexicographic pair order.
pub fn sample_sbm(params: &SbmParams, seed: u64) -> GraphResult<LabeledGraph> {
    params.validate()?;
    let nf = params.n_fraud;
    let n = nf + params.n_benign;
    let mut rng = rng_from_seed(seed);
    let ids = (0..nf)
        .map(|i| format!("f{i}"))
        .chain((0..params.n_benign).map(|i| format!("b{i}")))
        .collect();
    let fraud = (0..n).map(|v| v < nf).collect();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let p = match (u < nf, v < nf) {
                (true, true) => params.p_fraud,
                (false, false) => params.p_benign,
                _ => params.p_cross,
            };
            if rng.gen::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    LabeledGraph::new(ids, fraud, edges, None)
}

/// Relabels `size` uniformly chosen benign vertices as fraud and adds each
/// pair among them as an edge with probability `density`. Existing edges are
/// never removed.
pub fn inject_fraud_clique(
    graph: &LabeledGraph,
    size: usize,
    density: f64,
    seed: u64,
) -> GraphResult<LabeledGraph> {
    if !(0.0..=1.0).contains(&density) {
        return Err(GraphError::InvalidParameter(format!(
            "density {density} is not a probability"
        )));
    }
    let benign = graph.benign_vertices();
    if size > benign.len() {
        return Err(GraphError::InvalidParameter(format!(
            "clique of {size} exceeds {} benign vertices",
            benign.len()
        )));
    }
    if size == 0 {
        return Ok(graph.clone());
    }
    let mut rng = rng_from_seed(seed);
    let mut chosen: Vec<usize> = index::sample(&mut rng, benign.len(), size)
        .into_iter()
        .map(|i| benign[i])
        .collect();
    chosen.sort_unstable();

    let mut fraud = graph.labels().to_vec();
    for &v in &chosen {
        fraud[v] = true;
    }
    let mut edges: Vec<(usize, usize)> = graph.edges().collect();
    for (i, &u) in chosen.iter().enumerate() {
        for &v in &chosen[i + 1..] {
            if rng.gen::<f64>() < density {
                edges.push((u, v));
            }
        }
    }
    LabeledGraph::new(
        graph.ids().to_vec(),
        fraud,
        edges,
        graph.metadata().cloned(),
    )
}

/// Deletes every benign vertex whose degree in `graph` exceeds `max_degree`.
/// Degrees are read once from the input; fraud vertices are always kept.
pub fn truncate_by_degree(graph: &LabeledGraph, max_degree: usize) -> LabeledGraph {
    let keep: Vec<usize> = (0..graph.len())
        .filter(|&v| graph.is_fraud(v) || graph.degree(v) <= max_degree)
        .collect();
    if keep.len() == graph.len() {
        return graph.clone();
    }
    graph.induced_subgraph(&keep)
}
