// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::LabeledGraph;

/// Exact sufficient statistics of a labeled graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphStats {
    pub edge_count_bb: usize,
    pub edge_count_bf: usize,
    pub edge_count_ff: usize,
    /// Degrees of benign vertices, in vertex order.
    pub degree_sequence_benign: Vec<usize>,
    pub triangle_count: u64,
    pub max_degree: usize,
}

impl GraphStats {
    pub fn edge_count(&self) -> usize {
        self.edge_count_bb + self.edge_count_bf + self.edge_count_ff
    }
}

/// Number of unordered vertex triples with all three edges present.
pub fn triangle_count(graph: &LabeledGraph) -> u64 {
    let mut count = 0u64;
    for (u, v) in graph.edges() {
        // Common neighbours w > v, so each triangle u < v < w is seen once.
        let (a, b) = (graph.neighbors(u), graph.neighbors(v));
        let (mut i, mut j) = (
            a.partition_point(|&w| w <= v),
            b.partition_point(|&w| w <= v),
        );
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    count += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
    }
    count
}

pub fn compute_stats(graph: &LabeledGraph) -> GraphStats {
    let (mut bb, mut bf, mut ff) = (0, 0, 0);
    for (u, v) in graph.edges() {
        match (graph.is_fraud(u), graph.is_fraud(v)) {
            (false, false) => bb += 1,
            (true, true) => ff += 1,
            _ => bf += 1,
        }
    }
    GraphStats {
        edge_count_bb: bb,
        edge_count_bf: bf,
        edge_count_ff: ff,
        degree_sequence_benign: graph
            .benign_vertices()
            .into_iter()
            .map(|v| graph.degree(v))
            .collect(),
        triangle_count: triangle_count(graph),
        max_degree: graph.max_degree(),
    }
}
