// SPDX-License-Identifier: Apache-2.0

use crate::graph::LabeledGraph;

/// Assigns every vertex a community label. Only the induced partition
/// matters, not the label values.
pub trait CommunityDetector: Send + Sync {
    fn communities(&self, graph: &LabeledGraph) -> Vec<usize>;
}

/// Synchronous label propagation. Every vertex starts in its own community
/// and repeatedly adopts the most frequent label among its neighbours, ties
/// going to the largest label. Stops at a fixed point or after `max_iter`
/// rounds. Fully deterministic.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LabelPropagation {
    pub max_iter: usize,
}

impl Default for LabelPropagation {
    fn default() -> Self {
        Self { max_iter: 100 }
    }
}

impl CommunityDetector for LabelPropagation {
    fn communities(&self, graph: &LabeledGraph) -> Vec<usize> {
        let n = graph.len();
        let mut labels: Vec<usize> = (0..n).collect();
        let mut counts = vec![0usize; n];
        let mut touched = Vec::new();
        for _ in 0..self.max_iter {
            let mut next = labels.clone();
            for (v, slot) in next.iter_mut().enumerate() {
                let nbrs = graph.neighbors(v);
                if nbrs.is_empty() {
                    continue;
                }
                for &w in nbrs {
                    if counts[labels[w]] == 0 {
                        touched.push(labels[w]);
                    }
                    counts[labels[w]] += 1;
                }
                let mut best = (0usize, 0usize);
                for &l in &touched {
                    if (counts[l], l) > best {
                        best = (counts[l], l);
                    }
                }
                *slot = best.1;
                for l in touched.drain(..) {
                    counts[l] = 0;
                }
            }
            if next == labels {
                break;
            }
            labels = next;
        }
        labels
    }
}

/// Size of each vertex's community.
pub fn community_sizes(labels: &[usize]) -> Vec<usize> {
    let mut size = std::collections::HashMap::new();
    for &l in labels {
        *size.entry(l).or_insert(0usize) += 1;
    }
    labels.iter().map(|l| size[l]).collect()
}
