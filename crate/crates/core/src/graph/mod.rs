// SPDX-License-Identifier: Apache-2.0

//! Labeled graph model.
//!
//! A [`LabeledGraph`] is an undirected simple graph whose vertices carry a
//! fraud/benign label and, optionally, a fixed-dimension metadata vector.
//! Vertex identifiers are opaque strings mapped to dense indices on
//! construction; all computation is index based. Graphs are immutable and
//! every transformation returns a new graph.

mod generate;
mod io;
mod stats;

pub use generate::{inject_fraud_clique, sample_sbm, truncate_by_degree, SbmParams};
pub use io::{load_graph, parse_edge_list, parse_labels, parse_metadata, read_graph, write_graph};
pub use stats::{compute_stats, triangle_count, GraphStats};

use std::collections::HashMap;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: self-loop on vertex `{vertex}`")]
    SelfLoop { line: usize, vertex: String },
    #[error("vertex `{0}` appears in an edge but has no label")]
    MissingLabel(String),
    #[error("duplicate vertex `{0}`")]
    DuplicateVertex(String),
    #[error("self-loop on vertex index {0}")]
    SelfLoopIndex(usize),
    #[error("edge endpoint {index} out of range for {n} vertices")]
    EndpointOutOfRange { index: usize, n: usize },
    #[error("metadata: {0}")]
    Metadata(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type GraphResult<T> = std::result::Result<T, GraphError>;

/// Per-vertex real feature vectors of a common dimension, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Metadata {
    dim: usize,
    values: Vec<f64>,
}

impl Metadata {
    pub fn new(dim: usize, values: Vec<f64>) -> GraphResult<Self> {
        if dim == 0 {
            if !values.is_empty() {
                return Err(GraphError::Metadata("zero dimension with values".into()));
            }
        } else if !values.len().is_multiple_of(dim) {
            return Err(GraphError::Metadata(format!(
                "{} values is not a multiple of dimension {dim}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(GraphError::Metadata("non-finite feature".into()));
        }
        Ok(Self { dim, values })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> GraphResult<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(GraphError::Metadata(
                "rows have differing dimensions".into(),
            ));
        }
        Self::new(dim, rows.into_iter().flatten().collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> usize {
        self.values.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn row(&self, v: usize) -> &[f64] {
        &self.values[v * self.dim..(v + 1) * self.dim]
    }

    fn select(&self, keep: &[usize]) -> Self {
        let mut values = Vec::with_capacity(keep.len() * self.dim);
        for &v in keep {
            values.extend_from_slice(self.row(v));
        }
        Self {
            dim: self.dim,
            values,
        }
    }
}

/// Undirected simple graph with fraud/benign vertex labels.
#[derive(Clone, Debug)]
pub struct LabeledGraph {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    fraud: Vec<bool>,
    /// Sorted, duplicate-free neighbor lists.
    adj: Vec<Vec<usize>>,
    edge_count: usize,
    metadata: Option<Metadata>,
}

impl PartialEq for LabeledGraph {
    fn eq(&self, other: &Self) -> bool {
        self.ids == other.ids
            && self.fraud == other.fraud
            && self.adj == other.adj
            && self.metadata == other.metadata
    }
}

impl LabeledGraph {
    /// Builds a graph from vertex ids, fraud flags and index-pair edges.
    ///
    /// Duplicate edges (in either orientation) are merged. Self-loops and
    /// out-of-range endpoints are rejected.
    pub fn new<I>(
        ids: Vec<String>,
        fraud: Vec<bool>,
        edges: I,
        metadata: Option<Metadata>,
    ) -> GraphResult<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let n = ids.len();
        if fraud.len() != n {
            return Err(GraphError::InvalidParameter(format!(
                "{} labels for {n} vertices",
                fraud.len()
            )));
        }
        if let Some(m) = &metadata {
            if m.rows() != n && !(m.dim() == 0 && n == 0) {
                return Err(GraphError::Metadata(format!(
                    "{} metadata rows for {n} vertices",
                    m.rows()
                )));
            }
        }
        let mut index = HashMap::with_capacity(n);
        for (i, id) in ids.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(GraphError::DuplicateVertex(id.clone()));
            }
        }
        let mut adj = vec![Vec::new(); n];
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(GraphError::EndpointOutOfRange { index: u.max(v), n });
            }
            if u == v {
                return Err(GraphError::SelfLoopIndex(u));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut twice = 0;
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
            twice += list.len();
        }
        Ok(Self {
            ids,
            index,
            fraud,
            adj,
            edge_count: twice / 2,
            metadata,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn n_fraud(&self) -> usize {
        self.fraud.iter().filter(|&&f| f).count()
    }

    pub fn n_benign(&self) -> usize {
        self.len() - self.n_fraud()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, v: usize) -> &str {
        &self.ids[v]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn is_fraud(&self, v: usize) -> bool {
        self.fraud[v]
    }

    pub fn labels(&self) -> &[bool] {
        &self.fraud
    }

    pub fn fraud_vertices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&v| self.fraud[v]).collect()
    }

    pub fn benign_vertices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&v| !self.fraud[v]).collect()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adj.iter().map(Vec::len).collect()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.len() && self.adj[u].binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    pub fn metadata(&self) -> Option<&Metadata> {
        self.metadata.as_ref()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn max_benign_degree(&self) -> usize {
        (0..self.len())
            .filter(|&v| !self.fraud[v])
            .map(|v| self.degree(v))
            .max()
            .unwrap_or(0)
    }

    /// Induced subgraph on `keep`, in the given order. Ids, labels and
    /// metadata rows are carried over.
    pub fn induced_subgraph(&self, keep: &[usize]) -> Self {
        let mut remap = vec![usize::MAX; self.len()];
        for (new, &old) in keep.iter().enumerate() {
            remap[old] = new;
        }
        let mut adj = vec![Vec::new(); keep.len()];
        let mut twice = 0;
        for (new, &old) in keep.iter().enumerate() {
            let list: Vec<usize> = self.adj[old]
                .iter()
                .map(|&w| remap[w])
                .filter(|&w| w != usize::MAX)
                .collect();
            twice += list.len();
            adj[new] = list;
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        let ids: Vec<String> = keep.iter().map(|&v| self.ids[v].clone()).collect();
        let index = ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), i))
            .collect();
        Self {
            ids,
            index,
            fraud: keep.iter().map(|&v| self.fraud[v]).collect(),
            adj,
            edge_count: twice / 2,
            metadata: self.metadata.as_ref().map(|m| m.select(keep)),
        }
    }

    /// Same vertices and metadata, different labels.
    pub fn with_labels(&self, fraud: Vec<bool>) -> GraphResult<Self> {
        if fraud.len() != self.len() {
            return Err(GraphError::InvalidParameter("label vector length".into()));
        }
        Ok(Self {
            fraud,
            ..self.clone()
        })
    }

    /// Same vertices, labels and metadata, different edge set.
    pub fn with_edges<I>(&self, edges: I) -> GraphResult<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        Self::new(
            self.ids.clone(),
            self.fraud.clone(),
            edges,
            self.metadata.clone(),
        )
    }

    /// Same graph with metadata attached (or replaced).
    pub fn with_metadata(&self, metadata: Metadata) -> GraphResult<Self> {
        if metadata.rows() != self.len() {
            return Err(GraphError::Metadata(format!(
                "{} metadata rows for {} vertices",
                metadata.rows(),
                self.len()
            )));
        }
        Ok(Self {
            metadata: Some(metadata),
            ..self.clone()
        })
    }
}
