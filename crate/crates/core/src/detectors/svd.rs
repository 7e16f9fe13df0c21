// SPDX-License-Identifier: Apache-2.0

use nalgebra::{DMatrix, SymmetricEigen};

use crate::graph::LabeledGraph;

/// Per-vertex absolute reconstruction error of the best rank-`rank`
/// approximation of the adjacency matrix, read at the vertex's edge
/// positions only. Returns `(row sums, row maxima)`.
///
/// The adjacency matrix is symmetric, so its singular values are the
/// absolute eigenvalues and the truncated eigendecomposition (largest
/// `|lambda|` first) is the best low-rank approximation.
pub(crate) fn reconstruction_errors(graph: &LabeledGraph, rank: usize) -> (Vec<f64>, Vec<f64>) {
    let n = graph.len();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for (u, v) in graph.edges() {
        a[(u, v)] = 1.0;
        a[(v, u)] = 1.0;
    }
    let eig = SymmetricEigen::new(a);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .abs()
            .total_cmp(&eig.eigenvalues[i].abs())
            .then(i.cmp(&j))
    });
    let kept = &order[..rank];
    // U_r diag(lambda_r), so entry (i, j) of the approximation is
    // sum_k scaled[(i, k)] * U[(j, k)].
    let u = eig.eigenvectors.select_columns(kept);
    let mut scaled = u.clone();
    for (c, &k) in kept.iter().enumerate() {
        scaled.column_mut(c).scale_mut(eig.eigenvalues[k]);
    }
    let mut sums = vec![0.0; n];
    let mut maxes = vec![0.0f64; n];
    for i in 0..n {
        for &j in graph.neighbors(i) {
            let approx = scaled.row(i).dot(&u.row(j));
            let err = (1.0 - approx).abs();
            sums[i] += err;
            maxes[i] = maxes[i].max(err);
        }
    }
    (sums, maxes)
}
