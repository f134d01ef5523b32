//! Sparse symmetric graphs and the symmetrically normalized adjacency.
//!
//! A [`SparseGraph`] stores both triangles of a symmetric, non-negative
//! adjacency in CSR form. [`normalize`] turns it into a [`NormalizedOperator`]
//! holding `S = D^{-1/2} A D^{-1/2}`; the normalized Laplacian `L = I - S` is
//! never built, consumers apply it lazily through
//! [`NormalizedOperator::apply_laplacian`].
//!
//! Nodes with zero degree get all-zero rows and columns in `S`, so `L` acts
//! as the identity on them.
//!
//! When only features are available, [`build_probabilistic_neighbor_graph`]
//! builds a k-nearest-neighbor graph whose row weights are the closed-form
//! simplex solution of the adaptive-neighbor assignment problem.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Undirected weighted graph in CSR form, both directions stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseGraph {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    weights: Vec<f64>,
}

impl SparseGraph {
    /// Graph on `n` nodes without edges.
    pub fn empty(n: usize) -> Self {
        SparseGraph {
            n,
            indptr: vec![0; n + 1],
            indices: Vec::new(),
            weights: Vec::new(),
        }
    }

    /// Builds a graph from undirected edges, each listed once.
    ///
    /// `(i, j, w)` stores both `(i, j)` and `(j, i)`; a self-loop `(i, i, w)`
    /// is stored once. Listing the same undirected edge twice is an error.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut entries = Vec::with_capacity(edges.len() * 2);
        for &(i, j, w) in edges {
            entries.push((i, j, w));
            if i != j {
                entries.push((j, i, w));
            }
        }
        Self::from_entries(n, entries)
    }

    /// Builds a graph from directed entries that must already be symmetric.
    ///
    /// Zero weights are dropped. Returns [`Error::AsymmetricGraph`] if some
    /// `(i, j)` lacks a mirror entry with exactly the same weight.
    pub fn from_entries(n: usize, mut entries: Vec<(usize, usize, f64)>) -> Result<Self> {
        for &(i, j, w) in &entries {
            if i >= n || j >= n {
                return Err(Error::InvalidGraph(format!(
                    "entry ({i}, {j}) out of range for {n} nodes"
                )));
            }
            if !w.is_finite() {
                return Err(Error::NonFinite(format!("graph weight ({i}, {j})")));
            }
            if w < 0.0 {
                return Err(Error::InvalidGraph(format!(
                    "negative weight {w} at ({i}, {j})"
                )));
            }
        }
        entries.retain(|e| e.2 != 0.0);
        entries.sort_by_key(|e| (e.0, e.1));
        for pair in entries.windows(2) {
            if pair[0].0 == pair[1].0 && pair[0].1 == pair[1].1 {
                return Err(Error::InvalidGraph(format!(
                    "duplicate entry ({}, {})",
                    pair[0].0, pair[0].1
                )));
            }
        }

        let mut indptr = vec![0usize; n + 1];
        for &(i, _, _) in &entries {
            indptr[i + 1] += 1;
        }
        for i in 0..n {
            indptr[i + 1] += indptr[i];
        }
        let indices: Vec<usize> = entries.iter().map(|e| e.1).collect();
        let weights: Vec<f64> = entries.iter().map(|e| e.2).collect();
        let graph = SparseGraph {
            n,
            indptr,
            indices,
            weights,
        };

        for i in 0..n {
            for (j, w) in graph.row(i) {
                if graph.weight(j, i) != w {
                    return Err(Error::AsymmetricGraph { i, j });
                }
            }
        }
        Ok(graph)
    }

    /// Builds `(A + Aᵀ) / 2` from arbitrary non-negative directed entries.
    /// Duplicate entries are summed first.
    pub fn symmetrized(n: usize, entries: &[(usize, usize, f64)]) -> Result<Self> {
        let mut acc = std::collections::BTreeMap::new();
        for &(i, j, w) in entries {
            if i >= n || j >= n {
                return Err(Error::InvalidGraph(format!(
                    "entry ({i}, {j}) out of range for {n} nodes"
                )));
            }
            if !w.is_finite() {
                return Err(Error::NonFinite(format!("graph weight ({i}, {j})")));
            }
            *acc.entry((i, j)).or_insert(0.0) += 0.5 * w;
            *acc.entry((j, i)).or_insert(0.0) += 0.5 * w;
        }
        Self::from_entries(n, acc.into_iter().map(|((i, j), w)| (i, j, w)).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Stored entry count N (both directions counted).
    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    /// Neighbors of `i` with their weights, ascending by neighbor index.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[i]..self.indptr[i + 1];
        self.indices[span.clone()]
            .iter()
            .copied()
            .zip(self.weights[span].iter().copied())
    }

    /// Weight of `(i, j)`, zero when absent.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let span = self.indptr[i]..self.indptr[i + 1];
        match self.indices[span.clone()].binary_search(&j) {
            Ok(pos) => self.weights[span.start + pos],
            Err(_) => 0.0,
        }
    }

    /// Every stored `(i, j, w)`, row-major.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| self.row(i).map(move |(j, w)| (i, j, w)))
    }

    /// Dense copy of the adjacency. Intended for tests and small graphs.
    pub fn to_dense(&self) -> Array2<f64> {
        let mut a = Array2::zeros((self.n, self.n));
        for (i, j, w) in self.entries() {
            a[[i, j]] = w;
        }
        a
    }
}

/// Row sums of the adjacency.
pub fn degrees(graph: &SparseGraph) -> Array1<f64> {
    Array1::from_iter((0..graph.n()).map(|i| graph.row(i).map(|(_, w)| w).sum::<f64>()))
}

/// `S = D^{-1/2} A D^{-1/2}` together with the degree vector.
///
/// Immutable once built. `L = I - S` is applied lazily.
#[derive(Debug, Clone)]
pub struct NormalizedOperator {
    degrees: Array1<f64>,
    s: SparseGraph,
}

impl NormalizedOperator {
    pub fn n(&self) -> usize {
        self.s.n
    }

    pub fn degrees(&self) -> &Array1<f64> {
        &self.degrees
    }

    /// The normalized adjacency `S` in sparse form.
    pub fn normalized_adjacency(&self) -> &SparseGraph {
        &self.s
    }

    /// `S · X`.
    pub fn apply_s(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if x.nrows() != self.n() {
            return Err(Error::Shape(format!(
                "operator has {} nodes, signal has {} rows",
                self.n(),
                x.nrows()
            )));
        }
        let mut out = Array2::zeros(x.raw_dim());
        out.axis_iter_mut(Axis(0))
            .into_par_iter()
            .enumerate()
            .for_each(|(i, mut row)| {
                for (j, w) in self.s.row(i) {
                    row.scaled_add(w, &x.row(j));
                }
            });
        Ok(out)
    }

    /// `L · X = X - S · X`.
    pub fn apply_laplacian(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        let sx = self.apply_s(x)?;
        Ok(&x - &sx)
    }

    /// Dense `L = I - S`. Intended for oracles on small graphs.
    pub fn dense_laplacian(&self) -> Array2<f64> {
        Array2::eye(self.n()) - self.s.to_dense()
    }
}

/// Symmetric normalization of `graph`; isolated nodes get zero rows.
pub fn normalize(graph: &SparseGraph) -> NormalizedOperator {
    let degrees = degrees(graph);
    let inv_sqrt: Vec<f64> = degrees
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 })
        .collect();
    let weights = graph
        .entries()
        .map(|(i, j, w)| w * (inv_sqrt[i] * inv_sqrt[j]))
        .collect();
    let s = SparseGraph {
        n: graph.n,
        indptr: graph.indptr.clone(),
        indices: graph.indices.clone(),
        weights,
    };
    NormalizedOperator { degrees, s }
}

/// Applies `L = I - S` to `x`. See [`NormalizedOperator::apply_laplacian`].
pub fn apply_laplacian(op: &NormalizedOperator, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    op.apply_laplacian(x)
}

/// One row of the unsymmetrized neighbor graph: `(neighbor, probability)`
/// pairs with positive weight, ascending by neighbor index.
pub(crate) fn neighbor_row(x: ArrayView2<'_, f64>, i: usize, k: usize) -> Vec<(usize, f64)> {
    let xi = x.row(i);
    let mut dist: Vec<(f64, usize)> = (0..x.nrows())
        .filter(|&j| j != i)
        .map(|j| {
            let d = xi
                .iter()
                .zip(x.row(j).iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>();
            (d, j)
        })
        .collect();
    // ties by lowest index
    dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    // k = n - 1 leaves no (k+1)-th distance; treat like a full tie
    let cutoff = dist.get(k).map_or(f64::NAN, |e| e.0);
    let numer: Vec<f64> = dist[..k].iter().map(|&(d, _)| cutoff - d).collect();
    let total: f64 = numer.iter().sum();

    let mut row: Vec<(usize, f64)> = if total > 0.0 {
        dist[..k]
            .iter()
            .zip(&numer)
            .filter(|(_, &num)| num > 0.0)
            .map(|(&(_, j), &num)| (j, num / total))
            .collect()
    } else {
        // all k+1 nearest distances tie
        dist[..k].iter().map(|&(_, j)| (j, 1.0 / k as f64)).collect()
    };
    row.sort_by_key(|e| e.0);
    row
}

/// Unsymmetrized neighbor weights: row `i` lists `(j, w_ij)` with positive
/// weight, ascending by `j`, summing to one.
pub fn neighbor_weights(x: ArrayView2<'_, f64>, k_nn: usize) -> Result<Vec<Vec<(usize, f64)>>> {
    let n = x.nrows();
    if k_nn == 0 || k_nn >= n {
        return Err(Error::InvalidParameter(format!(
            "k_nn must satisfy 1 <= k_nn < n (k_nn = {k_nn}, n = {n})"
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("features for neighbor graph".into()));
    }
    Ok((0..n).into_par_iter().map(|i| neighbor_row(x, i, k_nn)).collect())
}

/// Probabilistic k-nearest-neighbor graph over the rows of `x`.
///
/// Row `i` gives its `k_nn` nearest neighbors (squared Euclidean) the weights
/// `(e_{k+1} - e_j) / (k e_{k+1} - Σ_{h≤k} e_h)`, where `e_h` is the `h`-th
/// smallest squared distance from `i`. Each row sums to one; rows whose
/// `k + 1` nearest distances all tie fall back to uniform `1 / k` weights,
/// as do all rows when `k_nn = n - 1`.
/// The returned graph is `(W + Wᵀ) / 2`.
pub fn build_probabilistic_neighbor_graph(x: ArrayView2<'_, f64>, k_nn: usize) -> Result<SparseGraph> {
    let n = x.nrows();
    let rows = neighbor_weights(x, k_nn)?;
    let entries: Vec<(usize, usize, f64)> = rows
        .iter()
        .enumerate()
        .flat_map(|(i, row)| row.iter().map(move |&(j, w)| (i, j, w)))
        .collect();
    SparseGraph::symmetrized(n, &entries)
}
