#![allow(dead_code)]

pub mod metric_oracles;

use mvsmooth::graph::SparseGraph;
use nalgebra::DMatrix;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || rng.sample(StandardNormal))
}

/// Erdős–Rényi graph with uniform weights in (0.1, 2).
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> SparseGraph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random::<f64>() < p {
                edges.push((i, j, rng.random_range(0.1..2.0)));
            }
        }
    }
    SparseGraph::from_edges(n, &edges).unwrap()
}

/// Random connected graph: a spanning path plus random extra edges.
pub fn random_connected_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> SparseGraph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if j == i + 1 || rng.random::<f64>() < p {
                edges.push((i, j, rng.random_range(0.1..2.0)));
            }
        }
    }
    SparseGraph::from_edges(n, &edges).unwrap()
}

pub fn to_na(a: &Array2<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

pub fn from_na(m: &DMatrix<f64>) -> Array2<f64> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}

pub fn fro(a: &Array2<f64>) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn spectral_norm(a: &Array2<f64>) -> f64 {
    nalgebra::SVD::new(to_na(a), false, false).singular_values.max()
}

/// Dense normalized Laplacian built straight from the adjacency.
pub fn dense_normalized_laplacian(g: &SparseGraph) -> Array2<f64> {
    let a = g.to_dense();
    let n = a.nrows();
    let d: Vec<f64> = (0..n).map(|i| a.row(i).sum()).collect();
    Array2::from_shape_fn((n, n), |(i, j)| {
        let s = if d[i] > 0.0 && d[j] > 0.0 { a[[i, j]] / (d[i] * d[j]).sqrt() } else { 0.0 };
        if i == j { 1.0 - s } else { -s }
    })
}

/// Sine of the largest principal angle between the column spaces of two
/// matrices with orthonormal columns: ‖(I - P Pᵀ) Q‖₂.
pub fn max_principal_angle(q: &Array2<f64>, p: &Array2<f64>) -> f64 {
    let resid = q - &p.dot(&p.t().dot(q));
    spectral_norm(&resid).min(1.0).asin()
}

/// Top-`g` eigenvectors of a symmetric matrix, as columns, plus all
/// eigenvalues in descending order.
pub fn top_eigenspace(m: &Array2<f64>, g: usize) -> (Array2<f64>, Vec<f64>) {
    let eig = nalgebra::SymmetricEigen::new(to_na(m));
    let mut order: Vec<usize> = (0..m.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let vecs = Array2::from_shape_fn((m.nrows(), g), |(i, c)| eig.eigenvectors[(i, order[c])]);
    (vecs, order.iter().map(|&j| eig.eigenvalues[j]).collect())
}

/// `Z = X̄ U diag(s / (s² + α)) Vᵀ` from the thin SVD `B = U diag(s) Vᵀ`.
pub fn ridge_svd_solution(x: &Array2<f64>, b: &Array2<f64>, alpha: f64) -> Array2<f64> {
    let svd = nalgebra::SVD::new(to_na(b), true, true);
    let u = from_na(&svd.u.unwrap());
    let vt = from_na(&svd.v_t.unwrap());
    let s = svd.singular_values;
    let mut middle = Array2::zeros((s.len(), s.len()));
    for i in 0..s.len() {
        middle[[i, i]] = s[i] / (s[i] * s[i] + alpha);
    }
    x.dot(&u).dot(&middle).dot(&vt)
}
