//! Spectral embedding of the concatenated similarity and the final
//! partition.
//!
//! The top-`g` left singular vectors of `Z̄` (`n × mv`) span the top-`g`
//! eigenspace of `Σ_i Z^i Z^iᵀ / v = Z̄ Z̄ᵀ / v`. They are recovered from the
//! small `mv × mv` Gram matrix `Z̄ᵀZ̄`: with eigenpairs `(σ_j², v_j)`,
//! `u_j = Z̄ v_j / σ_j`. Cost is `O(n (mv)² + (mv)³)`, linear in `n`.

use log::warn;
use nalgebra::SymmetricEigen;
use ndarray::{Array1, Array2, Axis};

use crate::error::{Error, Result};
use crate::kmeans::{kmeans, KMeansParams};
use crate::linalg::to_nalgebra;
use crate::subspace::ConcatenatedSimilarity;

/// Relative cutoff below which a singular value counts as zero.
const RANK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralEmbedding {
    /// `n × g`, orthonormal columns.
    pub q: Array2<f64>,
    /// Leading singular values, non-increasing.
    pub sigma: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub labels: Vec<usize>,
    pub g: usize,
}

fn dot(a: &Array1<f64>, b: &Array1<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Projects `u` off `basis` twice (classical Gram-Schmidt with one
/// reorthogonalization pass) and returns the remaining norm.
fn orthogonalize(u: &mut Array1<f64>, basis: &[Array1<f64>]) -> f64 {
    for _ in 0..2 {
        for b in basis {
            let c = dot(u, b);
            u.scaled_add(-c, b);
        }
    }
    dot(u, u).sqrt()
}

/// Flips `u` so its largest-magnitude entry (lowest index on ties) is positive.
fn fix_sign(u: &mut Array1<f64>) {
    let mut best = 0;
    for (i, v) in u.iter().enumerate() {
        if v.abs() > u[best].abs() {
            best = i;
        }
    }
    if u[best] < 0.0 {
        u.mapv_inplace(|v| -v);
    }
}

/// Top-`g` left singular vectors of `Z̄` through the Gram matrix.
pub fn spectral_embed(zbar: &ConcatenatedSimilarity, g: usize) -> Result<SpectralEmbedding> {
    let z = &zbar.zbar;
    let (n, cols) = z.dim();
    if g == 0 || g > n.min(cols) {
        return Err(Error::InvalidParameter(format!(
            "embedding dimension {g} must lie in [1, min(n = {n}, mv = {cols})]"
        )));
    }
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("concatenated similarity".into()));
    }

    let gram = z.t().dot(z);
    let eig = SymmetricEigen::new(to_nalgebra(gram.view()));
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let sigma_all: Vec<f64> = order.iter().map(|&j| eig.eigenvalues[j].max(0.0).sqrt()).collect();

    if g < cols {
        let (a, b) = (sigma_all[g - 1], sigma_all[g]);
        if a > 0.0 && (a - b) <= 1e-10 * sigma_all[0] {
            warn!("singular values {a} and {b} straddle the cut at g = {g}; embedding basis is not unique");
        }
    }

    let top = sigma_all[0];
    let mut basis: Vec<Array1<f64>> = Vec::with_capacity(g);
    let mut deficient = false;
    for (rank, &j) in order.iter().take(g).enumerate() {
        let s = sigma_all[rank];
        if top > 0.0 && s >= RANK_TOL * top {
            let v = Array1::from_iter(eig.eigenvectors.column(j).iter().copied());
            let mut u = z.dot(&v) / s;
            let norm = orthogonalize(&mut u, &basis);
            if norm > 1e-8 {
                u /= norm;
                basis.push(u);
                continue;
            }
        }
        deficient = true;
        break;
    }
    if deficient {
        warn!("similarity has rank below {g}; completing the embedding with an orthonormal extension");
        let mut e = 0;
        while basis.len() < g {
            let mut u = Array1::zeros(n);
            u[e] = 1.0;
            e += 1;
            let norm = orthogonalize(&mut u, &basis);
            if norm > 1e-6 {
                u /= norm;
                basis.push(u);
            }
        }
    }

    let mut q = Array2::zeros((n, g));
    for (c, mut u) in basis.into_iter().enumerate() {
        fix_sign(&mut u);
        q.column_mut(c).assign(&u);
    }
    Ok(SpectralEmbedding {
        q,
        sigma: sigma_all[..g].to_vec(),
    })
}

/// Scales each row of `q` to unit length; zero rows stay zero.
pub fn normalize_rows(q: &Array2<f64>) -> Array2<f64> {
    let mut out = q.clone();
    for mut row in out.axis_iter_mut(Axis(0)) {
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            row.mapv_inplace(|v| v / norm);
        }
    }
    out
}

/// K-means on the rows of the embedding.
pub fn cluster_embedding(embedding: &SpectralEmbedding, g: usize, seed: u64, params: &KMeansParams) -> Result<Partition> {
    let result = kmeans(embedding.q.view(), g, seed, params)?;
    Ok(Partition {
        labels: result.assignments,
        g,
    })
}
