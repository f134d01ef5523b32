//! Low-pass graph filtering of feature matrices.
//!
//! Smoothing `X` on a graph trades fidelity against Laplacian energy,
//! `min ‖X̄ - X‖² + μ tr(X̄ᵀ L X̄)`, whose minimizer is `(I + μL)^{-1} X`.
//! The production path replaces the inverse with its first-order expansion
//! applied `k` times, `X̄ = (I - μL)^k X`, evaluated as `k` sparse passes
//! `Y ← Y - μ L Y`. The dense solve survives as [`exact_filter`] for
//! checking the approximation on small graphs.

use log::warn;
use nalgebra::Cholesky;
use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;

use crate::dataset::MultiViewDataset;
use crate::error::{Error, Result};
use crate::graph::NormalizedOperator;
use crate::linalg::{from_nalgebra, to_nalgebra};

/// Largest `n` accepted by [`exact_filter`].
pub const EXACT_FILTER_CAP: usize = 2000;

/// Balance parameter `mu` and filter order `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterConfig {
    pub mu: f64,
    pub k: usize,
}

impl FilterConfig {
    pub fn new(mu: f64, k: usize) -> Result<Self> {
        let cfg = FilterConfig { mu, k };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0) || !self.mu.is_finite() {
            return Err(Error::InvalidParameter(format!("mu must be > 0, got {}", self.mu)));
        }
        if self.mu > 0.5 {
            // λ_max(L) ≤ 2, so μλ may exceed 1 and flip high frequencies
            warn!("mu = {} > 0.5: high-frequency response may change sign", self.mu);
        }
        Ok(())
    }
}

/// Smoothed views, one per input view, same shapes.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredViews {
    pub views: Vec<Array2<f64>>,
}

impl FilteredViews {
    pub fn len(&self) -> usize {
        self.views.len()
    }

    pub fn is_empty(&self) -> bool {
        self.views.is_empty()
    }

    pub fn n(&self) -> usize {
        self.views.first().map_or(0, |v| v.nrows())
    }
}

/// `(I - μL)^k X` by `k` successive passes `Y ← Y - μ (Y - S Y)`.
pub fn apply_filter(
    x: ArrayView2<'_, f64>,
    op: &NormalizedOperator,
    cfg: FilterConfig,
) -> Result<Array2<f64>> {
    cfg.validate()?;
    if x.nrows() != op.n() {
        return Err(Error::Shape(format!(
            "operator has {} nodes, features have {} rows",
            op.n(),
            x.nrows()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("filter input".into()));
    }
    let mut y = x.to_owned();
    for _ in 0..cfg.k {
        let ly = op.apply_laplacian(y.view())?;
        y = &y - &(&ly * cfg.mu);
    }
    Ok(y)
}

/// `(I + μL)^{-1} X` by a dense Cholesky solve. Test oracle; capped at
/// [`EXACT_FILTER_CAP`] nodes.
pub fn exact_filter(x: ArrayView2<'_, f64>, op: &NormalizedOperator, mu: f64) -> Result<Array2<f64>> {
    exact_filter_capped(x, op, mu, EXACT_FILTER_CAP)
}

pub fn exact_filter_capped(
    x: ArrayView2<'_, f64>,
    op: &NormalizedOperator,
    mu: f64,
    cap: usize,
) -> Result<Array2<f64>> {
    let n = op.n();
    if n > cap {
        return Err(Error::DenseCapExceeded { n, cap });
    }
    if !(mu > 0.0) {
        return Err(Error::InvalidParameter(format!("mu must be > 0, got {mu}")));
    }
    if x.nrows() != n {
        return Err(Error::Shape(format!(
            "operator has {n} nodes, features have {} rows",
            x.nrows()
        )));
    }
    let system = Array2::<f64>::eye(n) + op.dense_laplacian() * mu;
    let chol = Cholesky::new(to_nalgebra(system.view()))
        .ok_or_else(|| Error::Numerical("I + μL not positive definite".into()))?;
    Ok(from_nalgebra(&chol.solve(&to_nalgebra(x))))
}

/// Filters every view with its own operator.
pub fn filter_all_views(
    data: &MultiViewDataset,
    ops: &[NormalizedOperator],
    cfg: FilterConfig,
) -> Result<FilteredViews> {
    if ops.len() != data.views.len() {
        return Err(Error::Shape(format!(
            "{} views but {} graph operators",
            data.views.len(),
            ops.len()
        )));
    }
    let views = data
        .views
        .par_iter()
        .zip(ops.par_iter())
        .map(|(x, op)| apply_filter(x.view(), op, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(FilteredViews { views })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{normalize, SparseGraph};
    use ndarray::array;

    fn edge_op() -> NormalizedOperator {
        normalize(&SparseGraph::from_edges(2, &[(0, 1, 1.0)]).unwrap())
    }

    #[test]
    fn order_zero_is_identity() {
        let x = array![[1.0, -2.0], [3.5, 0.25]];
        let y = apply_filter(x.view(), &edge_op(), FilterConfig { mu: 0.3, k: 0 }).unwrap();
        assert_eq!(y, x);
    }

    #[test]
    fn single_edge_half_step() {
        let x = array![[1.0], [0.0]];
        let y = apply_filter(x.view(), &edge_op(), FilterConfig { mu: 0.5, k: 1 }).unwrap();
        assert_eq!(y, array![[0.5], [0.5]]);
    }

    #[test]
    fn exact_single_edge() {
        let x = array![[1.0], [0.0]];
        let y = exact_filter(x.view(), &edge_op(), 0.5).unwrap();
        assert!((y[[0, 0]] - 0.75).abs() < 1e-14);
        assert!((y[[1, 0]] - 0.25).abs() < 1e-14);
    }

    #[test]
    fn exact_small_mu_is_identity() {
        let x = array![[1.0, 2.0], [-3.0, 0.5]];
        let y = exact_filter(x.view(), &edge_op(), 1e-8).unwrap();
        assert!((&y - &x).iter().all(|v| v.abs() < 1e-6));
    }

    #[test]
    fn exact_cap_enforced() {
        let op = normalize(&SparseGraph::empty(5));
        let x = Array2::zeros((5, 1));
        assert!(matches!(
            exact_filter_capped(x.view(), &op, 0.5, 4),
            Err(Error::DenseCapExceeded { n: 5, cap: 4 })
        ));
    }

    #[test]
    fn rejects_bad_input() {
        let op = edge_op();
        let x = array![[f64::NAN], [0.0]];
        assert!(matches!(
            apply_filter(x.view(), &op, FilterConfig { mu: 0.5, k: 1 }),
            Err(Error::NonFinite(_))
        ));
        let x = array![[1.0]];
        assert!(matches!(
            apply_filter(x.view(), &op, FilterConfig { mu: 0.5, k: 1 }),
            Err(Error::Shape(_))
        ));
        assert!(FilterConfig::new(0.0, 1).is_err());
        assert!(FilterConfig::new(0.7, 1).is_ok());
    }
}
