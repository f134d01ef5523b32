//! Anchor-based self-expression, solved in closed form per view.
//!
//! For smoothed features `X̄` (`n × d`) and anchors `B` (`d × m`), the
//! minimizer of `‖X̄ᵀ - B Zᵀ‖² + α‖Z‖²` is
//! `Z = X̄ B (BᵀB + αI)^{-1}`, obtained from one `m × m` Cholesky
//! factorization. Only the `n × m` similarity to anchors is ever formed.

use nalgebra::Cholesky;
use ndarray::{concatenate, Array2, ArrayView2, Axis};
use rayon::prelude::*;

use crate::anchors::AnchorSet;
use crate::error::{Error, Result};
use crate::filter::FilteredViews;
use crate::linalg::{from_nalgebra, to_nalgebra};

/// Per-view similarities `Z^i` (`n × m`).
#[derive(Debug, Clone, PartialEq)]
pub struct ViewSimilarity {
    pub z: Vec<Array2<f64>>,
    pub alpha: f64,
}

/// `Z̄ = [Z^1, …, Z^v]`, `n × (m·v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcatenatedSimilarity {
    pub zbar: Array2<f64>,
    pub m: usize,
}

impl ConcatenatedSimilarity {
    pub fn views(&self) -> usize {
        self.zbar.ncols() / self.m.max(1)
    }

    /// Column block of view `i`.
    pub fn block(&self, i: usize) -> ArrayView2<'_, f64> {
        self.zbar.slice(ndarray::s![.., i * self.m..(i + 1) * self.m])
    }

    /// Scales each column to unit Euclidean norm; zero columns stay zero.
    pub fn normalize_columns(&mut self) {
        for mut col in self.zbar.columns_mut() {
            let norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                col.mapv_inplace(|v| v / norm);
            }
        }
    }
}

/// `Z = X̄ B (BᵀB + αI)^{-1}` via a Cholesky solve of `(BᵀB + αI) Zᵀ = Bᵀ X̄ᵀ`.
pub fn solve_view(xbar: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>, alpha: f64) -> Result<Array2<f64>> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!("alpha must be > 0, got {alpha}")));
    }
    if xbar.ncols() != b.nrows() {
        return Err(Error::Shape(format!(
            "features have {} columns, anchors have {} rows",
            xbar.ncols(),
            b.nrows()
        )));
    }
    if xbar.iter().chain(b.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("subspace solve input".into()));
    }
    let m = b.ncols();
    let mut gram = b.t().dot(&b);
    for i in 0..m {
        gram[[i, i]] += alpha;
    }
    let rhs = b.t().dot(&xbar.t());
    let chol = Cholesky::new(to_nalgebra(gram.view()))
        .ok_or_else(|| Error::Numerical("BᵀB + αI not positive definite".into()))?;
    let zt = chol.solve(&to_nalgebra(rhs.view()));
    Ok(from_nalgebra(&zt).reversed_axes())
}

/// Solves every view against its own anchors.
pub fn solve_all(views: &FilteredViews, anchors: &AnchorSet, alpha: f64) -> Result<ViewSimilarity> {
    if views.len() != anchors.anchors.len() {
        return Err(Error::Shape(format!(
            "{} views but {} anchor matrices",
            views.len(),
            anchors.anchors.len()
        )));
    }
    let z = views
        .views
        .par_iter()
        .zip(anchors.anchors.par_iter())
        .map(|(x, b)| solve_view(x.view(), b.view(), alpha))
        .collect::<Result<Vec<_>>>()?;
    Ok(ViewSimilarity { z, alpha })
}

/// Horizontal concatenation in view order.
pub fn concat_views(zs: &[Array2<f64>]) -> Result<ConcatenatedSimilarity> {
    let Some(first) = zs.first() else {
        return Err(Error::Shape("no similarity matrices to concatenate".into()));
    };
    let (n, m) = first.dim();
    if let Some(bad) = zs.iter().find(|z| z.dim() != (n, m)) {
        return Err(Error::Shape(format!(
            "similarity {:?} does not match {:?}",
            bad.dim(),
            (n, m)
        )));
    }
    let views: Vec<ArrayView2<'_, f64>> = zs.iter().map(|z| z.view()).collect();
    let zbar = concatenate(Axis(1), &views).map_err(|e| Error::Shape(e.to_string()))?;
    Ok(ConcatenatedSimilarity { zbar, m })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn scalar_case() {
        let z = solve_view(array![[2.0]].view(), array![[1.0]].view(), 1.0).unwrap();
        assert!((z[[0, 0]] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn orthonormal_anchors_halve() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let b = array![[s, -s], [s, s], [0.0, 0.0]];
        let x = array![[1.0, 2.0, 3.0], [-1.0, 0.5, 4.0]];
        let z = solve_view(x.view(), b.view(), 1.0).unwrap();
        let expect = x.dot(&b) / 2.0;
        assert!((&z - &expect).iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn zero_features() {
        let z = solve_view(Array2::zeros((4, 3)).view(), array![[1.0, 2.0], [0.0, 1.0], [3.0, 1.0]].view(), 0.5).unwrap();
        assert!(z.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn errors() {
        let x = array![[1.0, 2.0]];
        let b = array![[1.0], [2.0]];
        assert!(solve_view(x.view(), b.view(), 0.0).is_err());
        assert!(solve_view(x.view(), array![[1.0]].view(), 1.0).is_err());
        assert!(solve_view(array![[f64::NAN, 0.0]].view(), b.view(), 1.0).is_err());
    }

    #[test]
    fn concat_examples() {
        let z1 = array![[1.0], [2.0]];
        let z2 = array![[3.0], [4.0]];
        let c = concat_views(std::slice::from_ref(&z1)).unwrap();
        assert_eq!(c.zbar, z1);
        let c = concat_views(&[z1, z2]).unwrap();
        assert_eq!(c.zbar, array![[1.0, 3.0], [2.0, 4.0]]);
        assert_eq!(c.zbar.ncols(), c.m * 2);
        assert_eq!(c.block(1), array![[3.0], [4.0]]);
        assert!(concat_views(&[array![[1.0]], array![[1.0, 2.0]]]).is_err());
        assert!(concat_views(&[]).is_err());
    }
}
