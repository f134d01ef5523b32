//! Anchor selection.
//!
//! Feature data: each view gets its own `m` K-means centroids of the
//! smoothed features. Graph data: one set of `m` node indices is drawn
//! without replacement with probability proportional to `q(i)^γ`, where
//! `q(i)` is the node's degree summed over all views, and every view takes
//! the corresponding rows of its smoothed features.

use log::warn;
use ndarray::{Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::filter::FilteredViews;
use crate::graph::{degrees, SparseGraph};
use crate::kmeans::{kmeans, KMeansParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnchorMode {
    KMeans,
    Importance,
}

/// Per-view anchor matrices `B^i` (`d_i × m`, anchors as columns).
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorSet {
    pub anchors: Vec<Array2<f64>>,
    pub mode: AnchorMode,
    /// Shared sampled node indices; importance mode only.
    pub indices: Option<Vec<usize>>,
}

impl AnchorSet {
    pub fn m(&self) -> usize {
        self.anchors.first().map_or(0, |b| b.ncols())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    pub m: usize,
    pub gamma: f64,
    pub seed: u64,
}

/// K-means centroids per view; view `i` yields `B^i = Cᵀ`.
pub fn anchors_by_kmeans(views: &FilteredViews, m: usize, seed: u64, params: &KMeansParams) -> Result<AnchorSet> {
    let n = views.n();
    if m == 0 || m > n {
        return Err(Error::InvalidParameter(format!("anchor count {m} must lie in [1, n = {n}]")));
    }
    let anchors = views
        .views
        .iter()
        .map(|x| kmeans(x.view(), m, seed, params).map(|r| r.centroids.reversed_axes()))
        .collect::<Result<Vec<_>>>()?;
    Ok(AnchorSet {
        anchors,
        mode: AnchorMode::KMeans,
        indices: None,
    })
}

/// `p_i = q(i)^γ / Σ_j q(j)^γ` with `q(i)` the total degree across views.
///
/// All-zero `q` yields the uniform distribution with a warning.
pub fn importance_probabilities(graphs: &[SparseGraph], gamma: f64) -> Result<Vec<f64>> {
    let Some(first) = graphs.first() else {
        return Err(Error::InvalidParameter("at least one graph required".into()));
    };
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidParameter(format!("gamma must be > 0, got {gamma}")));
    }
    let n = first.n();
    if graphs.iter().any(|g| g.n() != n) {
        return Err(Error::Shape("graphs disagree on node count".into()));
    }
    let mut q = vec![0.0; n];
    for g in graphs {
        for (qi, d) in q.iter_mut().zip(degrees(g).iter()) {
            *qi += d;
        }
    }
    let q_max = q.iter().copied().fold(0.0, f64::max);
    if q_max <= 0.0 {
        warn!("every graph is empty; falling back to uniform anchor probabilities");
        return Ok(vec![1.0 / n as f64; n]);
    }
    // scale by the maximum first so large degrees cannot overflow q^γ
    let w: Vec<f64> = q.iter().map(|&qi| (qi / q_max).powf(gamma)).collect();
    let total: f64 = w.iter().sum();
    Ok(w.into_iter().map(|x| x / total).collect())
}

/// Draws `m` distinct indices; each draw picks among the remaining indices
/// with probability `p_i / Σ_{j remaining} p_j`.
pub fn sample_without_replacement(p: &[f64], m: usize, seed: u64) -> Result<Vec<usize>> {
    if p.iter().any(|&x| !x.is_finite() || x < 0.0) {
        return Err(Error::InvalidParameter("probabilities must be finite and non-negative".into()));
    }
    let available = p.iter().filter(|&&x| x > 0.0).count();
    if m > available {
        return Err(Error::InsufficientMass {
            requested: m,
            available,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut taken = vec![false; p.len()];
    let mut picked = Vec::with_capacity(m);
    for _ in 0..m {
        let remaining: f64 = p.iter().zip(&taken).filter(|(_, &t)| !t).map(|(x, _)| x).sum();
        let target = rng.random::<f64>() * remaining;
        let mut acc = 0.0;
        let mut choice = None;
        for (i, (&pi, &t)) in p.iter().zip(&taken).enumerate() {
            if t || pi <= 0.0 {
                continue;
            }
            acc += pi;
            choice = Some(i);
            if acc > target {
                break;
            }
        }
        // loop always lands on an index with positive mass
        let i = choice.expect("positive mass remains");
        taken[i] = true;
        picked.push(i);
    }
    Ok(picked)
}

/// `B^i` column `j` is row `ind[j]` of view `i`.
pub fn build_anchor_matrices(views: &FilteredViews, ind: &[usize]) -> Result<AnchorSet> {
    let n = views.n();
    let mut seen = vec![false; n];
    for &i in ind {
        if i >= n {
            return Err(Error::InvalidParameter(format!("anchor index {i} out of range for n = {n}")));
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::InvalidParameter(format!("anchor index {i} repeated")));
        }
    }
    if ind.is_empty() {
        return Err(Error::InvalidParameter("at least one anchor required".into()));
    }
    let anchors = views
        .views
        .iter()
        .map(|x| x.select(Axis(0), ind).reversed_axes())
        .collect();
    Ok(AnchorSet {
        anchors,
        mode: AnchorMode::Importance,
        indices: Some(ind.to_vec()),
    })
}

/// Importance sampling followed by row selection, shared across views.
pub fn anchors_by_importance(views: &FilteredViews, graphs: &[SparseGraph], cfg: SamplerConfig) -> Result<AnchorSet> {
    if cfg.m == 0 || cfg.m > views.n() {
        return Err(Error::InvalidParameter(format!(
            "anchor count {} must lie in [1, n = {}]",
            cfg.m,
            views.n()
        )));
    }
    let p = importance_probabilities(graphs, cfg.gamma)?;
    let ind = sample_without_replacement(&p, cfg.m, cfg.seed)?;
    build_anchor_matrices(views, &ind)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn path_with_degrees_123() -> SparseGraph {
        // degrees 1, 2, 3 via weights
        SparseGraph::from_edges(3, &[(0, 2, 1.0), (1, 2, 2.0)]).unwrap()
    }

    #[test]
    fn probabilities_gamma_one_and_two() {
        let g = path_with_degrees_123();
        let p = importance_probabilities(std::slice::from_ref(&g), 1.0).unwrap();
        for (a, b) in p.iter().zip([1.0 / 6.0, 2.0 / 6.0, 3.0 / 6.0]) {
            assert!((a - b).abs() < 1e-15);
        }
        let p = importance_probabilities(&[g], 2.0).unwrap();
        for (a, b) in p.iter().zip([1.0 / 14.0, 4.0 / 14.0, 9.0 / 14.0]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn degrees_add_across_views() {
        let a = SparseGraph::from_edges(3, &[(0, 2, 1.0)]).unwrap();
        let b = SparseGraph::from_edges(3, &[(1, 2, 2.0)]).unwrap();
        let p = importance_probabilities(&[a, b], 1.0).unwrap();
        assert!((p[2] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn regular_graph_uniform() {
        let ring = SparseGraph::from_edges(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (0, 3, 1.0)]).unwrap();
        for gamma in [0.5, 1.0, 3.0] {
            let p = importance_probabilities(std::slice::from_ref(&ring), gamma).unwrap();
            assert!(p.iter().all(|&x| (x - 0.25).abs() < 1e-15));
        }
    }

    #[test]
    fn empty_graphs_uniform() {
        let p = importance_probabilities(&[SparseGraph::empty(4)], 2.0).unwrap();
        assert_eq!(p, vec![0.25; 4]);
        assert!(importance_probabilities(&[], 2.0).is_err());
        assert!(importance_probabilities(&[SparseGraph::empty(2)], 0.0).is_err());
    }

    #[test]
    fn degenerate_distributions() {
        for seed in 0..50 {
            assert_eq!(sample_without_replacement(&[0.0, 1.0, 0.0], 1, seed).unwrap(), vec![1]);
            let mut two = sample_without_replacement(&[0.5, 0.5, 0.0], 2, seed).unwrap();
            two.sort();
            assert_eq!(two, vec![0, 1]);
        }
        assert!(matches!(
            sample_without_replacement(&[0.5, 0.5, 0.0], 3, 0),
            Err(Error::InsufficientMass { requested: 3, available: 2 })
        ));
    }

    #[test]
    fn first_draw_frequencies() {
        let p = [1.0 / 6.0, 2.0 / 6.0, 3.0 / 6.0];
        let draws = 60_000;
        let mut counts = [0usize; 3];
        for seed in 0..draws {
            counts[sample_without_replacement(&p, 1, seed).unwrap()[0]] += 1;
        }
        for (c, pi) in counts.iter().zip(p) {
            assert!((*c as f64 / draws as f64 - pi).abs() < 0.01);
        }
    }

    #[test]
    fn row_selection() {
        let x = array![[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]];
        let views = FilteredViews { views: vec![x.clone()] };
        let a = build_anchor_matrices(&views, &[0]).unwrap();
        assert_eq!(a.anchors[0], array![[1.0], [2.0]]);

        let a = build_anchor_matrices(&views, &[0, 1, 2]).unwrap();
        assert_eq!(a.anchors[0], x.t());

        let a = build_anchor_matrices(&views, &[2, 0, 1]).unwrap();
        assert_eq!(a.anchors[0], array![[5.0, 1.0, 3.0], [6.0, 2.0, 4.0]]);

        assert!(build_anchor_matrices(&views, &[3]).is_err());
        assert!(build_anchor_matrices(&views, &[1, 1]).is_err());
    }

    #[test]
    fn kmeans_anchors_two_blobs() {
        let x = array![[0.0, 0.0], [0.1, 0.0], [0.0, 0.1], [10.0, 10.0], [10.1, 10.0], [10.0, 10.1]];
        let views = FilteredViews { views: vec![x.clone(), x] };
        let a = anchors_by_kmeans(&views, 2, 5, &KMeansParams::default()).unwrap();
        assert_eq!(a.anchors[0], a.anchors[1]);
        let mut cols: Vec<(f64, f64)> = a.anchors[0].columns().into_iter().map(|c| (c[0], c[1])).collect();
        cols.sort_by(|p, q| p.0.total_cmp(&q.0));
        let expect = [(0.1 / 3.0, 0.1 / 3.0), (10.0 + 0.1 / 3.0, 10.0 + 0.1 / 3.0)];
        for (got, want) in cols.iter().zip(expect) {
            assert!((got.0 - want.0).abs() < 1e-12 && (got.1 - want.1).abs() < 1e-12);
        }
        assert!(anchors_by_kmeans(&views, 7, 5, &KMeansParams::default()).is_err());
    }
}
