//! Seeded K-means: k-means++ seeding, Lloyd iterations, best of several
//! restarts.
//!
//! Restart `r` draws from `ChaCha8Rng::seed_from_u64(seed)` with its stream
//! set to `r`, so every restart is reproducible on its own and the restarts
//! can run in parallel. The lowest inertia wins; ties go to the lowest
//! restart index.

use ndarray::{Array2, ArrayView1, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansParams {
    pub restarts: usize,
    pub max_iter: usize,
    /// Stop once no centroid moves farther than this.
    pub tol: f64,
}

impl Default for KMeansParams {
    fn default() -> Self {
        KMeansParams {
            restarts: 10,
            max_iter: 300,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub assignments: Vec<usize>,
    /// `g × d`; row `c` is the mean of the points assigned to `c`.
    pub centroids: Array2<f64>,
    pub inertia: f64,
    pub iterations_run: usize,
    /// Objective after each Lloyd update of the winning restart.
    pub inertia_history: Vec<f64>,
}

fn sq_dist(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Nearest centroid, ties to the lowest index.
fn nearest(x: ArrayView1<'_, f64>, centroids: &Array2<f64>) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, row) in centroids.rows().into_iter().enumerate() {
        let d = sq_dist(x, row);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn plus_plus_init(x: ArrayView2<'_, f64>, g: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let n = x.nrows();
    let mut centroids = Array2::zeros((g, x.ncols()));
    let first = rng.random_range(0..n);
    centroids.row_mut(0).assign(&x.row(first));
    let mut closest: Vec<f64> = (0..n).map(|i| sq_dist(x.row(i), x.row(first))).collect();

    for c in 1..g {
        let total: f64 = closest.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &d) in closest.iter().enumerate() {
                acc += d;
                if d > 0.0 && acc > target {
                    pick = Some(i);
                    break;
                }
            }
            // rounding at the tail: take the last point with positive mass
            pick.unwrap_or_else(|| closest.iter().rposition(|&d| d > 0.0).unwrap())
        } else {
            // fewer distinct points than clusters
            c % n
        };
        centroids.row_mut(c).assign(&x.row(pick));
        for (i, d) in closest.iter_mut().enumerate() {
            *d = d.min(sq_dist(x.row(i), x.row(pick)));
        }
    }
    centroids
}

/// Moves, for each empty cluster, the point farthest from its centroid
/// into that cluster.
fn repair_empty(x: ArrayView2<'_, f64>, centroids: &mut Array2<f64>, assign: &mut [usize], counts: &mut [usize]) {
    while let Some(empty) = counts.iter().position(|&c| c == 0) {
        let mut far = None;
        let mut far_d = -1.0;
        for i in 0..x.nrows() {
            if counts[assign[i]] < 2 {
                continue;
            }
            let d = sq_dist(x.row(i), centroids.row(assign[i]));
            if d > far_d {
                far_d = d;
                far = Some(i);
            }
        }
        let Some(i) = far else { return };
        counts[assign[i]] -= 1;
        assign[i] = empty;
        counts[empty] = 1;
        centroids.row_mut(empty).assign(&x.row(i));
    }
}

fn means(x: ArrayView2<'_, f64>, assign: &[usize], counts: &[usize], previous: &Array2<f64>) -> Array2<f64> {
    let mut out = Array2::zeros(previous.raw_dim());
    for (i, &c) in assign.iter().enumerate() {
        let mut row = out.row_mut(c);
        row += &x.row(i);
    }
    for (c, &count) in counts.iter().enumerate() {
        if count > 0 {
            out.row_mut(c).mapv_inplace(|v| v / count as f64);
        } else {
            out.row_mut(c).assign(&previous.row(c));
        }
    }
    out
}

fn objective(x: ArrayView2<'_, f64>, centroids: &Array2<f64>, assign: &[usize]) -> f64 {
    assign
        .iter()
        .enumerate()
        .map(|(i, &c)| sq_dist(x.row(i), centroids.row(c)))
        .sum()
}

fn lloyd(x: ArrayView2<'_, f64>, g: usize, params: &KMeansParams, rng: &mut ChaCha8Rng) -> KMeansResult {
    let n = x.nrows();
    let mut centroids = plus_plus_init(x, g, rng);
    let mut assign = vec![0usize; n];
    let mut history = Vec::new();
    let mut iterations = 0;

    loop {
        iterations += 1;
        let mut counts = vec![0usize; g];
        for i in 0..n {
            let (c, _) = nearest(x.row(i), &centroids);
            assign[i] = c;
            counts[c] += 1;
        }
        repair_empty(x, &mut centroids, &mut assign, &mut counts);
        let updated = means(x, &assign, &counts, &centroids);
        let shift = updated
            .rows()
            .into_iter()
            .zip(centroids.rows())
            .map(|(a, b)| sq_dist(a, b).sqrt())
            .fold(0.0, f64::max);
        centroids = updated;
        history.push(objective(x, &centroids, &assign));
        if shift < params.tol || iterations >= params.max_iter {
            break;
        }
    }

    KMeansResult {
        inertia: *history.last().unwrap(),
        assignments: assign,
        centroids,
        iterations_run: iterations,
        inertia_history: history,
    }
}

/// Runs one restart with its derived stream. Exposed for restart-level checks.
pub fn kmeans_single(x: ArrayView2<'_, f64>, g: usize, seed: u64, restart: usize, params: &KMeansParams) -> Result<KMeansResult> {
    check(x, g, params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    Ok(lloyd(x, g, params, &mut rng))
}

fn check(x: ArrayView2<'_, f64>, g: usize, params: &KMeansParams) -> Result<()> {
    if g == 0 || g > x.nrows() {
        return Err(Error::InvalidParameter(format!(
            "cluster count {g} must lie in [1, n = {}]",
            x.nrows()
        )));
    }
    if params.restarts == 0 || params.max_iter == 0 {
        return Err(Error::InvalidParameter("restarts and max_iter must be >= 1".into()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("k-means input".into()));
    }
    Ok(())
}

/// Best-of-`restarts` K-means over the rows of `x`.
pub fn kmeans(x: ArrayView2<'_, f64>, g: usize, seed: u64, params: &KMeansParams) -> Result<KMeansResult> {
    check(x, g, params)?;
    let runs: Vec<KMeansResult> = (0..params.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            lloyd(x, g, params, &mut rng)
        })
        .collect();
    let mut best = 0;
    for (r, run) in runs.iter().enumerate() {
        if run.inertia < runs[best].inertia {
            best = r;
        }
    }
    Ok(runs.into_iter().nth(best).unwrap())
}
