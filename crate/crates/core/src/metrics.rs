//! External clustering metrics: ACC, NMI, purity, pairwise F1, ARI.
//!
//! All metrics work from the contingency table of the two labelings, so they
//! are invariant to relabeling either side. Label values may be arbitrary;
//! they are compacted internally.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub acc: f64,
    pub nmi: f64,
    pub purity: f64,
    pub f1: f64,
    pub ari: f64,
    pub n: usize,
}

impl MetricsReport {
    pub fn compute(truth: &[usize], pred: &[usize]) -> Result<Self> {
        let table = Contingency::new(truth, pred)?;
        Ok(MetricsReport {
            acc: table.accuracy(),
            nmi: table.nmi(),
            purity: table.purity(),
            f1: table.pairwise_f1(),
            ari: table.ari(),
            n: truth.len(),
        })
    }
}

/// Counts `n_ij` of samples with truth class `i` and predicted cluster `j`.
#[derive(Debug, Clone)]
pub struct Contingency {
    counts: Vec<Vec<u64>>,
    row_sums: Vec<u64>,
    col_sums: Vec<u64>,
    n: u64,
}

fn compact(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut ids = BTreeMap::new();
    for &l in labels {
        let next = ids.len();
        ids.entry(l).or_insert(next);
    }
    (labels.iter().map(|l| ids[l]).collect(), ids.len())
}

fn pairs(x: u64) -> f64 {
    (x as f64) * (x.saturating_sub(1) as f64) / 2.0
}

impl Contingency {
    pub fn new(truth: &[usize], pred: &[usize]) -> Result<Self> {
        if truth.len() != pred.len() {
            return Err(Error::Shape(format!(
                "truth has {} labels, prediction has {}",
                truth.len(),
                pred.len()
            )));
        }
        if truth.is_empty() {
            return Err(Error::InvalidParameter("cannot score empty labelings".into()));
        }
        let (t, rows) = compact(truth);
        let (p, cols) = compact(pred);
        let mut counts = vec![vec![0u64; cols]; rows];
        for (&i, &j) in t.iter().zip(&p) {
            counts[i][j] += 1;
        }
        let row_sums = counts.iter().map(|r| r.iter().sum()).collect();
        let col_sums = (0..cols).map(|j| counts.iter().map(|r| r[j]).sum()).collect();
        Ok(Contingency {
            counts,
            row_sums,
            col_sums,
            n: truth.len() as u64,
        })
    }

    /// Best one-to-one matching of clusters to classes, as a fraction of n.
    pub fn accuracy(&self) -> f64 {
        let size = self.counts.len().max(self.col_sums.len());
        let mut profit = vec![vec![0i64; size]; size];
        for (i, row) in self.counts.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                profit[i][j] = c as i64;
            }
        }
        let matched = max_weight_matching(&profit);
        matched as f64 / self.n as f64
    }

    /// Mutual information over the geometric mean of the entropies.
    pub fn nmi(&self) -> f64 {
        let n = self.n as f64;
        let entropy = |sums: &[u64]| -> f64 {
            sums.iter()
                .filter(|&&c| c > 0)
                .map(|&c| {
                    let p = c as f64 / n;
                    -p * p.ln()
                })
                .sum()
        };
        let (ht, hp) = (entropy(&self.row_sums), entropy(&self.col_sums));
        if ht == 0.0 && hp == 0.0 {
            // both single-cluster, hence identical
            return 1.0;
        }
        if ht == 0.0 || hp == 0.0 {
            return 0.0;
        }
        let mut mi = 0.0;
        for (i, row) in self.counts.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                if c > 0 {
                    let c = c as f64;
                    mi += c / n * (c * n / (self.row_sums[i] as f64 * self.col_sums[j] as f64)).ln();
                }
            }
        }
        (mi / (ht * hp).sqrt()).clamp(0.0, 1.0)
    }

    /// Fraction of samples in the majority class of their cluster.
    pub fn purity(&self) -> f64 {
        let majority: u64 = (0..self.col_sums.len())
            .map(|j| self.counts.iter().map(|r| r[j]).max().unwrap_or(0))
            .sum();
        majority as f64 / self.n as f64
    }

    /// Pair-counting F1: `2TP / (2TP + FP + FN)`.
    pub fn pairwise_f1(&self) -> f64 {
        let tp: f64 = self.counts.iter().flatten().map(|&c| pairs(c)).sum();
        let truth_pairs: f64 = self.row_sums.iter().map(|&c| pairs(c)).sum();
        let pred_pairs: f64 = self.col_sums.iter().map(|&c| pairs(c)).sum();
        if truth_pairs + pred_pairs == 0.0 {
            return 1.0;
        }
        2.0 * tp / (truth_pairs + pred_pairs)
    }

    /// Adjusted Rand index.
    pub fn ari(&self) -> f64 {
        let index: f64 = self.counts.iter().flatten().map(|&c| pairs(c)).sum();
        let a: f64 = self.row_sums.iter().map(|&c| pairs(c)).sum();
        let b: f64 = self.col_sums.iter().map(|&c| pairs(c)).sum();
        let total = pairs(self.n);
        let expected = if total > 0.0 { a * b / total } else { 0.0 };
        let max = 0.5 * (a + b);
        let denom = max - expected;
        if denom == 0.0 {
            return 1.0;
        }
        (index - expected) / denom
    }
}

/// Maximum total profit of a perfect matching on a square matrix
/// (Hungarian algorithm with potentials, `O(n³)`).
pub fn max_weight_matching(profit: &[Vec<i64>]) -> i64 {
    let n = profit.len();
    if n == 0 {
        return 0;
    }
    let top = profit.iter().flatten().copied().max().unwrap_or(0);
    // minimize cost = top - profit; 1-based arrays with a virtual column 0
    let cost = |i: usize, j: usize| top - profit[i - 1][j - 1];
    let inf = i64::MAX / 4;
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost(i0, j) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    (1..=n).map(|j| profit[owner[j] - 1][j - 1]).sum()
}

pub fn accuracy(truth: &[usize], pred: &[usize]) -> Result<f64> {
    Ok(Contingency::new(truth, pred)?.accuracy())
}

pub fn nmi(truth: &[usize], pred: &[usize]) -> Result<f64> {
    Ok(Contingency::new(truth, pred)?.nmi())
}

pub fn purity(truth: &[usize], pred: &[usize]) -> Result<f64> {
    Ok(Contingency::new(truth, pred)?.purity())
}

pub fn pairwise_f1(truth: &[usize], pred: &[usize]) -> Result<f64> {
    Ok(Contingency::new(truth, pred)?.pairwise_f1())
}

pub fn ari(truth: &[usize], pred: &[usize]) -> Result<f64> {
    Ok(Contingency::new(truth, pred)?.ari())
}

#[cfg(test)]
mod tests {
    use super::*;

    const T: [usize; 4] = [0, 0, 1, 1];

    #[test]
    fn accuracy_examples() {
        assert_eq!(accuracy(&T, &[1, 1, 0, 0]).unwrap(), 1.0);
        assert_eq!(accuracy(&T, &[0, 1, 1, 1]).unwrap(), 0.75);
        assert_eq!(accuracy(&T, &T).unwrap(), 1.0);
    }

    #[test]
    fn nmi_examples() {
        assert!((nmi(&T, &[5, 5, 9, 9]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(nmi(&T, &[0, 1, 0, 1]).unwrap(), 0.0);
        // direct summation: contingency [[1,1],[0,2]], H(T) = ln 2,
        // H(P) = -(1/4 ln 1/4 + 3/4 ln 3/4)
        let ht = 2f64.ln();
        let hp = -(0.25 * 0.25f64.ln() + 0.75 * 0.75f64.ln());
        let mi = 0.25 * (0.25f64 / (0.5 * 0.25)).ln() + 0.25 * (0.25f64 / (0.5 * 0.75)).ln() + 0.5 * (0.5f64 / (0.5 * 0.75)).ln();
        assert!((nmi(&T, &[0, 1, 1, 1]).unwrap() - mi / (ht * hp).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn nmi_degenerate() {
        assert_eq!(nmi(&[0, 0, 0], &[1, 1, 1]).unwrap(), 1.0);
        assert_eq!(nmi(&[0, 0, 0], &[0, 1, 1]).unwrap(), 0.0);
    }

    #[test]
    fn purity_examples() {
        assert_eq!(purity(&T, &T).unwrap(), 1.0);
        assert_eq!(purity(&T, &[0, 0, 0, 0]).unwrap(), 0.5);
        assert_eq!(purity(&T, &[0, 1, 1, 1]).unwrap(), 0.75);
    }

    #[test]
    fn f1_examples() {
        assert_eq!(pairwise_f1(&T, &T).unwrap(), 1.0);
        assert_eq!(pairwise_f1(&T, &[0, 1, 0, 1]).unwrap(), 0.0);
        assert!((pairwise_f1(&T, &[0, 0, 0, 1]).unwrap() - 0.4).abs() < 1e-15);
        assert_eq!(pairwise_f1(&[0, 1, 2], &[2, 1, 0]).unwrap(), 1.0);
    }

    #[test]
    fn ari_examples() {
        assert_eq!(ari(&T, &T).unwrap(), 1.0);
        // index = 0, a = b = 2, total = 6, expected = 2/3, max = 2
        let expect = (0.0 - 2.0 / 3.0) / (2.0 - 2.0 / 3.0);
        assert!((ari(&T, &[0, 1, 0, 1]).unwrap() - expect).abs() < 1e-15);
        assert!(ari(&T, &[0, 0, 0, 0]).unwrap().abs() < 1e-15);
    }

    #[test]
    fn errors() {
        assert!(accuracy(&[0, 1], &[0]).is_err());
        assert!(accuracy(&[], &[]).is_err());
    }

    #[test]
    fn rectangular_matching() {
        // three predicted clusters, two classes
        assert_eq!(accuracy(&[0, 0, 0, 1, 1, 1], &[0, 0, 2, 1, 1, 1]).unwrap(), 5.0 / 6.0);
        assert_eq!(max_weight_matching(&[vec![1, 5], vec![4, 1]]), 9);
    }
}
