//! Direct-definition metric oracles for small labelings.

/// Every labeling of `n` items into at most `k` blocks, as restricted growth strings.
pub fn growth_strings(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, n: usize, k: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        let next = prefix.iter().max().map_or(0, |m| m + 1);
        for l in 0..=next.min(k - 1) {
            prefix.push(l);
            rec(prefix, n, k, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), n, k, &mut out);
    out
}

pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

pub fn brute_accuracy(t: &[usize], p: &[usize]) -> f64 {
    let k = t.iter().chain(p).max().unwrap() + 1;
    let best = permutations(k)
        .iter()
        .map(|perm| t.iter().zip(p).filter(|(a, b)| perm[**b] == **a).count())
        .max()
        .unwrap();
    best as f64 / t.len() as f64
}

/// Pair counts: (same/same, same-truth only, same-pred only, different/different).
pub fn pair_counts(t: &[usize], p: &[usize]) -> (f64, f64, f64, f64) {
    let (mut a, mut b, mut c, mut d) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..t.len() {
        for j in i + 1..t.len() {
            match (t[i] == t[j], p[i] == p[j]) {
                (true, true) => a += 1.0,
                (true, false) => b += 1.0,
                (false, true) => c += 1.0,
                (false, false) => d += 1.0,
            }
        }
    }
    (a, b, c, d)
}

pub fn brute_ari(t: &[usize], p: &[usize]) -> f64 {
    let (a, b, c, d) = pair_counts(t, p);
    let denom = (a + b) * (b + d) + (a + c) * (c + d);
    if denom == 0.0 {
        return 1.0;
    }
    2.0 * (a * d - b * c) / denom
}

pub fn brute_f1(t: &[usize], p: &[usize]) -> f64 {
    let (a, b, c, _) = pair_counts(t, p);
    if 2.0 * a + b + c == 0.0 {
        return 1.0;
    }
    2.0 * a / (2.0 * a + b + c)
}

pub fn brute_nmi(t: &[usize], p: &[usize]) -> f64 {
    let n = t.len() as f64;
    let prob = |f: &dyn Fn(usize) -> bool| (0..t.len()).filter(|&i| f(i)).count() as f64 / n;
    let labels = |x: &[usize]| {
        let mut v = x.to_vec();
        v.sort_unstable();
        v.dedup();
        v
    };
    let (lt, lp) = (labels(t), labels(p));
    let h = |ls: &[usize], x: &[usize]| -> f64 {
        ls.iter()
            .map(|&l| prob(&|i| x[i] == l))
            .map(|q| -q * q.ln())
            .sum()
    };
    let (ht, hp) = (h(&lt, t), h(&lp, p));
    if ht == 0.0 && hp == 0.0 {
        return 1.0;
    }
    if ht == 0.0 || hp == 0.0 {
        return 0.0;
    }
    let mut mi = 0.0;
    for &a in &lt {
        for &b in &lp {
            let pab = prob(&|i| t[i] == a && p[i] == b);
            if pab > 0.0 {
                mi += pab * (pab / (prob(&|i| t[i] == a) * prob(&|i| p[i] == b))).ln();
            }
        }
    }
    mi / (ht * hp).sqrt()
}
