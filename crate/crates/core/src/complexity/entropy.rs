//! Regularity statistics over series. All logarithms are natural.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};

use super::check_series;
use super::histogram::bin_series;

fn check_embedding(s: &[f64], m: usize, r: f64, what: &str) -> Result<()> {
    check_series(s, m + 2, what)?;
    if m == 0 {
        return Err(Error::invalid(format!("{what} needs an embedding dimension ≥ 1")));
    }
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::invalid(format!("{what} tolerance must be non-negative, got {r}")));
    }
    Ok(())
}

fn chebyshev(s: &[f64], i: usize, j: usize, m: usize) -> f64 {
    (0..m).map(|k| (s[i + k] - s[j + k]).abs()).fold(0.0, f64::max)
}

fn apen_phi(s: &[f64], m: usize, r: f64) -> f64 {
    let nt = s.len() - m + 1;
    (0..nt)
        .map(|i| {
            let c = (0..nt).filter(|&j| chebyshev(s, i, j, m) <= r).count();
            (c as f64 / nt as f64).ln()
        })
        .sum::<f64>()
        / nt as f64
}

/// `Φ^m(r) − Φ^{m+1}(r)` with self-matches counted and matches at `d ≤ r`.
pub fn approximate_entropy(s: &[f64], m: usize, r: f64) -> Result<f64> {
    check_embedding(s, m, r, "approximate entropy")?;
    if r == 0.0 {
        return Err(Error::invalid("approximate entropy tolerance must be positive"));
    }
    Ok(apen_phi(s, m, r) - apen_phi(s, m + 1, r))
}

/// Template-match counts `(A, B)` over the first `n − m` templates:
/// pairs `i < j` matching (`d < r`) at length `m + 1` and at length `m`.
pub fn sample_entropy_counts(s: &[f64], m: usize, r: f64) -> (u64, u64) {
    let nt = s.len() - m;
    let (mut a, mut b) = (0u64, 0u64);
    for i in 0..nt {
        for j in i + 1..nt {
            if chebyshev(s, i, j, m) < r {
                b += 1;
                if (s[i + m] - s[j + m]).abs() < r {
                    a += 1;
                }
            }
        }
    }
    (a, b)
}

/// `−ln(A/B)`, self-matches excluded. Fails with
/// [`Error::InsufficientMatches`] when either count is zero.
pub fn sample_entropy(s: &[f64], m: usize, r: f64) -> Result<f64> {
    check_embedding(s, m, r, "sample entropy")?;
    let (a, b) = sample_entropy_counts(s, m, r);
    if a == 0 || b == 0 {
        return Err(Error::InsufficientMatches { a, b });
    }
    Ok(-(a as f64 / b as f64).ln())
}

fn fuzzy_phi(s: &[f64], k: usize, nt: usize, n_grad: i32, r: f64) -> f64 {
    let templates: Vec<Vec<f64>> = (0..nt)
        .map(|i| {
            let w = &s[i..i + k];
            let mean = w.iter().sum::<f64>() / k as f64;
            w.iter().map(|v| v - mean).collect()
        })
        .collect();
    let mut total = 0.0;
    for i in 0..nt {
        let mut row = 0.0;
        for j in 0..nt {
            if i == j {
                continue;
            }
            let d = templates[i]
                .iter()
                .zip(&templates[j])
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            row += (-d.powi(n_grad) / r).exp();
        }
        total += row / (nt - 1) as f64;
    }
    total / nt as f64
}

/// `ln φ^m − ln φ^{m+1}` with mean-centred templates and similarity
/// `exp(−d^n_grad / r)`.
pub fn fuzzy_entropy(s: &[f64], m: usize, n_grad: u32, r: f64) -> Result<f64> {
    check_embedding(s, m, r, "fuzzy entropy")?;
    if r == 0.0 {
        return Err(Error::invalid("fuzzy entropy tolerance must be positive"));
    }
    if n_grad == 0 {
        return Err(Error::invalid("fuzzy entropy gradient must be at least 1"));
    }
    let nt = s.len() - m;
    let a = fuzzy_phi(s, m, nt, n_grad as i32, r);
    let b = fuzzy_phi(s, m + 1, nt, n_grad as i32, r);
    if !(a > 0.0) || !(b > 0.0) {
        return Err(Error::InsufficientMatches { a: 0, b: 0 });
    }
    Ok(a.ln() - b.ln())
}

/// Shannon entropy of the ordinal patterns of every window of `order`
/// values; ties keep index order.
pub fn permutation_entropy(s: &[f64], order: usize) -> Result<f64> {
    if !(2..=7).contains(&order) {
        return Err(Error::invalid(format!("permutation order must lie in 2..=7, got {order}")));
    }
    check_series(s, order + 1, "permutation entropy")?;
    let mut counts: BTreeMap<Vec<u8>, u64> = BTreeMap::new();
    let mut idx: Vec<u8> = Vec::with_capacity(order);
    for w in s.windows(order) {
        idx.clear();
        idx.extend(0..order as u8);
        idx.sort_by(|&a, &b| w[a as usize].total_cmp(&w[b as usize]));
        *counts.entry(idx.clone()).or_insert(0) += 1;
    }
    Ok(shannon(counts.values().copied()))
}

fn shannon(counts: impl Iterator<Item = u64> + Clone) -> f64 {
    let total: u64 = counts.clone().sum();
    let t = total as f64;
    counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / t;
            -p * p.ln()
        })
        .sum::<f64>()
        .max(0.0)
}

/// `H(Y|X) = Σ p(x,y)·ln(p(x)/p(x,y))` for `joint[x][y]` counts.
pub fn conditional_entropy(joint: &[Vec<u64>]) -> Result<f64> {
    let total: u64 = joint.iter().flatten().sum();
    if total == 0 {
        return Err(Error::invalid("joint table is empty"));
    }
    let t = total as f64;
    let mut h = 0.0;
    for row in joint {
        let px = row.iter().sum::<u64>() as f64 / t;
        for &c in row {
            if c > 0 {
                let pxy = c as f64 / t;
                h += pxy * (px / pxy).ln();
            }
        }
    }
    Ok(h.max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CceTerm {
    pub l: usize,
    /// Shannon entropy of the length-`l` patterns.
    pub shannon: f64,
    pub conditional: f64,
    /// Fraction of length-`l` patterns seen exactly once.
    pub singletons: f64,
    pub cce: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CceProfile {
    pub min: f64,
    pub argmin: usize,
    pub terms: Vec<CceTerm>,
}

/// `CCE(L) = CE(L) + perc(L)·Ê(1)` for `L = 1..=l_max` after uniform
/// quantisation to `bins` symbols.
pub fn corrected_conditional_entropy(s: &[f64], l_max: usize, bins: usize) -> Result<CceProfile> {
    if l_max < 2 || bins < 2 {
        return Err(Error::invalid("CCE needs l_max ≥ 2 and bins ≥ 2"));
    }
    check_series(s, l_max * bins, "corrected conditional entropy")?;
    let symbols = bin_series(s, bins);
    let mut terms = Vec::with_capacity(l_max);
    let mut prev = 0.0;
    let mut e1 = 0.0;
    for l in 1..=l_max {
        let mut counts: BTreeMap<&[usize], u64> = BTreeMap::new();
        for w in symbols.windows(l) {
            *counts.entry(w).or_insert(0) += 1;
        }
        let shannon = shannon(counts.values().copied());
        if l == 1 {
            e1 = shannon;
        }
        let singles = counts.values().filter(|&&c| c == 1).count() as f64;
        let singletons = singles / (symbols.len() - l + 1) as f64;
        let conditional = shannon - prev;
        terms.push(CceTerm {
            l,
            shannon,
            conditional,
            singletons,
            cce: conditional + singletons * e1,
        });
        prev = shannon;
    }
    let (argmin, min) = terms
        .iter()
        .map(|t| (t.l, t.cce))
        .fold((0, f64::INFINITY), |best, (l, v)| if v < best.1 { (l, v) } else { best });
    Ok(CceProfile { min, argmin, terms })
}
