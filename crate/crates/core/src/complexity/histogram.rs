//! Scott's-rule binning.

use crate::error::{Error, Result};

use super::{check_series, mean_std};

/// Scott bin width `3.5σ/n^{1/3}` (population σ) and the bin count
/// `⌈(max − min)/h⌉`, at least one.
pub fn scott_bins(s: &[f64]) -> Result<(f64, usize)> {
    check_series(s, 2, "Scott binning")?;
    let (_, sigma) = mean_std(s);
    if !(sigma > 0.0) {
        return Err(Error::Degenerate("Scott binning of a constant series".into()));
    }
    let (lo, hi) = min_max(s);
    Ok(scott_rule(sigma, s.len(), hi - lo))
}

/// Scott width and bin count from summary statistics.
pub fn scott_rule(sigma: f64, n: usize, range: f64) -> (f64, usize) {
    let h = 3.5 * sigma / (n as f64).cbrt();
    (h, ((range / h).ceil() as usize).max(1))
}

pub(crate) fn min_max(s: &[f64]) -> (f64, f64) {
    s.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    /// `k` equal bins over `[min, max]`; the last bin is closed.
    pub fn uniform(s: &[f64], k: usize) -> Result<Self> {
        check_series(s, 1, "histogram")?;
        if k == 0 {
            return Err(Error::invalid("histogram needs at least one bin"));
        }
        let (lo, hi) = min_max(s);
        let width = if hi > lo { (hi - lo) / k as f64 } else { 1.0 };
        let edges = (0..=k).map(|i| lo + i as f64 * width).collect();
        let mut counts = vec![0; k];
        for &v in s {
            counts[bin_index(v, lo, width, k)] += 1;
        }
        Ok(Self { edges, counts })
    }

    pub fn scott(s: &[f64]) -> Result<Self> {
        let (_, k) = scott_bins(s)?;
        Self::uniform(s, k)
    }

    pub fn centres(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }
}

pub(crate) fn bin_index(v: f64, lo: f64, width: f64, k: usize) -> usize {
    (((v - lo) / width).floor().max(0.0) as usize).min(k - 1)
}

/// Per-value bin indices over `k` equal bins spanning the series range.
pub fn bin_series(s: &[f64], k: usize) -> Vec<usize> {
    let (lo, hi) = min_max(s);
    let width = if hi > lo { (hi - lo) / k as f64 } else { 1.0 };
    s.iter().map(|&v| bin_index(v, lo, width, k)).collect()
}

/// Joint count table `counts[x_bin][y_bin]` with each series binned by its
/// own Scott rule.
pub fn joint_counts(x: &[f64], y: &[f64]) -> Result<Vec<Vec<u64>>> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(format!("{} vs {} values", x.len(), y.len())));
    }
    let (_, kx) = scott_bins(x)?;
    let (_, ky) = scott_bins(y)?;
    let mut table = vec![vec![0u64; ky]; kx];
    for (bx, by) in bin_series(x, kx).into_iter().zip(bin_series(y, ky)) {
        table[bx][by] += 1;
    }
    Ok(table)
}
