//! Correlation-based complexity and smoothing.

use crate::error::{Error, Result};
use crate::image::ImageGrid;

use super::check_series;

/// Product-moment correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(format!("{} vs {} values", x.len(), y.len())));
    }
    check_series(x, 2, "Pearson correlation")?;
    check_series(y, 2, "Pearson correlation")?;
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Degenerate("correlation with a constant series".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// 1-based ranks with ties sharing their average rank.
pub fn midranks(s: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[a].total_cmp(&s[b]));
    let mut ranks = vec![0.0; s.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && s[order[j + 1]] == s[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Pearson correlation of midranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(format!("{} vs {} values", x.len(), y.len())));
    }
    check_series(x, 3, "Spearman correlation")?;
    check_series(y, 3, "Spearman correlation")?;
    pearson(&midranks(x), &midranks(y))
}

/// Correlation of an interval HU image with the conventional image.
pub fn nonconstructability(hu: &ImageGrid, cct: &ImageGrid) -> Result<f64> {
    hu.check_same_shape(cct)?;
    pearson(hu.data(), cct.data())
}

/// Correlation of a weighted interval image with the conventional image.
pub fn generative_complexity(whu: &ImageGrid, cct: &ImageGrid) -> Result<f64> {
    whu.check_same_shape(cct)?;
    pearson(whu.data(), cct.data())
}

/// Locally linear regression with tricube weights over the `⌈frac·n⌉`
/// nearest neighbours of each point; no robustness iterations.
pub fn lowess(x: &[f64], y: &[f64], frac: f64) -> Result<Vec<f64>> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(format!("{} vs {} values", x.len(), y.len())));
    }
    check_series(x, 3, "LOWESS")?;
    check_series(y, 3, "LOWESS")?;
    if !(frac > 0.0 && frac <= 1.0) {
        return Err(Error::invalid(format!("LOWESS fraction must lie in (0, 1], got {frac}")));
    }
    let n = x.len();
    let k = ((frac * n as f64).ceil() as usize).clamp(2, n);
    let mut fitted = Vec::with_capacity(n);
    let mut dist: Vec<(f64, usize)> = Vec::with_capacity(n);
    for i in 0..n {
        dist.clear();
        dist.extend(x.iter().enumerate().map(|(j, &xj)| ((xj - x[i]).abs(), j)));
        dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let h = dist[k - 1].0;
        let (mut sw, mut swx, mut swy, mut swxx, mut swxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for &(d, j) in &dist[..k] {
            let w = if h > 0.0 {
                let u = (d / h).min(1.0);
                (1.0 - u * u * u).powi(3)
            } else {
                1.0
            };
            sw += w;
            swx += w * x[j];
            swy += w * y[j];
            swxx += w * x[j] * x[j];
            swxy += w * x[j] * y[j];
        }
        if sw <= 0.0 {
            // only the farthest neighbours carry weight; fall back to equal weights
            let idx: Vec<usize> = dist[..k].iter().map(|&(_, j)| j).collect();
            fitted.push(idx.iter().map(|&j| y[j]).sum::<f64>() / k as f64);
            continue;
        }
        let mx = swx / sw;
        let my = swy / sw;
        let sxx = swxx / sw - mx * mx;
        let sxy = swxy / sw - mx * my;
        let scale = swxx / sw;
        fitted.push(if sxx > 1e-12 * scale.max(f64::MIN_POSITIVE) {
            my + sxy / sxx * (x[i] - mx)
        } else {
            my
        });
    }
    Ok(fitted)
}
