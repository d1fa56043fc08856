//! Full-reference image-quality metrics.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::image::ImageGrid;

/// Reports print PSNR values above this (including infinity) as the cap.
pub const PSNR_REPORT_CAP_DB: f64 = 99.0;

pub fn mse(a: &ImageGrid, b: &ImageGrid) -> Result<f64> {
    a.check_same_shape(b)?;
    Ok(a.data().iter().zip(b.data()).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.data().len() as f64)
}

/// `10·log₁₀(MAX²/MSE)`; infinite for identical images.
pub fn psnr(a: &ImageGrid, b: &ImageGrid, max_value: f64) -> Result<f64> {
    if !(max_value > 0.0) {
        return Err(Error::invalid("PSNR dynamic range must be positive"));
    }
    Ok(psnr_from_mse(mse(a, b)?, max_value))
}

pub fn psnr_from_mse(mse: f64, max_value: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (max_value * max_value / mse).log10()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SsimParams {
    pub window: usize,
    pub k1: f64,
    pub k2: f64,
    /// Dynamic range `L`.
    pub dynamic_range: f64,
}

impl Default for SsimParams {
    fn default() -> Self {
        Self {
            window: 8,
            k1: 0.01,
            k2: 0.03,
            dynamic_range: 1.0,
        }
    }
}

/// Mean SSIM over every `window × window` uniform window at stride 1,
/// using population statistics.
pub fn ssim(a: &ImageGrid, b: &ImageGrid, params: &SsimParams) -> Result<f64> {
    a.check_same_shape(b)?;
    let w = params.window;
    let (width, height) = (a.width(), a.height());
    if w == 0 || w > width.min(height) {
        return Err(Error::invalid(format!(
            "SSIM window {w} does not fit a {width}x{height} image"
        )));
    }
    let c1 = (params.k1 * params.dynamic_range).powi(2);
    let c2 = (params.k2 * params.dynamic_range).powi(2);
    let (x, y) = (a.data(), b.data());
    let n = (w * w) as f64;
    let mut total = 0.0;
    let mut count = 0usize;
    for r in 0..=height - w {
        for c in 0..=width - w {
            let (mut sx, mut sy) = (0.0, 0.0);
            for i in 0..w {
                let row = (r + i) * width + c;
                sx += x[row..row + w].iter().sum::<f64>();
                sy += y[row..row + w].iter().sum::<f64>();
            }
            let (mx, my) = (sx / n, sy / n);
            let (mut vx, mut vy, mut cov) = (0.0, 0.0, 0.0);
            for i in 0..w {
                let row = (r + i) * width + c;
                for (p, q) in x[row..row + w].iter().zip(&y[row..row + w]) {
                    let (dx, dy) = (p - mx, q - my);
                    vx += dx * dx;
                    vy += dy * dy;
                    cov += dx * dy;
                }
            }
            let (vx, vy, cov) = (vx / n, vy / n, cov / n);
            total += (2.0 * mx * my + c1) * (2.0 * cov + c2)
                / ((mx * mx + my * my + c1) * (vx + vy + c2));
            count += 1;
        }
    }
    Ok(total / count as f64)
}
