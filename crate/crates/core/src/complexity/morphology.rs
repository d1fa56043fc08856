//! Morphological richness of binary images.

use crate::error::{Error, Result};
use crate::image::ImageGrid;

/// Share of the 512 possible 3×3 binary windows present among all stride-1
/// windows of the `width × height` bit raster.
pub fn morphological_richness_bits(width: usize, height: usize, bits: &[bool]) -> Result<f64> {
    if width < 3 || height < 3 {
        return Err(Error::invalid("morphological richness needs at least a 3x3 image"));
    }
    if bits.len() != width * height {
        return Err(Error::DimensionMismatch(format!(
            "{} bits for a {width}x{height} image",
            bits.len()
        )));
    }
    let mut seen = [false; 512];
    for r in 0..height - 2 {
        for c in 0..width - 2 {
            let mut key = 0usize;
            for dr in 0..3 {
                for dc in 0..3 {
                    key = (key << 1) | bits[(r + dr) * width + c + dc] as usize;
                }
            }
            seen[key] = true;
        }
    }
    Ok(seen.iter().filter(|&&s| s).count() as f64 / 512.0)
}

/// Richness of an image read as binary (non-zero pixels are set).
pub fn morphological_richness(img: &ImageGrid) -> Result<f64> {
    let bits: Vec<bool> = img.data().iter().map(|&v| v != 0.0).collect();
    morphological_richness_bits(img.width(), img.height(), &bits)
}

/// Richness of `img ≥ t_k` for `n_thresholds` thresholds spaced evenly from
/// the image minimum to its maximum, both included.
pub fn mr_signal(img: &ImageGrid, n_thresholds: usize) -> Result<Vec<f64>> {
    if n_thresholds < 8 {
        return Err(Error::invalid("the richness signal needs at least 8 thresholds"));
    }
    let (lo, hi) = img.min_max();
    if !(hi > lo) {
        return Err(Error::Degenerate("richness signal of a constant image".into()));
    }
    (0..n_thresholds)
        .map(|k| {
            let t = lo + k as f64 * (hi - lo) / (n_thresholds - 1) as f64;
            let bits: Vec<bool> = img.data().iter().map(|&v| v >= t).collect();
            morphological_richness_bits(img.width(), img.height(), &bits)
        })
        .collect()
}
