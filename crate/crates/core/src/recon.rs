//! Filtered back-projection.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::image::{ImageGrid, ValueSemantics};
use crate::projector::Sinogram;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterWindow {
    #[default]
    RamLak,
    /// Ram-Lak apodised by 0.54 + 0.46·cos ω.
    Hamming,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ReconOptions {
    pub window: FilterWindow,
    /// Output pixel pitch in mm; defaults to the detector spacing.
    pub pixel_size_mm: Option<f64>,
}

/// Ram-Lak tap `k` for detector pitch `spacing` (any length unit).
pub fn ramlak_tap(k: i64, spacing: f64) -> f64 {
    if k == 0 {
        1.0 / (4.0 * spacing * spacing)
    } else if k % 2 == 0 {
        0.0
    } else {
        let d = std::f64::consts::PI * k as f64 * spacing;
        -1.0 / (d * d)
    }
}

fn tap(k: i64, spacing: f64, window: FilterWindow) -> f64 {
    match window {
        FilterWindow::RamLak => ramlak_tap(k, spacing),
        FilterWindow::Hamming => {
            0.54 * ramlak_tap(k, spacing)
                + 0.23 * (ramlak_tap(k - 1, spacing) + ramlak_tap(k + 1, spacing))
        }
    }
}

/// Linear convolution of `row` with the filter kernel, truncated to the
/// row's support (zero padding outside). Output is `Σ_j h(i−j)·p(j)`,
/// without the `spacing` quadrature weight.
pub fn ramp_filter(row: &[f64], spacing: f64, window: FilterWindow) -> Result<Vec<f64>> {
    let n = row.len();
    if n < 2 {
        return Err(Error::invalid("ramp filter needs at least two samples"));
    }
    if !(spacing > 0.0) {
        return Err(Error::invalid("detector spacing must be positive"));
    }
    let kernel: Vec<f64> = (-(n as i64 - 1)..n as i64)
        .map(|k| tap(k, spacing, window))
        .collect();
    let centre = n - 1;
    Ok((0..n)
        .map(|i| {
            row.iter()
                .enumerate()
                .map(|(j, p)| kernel[centre + i - j] * p)
                .sum()
        })
        .collect())
}

/// Reconstructs an `out_size × out_size` attenuation map (1/cm) from a
/// parallel sinogram whose entries are dimensionless line integrals.
pub fn inverse_radon(sino: &Sinogram, out_size: usize, options: &ReconOptions) -> Result<ImageGrid> {
    let g = *sino.geometry();
    if g.is_fan() {
        return Err(Error::Geometry(
            "fan-beam sinogram: rebin to parallel before reconstruction".into(),
        ));
    }
    if out_size < 16 {
        return Err(Error::invalid("output size must be at least 16 pixels"));
    }
    let spacing_cm = g.detector_spacing_mm / 10.0;
    let pixel_mm = options.pixel_size_mm.unwrap_or(g.detector_spacing_mm);
    if !(pixel_mm > 0.0) {
        return Err(Error::invalid("pixel size must be positive"));
    }
    let nd = g.n_detectors;
    let filtered = (0..g.n_angles)
        .into_par_iter()
        .map(|a| ramp_filter(sino.row(a), spacing_cm, options.window))
        .collect::<Result<Vec<_>>>()?;
    let trig: Vec<(f64, f64)> = (0..g.n_angles)
        .map(|a| {
            let t = g.angle_rad(a);
            (t.cos(), t.sin())
        })
        .collect();
    let half = (out_size as f64 - 1.0) / 2.0;
    let det_centre = (nd as f64 - 1.0) / 2.0;
    let scale = spacing_cm * std::f64::consts::PI / g.n_angles as f64;

    let data: Vec<f64> = (0..out_size)
        .into_par_iter()
        .flat_map_iter(|r| {
            let y = (half - r as f64) * pixel_mm;
            let filtered = &filtered;
            let trig = &trig;
            (0..out_size).map(move |c| {
                let x = (c as f64 - half) * pixel_mm;
                let mut acc = 0.0;
                for (q, &(cos, sin)) in filtered.iter().zip(trig) {
                    let f = (x * cos + y * sin) / g.detector_spacing_mm + det_centre;
                    if f < 0.0 || f > (nd - 1) as f64 {
                        continue;
                    }
                    let i0 = (f.floor() as usize).min(nd - 2);
                    let w = f - i0 as f64;
                    acc += (1.0 - w) * q[i0] + w * q[i0 + 1];
                }
                acc * scale
            })
        })
        .collect();
    ImageGrid::new(out_size, out_size, pixel_mm, ValueSemantics::LinearAttenuation, data)
}
