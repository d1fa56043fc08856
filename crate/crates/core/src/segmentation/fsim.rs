//! Feature similarity from phase congruency and gradient magnitude.
//!
//! Phase congruency follows Kovesi's log-Gabor construction with a reduced
//! filter bank; gradients use the Scharr operator.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::image::ImageGrid;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FsimParams {
    pub scales: usize,
    pub orientations: usize,
    pub min_wavelength: f64,
    pub mult: f64,
    pub sigma_on_f: f64,
    pub d_theta_on_sigma: f64,
    /// Noise threshold in standard deviations above the mean noise energy.
    pub k: f64,
    /// PC similarity constant.
    pub t1: f64,
    /// Gradient similarity constant for data in `[0, 1]`.
    pub t2: f64,
}

impl Default for FsimParams {
    fn default() -> Self {
        Self {
            scales: 4,
            orientations: 4,
            min_wavelength: 6.0,
            mult: 2.0,
            sigma_on_f: 0.55,
            d_theta_on_sigma: 1.2,
            k: 2.0,
            t1: 0.85,
            t2: 160.0 / (255.0 * 255.0),
        }
    }
}

const EPSILON: f64 = 1e-4;

struct Fft2 {
    rows: usize,
    cols: usize,
    row_fwd: std::sync::Arc<dyn rustfft::Fft<f64>>,
    row_inv: std::sync::Arc<dyn rustfft::Fft<f64>>,
    col_fwd: std::sync::Arc<dyn rustfft::Fft<f64>>,
    col_inv: std::sync::Arc<dyn rustfft::Fft<f64>>,
}

impl Fft2 {
    fn new(rows: usize, cols: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            rows,
            cols,
            row_fwd: planner.plan_fft_forward(cols),
            row_inv: planner.plan_fft_inverse(cols),
            col_fwd: planner.plan_fft_forward(rows),
            col_inv: planner.plan_fft_inverse(rows),
        }
    }

    fn run(&self, data: &mut [Complex<f64>], inverse: bool) {
        let (row_fft, col_fft) = if inverse {
            (&self.row_inv, &self.col_inv)
        } else {
            (&self.row_fwd, &self.col_fwd)
        };
        for row in data.chunks_mut(self.cols) {
            row_fft.process(row);
        }
        let mut col = vec![Complex::new(0.0, 0.0); self.rows];
        for c in 0..self.cols {
            for r in 0..self.rows {
                col[r] = data[r * self.cols + c];
            }
            col_fft.process(&mut col);
            for r in 0..self.rows {
                data[r * self.cols + c] = col[r];
            }
        }
        if inverse {
            let scale = 1.0 / (self.rows * self.cols) as f64;
            data.iter_mut().for_each(|v| *v *= scale);
        }
    }
}

/// Normalised frequency of index `i` on an axis of length `n`, laid out in
/// unshifted FFT order.
fn freq(i: usize, n: usize) -> f64 {
    let shifted = (i + n / 2) % n;
    (shifted as f64 - (n / 2) as f64) / n as f64
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Phase congruency map of a `rows × cols` row-major image.
pub fn phase_congruency(data: &[f64], rows: usize, cols: usize, p: &FsimParams) -> Vec<f64> {
    let n = rows * cols;
    let fft = Fft2::new(rows, cols);
    let mut spectrum: Vec<Complex<f64>> = data.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fft.run(&mut spectrum, false);

    let mut radius = vec![0.0; n];
    let mut theta = vec![0.0; n];
    for r in 0..rows {
        for c in 0..cols {
            let (x, y) = (freq(c, cols), freq(r, rows));
            radius[r * cols + c] = (x * x + y * y).sqrt();
            theta[r * cols + c] = (-y).atan2(x);
        }
    }
    // avoid ln 0 at DC; its filter value is zeroed below
    radius[0] = 1.0;
    let lowpass: Vec<f64> = radius
        .iter()
        .map(|&r| 1.0 / (1.0 + (r / 0.45).powi(30)))
        .collect();
    let log_sigma = 2.0 * p.sigma_on_f.ln().powi(2);
    let log_gabor: Vec<Vec<f64>> = (0..p.scales)
        .map(|s| {
            let fo = 1.0 / (p.min_wavelength * p.mult.powi(s as i32));
            let mut g: Vec<f64> = radius
                .iter()
                .zip(&lowpass)
                .map(|(&r, &lp)| (-(r / fo).ln().powi(2) / log_sigma).exp() * lp)
                .collect();
            g[0] = 0.0;
            g
        })
        .collect();
    let theta_sigma = std::f64::consts::PI / p.orientations as f64 / p.d_theta_on_sigma;

    let mut energy_all = vec![0.0; n];
    let mut an_all = vec![0.0; n];
    for o in 0..p.orientations {
        let angle = o as f64 * std::f64::consts::PI / p.orientations as f64;
        let (ca, sa) = (angle.cos(), angle.sin());
        let spread: Vec<f64> = theta
            .iter()
            .map(|&t| {
                let ds = t.sin() * ca - t.cos() * sa;
                let dc = t.cos() * ca + t.sin() * sa;
                let d = ds.atan2(dc).abs();
                (-d * d / (2.0 * theta_sigma * theta_sigma)).exp()
            })
            .collect();
        let mut sum_e = vec![0.0; n];
        let mut sum_o = vec![0.0; n];
        let mut sum_an = vec![0.0; n];
        let mut responses = Vec::with_capacity(p.scales);
        let mut spatial_filters = Vec::with_capacity(p.scales);
        let mut em_n = 0.0;
        for (s, lg) in log_gabor.iter().enumerate() {
            let filter: Vec<f64> = lg.iter().zip(&spread).map(|(a, b)| a * b).collect();
            if s == 0 {
                em_n = filter.iter().map(|f| f * f).sum::<f64>();
            }
            let mut spatial: Vec<Complex<f64>> =
                filter.iter().map(|&f| Complex::new(f, 0.0)).collect();
            fft.run(&mut spatial, true);
            let root_n = (n as f64).sqrt();
            spatial_filters.push(spatial.iter().map(|v| v.re * root_n).collect::<Vec<f64>>());
            let mut eo: Vec<Complex<f64>> =
                spectrum.iter().zip(&filter).map(|(v, &f)| v * f).collect();
            fft.run(&mut eo, true);
            for i in 0..n {
                sum_e[i] += eo[i].re;
                sum_o[i] += eo[i].im;
                sum_an[i] += eo[i].norm();
            }
            responses.push(eo);
        }
        let mut energy = vec![0.0; n];
        for i in 0..n {
            let x = (sum_e[i] * sum_e[i] + sum_o[i] * sum_o[i]).sqrt() + EPSILON;
            let (me, mo) = (sum_e[i] / x, sum_o[i] / x);
            for eo in &responses {
                let (e, od) = (eo[i].re, eo[i].im);
                energy[i] += e * me + od * mo - (e * mo - od * me).abs();
            }
        }
        let mut e2: Vec<f64> = responses[0].iter().map(|v| v.norm_sqr()).collect();
        let mean_e2n = -median(&mut e2) / 0.5f64.ln();
        let noise_power = if em_n > 0.0 { mean_e2n / em_n } else { 0.0 };
        let mut sum_an2 = 0.0;
        let mut sum_aiaj = 0.0;
        for si in 0..p.scales {
            sum_an2 += spatial_filters[si].iter().map(|v| v * v).sum::<f64>();
            for sj in si + 1..p.scales {
                sum_aiaj += spatial_filters[si]
                    .iter()
                    .zip(&spatial_filters[sj])
                    .map(|(a, b)| a * b)
                    .sum::<f64>();
            }
        }
        let noise_energy2 = 2.0 * noise_power * sum_an2 + 4.0 * noise_power * sum_aiaj;
        let tau = (noise_energy2 / 2.0).max(0.0).sqrt();
        let noise_mean = tau * (std::f64::consts::PI / 2.0).sqrt();
        let noise_sigma = ((2.0 - std::f64::consts::PI / 2.0) * tau * tau).sqrt();
        let t = (noise_mean + p.k * noise_sigma) / 1.7;
        for i in 0..n {
            energy_all[i] += (energy[i] - t).max(0.0);
            an_all[i] += sum_an[i];
        }
    }
    energy_all
        .iter()
        .zip(&an_all)
        .map(|(e, a)| if *a > 0.0 { e / a } else { 0.0 })
        .collect()
}

/// Scharr gradient magnitude with zero padding.
pub fn gradient_magnitude(data: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let at = |r: isize, c: isize| -> f64 {
        if r < 0 || c < 0 || r >= rows as isize || c >= cols as isize {
            0.0
        } else {
            data[r as usize * cols + c as usize]
        }
    };
    let mut out = vec![0.0; rows * cols];
    for r in 0..rows as isize {
        for c in 0..cols as isize {
            let gx = (3.0 * (at(r - 1, c + 1) - at(r - 1, c - 1))
                + 10.0 * (at(r, c + 1) - at(r, c - 1))
                + 3.0 * (at(r + 1, c + 1) - at(r + 1, c - 1)))
                / 16.0;
            let gy = (3.0 * (at(r + 1, c - 1) - at(r - 1, c - 1))
                + 10.0 * (at(r + 1, c) - at(r - 1, c))
                + 3.0 * (at(r + 1, c + 1) - at(r - 1, c + 1)))
                / 16.0;
            out[r as usize * cols + c as usize] = (gx * gx + gy * gy).sqrt();
        }
    }
    out
}

/// `Σ S_PC·S_G·PC_m / Σ PC_m` with `PC_m = max(PC_a, PC_b)`.
pub fn fsim(a: &ImageGrid, b: &ImageGrid, params: &FsimParams) -> Result<f64> {
    a.check_same_shape(b)?;
    let (rows, cols) = (a.height(), a.width());
    if rows < 32 || cols < 32 {
        return Err(Error::invalid("FSIM needs images of at least 32x32"));
    }
    let pc_a = phase_congruency(a.data(), rows, cols, params);
    let pc_b = phase_congruency(b.data(), rows, cols, params);
    let g_a = gradient_magnitude(a.data(), rows, cols);
    let g_b = gradient_magnitude(b.data(), rows, cols);
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..rows * cols {
        let pcm = pc_a[i].max(pc_b[i]);
        let s_pc = (2.0 * pc_a[i] * pc_b[i] + params.t1)
            / (pc_a[i] * pc_a[i] + pc_b[i] * pc_b[i] + params.t1);
        let s_g = (2.0 * g_a[i] * g_b[i] + params.t2) / (g_a[i] * g_a[i] + g_b[i] * g_b[i] + params.t2);
        num += s_pc * s_g * pcm;
        den += pcm;
    }
    if !(den > 0.0) {
        return Err(Error::Degenerate("no phase congruency in either image".into()));
    }
    Ok(num / den)
}
