//! Discrete Fourier transform and power spectrum by direct summation.

use std::f64::consts::TAU;

use crate::error::Result;

use super::check_series;

/// All `N` coefficients `F(k) = Σ_t s(t)·e^{−2πikt/N}` as `(re, im)`.
pub fn dft(s: &[f64]) -> Vec<(f64, f64)> {
    let n = s.len();
    // twiddles indexed by (k·t) mod N keep the phase exact for large k·t
    let twiddle: Vec<(f64, f64)> = (0..n)
        .map(|j| {
            let a = TAU * j as f64 / n as f64;
            (a.cos(), -a.sin())
        })
        .collect();
    (0..n)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (t, &v) in s.iter().enumerate() {
                let (c, sn) = twiddle[(k * t) % n];
                re += v * c;
                im += v * sn;
            }
            (re, im)
        })
        .collect()
}

/// `|F(k)|²/N` for `k = 0..=N/2`.
pub fn power_spectrum(s: &[f64]) -> Result<Vec<f64>> {
    check_series(s, 4, "power spectrum")?;
    let n = s.len();
    Ok(dft(s)
        .into_iter()
        .take(n / 2 + 1)
        .map(|(re, im)| (re * re + im * im) / n as f64)
        .collect())
}

/// Signal energy recovered from a one-sided power spectrum of a length-`n`
/// real series.
pub fn one_sided_energy(power: &[f64], n: usize) -> f64 {
    power
        .iter()
        .enumerate()
        .map(|(k, p)| if k == 0 || (n % 2 == 0 && k == n / 2) { *p } else { 2.0 * p })
        .sum()
}
