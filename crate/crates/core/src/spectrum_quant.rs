//! Irregular energy intervals, negative-binomial fitting of their endpoints,
//! effective energies and flux weights.

use std::collections::BTreeMap;

use serde::Serialize;
use statrs::function::{beta::beta_reg, gamma::digamma, gamma::ln_gamma};

use crate::error::{Error, Result};
use crate::physics::{parse_f64, MaterialTable, Spectrum, MIN_ENERGY_KEV};

/// The thirteen acquisition intervals, in keV.
pub const STANDARD_INTERVALS: [(f64, f64); 13] = [
    (12.0, 17.0),
    (18.0, 27.0),
    (28.0, 37.0),
    (38.0, 47.0),
    (48.0, 57.0),
    (58.0, 67.0),
    (60.0, 72.0),
    (68.0, 80.0),
    (78.0, 87.0),
    (81.0, 95.0),
    (88.0, 100.0),
    (98.0, 105.0),
    (130.0, 150.0),
];

/// Energies whose images are built from two overlapping intervals.
pub const OVERLAP_ENERGIES_KEV: [f64; 2] = [70.0, 95.0];

/// Effective energies of the eleven reported interval images.
pub const STANDARD_EFFECTIVE_ENERGIES: [f64; 11] = [
    15.0, 25.0, 35.0, 45.0, 55.0, 65.0, 70.0, 85.0, 95.0, 100.0, 135.0,
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyInterval {
    pub lo: f64,
    pub hi: f64,
    pub effective_energy: Option<f64>,
    /// Water linear attenuation (1/cm) at the effective energy.
    pub mu_w: Option<f64>,
    pub weight_q: Option<f64>,
}

impl EnergyInterval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) || !hi.is_finite() {
            return Err(Error::invalid(format!("interval ({lo}, {hi}) needs lo < hi")));
        }
        if lo < MIN_ENERGY_KEV {
            return Err(Error::invalid(format!(
                "interval ({lo}, {hi}) starts below {MIN_ENERGY_KEV} keV"
            )));
        }
        Ok(Self {
            lo,
            hi,
            effective_energy: None,
            mu_w: None,
            weight_q: None,
        })
    }

    pub fn with_effective_energy(mut self, energy: f64) -> Self {
        self.effective_energy = Some(energy);
        self
    }

    pub fn contains(&self, energy: f64) -> bool {
        self.lo <= energy && energy <= self.hi
    }

    pub fn overlaps(&self, other: &EnergyInterval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalSet {
    intervals: Vec<EnergyInterval>,
}

impl IntervalSet {
    pub fn new(intervals: Vec<EnergyInterval>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::invalid("an interval set needs at least one interval"));
        }
        Ok(Self { intervals })
    }

    pub fn intervals(&self) -> &[EnergyInterval] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &EnergyInterval> {
        self.intervals.iter()
    }

    /// Index pairs `(i, j)`, `i < j`, of overlapping intervals that both
    /// contain one of `energies`.
    pub fn overlapping_pairs(&self, energies: &[f64]) -> Vec<(usize, usize)> {
        let mut pairs = Vec::new();
        for i in 0..self.intervals.len() {
            for j in i + 1..self.intervals.len() {
                let (a, b) = (&self.intervals[i], &self.intervals[j]);
                if a.overlaps(b) && energies.iter().any(|&e| a.contains(e) && b.contains(e)) {
                    pairs.push((i, j));
                }
            }
        }
        pairs
    }

    pub fn effective_energies(&self) -> Option<Vec<f64>> {
        self.intervals.iter().map(|i| i.effective_energy).collect()
    }

    pub fn weights(&self) -> Option<Vec<f64>> {
        self.intervals.iter().map(|i| i.weight_q).collect()
    }

    /// Lines `<lo> <hi> [effective_energy]`; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut intervals = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let f: Vec<&str> = body.split_whitespace().collect();
            if f.len() != 2 && f.len() != 3 {
                return Err(Error::parse(line, "expected '<lo> <hi> [effective_energy]'"));
            }
            let mut iv = EnergyInterval::new(parse_f64(f[0], line)?, parse_f64(f[1], line)?)
                .map_err(|e| Error::parse(line, e.to_string()))?;
            if f.len() == 3 {
                iv.effective_energy = Some(parse_f64(f[2], line)?);
            }
            intervals.push(iv);
        }
        IntervalSet::new(intervals).map_err(|e| Error::parse(1, e.to_string()))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for iv in &self.intervals {
            match iv.effective_energy {
                Some(e) => out.push_str(&format!("{} {} {}\n", iv.lo, iv.hi, e)),
                None => out.push_str(&format!("{} {}\n", iv.lo, iv.hi)),
            }
        }
        out
    }
}

/// The thirteen intervals, without effective energies or weights.
pub fn default_intervals() -> IntervalSet {
    IntervalSet {
        intervals: STANDARD_INTERVALS
            .iter()
            .map(|&(lo, hi)| EnergyInterval::new(lo, hi).expect("static intervals are valid"))
            .collect(),
    }
}

/// Eleven intervals: the thirteen with each overlapping pair replaced by its
/// hull, carrying the reported effective energies.
pub fn standard_interval_set() -> IntervalSet {
    let base = default_intervals();
    let pairs = base.overlapping_pairs(&OVERLAP_ENERGIES_KEV);
    let mut merged = Vec::new();
    let mut skip = vec![false; base.len()];
    for (i, iv) in base.intervals.iter().enumerate() {
        if skip[i] {
            continue;
        }
        match pairs.iter().find(|(a, _)| *a == i) {
            Some(&(_, j)) => {
                skip[j] = true;
                let other = base.intervals[j];
                merged.push(
                    EnergyInterval::new(iv.lo.min(other.lo), iv.hi.max(other.hi))
                        .expect("hull of valid intervals"),
                );
            }
            None => merged.push(*iv),
        }
    }
    for (iv, e) in merged.iter_mut().zip(STANDARD_EFFECTIVE_ENERGIES) {
        iv.effective_energy = Some(e);
    }
    IntervalSet { intervals: merged }
}

pub fn standard_effective_energies() -> Vec<f64> {
    STANDARD_EFFECTIVE_ENERGIES.to_vec()
}

/// Kolmogorov–Smirnov distance between the empirical distribution of
/// `samples` and `cdf`, checking both sides of every empirical step.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::invalid("KS statistic needs at least one sample"));
    }
    if samples.iter().any(|v| v.is_nan()) {
        return Err(Error::invalid("KS samples must not be NaN"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let x = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == x {
            j += 1;
        }
        let f = cdf(x);
        let below = i as f64 / n;
        let at = j as f64 / n;
        d = d.max((at - f).abs()).max((below - f).abs());
        i = j;
    }
    Ok(d)
}

/// Negative binomial with `P(k) = C(k+r−1, k)·p^k·(1−p)^r`, mean `p·r/(1−p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NegBinomialFit {
    pub r: f64,
    pub p: f64,
    pub log_likelihood: f64,
}

impl NegBinomialFit {
    pub fn mean(&self) -> f64 {
        nb_mean(self)
    }

    pub fn ln_pmf(&self, k: u64) -> f64 {
        nb_ln_pmf(k, self.r, self.p)
    }

    pub fn pmf(&self, k: u64) -> f64 {
        self.ln_pmf(k).exp()
    }

    /// `P(X ≤ x)` for real `x`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        beta_reg(self.r, x.floor() + 1.0, 1.0 - self.p)
    }
}

pub fn nb_mean(fit: &NegBinomialFit) -> f64 {
    fit.p * fit.r / (1.0 - fit.p)
}

fn nb_ln_pmf(k: u64, r: f64, p: f64) -> f64 {
    let k = k as f64;
    ln_gamma(k + r) - ln_gamma(r) - ln_gamma(k + 1.0) + k * p.ln() + r * (1.0 - p).ln()
}

/// ψ(k + r) − ψ(r).
fn digamma_step(k: u64, r: f64) -> f64 {
    if k <= 64 {
        (0..k).map(|j| 1.0 / (r + j as f64)).sum()
    } else {
        digamma(k as f64 + r) - digamma(r)
    }
}

/// Maximum-likelihood fit on the profile likelihood in `r`, with
/// `p(r) = mean/(r + mean)` so the fitted mean equals the sample mean.
pub fn fit_negative_binomial(samples: &[u64]) -> Result<NegBinomialFit> {
    if samples.len() < 2 {
        return Err(Error::invalid("negative binomial fit needs at least two samples"));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().map(|&k| k as f64).sum::<f64>() / n;
    let var = samples.iter().map(|&k| (k as f64 - mean).powi(2)).sum::<f64>() / n;
    if var <= mean {
        return Err(Error::Degenerate(format!(
            "sample variance {var} does not exceed the mean {mean}; the data are not over-dispersed"
        )));
    }
    let mut counts = BTreeMap::new();
    for &k in samples {
        *counts.entry(k).or_insert(0u64) += 1;
    }
    let score = |r: f64| -> f64 {
        let s: f64 = counts.iter().map(|(&k, &c)| c as f64 * digamma_step(k, r)).sum();
        s + n * (r / (r + mean)).ln()
    };

    // the score is positive below the root and negative above it
    let r0 = mean * mean / (var - mean);
    let (mut lo, mut hi) = (r0, r0);
    while score(lo) <= 0.0 {
        lo /= 2.0;
        if lo < 1e-300 {
            return Err(Error::Degenerate("no root of the likelihood score near zero".into()));
        }
    }
    while score(hi) > 0.0 {
        hi *= 2.0;
        if hi > 1e15 {
            return Err(Error::Degenerate("likelihood keeps increasing in r".into()));
        }
    }
    let mut r = 0.5 * (lo + hi);
    for _ in 0..400 {
        r = 0.5 * (lo + hi);
        let g = score(r);
        if g.abs() < 1e-8 || hi - lo <= 4.0 * f64::EPSILON * r {
            break;
        }
        if g > 0.0 {
            lo = r;
        } else {
            hi = r;
        }
    }
    let p = mean / (r + mean);
    let log_likelihood = counts
        .iter()
        .map(|(&k, &c)| c as f64 * nb_ln_pmf(k, r, p))
        .sum();
    Ok(NegBinomialFit {
        r,
        p,
        log_likelihood,
    })
}

/// `⌊(hi − lo)·mean·10⌋ + lo`. Logs a warning when the result leaves the
/// interval.
pub fn effective_energy(lo: f64, hi: f64, mean: f64) -> f64 {
    let e = ((hi - lo) * mean * 10.0).floor() + lo;
    if e > hi {
        log::warn!("effective energy {e} keV exceeds its interval ({lo}, {hi})");
    }
    e
}

/// Integer samples from the interval endpoints, offset by the smallest
/// endpoint so they start at zero.
pub fn endpoint_samples(set: &IntervalSet) -> Vec<u64> {
    let min = set.iter().map(|i| i.lo).fold(f64::INFINITY, f64::min);
    set.iter()
        .flat_map(|i| [i.lo, i.hi])
        .map(|e| (e - min).round() as u64)
        .collect()
}

/// Result of deriving effective energies from a fit to the endpoints.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FittedEnergies {
    pub fit: NegBinomialFit,
    pub set: IntervalSet,
    /// Indices whose formula value exceeded `hi` and were clamped to it.
    pub clamped: Vec<usize>,
}

/// Fits the endpoints and sets every effective energy from the fitted mean,
/// clamping values above `hi` to `hi`.
pub fn fit_effective_energies(set: &IntervalSet) -> Result<FittedEnergies> {
    let fit = fit_negative_binomial(&endpoint_samples(set))?;
    let mean = fit.mean();
    let mut out = set.clone();
    let mut clamped = Vec::new();
    for (i, iv) in out.intervals.iter_mut().enumerate() {
        let e = effective_energy(iv.lo, iv.hi, mean);
        if e > iv.hi {
            clamped.push(i);
        }
        iv.effective_energy = Some(e.min(iv.hi));
    }
    Ok(FittedEnergies {
        fit,
        set: out,
        clamped,
    })
}

/// `q_i = F_i / Σ_j F_j` with `F_i` the spectrum flux inside interval `i`.
pub fn assign_weights(set: &IntervalSet, spectrum: &Spectrum) -> Result<IntervalSet> {
    let flux: Vec<f64> = set
        .iter()
        .map(|iv| spectrum.flux_in_interval(iv.lo, iv.hi))
        .collect();
    let total: f64 = flux.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Degenerate("spectrum has no flux inside any interval".into()));
    }
    let mut out = set.clone();
    for (iv, f) in out.intervals.iter_mut().zip(flux) {
        iv.weight_q = Some(f / total);
    }
    Ok(out)
}

/// Sets `mu_w` from `water` at each effective energy.
pub fn assign_water_attenuation(set: &IntervalSet, water: &MaterialTable) -> Result<IntervalSet> {
    let mut out = set.clone();
    for iv in out.intervals.iter_mut() {
        let e = iv.effective_energy.ok_or_else(|| {
            Error::invalid(format!("interval ({}, {}) has no effective energy", iv.lo, iv.hi))
        })?;
        iv.mu_w = Some(water.linear_attenuation(e)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::energy_grid;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Gamma, Poisson};

    #[test]
    fn thirteen_default_intervals() {
        let set = default_intervals();
        assert_eq!(set.len(), 13);
        assert_eq!((set.intervals()[6].lo, set.intervals()[6].hi), (60.0, 72.0));
        assert!(set.effective_energies().is_none());
    }

    #[test]
    fn overlap_detector_finds_the_two_pairs() {
        let set = default_intervals();
        let pairs = set.overlapping_pairs(&OVERLAP_ENERGIES_KEV);
        let spans: Vec<_> = pairs
            .iter()
            .map(|&(i, j)| {
                let (a, b) = (set.intervals()[i], set.intervals()[j]);
                ((a.lo, a.hi), (b.lo, b.hi))
            })
            .collect();
        assert_eq!(
            spans,
            vec![((60.0, 72.0), (68.0, 80.0)), ((81.0, 95.0), (88.0, 100.0))]
        );
    }

    #[test]
    fn standard_set_has_eleven_images() {
        let set = standard_interval_set();
        assert_eq!(set.len(), 11);
        let e = set.effective_energies().unwrap();
        assert_eq!(e, STANDARD_EFFECTIVE_ENERGIES.to_vec());
        for iv in set.iter() {
            assert!(iv.contains(iv.effective_energy.unwrap()), "{iv:?}");
        }
        assert_eq!((set.intervals()[6].lo, set.intervals()[6].hi), (60.0, 80.0));
        assert_eq!((set.intervals()[8].lo, set.intervals()[8].hi), (81.0, 100.0));
        let bypass = standard_effective_energies();
        assert_eq!(bypass.len(), 11);
        assert!(bypass.contains(&70.0));
        assert_eq!(bypass.iter().cloned().fold(0.0, f64::max), 135.0);
    }

    #[test]
    fn ks_single_sample_at_median() {
        let d = ks_statistic(&[0.0], |x| 0.5 * (1.0 + (x / 2f64.sqrt()).tanh())).unwrap();
        assert!((d - 0.5).abs() < 1e-12);
        assert!(ks_statistic(&[], |_| 0.0).is_err());
    }

    /// Supremum over a dense grid that also probes just left and right of
    /// every sample.
    fn dense_sup(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
        let n = samples.len() as f64;
        let fn_at = |x: f64| samples.iter().filter(|&&s| s <= x).count() as f64 / n;
        let mut grid: Vec<f64> = (0..=20000).map(|i| -1.0 + 3.0 * i as f64 / 20000.0).collect();
        for &s in samples {
            grid.extend([s - 1e-12, s, s + 1e-12]);
        }
        grid.iter().map(|&x| (fn_at(x) - cdf(x)).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn ks_matches_dense_grid() {
        let cdf = |x: f64| x.clamp(0.0, 1.0).powi(2);
        let samples = [0.1, 0.35, 0.35, 0.5, 0.72, 0.9, 0.95];
        let d = ks_statistic(&samples, cdf).unwrap();
        assert!((d - dense_sup(&samples, cdf)).abs() < 1e-9);
        // quantiles placed so that the steps straddle F
        let n = 50;
        let q: Vec<f64> = (0..n).map(|i| ((i as f64 + 0.3) / n as f64).sqrt()).collect();
        let d = ks_statistic(&q, cdf).unwrap();
        assert!((d - dense_sup(&q, cdf)).abs() < 1e-9);
        assert!((d - 0.7 / n as f64).abs() < 1e-12);
    }

    #[test]
    fn ks_vanishes_on_a_quantile_grid() {
        let n = 10_000;
        let s: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_statistic(&s, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(d < 2.0 / (n as f64).sqrt());
    }

    #[test]
    fn nb_mean_examples() {
        let f = |r, p| NegBinomialFit {
            r,
            p,
            log_likelihood: 0.0,
        };
        assert_eq!(nb_mean(&f(3.0, 0.5)), 3.0);
        assert_eq!(nb_mean(&f(1.0, 0.5)), 1.0);
        assert!((nb_mean(&f(5.0, 0.2)) - 1.25).abs() < 1e-15);
    }

    #[test]
    fn nb_pmf_sums_to_cdf() {
        let fit = NegBinomialFit {
            r: 2.5,
            p: 0.4,
            log_likelihood: 0.0,
        };
        let mut acc = 0.0;
        for k in 0..30 {
            acc += fit.pmf(k);
            assert!((fit.cdf(k as f64) - acc).abs() < 1e-12);
        }
        assert_eq!(fit.cdf(-0.5), 0.0);
    }

    /// Gamma–Poisson mixture: λ ~ Γ(r, p/(1−p)), k ~ Poisson(λ).
    fn simulate(r: f64, p: f64, n: usize, seed: u64) -> Vec<u64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gamma = Gamma::new(r, p / (1.0 - p)).unwrap();
        (0..n)
            .map(|_| {
                let lambda: f64 = gamma.sample(&mut rng);
                if lambda <= 0.0 {
                    0
                } else {
                    Poisson::new(lambda).unwrap().sample(&mut rng) as u64
                }
            })
            .collect()
    }

    #[test]
    fn recovers_simulated_mean() {
        let s = simulate(3.0, 0.5, 100_000, 11);
        let fit = fit_negative_binomial(&s).unwrap();
        assert!((fit.mean() - 3.0).abs() < 0.05, "{fit:?}");
        assert!((fit.r - 3.0).abs() < 0.2, "{fit:?}");
    }

    #[test]
    fn equal_samples_are_degenerate() {
        assert!(matches!(fit_negative_binomial(&[4, 4, 4]), Err(Error::Degenerate(_))));
        assert!(fit_negative_binomial(&[4]).is_err());
        // under-dispersed
        assert!(fit_negative_binomial(&[1, 2, 1, 2]).is_err());
    }

    #[test]
    fn fit_is_the_grid_maximum() {
        let s = simulate(2.0, 0.6, 5_000, 5);
        let fit = fit_negative_binomial(&s).unwrap();
        let n = s.len() as f64;
        let mean = s.iter().sum::<u64>() as f64 / n;
        assert!((fit.mean() - mean).abs() < 1e-6);
        let ll = |r: f64, p: f64| s.iter().map(|&k| nb_ln_pmf(k, r, p)).sum::<f64>();
        assert!((ll(fit.r, fit.p) - fit.log_likelihood).abs() < 1e-6);
        let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
        for i in 0..=80 {
            let r = fit.r * (0.8 + 0.4 * i as f64 / 80.0);
            for j in 0..=80 {
                let p = fit.p * (0.9 + 0.2 * j as f64 / 80.0);
                let v = ll(r, p);
                if v > best.0 {
                    best = (v, r, p);
                }
            }
        }
        assert!(fit.log_likelihood >= best.0 - 1e-9);
        assert!((best.1 * best.2 / (1.0 - best.2) - mean).abs() < 0.02 * mean);
    }

    #[test]
    fn mean_recovery_across_parameters() {
        for (ri, &r) in [1.0, 3.0, 10.0].iter().enumerate() {
            for (pi, &p) in [0.2, 0.5, 0.8].iter().enumerate() {
                let truth = p * r / (1.0 - p);
                let mut errors: Vec<f64> = (0..20)
                    .map(|k| {
                        let seed = 1000 + 100 * ri as u64 + 10 * pi as u64 + k;
                        let fit = fit_negative_binomial(&simulate(r, p, 100_000, seed)).unwrap();
                        (fit.mean() - truth).abs() / truth
                    })
                    .collect();
                errors.sort_by(f64::total_cmp);
                let median = 0.5 * (errors[9] + errors[10]);
                assert!(median < 0.03, "r={r} p={p}: {median}");
            }
        }
    }

    #[test]
    fn effective_energy_examples() {
        assert_eq!(effective_energy(12.0, 17.0, 0.0), 12.0);
        assert_eq!(effective_energy(12.0, 17.0, 0.06), 15.0);
        assert_eq!(effective_energy(58.0, 67.0, 0.1), 67.0);
        assert!(effective_energy(12.0, 17.0, 1.0) > 17.0);
    }

    #[test]
    fn fitted_energies_are_clamped_into_their_intervals() {
        let out = fit_effective_energies(&standard_interval_set()).unwrap();
        for iv in out.set.iter() {
            let e = iv.effective_energy.unwrap();
            assert!(iv.lo <= e && e <= iv.hi);
        }
        assert_eq!(endpoint_samples(&default_intervals())[0], 0);
    }

    #[test]
    fn weights_single_and_symmetric() {
        let spec = Spectrum::kramers(140.0, &energy_grid(10.0, 140.0, 1.0)).unwrap();
        let one = IntervalSet::new(vec![EnergyInterval::new(20.0, 60.0).unwrap()]).unwrap();
        assert_eq!(assign_weights(&one, &spec).unwrap().weights().unwrap(), vec![1.0]);
        let flat = Spectrum::new(energy_grid(10.0, 100.0, 1.0), vec![1.0; 91]).unwrap();
        let two = IntervalSet::new(vec![
            EnergyInterval::new(20.0, 29.0).unwrap(),
            EnergyInterval::new(50.0, 59.0).unwrap(),
        ])
        .unwrap();
        assert_eq!(assign_weights(&two, &flat).unwrap().weights().unwrap(), vec![0.5, 0.5]);
        let none = IntervalSet::new(vec![EnergyInterval::new(141.0, 150.0).unwrap()]).unwrap();
        assert!(assign_weights(&none, &spec).is_err());
    }

    #[test]
    fn kramers_weights_match_bin_sums() {
        let grid = energy_grid(10.0, 140.0, 1.0);
        let spec = Spectrum::kramers(140.0, &grid).unwrap();
        let set = assign_weights(&default_intervals(), &spec).unwrap();
        // independent oracle: raw (kvp − E)/E on the integer grid
        let raw = |lo: f64, hi: f64| -> f64 {
            (lo as i64..=hi as i64)
                .map(|e| e as f64)
                .filter(|&e| e <= 140.0)
                .map(|e| (140.0 - e) / e)
                .sum()
        };
        let f: Vec<f64> = STANDARD_INTERVALS.iter().map(|&(l, h)| raw(l, h)).collect();
        let total: f64 = f.iter().sum();
        for (q, fi) in set.weights().unwrap().iter().zip(&f) {
            assert!((q - fi / total).abs() < 1e-9);
        }
        assert!((set.weights().unwrap().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn water_attenuation_needs_effective_energies() {
        assert!(assign_water_attenuation(&default_intervals(), &MaterialTable::water()).is_err());
        let set = assign_water_attenuation(&standard_interval_set(), &MaterialTable::water()).unwrap();
        assert!(set.iter().all(|iv| iv.mu_w.unwrap() > 0.0));
    }

    #[test]
    fn interval_file_round_trip() {
        let text = "# lo hi eff\n12 17 15\n18 27\n\n130 150 135 # last\n";
        let set = IntervalSet::parse(text).unwrap();
        assert_eq!(set.len(), 3);
        assert_eq!(set.intervals()[1].effective_energy, None);
        assert_eq!(IntervalSet::parse(&set.to_text()).unwrap(), set);
        assert!(matches!(IntervalSet::parse("12 17\n20 x\n"), Err(Error::Parse { line: 2, .. })));
        assert!(IntervalSet::parse("5 9\n").is_err());
    }
}
