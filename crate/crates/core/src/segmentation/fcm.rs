//! Fuzzy c-means on scalar pixel values.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::image::{ImageGrid, ValueSemantics};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FcmParams {
    pub clusters: usize,
    pub fuzzifier: f64,
    /// Largest allowed centre move between iterations at convergence.
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for FcmParams {
    fn default() -> Self {
        Self {
            clusters: 4,
            fuzzifier: 2.0,
            tol: 1e-5,
            max_iter: 300,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FcmResult {
    /// Ascending.
    pub centers: Vec<f64>,
    /// Row-major `n × c`; row `i` holds pixel `i`'s weights in centre order.
    pub memberships: Vec<f64>,
    pub labels: Vec<usize>,
    /// Objective after each membership update.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl FcmResult {
    pub fn clusters(&self) -> usize {
        self.centers.len()
    }

    pub fn membership_row(&self, i: usize) -> &[f64] {
        let c = self.clusters();
        &self.memberships[i * c..(i + 1) * c]
    }
}

/// Row-wise argmax of an `n × c` membership matrix; ties go to the lower index.
pub fn defuzzify(memberships: &[f64], clusters: usize) -> Vec<usize> {
    memberships
        .chunks(clusters)
        .map(|row| {
            let mut best = 0;
            for (j, &w) in row.iter().enumerate() {
                if w > row[best] {
                    best = j;
                }
            }
            best
        })
        .collect()
}

fn update_memberships(x: &[f64], centers: &[f64], m: f64, u: &mut [f64]) {
    let c = centers.len();
    let p = 2.0 / (m - 1.0);
    for (i, &xi) in x.iter().enumerate() {
        let row = &mut u[i * c..(i + 1) * c];
        if let Some(hit) = centers.iter().position(|&cj| xi == cj) {
            row.iter_mut().for_each(|w| *w = 0.0);
            row[hit] = 1.0;
            continue;
        }
        // w_ij = d_ij^{−p} / Σ_k d_ik^{−p}
        let mut sum = 0.0;
        for (w, &cj) in row.iter_mut().zip(centers) {
            *w = (xi - cj).abs().powf(-p);
            sum += *w;
        }
        row.iter_mut().for_each(|w| *w /= sum);
    }
}

fn update_centers(x: &[f64], u: &[f64], m: f64, centers: &mut [f64]) {
    let c = centers.len();
    for (j, cj) in centers.iter_mut().enumerate() {
        let (mut num, mut den) = (0.0, 0.0);
        for (i, &xi) in x.iter().enumerate() {
            let w = u[i * c + j].powf(m);
            num += w * xi;
            den += w;
        }
        if den > 0.0 {
            *cj = num / den;
        }
    }
}

fn objective(x: &[f64], u: &[f64], centers: &[f64], m: f64) -> f64 {
    let c = centers.len();
    x.iter()
        .enumerate()
        .map(|(i, &xi)| {
            centers
                .iter()
                .enumerate()
                .map(|(j, &cj)| u[i * c + j].powf(m) * (xi - cj) * (xi - cj))
                .sum::<f64>()
        })
        .sum()
}

/// Alternating membership / centre updates from seeded random memberships.
/// Clusters are reported in ascending centre order.
pub fn fcm(x: &[f64], params: &FcmParams) -> Result<FcmResult> {
    let c = params.clusters;
    if c < 2 {
        return Err(Error::invalid("fuzzy c-means needs at least two clusters"));
    }
    if !(params.fuzzifier > 1.0) || !params.fuzzifier.is_finite() {
        return Err(Error::invalid("the fuzzifier must exceed 1"));
    }
    if !(params.tol >= 0.0) {
        return Err(Error::invalid("tolerance must be non-negative"));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("fuzzy c-means needs finite values"));
    }
    let mut distinct = x.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < c {
        return Err(Error::Degenerate(format!(
            "{} distinct values cannot fill {c} clusters",
            distinct.len()
        )));
    }
    let m = params.fuzzifier;
    let n = x.len();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut u: Vec<f64> = (0..n * c).map(|_| rng.random::<f64>() + 1e-3).collect();
    for row in u.chunks_mut(c) {
        let s: f64 = row.iter().sum();
        row.iter_mut().for_each(|w| *w /= s);
    }
    let mut centers = vec![0.0; c];
    update_centers(x, &u, m, &mut centers);
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < params.max_iter {
        iterations += 1;
        update_memberships(x, &centers, m, &mut u);
        trace.push(objective(x, &u, &centers, m));
        let previous = centers.clone();
        update_centers(x, &u, m, &mut centers);
        let shift = centers
            .iter()
            .zip(&previous)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if shift < params.tol {
            converged = true;
            break;
        }
    }
    // final memberships for the reported centres
    update_memberships(x, &centers, m, &mut u);

    let mut order: Vec<usize> = (0..c).collect();
    order.sort_by(|&a, &b| centers[a].total_cmp(&centers[b]));
    let sorted_centers: Vec<f64> = order.iter().map(|&j| centers[j]).collect();
    let mut memberships = vec![0.0; n * c];
    for i in 0..n {
        for (new, &old) in order.iter().enumerate() {
            memberships[i * c + new] = u[i * c + old];
        }
    }
    let labels = defuzzify(&memberships, c);
    Ok(FcmResult {
        centers: sorted_centers,
        memberships,
        labels,
        objective_trace: trace,
        iterations,
        converged,
    })
}

/// Clusters the pixels of `img` and returns the label image alongside.
pub fn fcm_image(img: &ImageGrid, params: &FcmParams) -> Result<(FcmResult, ImageGrid)> {
    let res = fcm(img.data(), params)?;
    let labels = ImageGrid::new(
        img.width(),
        img.height(),
        img.pixel_size(),
        ValueSemantics::Labels,
        res.labels.iter().map(|&l| l as f64).collect(),
    )?;
    Ok((res, labels))
}
