//! Hounsfield conversion and flux-weighted enhancement of an attenuation map.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::{ImageGrid, ValueSemantics};
use crate::physics::MaterialTable;
use crate::spectrum_quant::IntervalSet;

/// Effective energy of the conventional reference image.
pub const REFERENCE_ENERGY_KEV: f64 = 70.0;

/// `(μ − μ_w)/μ_w · 1000` per pixel.
pub fn hounsfield(pam: &ImageGrid, mu_w: f64) -> Result<ImageGrid> {
    if pam.semantics() != ValueSemantics::LinearAttenuation {
        return Err(Error::invalid(format!(
            "Hounsfield conversion needs a {} image, got {}",
            ValueSemantics::LinearAttenuation,
            pam.semantics()
        )));
    }
    if !(mu_w > 0.0) || !mu_w.is_finite() {
        return Err(Error::invalid(format!("water attenuation must be positive, got {mu_w}")));
    }
    Ok(pam.map(ValueSemantics::Hounsfield, |mu| (mu - mu_w) / mu_w * 1000.0))
}

/// `q · HU` per pixel.
pub fn weight_hu(hu: &ImageGrid, q: f64) -> Result<ImageGrid> {
    if hu.semantics() != ValueSemantics::Hounsfield {
        return Err(Error::invalid(format!("weighting needs a hu image, got {}", hu.semantics())));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::invalid(format!("weight must lie in [0, 1], got {q}")));
    }
    Ok(hu.map(ValueSemantics::WeightedHounsfield, |v| q * v))
}

#[derive(Debug, Clone)]
pub struct EnhancedStack {
    /// HU at the reference energy.
    pub conventional: ImageGrid,
    pub per_interval_hu: Vec<ImageGrid>,
    pub per_interval_weighted: Vec<ImageGrid>,
    /// The input set with `mu_w` filled in.
    pub intervals: IntervalSet,
    pub reference_energy: f64,
}

/// Builds the conventional image and one HU / weighted-HU pair per interval.
/// Every interval needs an effective energy and a weight.
pub fn enhance_pipeline(pam: &ImageGrid, set: &IntervalSet, water: &MaterialTable) -> Result<EnhancedStack> {
    enhance_with_reference(pam, set, water, REFERENCE_ENERGY_KEV)
}

pub fn enhance_with_reference(
    pam: &ImageGrid,
    set: &IntervalSet,
    water: &MaterialTable,
    reference_energy: f64,
) -> Result<EnhancedStack> {
    let intervals = crate::spectrum_quant::assign_water_attenuation(set, water)?;
    let conventional = hounsfield(pam, water.linear_attenuation(reference_energy)?)?;
    let pairs = intervals
        .intervals()
        .par_iter()
        .map(|iv| {
            let q = iv.weight_q.ok_or_else(|| {
                Error::invalid(format!("interval ({}, {}) has no weight", iv.lo, iv.hi))
            })?;
            let hu = hounsfield(pam, iv.mu_w.expect("assigned above"))?;
            let whu = weight_hu(&hu, q)?;
            Ok((hu, whu))
        })
        .collect::<Result<Vec<_>>>()?;
    let (per_interval_hu, per_interval_weighted) = pairs.into_iter().unzip();
    Ok(EnhancedStack {
        conventional,
        per_interval_hu,
        per_interval_weighted,
        intervals,
        reference_energy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::{energy_grid, Spectrum};
    use crate::spectrum_quant::{assign_weights, standard_interval_set, EnergyInterval};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pam(values: Vec<f64>) -> ImageGrid {
        let n = values.len();
        ImageGrid::new(n, 1, 1.0, ValueSemantics::LinearAttenuation, values).unwrap()
    }

    fn random_pam(seed: u64) -> ImageGrid {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..32 * 32).map(|_| rng.random_range(0.0..0.6)).collect();
        ImageGrid::new(32, 32, 0.1, ValueSemantics::LinearAttenuation, data).unwrap()
    }

    fn weighted_standard_set() -> IntervalSet {
        let spec = Spectrum::kramers(140.0, &energy_grid(10.0, 140.0, 1.0)).unwrap();
        assign_weights(&standard_interval_set(), &spec).unwrap()
    }

    #[test]
    fn hounsfield_anchor_points() {
        let mu_w = 0.1929;
        let hu = hounsfield(&pam(vec![mu_w, 0.0, 2.0 * mu_w]), mu_w).unwrap();
        assert_eq!(hu.data(), &[0.0, -1000.0, 1000.0]);
        assert_eq!(hu.semantics(), ValueSemantics::Hounsfield);
        assert!(hounsfield(&pam(vec![0.1]), 0.0).is_err());
        assert!(hounsfield(&hu, 0.2).is_err());
    }

    #[test]
    fn weighting_examples() {
        let hu = hounsfield(&pam(vec![0.0, 0.1, 0.3]), 0.2).unwrap();
        assert_eq!(weight_hu(&hu, 1.0).unwrap().data(), hu.data());
        assert!(weight_hu(&hu, 0.0).unwrap().data().iter().all(|v| *v == 0.0));
        let one = ImageGrid::new(1, 1, 1.0, ValueSemantics::Hounsfield, vec![-800.0]).unwrap();
        assert_eq!(weight_hu(&one, 0.25).unwrap().data(), &[-200.0]);
        assert!(weight_hu(&one, 1.5).is_err());
    }

    #[test]
    fn single_reference_interval_reproduces_the_conventional_image() {
        let set = IntervalSet::new(vec![EnergyInterval {
            weight_q: Some(1.0),
            ..EnergyInterval::new(60.0, 80.0).unwrap().with_effective_energy(70.0)
        }])
        .unwrap();
        let stack = enhance_pipeline(&random_pam(1), &set, &MaterialTable::water()).unwrap();
        assert_eq!(stack.per_interval_weighted[0].data(), stack.conventional.data());
    }

    #[test]
    fn interval_images_are_affine_in_each_other() {
        let stack = enhance_pipeline(&random_pam(2), &weighted_standard_set(), &MaterialTable::water()).unwrap();
        let ivs = stack.intervals.intervals();
        for i in 0..ivs.len() {
            for j in 0..ivs.len() {
                let ratio = ivs[i].mu_w.unwrap() / ivs[j].mu_w.unwrap();
                let (a, b) = (ratio, 1000.0 * (ratio - 1.0));
                for (hi, hj) in stack.per_interval_hu[i].data().iter().zip(stack.per_interval_hu[j].data()) {
                    assert!((hj - (a * hi + b)).abs() <= 1e-9 * hj.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn weighted_images_and_means() {
        let stack = enhance_pipeline(&random_pam(3), &weighted_standard_set(), &MaterialTable::water()).unwrap();
        let mut last = f64::NEG_INFINITY;
        for (k, iv) in stack.intervals.iter().enumerate() {
            let q = iv.weight_q.unwrap();
            for (w, h) in stack.per_interval_weighted[k].data().iter().zip(stack.per_interval_hu[k].data()) {
                assert!((w - q * h).abs() <= 1e-9 * h.abs().max(1.0));
            }
            let mean = stack.per_interval_hu[k].mean();
            assert!(mean > last);
            last = mean;
        }
    }

    #[test]
    fn weight_decomposition_spot_check() {
        let p = random_pam(4);
        let stack = enhance_pipeline(&p, &weighted_standard_set(), &MaterialTable::water()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let idx = rng.random_range(0..p.data().len());
            let mu = p.data()[idx];
            let sum: f64 = stack.per_interval_weighted.iter().map(|w| w.data()[idx]).sum();
            let oracle: f64 = stack
                .intervals
                .iter()
                .map(|iv| iv.weight_q.unwrap() * (mu / iv.mu_w.unwrap() - 1.0))
                .sum::<f64>()
                * 1000.0;
            assert!((sum - oracle).abs() <= 1e-9 * oracle.abs().max(1.0));
        }
    }

    #[test]
    fn water_pixels_read_zero() {
        let water = MaterialTable::water();
        let mu = water.linear_attenuation(55.0).unwrap();
        let hu = hounsfield(&pam(vec![mu, 0.3, mu]), mu).unwrap();
        assert_eq!(hu.data()[0], 0.0);
        assert_eq!(hu.data()[2], 0.0);
    }

    #[test]
    fn missing_weights_are_reported() {
        let set = standard_interval_set();
        assert!(enhance_pipeline(&random_pam(5), &set, &MaterialTable::water()).is_err());
    }
}
