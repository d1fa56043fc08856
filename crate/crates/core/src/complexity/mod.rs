//! Image complexity measures. Images enter as row-major series unless a
//! measure is explicitly two-dimensional.

pub mod bdm;
pub mod correlation;
pub mod entropy;
pub mod histogram;
pub mod lz;
pub mod morphology;
pub mod spectral;

pub use bdm::{layered_bdm, BdmParams, CtmTable, LayerRule, Quantization};
pub use correlation::{generative_complexity, lowess, nonconstructability, pearson, spearman};
pub use entropy::{
    approximate_entropy, conditional_entropy, corrected_conditional_entropy, fuzzy_entropy,
    permutation_entropy, sample_entropy, CceProfile,
};
pub use histogram::{joint_counts, scott_bins, scott_rule, Histogram};
pub use lz::{binarize_by_mean, lz76_patterns, lz_complexity, lzw_compressed_length};
pub use morphology::{morphological_richness, mr_signal};
pub use spectral::{dft, one_sided_energy, power_spectrum};

use crate::error::{Error, Result};

pub(crate) fn check_series(s: &[f64], min_len: usize, what: &str) -> Result<()> {
    if s.len() < min_len {
        return Err(Error::invalid(format!(
            "{what} needs at least {min_len} values, got {}",
            s.len()
        )));
    }
    if s.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("{what} needs finite values")));
    }
    Ok(())
}

/// Population mean and standard deviation.
pub fn mean_std(s: &[f64]) -> (f64, f64) {
    let n = s.len() as f64;
    let mean = s.iter().sum::<f64>() / n;
    let var = s.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}
