//! Fuzzy c-means segmentation and image-quality metrics.

pub mod fcm;
pub mod fsim;
pub mod metrics;

pub use fcm::{defuzzify, fcm, fcm_image, FcmParams, FcmResult};
pub use fsim::{fsim, phase_congruency, FsimParams};
pub use metrics::{mse, psnr, ssim, SsimParams, PSNR_REPORT_CAP_DB};
