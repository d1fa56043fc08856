//! Polychromatic CT simulation, flux-weighted Hounsfield enhancement and
//! image-complexity analysis.
//!
//! The pipeline runs phantom → sinogram ([`projector`]) → attenuation map
//! ([`recon`]) → per-interval Hounsfield images ([`spectrum_quant`],
//! [`enhance`]) → complexity measures ([`complexity`]) and fuzzy c-means
//! segmentation ([`segmentation`]).

pub mod complexity;
pub mod enhance;
pub mod error;
pub mod image;
pub mod physics;
pub mod projector;
pub mod recon;
pub mod segmentation;
pub mod spectrum_quant;

pub use error::{Error, Result};
pub use image::{ImageGrid, ValueSemantics};
pub use physics::{Material, MaterialLibrary, MaterialTable, Phantom, Spectrum};
pub use projector::{Geometry, Sinogram};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/projection.md")]
    mod projection {}
    #[doc = include_str!("../../../book/src/reconstruction.md")]
    mod reconstruction {}
    #[doc = include_str!("../../../book/src/intervals.md")]
    mod intervals {}
    #[doc = include_str!("../../../book/src/enhancement.md")]
    mod enhancement {}
    #[doc = include_str!("../../../book/src/complexity.md")]
    mod complexity {}
    #[doc = include_str!("../../../book/src/segmentation.md")]
    mod segmentation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
