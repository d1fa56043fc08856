//! `simulate` and `reconstruct`.

use std::path::{Path, PathBuf};

use ctflux::physics::energy_grid;
use ctflux::projector::{fan_to_parallel_rebin, PathTable, TRANSMISSION_FLOOR};
use ctflux::recon::{inverse_radon, FilterWindow, ReconOptions};
use ctflux::{Geometry, ImageGrid, MaterialLibrary, Phantom, Sinogram, Spectrum};
use serde::{Deserialize, Serialize};

use crate::config::{BeamKind, PipelineConfig, WindowName};
use crate::error::{CliError, CliResult};
use crate::{io, names};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpectrumRecord {
    Kramers { kvp: f64, bin_width_kev: f64, mean_energy_kev: f64 },
    Monochromatic { energy_kev: f64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateManifest {
    pub command: &'static str,
    pub seed: u64,
    pub sinogram: String,
    pub geometry: Geometry,
    pub spectrum: SpectrumRecord,
    pub phantom_resolution: usize,
    pub phantom_extent_mm: f64,
    pub config: PipelineConfig,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReconstructManifest {
    pub command: &'static str,
    pub sinogram: String,
    pub rebinned_from_fan: bool,
    pub geometry: Geometry,
    pub image: String,
    pub size: usize,
    pub pixel_size_mm: f64,
    pub window: FilterWindow,
    pub config: PipelineConfig,
}

pub fn geometry(cfg: &PipelineConfig, phantom: &Phantom) -> CliResult<Geometry> {
    let g = &cfg.geometry;
    let n_det = g.n_detectors.unwrap_or(phantom.size());
    Ok(match g.mode {
        BeamKind::Parallel => Geometry::parallel(
            g.n_angles,
            g.angle_step_deg,
            n_det,
            g.detector_spacing_mm.unwrap_or(phantom.pixel_size()),
        )?,
        BeamKind::Fan => Geometry::fan(
            g.n_angles,
            g.angle_step_deg,
            n_det,
            g.fan_angle_deg,
            g.source_distance_mm,
        )?,
    })
}

/// The Kramers spectrum used for both projection and flux weights.
pub fn kramers(cfg: &PipelineConfig) -> CliResult<Spectrum> {
    let s = &cfg.spectrum;
    if !(s.bin_width_kev > 0.0) {
        return Err(CliError::Numeric(format!("bin width {} keV must be positive", s.bin_width_kev)));
    }
    Ok(Spectrum::kramers(s.kvp, &energy_grid(ctflux::physics::MIN_ENERGY_KEV, s.kvp, s.bin_width_kev))?)
}

/// Projects the default phantom and writes the sinogram plus its manifest.
pub fn simulate(cfg: &PipelineConfig, out: &Path) -> CliResult<PathBuf> {
    let phantom = Phantom::build(cfg.phantom.resolution, cfg.phantom.extent_mm)?;
    let geometry = geometry(cfg, &phantom)?;
    let library = MaterialLibrary::default();
    let paths = PathTable::trace(&phantom, &geometry)?;
    let (sino, spectrum) = match cfg.spectrum.mono_kev {
        Some(e) => (paths.mono(&library, e)?, SpectrumRecord::Monochromatic { energy_kev: e }),
        None => {
            let spectrum = kramers(cfg)?;
            (
                paths.poly(&library, &spectrum, TRANSMISSION_FLOOR)?,
                SpectrumRecord::Kramers {
                    kvp: cfg.spectrum.kvp,
                    bin_width_kev: cfg.spectrum.bin_width_kev,
                    mean_energy_kev: spectrum.mean_energy(),
                },
            )
        }
    };
    let path = out.join(names::SINOGRAM);
    io::write_text(&path, &sino.to_text())?;
    io::write_json(
        &out.join(names::SIMULATE_MANIFEST),
        &SimulateManifest {
            command: "simulate",
            seed: cfg.seed,
            sinogram: names::SINOGRAM.into(),
            geometry,
            spectrum,
            phantom_resolution: phantom.size(),
            phantom_extent_mm: phantom.extent(),
            config: crate::recorded_config(cfg),
        },
    )?;
    Ok(path)
}

/// FBP of a sinogram; fan-beam input is rebinned to parallel first.
pub fn reconstruct_sinogram(cfg: &PipelineConfig, sino: &Sinogram) -> CliResult<(ImageGrid, Geometry)> {
    let parallel = if sino.geometry().is_fan() {
        fan_to_parallel_rebin(sino)?
    } else {
        sino.clone()
    };
    let options = ReconOptions {
        window: match cfg.recon.window {
            WindowName::Ramlak => FilterWindow::RamLak,
            WindowName::Hamming => FilterWindow::Hamming,
        },
        pixel_size_mm: cfg.recon.pixel_size_mm,
    };
    let size = cfg.recon.size.unwrap_or(parallel.geometry().n_detectors);
    let pam = inverse_radon(&parallel, size, &options)?;
    Ok((pam, *parallel.geometry()))
}

pub fn reconstruct(cfg: &PipelineConfig, sino_path: &Path, out: &Path) -> CliResult<PathBuf> {
    let sino = io::read_sinogram(sino_path)?;
    let (pam, geometry) = reconstruct_sinogram(cfg, &sino)?;
    let path = out.join(names::PAM);
    io::write_text(&path, &pam.to_text())?;
    io::write_json(
        &out.join(names::RECONSTRUCT_MANIFEST),
        &ReconstructManifest {
            command: "reconstruct",
            sinogram: crate::file_label(sino_path),
            rebinned_from_fan: sino.geometry().is_fan(),
            geometry,
            image: names::PAM.into(),
            size: pam.width(),
            pixel_size_mm: pam.pixel_size(),
            window: match cfg.recon.window {
                WindowName::Ramlak => FilterWindow::RamLak,
                WindowName::Hamming => FilterWindow::Hamming,
            },
            config: crate::recorded_config(cfg),
        },
    )?;
    Ok(path)
}
