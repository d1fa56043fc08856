//! Orchestration behind the `ctflux` binary: every subcommand is a function
//! over a resolved [`PipelineConfig`] and an output directory.

pub mod analyze;
pub mod config;
pub mod enhance;
pub mod error;
pub mod io;
pub mod report;
pub mod segment;
pub mod simulate;

use std::path::Path;

pub use config::{Overrides, PipelineConfig};
pub use error::{CliError, CliResult};

/// File names inside an output directory.
pub mod names {
    pub const SINOGRAM: &str = "sinogram.sino";
    pub const SIMULATE_MANIFEST: &str = "simulate.json";
    pub const PAM: &str = "pam.img";
    pub const RECONSTRUCT_MANIFEST: &str = "reconstruct.json";
    pub const STACK_MANIFEST: &str = "enhance.json";
    pub const REPORT: &str = "report.json";
    pub const PLOTS_DIR: &str = "plots";
    pub const LABELS_DIR: &str = "labels";
}

/// simulate → reconstruct → enhance → analyze → segment, all inside `out`.
pub fn pipeline(cfg: &PipelineConfig, out: &Path) -> CliResult<()> {
    let sino = simulate::simulate(cfg, out)?;
    let pam = simulate::reconstruct(cfg, &sino, out)?;
    let manifest = enhance::enhance(cfg, &pam, out, None)?;
    let groups = analyze::groups_from_manifest(&manifest)?;
    analyze::analyze(cfg, &groups, out)?;
    let seg = segment::segment_inputs_from_manifest(&manifest)?;
    segment::segment(cfg, &seg, out)?;
    Ok(())
}

/// Config as recorded into manifests: the output location is left out so
/// that the same run in two directories yields the same bytes.
pub(crate) fn recorded_config(cfg: &PipelineConfig) -> PipelineConfig {
    PipelineConfig {
        out: None,
        ..cfg.clone()
    }
}

/// Base name of `path` for manifests.
pub(crate) fn file_label(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}
