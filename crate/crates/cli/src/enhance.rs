//! `enhance`: conventional image plus per-interval HU and weighted-HU images.

use std::path::{Path, PathBuf};

use ctflux::enhance::enhance_pipeline;
use ctflux::spectrum_quant::{
    assign_weights, default_intervals, fit_effective_energies, standard_interval_set, IntervalSet,
    NegBinomialFit,
};
use ctflux::{ImageGrid, MaterialTable};
use serde::{Deserialize, Serialize};

use crate::config::{IntervalSource, PipelineConfig};
use crate::error::{CliError, CliResult};
use crate::{io, names};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalRecord {
    pub lo: f64,
    pub hi: f64,
    pub effective_energy: f64,
    pub mu_w: f64,
    pub q: f64,
    pub hu: String,
    pub whu: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub r: f64,
    pub p: f64,
    pub log_likelihood: f64,
    pub mean: f64,
    /// Intervals whose formula energy exceeded `hi` and were clamped.
    pub clamped: Vec<usize>,
}

/// Written as `enhance.json`; image names are relative to its directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackManifest {
    pub command: String,
    pub pam: String,
    pub interval_source: String,
    pub reference_energy: f64,
    pub cct: String,
    pub weight_sum: f64,
    pub intervals: Vec<IntervalRecord>,
    pub fit: Option<FitRecord>,
    pub config: serde_json::Value,
    /// Directory the names resolve against; not serialized.
    #[serde(skip)]
    pub dir: PathBuf,
}

impl StackManifest {
    pub fn load(path: &Path) -> CliResult<Self> {
        let mut m: StackManifest = io::read_json(path)?;
        m.dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(m)
    }

    pub fn resolve(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }
}

/// The interval set named by the config, with effective energies and
/// flux weights from the configured Kramers spectrum.
pub fn resolve_intervals(cfg: &PipelineConfig) -> CliResult<(IntervalSet, Option<FitRecord>)> {
    let (set, fit) = match &cfg.intervals {
        IntervalSource::Paper => (standard_interval_set(), None),
        IntervalSource::Fit => fitted(&default_intervals())?,
        IntervalSource::File(p) => {
            let set = IntervalSet::parse(&io::read_text(p)?).map_err(|e| CliError::in_file(p, e))?;
            if set.effective_energies().is_some() {
                (set, None)
            } else {
                fitted(&set)?
            }
        }
    };
    let spectrum = crate::simulate::kramers(cfg)?;
    Ok((assign_weights(&set, &spectrum)?, fit))
}

fn fitted(set: &IntervalSet) -> CliResult<(IntervalSet, Option<FitRecord>)> {
    let f = fit_effective_energies(set)?;
    let NegBinomialFit { r, p, log_likelihood } = f.fit;
    let record = FitRecord {
        r,
        p,
        log_likelihood,
        mean: f.fit.mean(),
        clamped: f.clamped,
    };
    Ok((f.set, Some(record)))
}

fn energy_label(e: f64) -> String {
    format!("{e}").replace('.', "p")
}

/// Writes `cct.img`, `hu_NN_EkeV.img`, `whu_NN_EkeV.img` and `enhance.json`
/// into `out`; with `pgm_window` also a PGM next to every image.
pub fn enhance(
    cfg: &PipelineConfig,
    pam_path: &Path,
    out: &Path,
    pgm_window: Option<(f64, f64)>,
) -> CliResult<StackManifest> {
    let pam = io::read_image(pam_path)?;
    let (set, fit) = resolve_intervals(cfg)?;
    let stack = enhance_pipeline(&pam, &set, &MaterialTable::water())?;
    let write = |name: &str, img: &ImageGrid| -> CliResult<()> {
        io::write_text(&out.join(name), &img.to_text())?;
        if let Some((lo, hi)) = pgm_window {
            let pgm = img.to_pgm(lo, hi)?;
            io::write_text(&out.join(name.replace(".img", ".pgm")), &pgm)?;
        }
        Ok(())
    };
    write("cct.img", &stack.conventional)?;
    let mut intervals = Vec::with_capacity(set.len());
    for (k, iv) in stack.intervals.iter().enumerate() {
        let e = iv.effective_energy.expect("assigned");
        let tag = format!("{:02}_{}keV", k + 1, energy_label(e));
        let hu = format!("hu_{tag}.img");
        let whu = format!("whu_{tag}.img");
        write(&hu, &stack.per_interval_hu[k])?;
        write(&whu, &stack.per_interval_weighted[k])?;
        intervals.push(IntervalRecord {
            lo: iv.lo,
            hi: iv.hi,
            effective_energy: e,
            mu_w: iv.mu_w.expect("assigned"),
            q: iv.weight_q.expect("assigned"),
            hu,
            whu,
        });
    }
    let manifest = StackManifest {
        command: "enhance".into(),
        pam: crate::file_label(pam_path),
        interval_source: cfg.intervals.to_string(),
        reference_energy: stack.reference_energy,
        cct: "cct.img".into(),
        weight_sum: intervals.iter().map(|r| r.q).sum(),
        intervals,
        fit,
        config: serde_json::to_value(crate::recorded_config(cfg))
            .map_err(|e| CliError::Data(e.to_string()))?,
        dir: out.to_path_buf(),
    };
    io::write_json(&out.join(names::STACK_MANIFEST), &manifest)?;
    Ok(manifest)
}
