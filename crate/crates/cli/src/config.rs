//! Pipeline configuration: built-in defaults, overridden by a TOML file,
//! overridden by command-line flags.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{CliError, CliResult};

/// Default output directory when neither a flag nor the config names one.
pub const OUT_ENV_VAR: &str = "CTFLUX_OUT";
pub const DEFAULT_OUT_DIR: &str = "ctflux-out";

/// Names accepted by `--measures`; `all` selects every one.
pub const MEASURES: [&str; 11] = [
    "apen", "sampen", "fuzzyen", "permen", "condent", "cce", "lz", "lzw", "bdm", "mr", "pearson",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub intervals: IntervalSource,
    pub measures: Vec<String>,
    pub phantom: PhantomConfig,
    pub geometry: GeometryConfig,
    pub spectrum: SpectrumConfig,
    pub recon: ReconConfig,
    pub entropy: EntropyConfig,
    pub complexity: ComplexityConfig,
    pub fcm: FcmConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            out: None,
            intervals: IntervalSource::Paper,
            measures: vec!["all".into()],
            phantom: PhantomConfig::default(),
            geometry: GeometryConfig::default(),
            spectrum: SpectrumConfig::default(),
            recon: ReconConfig::default(),
            entropy: EntropyConfig::default(),
            complexity: ComplexityConfig::default(),
            fcm: FcmConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhantomConfig {
    pub resolution: usize,
    pub extent_mm: f64,
}

impl Default for PhantomConfig {
    fn default() -> Self {
        Self {
            resolution: 256,
            extent_mm: 12.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BeamKind {
    Parallel,
    Fan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    pub mode: BeamKind,
    pub n_angles: usize,
    pub angle_step_deg: f64,
    /// Defaults to the phantom resolution.
    pub n_detectors: Option<usize>,
    /// Parallel mode only; defaults to the phantom pixel size.
    pub detector_spacing_mm: Option<f64>,
    pub fan_angle_deg: f64,
    pub source_distance_mm: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            mode: BeamKind::Parallel,
            n_angles: 360,
            angle_step_deg: 1.0,
            n_detectors: None,
            detector_spacing_mm: None,
            fan_angle_deg: ctflux::projector::DEFAULT_FAN_ANGLE_DEG,
            source_distance_mm: ctflux::projector::DEFAULT_SOURCE_DISTANCE_MM,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumConfig {
    pub kvp: f64,
    pub bin_width_kev: f64,
    /// Simulate a monochromatic beam at this energy instead.
    pub mono_kev: Option<f64>,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self {
            kvp: 140.0,
            bin_width_kev: 1.0,
            mono_kev: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowName {
    Ramlak,
    Hamming,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReconConfig {
    /// Output edge in pixels; defaults to the phantom resolution.
    pub size: Option<usize>,
    /// Output pixel pitch; defaults to the (rebinned) detector spacing.
    pub pixel_size_mm: Option<f64>,
    pub window: WindowName,
}

impl Default for ReconConfig {
    fn default() -> Self {
        Self {
            size: None,
            pixel_size_mm: None,
            window: WindowName::Ramlak,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EntropyConfig {
    /// Images are block-averaged to this edge before the series measures.
    pub downsample: usize,
    pub m: usize,
    /// Tolerance as a multiple of the series standard deviation.
    pub r_factor: f64,
    pub fuzzy_n: u32,
    pub perm_order: usize,
    pub cce_l_max: usize,
    pub cce_bins: usize,
}

impl Default for EntropyConfig {
    fn default() -> Self {
        Self {
            downsample: 64,
            m: 2,
            r_factor: 0.2,
            fuzzy_n: 2,
            perm_order: 3,
            cce_l_max: 6,
            cce_bins: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ComplexityConfig {
    pub bdm_block: usize,
    pub bdm_offset: usize,
    pub levels: usize,
    pub mr_thresholds: usize,
    /// Alternative CTM table file; the shipped 2×2 table otherwise.
    pub ctm_file: Option<PathBuf>,
}

impl Default for ComplexityConfig {
    fn default() -> Self {
        Self {
            bdm_block: 2,
            bdm_offset: 2,
            levels: 256,
            mr_thresholds: 64,
            ctm_file: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FcmConfig {
    pub clusters: usize,
    pub fuzzifier: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for FcmConfig {
    fn default() -> Self {
        let p = ctflux::segmentation::FcmParams::default();
        Self {
            clusters: p.clusters,
            fuzzifier: p.fuzzifier,
            tol: p.tol,
            max_iter: p.max_iter,
        }
    }
}

/// Where the energy intervals come from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IntervalSource {
    /// Eleven intervals with the reported effective energies.
    Paper,
    /// Thirteen intervals with energies from the negative-binomial fit.
    Fit,
    File(PathBuf),
}

impl FromStr for IntervalSource {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "paper" => IntervalSource::Paper,
            "fit" => IntervalSource::Fit,
            path => IntervalSource::File(PathBuf::from(path)),
        })
    }
}

impl fmt::Display for IntervalSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IntervalSource::Paper => f.write_str("paper"),
            IntervalSource::Fit => f.write_str("fit"),
            IntervalSource::File(p) => write!(f, "{}", p.display()),
        }
    }
}

impl Serialize for IntervalSource {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for IntervalSource {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(s.parse().expect("infallible"))
    }
}

/// Flag values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub intervals: Option<IntervalSource>,
    pub measures: Option<Vec<String>>,
    pub kvp: Option<f64>,
    pub mono: Option<f64>,
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Data(format!("config: {e}")))
    }

    /// Defaults, then `path` (if any), then `overrides`; validated.
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> CliResult<Self> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
                Self::from_toml(&text).map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?
            }
            None => Self::default(),
        };
        cfg.apply(overrides);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = &o.out {
            self.out = Some(v.clone());
        }
        if let Some(v) = &o.intervals {
            self.intervals = v.clone();
        }
        if let Some(v) = &o.measures {
            self.measures = v.clone();
        }
        if let Some(v) = o.kvp {
            self.spectrum.kvp = v;
        }
        if let Some(v) = o.mono {
            self.spectrum.mono_kev = Some(v);
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        if let IntervalSource::File(p) = &self.intervals {
            if !p.is_file() {
                return Err(CliError::Data(format!("interval file {} does not exist", p.display())));
            }
        }
        if let Some(p) = &self.complexity.ctm_file {
            if !p.is_file() {
                return Err(CliError::Data(format!("CTM file {} does not exist", p.display())));
            }
        }
        self.selected_measures()?;
        Ok(())
    }

    /// Expands `all` and rejects unknown names.
    pub fn selected_measures(&self) -> CliResult<Vec<&'static str>> {
        let mut out = Vec::new();
        for name in &self.measures {
            if name == "all" {
                out.extend(MEASURES);
                continue;
            }
            match MEASURES.iter().find(|m| **m == name.as_str()) {
                Some(m) => out.push(*m),
                None => {
                    return Err(CliError::Usage(format!(
                        "unknown measure '{name}'; valid names: all, {}",
                        MEASURES.join(", ")
                    )))
                }
            }
        }
        let mut seen = Vec::new();
        out.retain(|m| {
            let fresh = !seen.contains(m);
            seen.push(*m);
            fresh
        });
        Ok(out)
    }

    /// Flag, then config, then the environment variable, then the built-in name.
    pub fn out_dir(&self) -> PathBuf {
        self.out
            .clone()
            .or_else(|| std::env::var_os(OUT_ENV_VAR).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
    }
}
