//! `analyze`: complexity measures per image, grouped by stack.

use std::path::{Path, PathBuf};

use ctflux::complexity::bdm::quantize;
use ctflux::complexity::{
    approximate_entropy, binarize_by_mean, conditional_entropy, corrected_conditional_entropy,
    fuzzy_entropy, generative_complexity, joint_counts, layered_bdm, lz_complexity,
    lzw_compressed_length, mean_std, mr_signal, nonconstructability, permutation_entropy,
    power_spectrum, sample_entropy, spearman, BdmParams, CtmTable, Quantization,
};
use ctflux::{ImageGrid, ValueSemantics};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ComplexityConfig, EntropyConfig, PipelineConfig};
use crate::enhance::StackManifest;
use crate::error::{CliError, CliResult};
use crate::io;
use crate::report::{cell, upsert_section, PlotTable};

#[derive(Debug, Clone, PartialEq)]
pub struct ImageInput {
    pub name: String,
    pub energy: Option<f64>,
    pub path: PathBuf,
}

/// Images compared with one another: they share a quantization window and
/// a reference image.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisGroup {
    pub name: String,
    pub images: Vec<ImageInput>,
    pub reference: Option<ImageInput>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureRecord {
    pub group: String,
    pub image: String,
    pub energy_kev: Option<f64>,
    pub measure: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupSummary {
    pub group: String,
    pub images: usize,
    /// Joint value range of the group, used to quantize for BDM and LZW.
    pub quantization_window: (f64, f64),
    pub spearman_bdm_lzw: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spearman_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisSection {
    pub measures: Vec<String>,
    pub entropy: EntropyConfig,
    pub complexity: ComplexityConfig,
    pub summaries: Vec<GroupSummary>,
    pub records: Vec<MeasureRecord>,
}

impl AnalysisSection {
    pub fn value(&self, group: &str, image: &str, measure: &str) -> Option<f64> {
        self.records
            .iter()
            .find(|r| r.group == group && r.image == image && r.measure == measure)
            .and_then(|r| r.value)
    }
}

/// `ct`: CCT + HU images; `ect`: CCT + weighted images. Both use the CCT
/// as reference.
pub fn groups_from_manifest(m: &StackManifest) -> CliResult<Vec<AnalysisGroup>> {
    let cct = ImageInput {
        name: "cct".into(),
        energy: Some(m.reference_energy),
        path: m.resolve(&m.cct),
    };
    let group = |name: &str, pick: fn(&crate::enhance::IntervalRecord) -> &String| {
        let mut images = vec![cct.clone()];
        images.extend(m.intervals.iter().map(|iv| ImageInput {
            name: pick(iv).trim_end_matches(".img").to_string(),
            energy: Some(iv.effective_energy),
            path: m.resolve(pick(iv)),
        }));
        AnalysisGroup {
            name: name.into(),
            images,
            reference: Some(cct.clone()),
        }
    };
    Ok(vec![group("ct", |iv| &iv.hu), group("ect", |iv| &iv.whu)])
}

/// One group of loose image files, named by file stem.
pub fn group_from_files(files: &[PathBuf], reference: Option<&Path>) -> AnalysisGroup {
    let input = |p: &Path| ImageInput {
        name: p
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| p.display().to_string()),
        energy: None,
        path: p.to_path_buf(),
    };
    AnalysisGroup {
        name: "images".into(),
        images: files.iter().map(|p| input(p)).collect(),
        reference: reference.map(input),
    }
}

fn ctm(cfg: &ComplexityConfig) -> CliResult<CtmTable> {
    match &cfg.ctm_file {
        Some(p) => CtmTable::parse(&io::read_text(p)?).map_err(|e| CliError::in_file(p, e)),
        None => Ok(CtmTable::default_2x2()),
    }
}

struct Prepared {
    image: ImageGrid,
    series: Vec<f64>,
}

fn prepare(img: ImageGrid, downsample: usize) -> CliResult<Prepared> {
    let series = img.downsampled(downsample)?.into_data();
    Ok(Prepared { image: img, series })
}

struct Context<'a> {
    entropy: &'a EntropyConfig,
    complexity: &'a ComplexityConfig,
    ctm: &'a CtmTable,
    window: (f64, f64),
    reference: Option<&'a Prepared>,
}

/// Value of one measure; `mr` also yields the power spectrum of its signal.
fn measure(ctx: &Context, p: &Prepared, name: &str) -> ctflux::Result<(f64, Option<Vec<f64>>)> {
    let e = ctx.entropy;
    let s = &p.series;
    let r = e.r_factor * mean_std(s).1;
    let no_ref = || ctflux::Error::InvalidParameter("needs a reference image".into());
    let window = Quantization::Window {
        lo: ctx.window.0,
        hi: ctx.window.1,
    };
    let v = match name {
        "apen" => approximate_entropy(s, e.m, r)?,
        "sampen" => sample_entropy(s, e.m, r)?,
        "fuzzyen" => fuzzy_entropy(s, e.m, e.fuzzy_n, r)?,
        "permen" => permutation_entropy(s, e.perm_order)?,
        "condent" => {
            let reference = ctx.reference.ok_or_else(no_ref)?;
            if reference.series.len() != s.len() {
                return Err(ctflux::Error::DimensionMismatch("reference size differs".into()));
            }
            conditional_entropy(&joint_counts(&reference.series, s)?)?
        }
        "cce" => corrected_conditional_entropy(s, e.cce_l_max, e.cce_bins)?.min,
        "lz" => lz_complexity(&binarize_by_mean(p.image.data())?)?,
        "lzw" => {
            if ctx.complexity.levels > 256 {
                return Err(ctflux::Error::InvalidParameter(
                    "LZW input needs at most 256 grey levels".into(),
                ));
            }
            let bytes: Vec<u8> = quantize(&p.image, ctx.complexity.levels, window)?
                .into_iter()
                .map(|l| l as u8)
                .collect();
            lzw_compressed_length(&bytes)? as f64
        }
        "bdm" => {
            let params = BdmParams {
                block: ctx.complexity.bdm_block,
                offset: ctx.complexity.bdm_offset,
                levels: ctx.complexity.levels,
                quantization: window,
                ..BdmParams::default()
            };
            layered_bdm(&p.image, ctx.ctm, &params)?
        }
        "mr" => {
            let signal = mr_signal(&p.image, ctx.complexity.mr_thresholds)?;
            let mean = signal.iter().sum::<f64>() / signal.len() as f64;
            return Ok((mean, Some(power_spectrum(&signal)?)));
        }
        "pearson" => {
            let reference = &ctx.reference.ok_or_else(no_ref)?.image;
            match p.image.semantics() {
                ValueSemantics::WeightedHounsfield => generative_complexity(&p.image, reference)?,
                _ => nonconstructability(&p.image, reference)?,
            }
        }
        other => unreachable!("unvalidated measure {other}"),
    };
    Ok((v, None))
}

struct GroupResult {
    summary: GroupSummary,
    records: Vec<MeasureRecord>,
    spectra: Vec<(String, Option<f64>, Vec<f64>)>,
}

fn analyze_group(cfg: &PipelineConfig, measures: &[&str], ctm: &CtmTable, g: &AnalysisGroup) -> CliResult<GroupResult> {
    if g.images.is_empty() {
        return Err(CliError::Usage("analyze needs at least one image".into()));
    }
    let ds = cfg.entropy.downsample;
    let prepared = g
        .images
        .par_iter()
        .map(|i| prepare(io::read_image(&i.path)?, ds))
        .collect::<CliResult<Vec<_>>>()?;
    let reference = match &g.reference {
        Some(r) => Some(prepare(io::read_image(&r.path)?, ds)?),
        None => None,
    };
    let window = prepared.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
        let (a, b) = p.image.min_max();
        (lo.min(a), hi.max(b))
    });
    let ctx = Context {
        entropy: &cfg.entropy,
        complexity: &cfg.complexity,
        ctm,
        window,
        reference: reference.as_ref(),
    };
    let jobs: Vec<(usize, &str)> = (0..prepared.len())
        .flat_map(|i| measures.iter().map(move |m| (i, *m)))
        .collect();
    let results: Vec<_> = jobs
        .par_iter()
        .map(|&(i, m)| (i, m, measure(&ctx, &prepared[i], m)))
        .collect();

    let mut records = Vec::with_capacity(results.len());
    let mut spectra = Vec::new();
    for (i, m, res) in results {
        let input = &g.images[i];
        let (value, error) = match res {
            Ok((v, spectrum)) => {
                if let Some(s) = spectrum {
                    spectra.push((input.name.clone(), input.energy, s));
                }
                (Some(v), None)
            }
            Err(e) => (None, Some(e.to_string())),
        };
        records.push(MeasureRecord {
            group: g.name.clone(),
            image: input.name.clone(),
            energy_kev: input.energy,
            measure: m.into(),
            value,
            error,
        });
    }

    let column = |m: &str| -> Vec<Option<f64>> {
        records.iter().filter(|r| r.measure == m).map(|r| r.value).collect()
    };
    let (bdm, lzw) = (column("bdm"), column("lzw"));
    let pairs: (Vec<f64>, Vec<f64>) = bdm
        .iter()
        .zip(&lzw)
        .filter_map(|(a, b)| Some(((*a)?, (*b)?)))
        .unzip();
    let (spearman_bdm_lzw, spearman_error) = if bdm.is_empty() || lzw.is_empty() {
        (None, None)
    } else {
        match spearman(&pairs.0, &pairs.1) {
            Ok(v) => (Some(v), None),
            Err(e) => (None, Some(e.to_string())),
        }
    };
    Ok(GroupResult {
        summary: GroupSummary {
            group: g.name.clone(),
            images: g.images.len(),
            quantization_window: window,
            spearman_bdm_lzw,
            spearman_error,
        },
        records,
        spectra,
    })
}

/// Figure families and the measures each one plots.
const FAMILIES: [(&str, &[&str]); 5] = [
    ("entropies.tsv", &["apen", "sampen", "fuzzyen", "permen", "condent", "cce"]),
    ("bdm.tsv", &["bdm"]),
    ("lzw.tsv", &["lzw", "lz"]),
    ("correlation.tsv", &["pearson"]),
    ("mr.tsv", &["mr"]),
];

fn write_plots(out: &Path, section: &AnalysisSection, spectra: &[(String, String, Option<f64>, Vec<f64>)]) -> CliResult<()> {
    for (file, family) in FAMILIES {
        let mut t = PlotTable::new(&["group", "image", "energy_kev", "measure", "value"]);
        for r in section.records.iter().filter(|r| family.contains(&r.measure.as_str())) {
            let measure = match (r.measure.as_str(), r.group.as_str()) {
                ("pearson", "ct") => "D".to_string(),
                ("pearson", "ect") => "G".to_string(),
                (m, _) => m.to_string(),
            };
            t.push(vec![r.group.clone(), r.image.clone(), cell(r.energy_kev), measure, cell(r.value)]);
        }
        t.write(out, file)?;
    }
    let mut t = PlotTable::new(&["group", "image", "energy_kev", "frequency", "power"]);
    for (group, image, energy, power) in spectra {
        for (k, p) in power.iter().enumerate() {
            t.push(vec![group.clone(), image.clone(), cell(*energy), k.to_string(), p.to_string()]);
        }
    }
    t.write(out, "mr_power.tsv")
}

/// Computes every selected measure for every group, writes the `analysis`
/// report section and the plot tables.
pub fn analyze(cfg: &PipelineConfig, groups: &[AnalysisGroup], out: &Path) -> CliResult<AnalysisSection> {
    let measures = cfg.selected_measures()?;
    let ctm = ctm(&cfg.complexity)?;
    let mut summaries = Vec::new();
    let mut records = Vec::new();
    let mut spectra = Vec::new();
    for g in groups {
        let res = analyze_group(cfg, &measures, &ctm, g)?;
        summaries.push(res.summary);
        records.extend(res.records);
        spectra.extend(res.spectra.into_iter().map(|(i, e, s)| (g.name.clone(), i, e, s)));
    }
    let section = AnalysisSection {
        measures: measures.iter().map(|m| m.to_string()).collect(),
        entropy: cfg.entropy.clone(),
        complexity: cfg.complexity.clone(),
        summaries,
        records,
    };
    upsert_section(out, "analysis", &section)?;
    write_plots(out, &section, &spectra)?;
    Ok(section)
}
