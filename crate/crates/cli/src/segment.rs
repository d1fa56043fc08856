//! `segment`: fuzzy c-means label images and quality metrics against a
//! reference segmentation.

use std::path::{Path, PathBuf};

use ctflux::segmentation::{fcm_image, fsim, mse, psnr, ssim, FcmParams, FcmResult, FsimParams, SsimParams, PSNR_REPORT_CAP_DB};
use ctflux::ImageGrid;
use rayon::prelude::*;
use serde::Serialize;

use crate::analyze::ImageInput;
use crate::config::{FcmConfig, PipelineConfig};
use crate::enhance::StackManifest;
use crate::error::CliResult;
use crate::report::{cell, upsert_section, PlotTable};
use crate::{io, names};

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentInputs {
    pub images: Vec<ImageInput>,
    pub reference: ImageInput,
}

/// CCT followed by the weighted images, against the CCT.
pub fn segment_inputs_from_manifest(m: &StackManifest) -> CliResult<SegmentInputs> {
    let cct = ImageInput {
        name: "cct".into(),
        energy: Some(m.reference_energy),
        path: m.resolve(&m.cct),
    };
    let mut images = vec![cct.clone()];
    images.extend(m.intervals.iter().map(|iv| ImageInput {
        name: iv.whu.trim_end_matches(".img").to_string(),
        energy: Some(iv.effective_energy),
        path: m.resolve(&iv.whu),
    }));
    Ok(SegmentInputs {
        images,
        reference: cct,
    })
}

pub fn segment_inputs_from_files(files: &[PathBuf], reference: &Path) -> SegmentInputs {
    let input = |p: &Path| ImageInput {
        name: p
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| p.display().to_string()),
        energy: None,
        path: p.to_path_buf(),
    };
    SegmentInputs {
        images: files.iter().map(|p| input(p)).collect(),
        reference: input(reference),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentRecord {
    pub image: String,
    pub energy_kev: Option<f64>,
    pub labels: Option<String>,
    pub centers: Vec<f64>,
    /// Pixels per cluster, in centre order.
    pub cluster_sizes: Vec<usize>,
    pub iterations: usize,
    pub converged: bool,
    pub mse: Option<f64>,
    /// Capped at the report ceiling when the images are identical.
    pub psnr_db: Option<f64>,
    pub ssim: Option<f64>,
    pub fsim: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentationSection {
    pub reference: String,
    pub fcm: FcmParams,
    pub ssim: SsimParams,
    pub fsim: FsimParams,
    pub records: Vec<SegmentRecord>,
}

fn fcm_params(cfg: &FcmConfig, seed: u64) -> FcmParams {
    FcmParams {
        clusters: cfg.clusters,
        fuzzifier: cfg.fuzzifier,
        tol: cfg.tol,
        max_iter: cfg.max_iter,
        seed,
    }
}

/// Every pixel replaced by its cluster centre, rescaled to [0, 1].
pub fn segmented_image(img: &ImageGrid, res: &FcmResult) -> ctflux::Result<ImageGrid> {
    let data = res.labels.iter().map(|&l| res.centers[l]).collect();
    Ok(ImageGrid::new(img.width(), img.height(), img.pixel_size(), img.semantics(), data)?.normalized())
}

struct Segmented {
    res: FcmResult,
    labels: ImageGrid,
    image: ImageGrid,
}

fn run(input: &ImageInput, params: &FcmParams) -> CliResult<Segmented> {
    let img = io::read_image(&input.path)?;
    let (res, labels) = fcm_image(&img, params)?;
    let image = segmented_image(&img, &res)?;
    Ok(Segmented { res, labels, image })
}

fn metric(errors: &mut Vec<String>, name: &str, r: ctflux::Result<f64>) -> Option<f64> {
    r.map_err(|e| errors.push(format!("{name}: {e}"))).ok()
}

/// Segments every input with the same seed, writes the label images and
/// the `segmentation` report section.
pub fn segment(cfg: &PipelineConfig, inputs: &SegmentInputs, out: &Path) -> CliResult<SegmentationSection> {
    let params = fcm_params(&cfg.fcm, cfg.seed);
    let ssim_params = SsimParams::default();
    let fsim_params = FsimParams::default();
    let reference = run(&inputs.reference, &params)?;
    let outcomes: Vec<_> = inputs.images.par_iter().map(|i| run(i, &params)).collect();
    let mut records = Vec::with_capacity(outcomes.len());
    let mut table = PlotTable::new(&["image", "energy_kev", "metric", "value"]);
    for (input, outcome) in inputs.images.iter().zip(outcomes) {
        let seg = match outcome {
            Ok(s) => s,
            Err(e) => {
                records.push(SegmentRecord {
                    image: input.name.clone(),
                    energy_kev: input.energy,
                    labels: None,
                    centers: vec![],
                    cluster_sizes: vec![],
                    iterations: 0,
                    converged: false,
                    mse: None,
                    psnr_db: None,
                    ssim: None,
                    fsim: None,
                    errors: vec![e.to_string()],
                });
                continue;
            }
        };
        let label_name = format!("{}/{}.img", names::LABELS_DIR, input.name);
        io::write_text(&out.join(&label_name), &seg.labels.to_text())?;
        let mut sizes = vec![0usize; seg.res.clusters()];
        for &l in &seg.res.labels {
            sizes[l] += 1;
        }
        let mut errors = Vec::new();
        let (a, b) = (&seg.image, &reference.image);
        let mse_v = metric(&mut errors, "mse", mse(a, b));
        let psnr_v = metric(&mut errors, "psnr", psnr(a, b, 1.0)).map(|p| p.min(PSNR_REPORT_CAP_DB));
        let ssim_v = metric(&mut errors, "ssim", ssim(a, b, &ssim_params));
        let fsim_v = metric(&mut errors, "fsim", fsim(a, b, &fsim_params));
        for (m, v) in [("psnr_db", psnr_v), ("fsim", fsim_v), ("ssim", ssim_v), ("mse", mse_v)] {
            table.push(vec![input.name.clone(), cell(input.energy), m.into(), cell(v)]);
        }
        records.push(SegmentRecord {
            image: input.name.clone(),
            energy_kev: input.energy,
            labels: Some(label_name),
            centers: seg.res.centers.clone(),
            cluster_sizes: sizes,
            iterations: seg.res.iterations,
            converged: seg.res.converged,
            mse: mse_v,
            psnr_db: psnr_v,
            ssim: ssim_v,
            fsim: fsim_v,
            errors,
        });
    }
    let section = SegmentationSection {
        reference: inputs.reference.name.clone(),
        fcm: params,
        ssim: ssim_params,
        fsim: fsim_params,
        records,
    };
    upsert_section(out, "segmentation", &section)?;
    table.write(out, "segmentation.tsv")?;
    Ok(section)
}
