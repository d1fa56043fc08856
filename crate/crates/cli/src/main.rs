use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ctflux_cli::analyze::{group_from_files, groups_from_manifest};
use ctflux_cli::config::IntervalSource;
use ctflux_cli::enhance::StackManifest;
use ctflux_cli::segment::{segment_inputs_from_files, segment_inputs_from_manifest};
use ctflux_cli::{analyze, enhance, pipeline, segment, simulate, CliError, CliResult, Overrides, PipelineConfig};

#[derive(Parser)]
#[command(name = "ctflux", version, about = "Polychromatic CT simulation, enhancement and complexity analysis")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (default: $CTFLUX_OUT, then ./ctflux-out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// `paper`, `fit`, or an interval file.
    #[arg(long, global = true)]
    intervals: Option<IntervalSource>,
    /// Comma-separated measure names, or `all`.
    #[arg(long, global = true, value_delimiter = ',')]
    measures: Option<Vec<String>>,
    #[arg(long, global = true)]
    kvp: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Project the phantom into a sinogram.
    Simulate {
        /// Monochromatic beam energy in keV.
        #[arg(long)]
        mono: Option<f64>,
    },
    /// Filtered back-projection of a sinogram file.
    Reconstruct { sinogram: PathBuf },
    /// Conventional, per-interval HU and weighted images from an attenuation map.
    Enhance {
        pam: PathBuf,
        /// Also write PGM files over this window, as `LO:HI`.
        #[arg(long, value_parser = parse_window)]
        pgm_window: Option<(f64, f64)>,
    },
    /// Complexity measures of an enhanced stack or of loose images.
    Analyze {
        /// Stack manifest written by `enhance`.
        #[arg(long, conflicts_with = "images")]
        stack: Option<PathBuf>,
        #[arg(long)]
        reference: Option<PathBuf>,
        images: Vec<PathBuf>,
    },
    /// Fuzzy c-means segmentation and metrics against a reference.
    Segment {
        #[arg(long, conflicts_with = "images")]
        stack: Option<PathBuf>,
        #[arg(long)]
        reference: Option<PathBuf>,
        images: Vec<PathBuf>,
    },
    /// Every stage, into one output directory.
    Pipeline {
        #[arg(long)]
        mono: Option<f64>,
    },
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(':').ok_or("expected LO:HI")?;
    let lo: f64 = lo.trim().parse().map_err(|_| format!("bad number '{lo}'"))?;
    let hi: f64 = hi.trim().parse().map_err(|_| format!("bad number '{hi}'"))?;
    Ok((lo, hi))
}

fn run(cli: Cli) -> CliResult<()> {
    let c = cli.common;
    let mono = match &cli.command {
        Command::Simulate { mono } | Command::Pipeline { mono } => *mono,
        _ => None,
    };
    let overrides = Overrides {
        seed: c.seed,
        out: c.out,
        intervals: c.intervals,
        measures: c.measures,
        kvp: c.kvp,
        mono,
    };
    let cfg = PipelineConfig::load(c.config.as_deref(), &overrides)?;
    let out = cfg.out_dir();
    match cli.command {
        Command::Simulate { .. } => simulate::simulate(&cfg, &out).map(drop),
        Command::Reconstruct { sinogram } => simulate::reconstruct(&cfg, &sinogram, &out).map(drop),
        Command::Enhance { pam, pgm_window } => enhance::enhance(&cfg, &pam, &out, pgm_window).map(drop),
        Command::Analyze { stack, reference, images } => {
            let groups = match stack {
                Some(m) => groups_from_manifest(&StackManifest::load(&m)?)?,
                None if images.is_empty() => {
                    return Err(CliError::Usage("analyze needs --stack or at least one image".into()))
                }
                None => vec![group_from_files(&images, reference.as_deref())],
            };
            analyze::analyze(&cfg, &groups, &out).map(drop)
        }
        Command::Segment { stack, reference, images } => {
            let inputs = match (stack, reference) {
                (Some(m), _) => segment_inputs_from_manifest(&StackManifest::load(&m)?)?,
                (None, Some(r)) if !images.is_empty() => segment_inputs_from_files(&images, &r),
                _ => {
                    return Err(CliError::Usage(
                        "segment needs --stack, or images plus --reference".into(),
                    ))
                }
            };
            segment::segment(&cfg, &inputs, &out).map(drop)
        }
        Command::Pipeline { .. } => pipeline(&cfg, &out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ctflux: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
