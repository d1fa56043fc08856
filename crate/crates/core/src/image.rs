//! Real-valued rasters and their text formats.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::physics::parse_f64;

/// What the pixel values of an [`ImageGrid`] mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueSemantics {
    /// Linear attenuation in 1/cm (the reconstructed attenuation matrix).
    LinearAttenuation,
    Hounsfield,
    WeightedHounsfield,
    /// Integer cluster labels.
    Labels,
}

impl ValueSemantics {
    pub fn tag(self) -> &'static str {
        match self {
            ValueSemantics::LinearAttenuation => "mu_per_cm",
            ValueSemantics::Hounsfield => "hu",
            ValueSemantics::WeightedHounsfield => "whu",
            ValueSemantics::Labels => "label",
        }
    }
}

impl fmt::Display for ValueSemantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for ValueSemantics {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            ValueSemantics::LinearAttenuation,
            ValueSemantics::Hounsfield,
            ValueSemantics::WeightedHounsfield,
            ValueSemantics::Labels,
        ]
        .into_iter()
        .find(|v| v.tag() == s)
        .ok_or_else(|| Error::invalid(format!("unknown value semantics '{s}'")))
    }
}

/// A `width × height` raster stored row-major, row 0 at the top.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid {
    width: usize,
    height: usize,
    pixel_size: f64,
    semantics: ValueSemantics,
    data: Vec<f64>,
}

impl ImageGrid {
    pub fn new(
        width: usize,
        height: usize,
        pixel_size: f64,
        semantics: ValueSemantics,
        data: Vec<f64>,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("image dimensions must be positive"));
        }
        if data.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {width}x{height} image",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("image values must be finite"));
        }
        Ok(Self {
            width,
            height,
            pixel_size,
            semantics,
            data,
        })
    }

    pub fn zeros(width: usize, height: usize, pixel_size: f64, semantics: ValueSemantics) -> Self {
        Self {
            width,
            height,
            pixel_size,
            semantics,
            data: vec![0.0; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixel_size(&self) -> f64 {
        self.pixel_size
    }

    pub fn semantics(&self) -> ValueSemantics {
        self.semantics
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    pub fn same_shape(&self, other: &ImageGrid) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub(crate) fn check_same_shape(&self, other: &ImageGrid) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.width, self.height, other.width, other.height
            )))
        }
    }

    /// Applies `f` to every pixel, tagging the result with `semantics`.
    pub fn map(&self, semantics: ValueSemantics, f: impl Fn(f64) -> f64) -> ImageGrid {
        ImageGrid {
            width: self.width,
            height: self.height,
            pixel_size: self.pixel_size,
            semantics,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn with_semantics(mut self, semantics: ValueSemantics) -> Self {
        self.semantics = semantics;
        self
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Rescales to [0, 1] by the image's own range; a constant image maps to zeros.
    pub fn normalized(&self) -> ImageGrid {
        let (lo, hi) = self.min_max();
        let span = hi - lo;
        self.map(self.semantics, |v| if span > 0.0 { (v - lo) / span } else { 0.0 })
    }

    /// Block-averages down to `target × target` (or returns a clone when
    /// already that small). Requires a square image.
    pub fn downsampled(&self, target: usize) -> Result<ImageGrid> {
        if self.width != self.height {
            return Err(Error::invalid("downsampling expects a square image"));
        }
        if target == 0 {
            return Err(Error::invalid("target size must be positive"));
        }
        if target >= self.width {
            return Ok(self.clone());
        }
        let n = self.width;
        let mut sums = vec![0.0; target * target];
        let mut counts = vec![0usize; target * target];
        for r in 0..n {
            let tr = r * target / n;
            for c in 0..n {
                let tc = c * target / n;
                sums[tr * target + tc] += self.data[r * n + c];
                counts[tr * target + tc] += 1;
            }
        }
        let data = sums.iter().zip(&counts).map(|(s, &c)| s / c as f64).collect();
        Ok(ImageGrid {
            width: target,
            height: target,
            pixel_size: self.pixel_size * n as f64 / target as f64,
            semantics: self.semantics,
            data,
        })
    }

    /// `IMG <W> <H> <pixel_size_mm> <semantics>` followed by one row per line.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "IMG {} {} {} {}\n",
            self.width, self.height, self.pixel_size, self.semantics
        );
        for row in self.data.chunks(self.width) {
            push_row(&mut out, row);
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let (hline, header) = lines.next().ok_or_else(|| Error::parse(1, "empty image file"))?;
        let f: Vec<&str> = header.split_whitespace().collect();
        if f.len() != 5 || f[0] != "IMG" {
            return Err(Error::parse(
                hline,
                "expected header 'IMG <W> <H> <pixel_size_mm> <semantics>'",
            ));
        }
        let width = parse_usize(f[1], hline)?;
        let height = parse_usize(f[2], hline)?;
        let pixel_size = parse_f64(f[3], hline)?;
        let semantics = f[4]
            .parse::<ValueSemantics>()
            .map_err(|e| Error::parse(hline, e.to_string()))?;
        let mut data = Vec::with_capacity(width * height);
        let mut rows = 0;
        for (n, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let before = data.len();
            for tok in line.split_whitespace() {
                data.push(parse_f64(tok, n)?);
            }
            if data.len() - before != width {
                return Err(Error::parse(n, format!("expected {width} values per row")));
            }
            rows += 1;
        }
        if rows != height {
            return Err(Error::parse(hline, format!("expected {height} rows, found {rows}")));
        }
        ImageGrid::new(width, height, pixel_size, semantics, data)
            .map_err(|e| Error::parse(hline, e.to_string()))
    }

    /// Plain PGM (P2) with values linearly mapped from `[lo, hi]` to 0..=255
    /// and clipped outside the window.
    pub fn to_pgm(&self, lo: f64, hi: f64) -> Result<String> {
        if !(hi > lo) {
            return Err(Error::invalid("PGM window must satisfy hi > lo"));
        }
        let mut out = format!("P2\n{} {}\n255\n", self.width, self.height);
        for row in self.data.chunks(self.width) {
            let line: Vec<String> = row
                .iter()
                .map(|v| {
                    let g = ((v - lo) / (hi - lo) * 255.0).round().clamp(0.0, 255.0);
                    (g as u8).to_string()
                })
                .collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        Ok(out)
    }
}

pub(crate) fn push_row(out: &mut String, row: &[f64]) {
    let mut first = true;
    for v in row {
        if !first {
            out.push(' ');
        }
        first = false;
        // shortest representation that parses back exactly
        out.push_str(&format!("{v:?}"));
    }
    out.push('\n');
}

pub(crate) fn parse_usize(s: &str, line: usize) -> Result<usize> {
    s.parse::<usize>()
        .map_err(|_| Error::parse(line, format!("'{s}' is not a non-negative integer")))
}
