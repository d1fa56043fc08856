//! Layered block decomposition method.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::image::{parse_usize, ImageGrid};
use crate::physics::parse_f64;

const DEFAULT_2X2: &str = include_str!("../../data/ctm-2x2.txt");

/// CTM values (bits) for square binary blocks keyed by their row-major bit
/// pattern, most significant bit first.
#[derive(Debug, Clone, PartialEq)]
pub struct CtmTable {
    edge: usize,
    values: BTreeMap<u64, f64>,
}

impl CtmTable {
    pub fn new(edge: usize, values: BTreeMap<u64, f64>) -> Result<Self> {
        if edge == 0 || edge * edge > 64 {
            return Err(Error::invalid("CTM block edge must be between 1 and 8"));
        }
        if values.values().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::invalid("CTM values must be positive and finite"));
        }
        let limit = if edge * edge == 64 { u64::MAX } else { (1u64 << (edge * edge)) - 1 };
        if values.keys().any(|&k| k > limit) {
            return Err(Error::invalid("CTM pattern wider than the block"));
        }
        Ok(Self { edge, values })
    }

    /// The shipped table covering all sixteen 2×2 blocks.
    pub fn default_2x2() -> Self {
        Self::parse(DEFAULT_2X2).expect("bundled CTM table parses")
    }

    pub fn edge(&self) -> usize {
        self.edge
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.edge * self.edge < 64 && self.values.len() as u64 == 1u64 << (self.edge * self.edge)
    }

    pub fn get(&self, pattern: u64) -> Option<f64> {
        self.values.get(&pattern).copied()
    }

    pub fn max_value(&self) -> f64 {
        self.values.values().cloned().fold(0.0, f64::max)
    }

    /// `CTM <edge>` header, then `<bits> <value>` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hl, header) = lines.next().ok_or_else(|| Error::parse(1, "empty CTM file"))?;
        let f: Vec<&str> = header.split_whitespace().collect();
        if f.len() != 2 || f[0] != "CTM" {
            return Err(Error::parse(hl, "expected header 'CTM <block_edge>'"));
        }
        let edge = parse_usize(f[1], hl)?;
        if edge == 0 || edge * edge > 64 {
            return Err(Error::parse(hl, "block edge must be between 1 and 8"));
        }
        let mut values = BTreeMap::new();
        for (n, line) in lines {
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 2 {
                return Err(Error::parse(n, "expected '<bits> <value>'"));
            }
            if f[0].len() != edge * edge || !f[0].chars().all(|c| c == '0' || c == '1') {
                return Err(Error::parse(n, format!("pattern must be {} binary digits", edge * edge)));
            }
            let key = u64::from_str_radix(f[0], 2).map_err(|e| Error::parse(n, e.to_string()))?;
            let value = parse_f64(f[1], n)?;
            if values.insert(key, value).is_some() {
                return Err(Error::parse(n, format!("duplicate pattern {}", f[0])));
            }
        }
        CtmTable::new(edge, values).map_err(|e| Error::parse(hl, e.to_string()))
    }

    pub fn to_text(&self) -> String {
        let width = self.edge * self.edge;
        let mut out = format!("CTM {}\n", self.edge);
        for (k, v) in &self.values {
            out.push_str(&format!("{k:0width$b} {v:?}\n"));
        }
        out
    }
}

/// How pixel values map onto the `levels` grey levels.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Quantization {
    /// Over the image's own range.
    #[default]
    MinMax,
    /// Over a fixed window shared across images; values outside are clipped.
    Window { lo: f64, hi: f64 },
}

/// Which binary layer a grey level `ℓ` produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerRule {
    /// Layer ℓ = pixel level ≥ ℓ, for ℓ = 1..levels−1.
    #[default]
    Cumulative,
    /// Layer ℓ = pixel level == ℓ, for ℓ = 0..levels−1.
    Equality,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BdmParams {
    pub block: usize,
    /// Step between consecutive blocks, `1..=block`.
    pub offset: usize,
    pub levels: usize,
    pub quantization: Quantization,
    pub layer_rule: LayerRule,
    /// Substitute the table maximum for blocks missing from the table.
    pub fallback_to_max: bool,
}

impl Default for BdmParams {
    fn default() -> Self {
        Self {
            block: 2,
            offset: 2,
            levels: 256,
            quantization: Quantization::MinMax,
            layer_rule: LayerRule::Cumulative,
            fallback_to_max: false,
        }
    }
}

/// Grey level in `0..levels` of every pixel.
pub fn quantize(img: &ImageGrid, levels: usize, quantization: Quantization) -> Result<Vec<usize>> {
    if levels < 2 {
        return Err(Error::invalid("quantization needs at least two levels"));
    }
    let (lo, hi) = match quantization {
        Quantization::MinMax => img.min_max(),
        Quantization::Window { lo, hi } => {
            if !(hi > lo) {
                return Err(Error::invalid("quantization window must satisfy hi > lo"));
            }
            (lo, hi)
        }
    };
    let span = hi - lo;
    Ok(img
        .data()
        .iter()
        .map(|&v| {
            if span > 0.0 {
                let l = ((v - lo) / span * levels as f64).floor();
                (l.max(0.0) as usize).min(levels - 1)
            } else {
                0
            }
        })
        .collect())
}

/// Block pattern counts over every layer of `img`.
pub fn layer_block_counts(img: &ImageGrid, params: &BdmParams) -> Result<BTreeMap<u64, u64>> {
    let b = params.block;
    if b == 0 || b * b > 64 {
        return Err(Error::invalid("block edge must be between 1 and 8"));
    }
    if params.offset == 0 || params.offset > b {
        return Err(Error::invalid(format!("offset must lie in 1..={b}")));
    }
    let levels = quantize(img, params.levels, params.quantization)?;
    let (w, h) = (img.width(), img.height());
    let layers: Vec<usize> = match params.layer_rule {
        LayerRule::Cumulative => (1..params.levels).collect(),
        LayerRule::Equality => (0..params.levels).collect(),
    };
    let mut counts = BTreeMap::new();
    let mut r = 0;
    while r + b <= h {
        let mut c = 0;
        while c + b <= w {
            let block: Vec<usize> = (0..b * b)
                .map(|i| levels[(r + i / b) * w + c + i % b])
                .collect();
            for &l in &layers {
                let mut key = 0u64;
                for &v in &block {
                    let bit = match params.layer_rule {
                        LayerRule::Cumulative => v >= l,
                        LayerRule::Equality => v == l,
                    };
                    key = (key << 1) | bit as u64;
                }
                *counts.entry(key).or_insert(0u64) += 1;
            }
            c += params.offset;
        }
        r += params.offset;
    }
    Ok(counts)
}

/// `Σ_unique [CTM(block) + log₂ count(block)]` in bits.
pub fn bdm_from_counts(counts: &BTreeMap<u64, u64>, ctm: &CtmTable, fallback_to_max: bool) -> Result<f64> {
    let mut total = 0.0;
    for (&key, &n) in counts {
        let value = match ctm.get(key) {
            Some(v) => v,
            None if fallback_to_max => ctm.max_value(),
            None => {
                return Err(Error::UnknownBlock(format!(
                    "{key:0width$b}",
                    width = ctm.edge() * ctm.edge()
                )))
            }
        };
        total += value + (n as f64).log2();
    }
    Ok(total)
}

pub fn layered_bdm(img: &ImageGrid, ctm: &CtmTable, params: &BdmParams) -> Result<f64> {
    if params.block != ctm.edge() {
        return Err(Error::invalid(format!(
            "block size {} differs from the CTM table edge {}",
            params.block,
            ctm.edge()
        )));
    }
    bdm_from_counts(&layer_block_counts(img, params)?, ctm, params.fallback_to_max)
}
