//! Lempel–Ziv complexity and LZW compression length.

use std::collections::HashMap;

use crate::error::{Error, Result};

use super::check_series;

/// Bit `i` is set when `s[i] ≥ mean(s)`.
pub fn binarize_by_mean(s: &[f64]) -> Result<Vec<bool>> {
    check_series(s, 1, "binarization")?;
    let mean = s.iter().sum::<f64>() / s.len() as f64;
    Ok(s.iter().map(|&v| v >= mean).collect())
}

/// Number of distinct patterns in the 1976 Lempel–Ziv parsing
/// (Kaspar–Schuster counting; the unfinished last pattern counts).
pub fn lz76_patterns(bits: &[bool]) -> usize {
    let n = bits.len();
    if n < 2 {
        return n;
    }
    let (mut c, mut l, mut i, mut k, mut k_max) = (1, 1, 0, 1, 1);
    loop {
        if bits[i + k - 1] == bits[l + k - 1] {
            k += 1;
            if l + k > n {
                c += 1;
                break;
            }
        } else {
            k_max = k_max.max(k);
            i += 1;
            if i == l {
                c += 1;
                l += k_max;
                if l + 1 > n {
                    break;
                }
                i = 0;
                k = 1;
                k_max = 1;
            } else {
                k = 1;
            }
        }
    }
    c
}

/// `C_k = c(N)·log₂N / N`.
pub fn lz_complexity(bits: &[bool]) -> Result<f64> {
    if bits.len() < 2 {
        return Err(Error::invalid("LZ complexity needs at least two bits"));
    }
    let n = bits.len() as f64;
    Ok(lz76_patterns(bits) as f64 * n.log2() / n)
}

pub const LZW_CODE_BITS: usize = 12;
const LZW_MAX_CODES: usize = 1 << LZW_CODE_BITS;

/// Bits in the LZW encoding of `data` with fixed 12-bit codes, a 256-entry
/// initial dictionary and a reset once all 4096 codes are in use.
pub fn lzw_compressed_length(data: &[u8]) -> Result<usize> {
    let (&first, rest) = data
        .split_first()
        .ok_or_else(|| Error::invalid("LZW input must be non-empty"))?;
    let mut dict: HashMap<(u16, u8), u16> = HashMap::new();
    let mut next = 256usize;
    let mut w = first as u16;
    let mut codes = 0usize;
    for &b in rest {
        if let Some(&code) = dict.get(&(w, b)) {
            w = code;
            continue;
        }
        codes += 1;
        if next < LZW_MAX_CODES {
            dict.insert((w, b), next as u16);
            next += 1;
        } else {
            dict.clear();
            next = 256;
        }
        w = b as u16;
    }
    codes += 1;
    Ok(codes * LZW_CODE_BITS)
}
