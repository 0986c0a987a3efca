//! Netpbm graymap I/O: reading P2/P5 files as binary masks and writing
//! 16-bit P2 intensity images.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::patterns::RasterMask;

/// A decoded graymap, samples scaled to `[0, 1]` by `maxval`.
#[derive(Debug, Clone, PartialEq)]
pub struct Graymap {
    pub width: usize,
    pub height: usize,
    pub levels: Vec<f64>,
}

fn err(msg: impl Into<String>) -> Error {
    Error::Pgm(msg.into())
}

/// Parses plain (P2) or raw (P5) PGM bytes.
pub fn parse(bytes: &[u8]) -> Result<Graymap> {
    let mut pos = 0usize;
    let magic = next_token(bytes, &mut pos).ok_or_else(|| err("missing magic number"))?;
    let raw = match magic.as_slice() {
        b"P2" => false,
        b"P5" => true,
        _ => return Err(err("not a P2/P5 graymap")),
    };
    let mut header = [0usize; 3];
    for (slot, name) in header.iter_mut().zip(["width", "height", "maxval"]) {
        let tok = next_token(bytes, &mut pos).ok_or_else(|| err(format!("missing {name}")))?;
        *slot = std::str::from_utf8(&tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| err(format!("bad {name}")))?;
    }
    let [width, height, maxval] = header;
    if width == 0 || height == 0 {
        return Err(err("empty image"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(err(format!("maxval {maxval} out of range")));
    }
    let count = width * height;
    let scale = 1.0 / maxval as f64;
    let levels = if raw {
        // exactly one whitespace byte separates the header from the raster
        pos += 1;
        let bpp = if maxval < 256 { 1 } else { 2 };
        let body = bytes
            .get(pos..pos + count * bpp)
            .ok_or_else(|| err("truncated raster"))?;
        if bpp == 1 {
            body.iter().map(|&b| b as f64 * scale).collect()
        } else {
            body.chunks_exact(2)
                .map(|c| u16::from_be_bytes([c[0], c[1]]) as f64 * scale)
                .collect()
        }
    } else {
        let mut v = Vec::with_capacity(count);
        for _ in 0..count {
            let tok = next_token(bytes, &mut pos).ok_or_else(|| err("truncated raster"))?;
            let s: usize = std::str::from_utf8(&tok)
                .ok()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| err("bad sample"))?;
            if s > maxval {
                return Err(err("sample exceeds maxval"));
            }
            v.push(s as f64 * scale);
        }
        v
    };
    Ok(Graymap {
        width,
        height,
        levels,
    })
}

fn next_token(bytes: &[u8], pos: &mut usize) -> Option<Vec<u8>> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    (*pos > start).then(|| bytes[start..*pos].to_vec())
}

/// Thresholds a graymap at 0.5 of `maxval` into a mask with the given pitch.
pub fn to_mask(map: &Graymap, pitch: f64) -> Result<RasterMask> {
    let data = map.levels.iter().map(|&l| l >= 0.5).collect();
    RasterMask::new(map.height, map.width, data, pitch)
}

pub fn read_mask(path: &std::path::Path, pitch: f64) -> Result<RasterMask> {
    let bytes = std::fs::read(path).map_err(|e| err(format!("{}: {e}", path.display())))?;
    to_mask(&parse(&bytes)?, pitch)
}

/// Encodes intensities (row 0 at the top) as a P2 graymap with maxval 65535,
/// normalized to the largest value. The normalization constant goes in a
/// comment line.
pub fn encode_p2(width: usize, height: usize, intensity: &[f64]) -> String {
    assert_eq!(intensity.len(), width * height);
    let peak = intensity.iter().cloned().fold(0.0, f64::max);
    let mut out = String::new();
    let _ = writeln!(out, "P2");
    let _ = writeln!(out, "# max_intensity={}", crate::pgm::format_sci(peak));
    let _ = writeln!(out, "{width} {height}");
    let _ = writeln!(out, "65535");
    for row in intensity.chunks(width) {
        let line: Vec<String> = row
            .iter()
            .map(|&v| {
                let level = if peak > 0.0 {
                    (v / peak * 65535.0).round().clamp(0.0, 65535.0) as u32
                } else {
                    0
                };
                level.to_string()
            })
            .collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    out
}

/// `printf("%.12e")` formatting: 12 fractional digits, signed exponent with
/// at least two digits.
pub fn format_sci(v: f64) -> String {
    let s = format!("{v:.12e}");
    match s.split_once('e') {
        Some((mant, exp)) => {
            let (sign, digits) = match exp.strip_prefix('-') {
                Some(d) => ('-', d),
                None => ('+', exp),
            };
            format!("{mant}e{sign}{digits:0>2}")
        }
        None => s,
    }
}
