//! Portable graymaps: P2 and P5 (8- and 16-bit) in, 16-bit P5 out.

use std::path::Path;

use ndarray::Array2;

use super::read_bytes;
use crate::error::{Error, Result};

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::parse("pgm", self.pos as u64, msg)
    }

    fn skip_space(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn number(&mut self) -> Result<usize> {
        self.skip_space();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::parse("pgm", start as u64, "expected a decimal number"))
    }
}

/// Pixel values (row 0 at the top of the picture) and the white level.
pub fn decode_pgm(bytes: &[u8]) -> Result<(Array2<f64>, f64)> {
    let mut c = Cursor { bytes, pos: 0 };
    let binary = match bytes.get(..2) {
        Some(b"P2") => false,
        Some(b"P5") => true,
        _ => return Err(c.err("expected magic P2 or P5")),
    };
    c.pos = 2;
    let width = c.number()?;
    let height = c.number()?;
    let maxval = c.number()?;
    if width == 0 || height == 0 {
        return Err(c.err("zero image dimension"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(c.err(format!("maxval {maxval} outside 1..=65535")));
    }
    let n = width * height;
    let mut values = Vec::with_capacity(n);
    if binary {
        // exactly one whitespace byte separates the header from the raster
        c.pos += 1;
        let wide = maxval > 255;
        let need = n * if wide { 2 } else { 1 };
        let raster = bytes
            .get(c.pos..c.pos + need)
            .ok_or_else(|| Error::parse("pgm", bytes.len() as u64, format!("raster needs {need} bytes")))?;
        if wide {
            values.extend(raster.chunks_exact(2).map(|p| u16::from_be_bytes([p[0], p[1]]) as f64));
        } else {
            values.extend(raster.iter().map(|&p| p as f64));
        }
    } else {
        for _ in 0..n {
            values.push(c.number()? as f64);
        }
    }
    if let Some(k) = values.iter().position(|&v| v > maxval as f64) {
        return Err(Error::parse("pgm", k as u64, format!("pixel {k} exceeds maxval {maxval}")));
    }
    let pixels = Array2::from_shape_vec((height, width), values).expect("size checked");
    Ok((pixels, maxval as f64))
}

pub fn read_pgm(path: &Path) -> Result<(Array2<f64>, f64)> {
    decode_pgm(&read_bytes(path)?)
}

/// 16-bit P5 quick-look of an `[[iy, ix]]` image with `iy` growing upward;
/// the value range maps linearly onto 0..=65535.
pub fn encode_pgm16(values: &Array2<f64>) -> Vec<u8> {
    let (ny, nx) = values.dim();
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut out = format!("P5\n{nx} {ny}\n65535\n").into_bytes();
    for iy in (0..ny).rev() {
        for ix in 0..nx {
            let v = ((values[[iy, ix]] - lo) / span * 65535.0).round() as u16;
            out.extend_from_slice(&v.to_be_bytes());
        }
    }
    out
}
