//! `SDOATSG1` sinogram files: 8-byte magic, u64 LE header length, JSON header,
//! then `rows * cols` f64 LE values in row-major order.

use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{read_bytes, write_atomic};
use crate::acoustics::{ScanGeometry, Sinogram, Stage};
use crate::error::{Error, Result};

pub const SINOGRAM_MAGIC: &[u8; 8] = b"SDOATSG1";
const PREFIX: usize = 16;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    format_version: u32,
    stage: Stage,
    rows: usize,
    cols: usize,
    sample_rate: f64,
    sound_speed: Option<f64>,
    geometry: ScanGeometry,
    provenance: String,
}

pub fn encode_sinogram(s: &Sinogram) -> Vec<u8> {
    let g = s.geometry();
    let header = Header {
        format_version: 1,
        stage: s.stage(),
        rows: g.n_angles(),
        cols: g.n_samples,
        sample_rate: 1.0 / g.dt,
        sound_speed: Some(s.sound_speed()),
        geometry: g.clone(),
        provenance: s.provenance.clone(),
    };
    let json = serde_json::to_vec(&header).expect("header serializes");
    let mut out = Vec::with_capacity(PREFIX + json.len() + 8 * s.data().len());
    out.extend_from_slice(SINOGRAM_MAGIC);
    out.extend_from_slice(&(json.len() as u64).to_le_bytes());
    out.extend_from_slice(&json);
    for v in s.data().iter() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_sinogram(bytes: &[u8]) -> Result<Sinogram> {
    let err = |offset: usize, msg: String| Error::parse("sinogram", offset as u64, msg);
    if bytes.len() < PREFIX {
        return Err(err(bytes.len(), "file shorter than the 16-byte prefix".into()));
    }
    if &bytes[..8] != SINOGRAM_MAGIC {
        return Err(err(0, "bad magic, expected SDOATSG1".into()));
    }
    let hlen = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let data_start = PREFIX
        .checked_add(usize::try_from(hlen).unwrap_or(usize::MAX))
        .filter(|&e| e <= bytes.len())
        .ok_or_else(|| err(8, format!("header length {hlen} runs past the end of the file")))?;
    let header: Header = serde_json::from_slice(&bytes[PREFIX..data_start]).map_err(|e| {
        // the header is written on one line, so the column is the byte position
        err(PREFIX + e.column().saturating_sub(1), format!("header: {e}"))
    })?;
    if header.format_version != 1 {
        return Err(err(PREFIX, format!("unsupported format_version {}", header.format_version)));
    }
    let sound_speed = header
        .sound_speed
        .ok_or_else(|| err(PREFIX, "header lacks sound_speed".into()))?;
    let g = &header.geometry;
    if header.rows != g.n_angles() || header.cols != g.n_samples {
        return Err(err(
            PREFIX,
            format!(
                "rows x cols {} x {} disagree with the geometry ({} x {})",
                header.rows,
                header.cols,
                g.n_angles(),
                g.n_samples
            ),
        ));
    }
    if (header.sample_rate * g.dt - 1.0).abs() > 1e-9 {
        return Err(err(PREFIX, "sample_rate disagrees with geometry dt".into()));
    }
    let n = header.rows * header.cols;
    let payload = &bytes[data_start..];
    if payload.len() != 8 * n {
        return Err(err(
            data_start + payload.len().min(8 * n),
            format!("expected {} data bytes, found {}", 8 * n, payload.len()),
        ));
    }
    let mut values = Vec::with_capacity(n);
    for (k, chunk) in payload.chunks_exact(8).enumerate() {
        let v = f64::from_le_bytes(chunk.try_into().unwrap());
        if !v.is_finite() {
            return Err(err(data_start + 8 * k, "non-finite sample".into()));
        }
        values.push(v);
    }
    let data = Array2::from_shape_vec((header.rows, header.cols), values).expect("shape checked");
    Sinogram::new(header.geometry, header.stage, data, sound_speed, header.provenance)
}

pub fn write_sinogram(path: &Path, s: &Sinogram) -> Result<()> {
    write_atomic(path, &encode_sinogram(s))
}

pub fn read_sinogram(path: &Path) -> Result<Sinogram> {
    decode_sinogram(&read_bytes(path)?)
}
