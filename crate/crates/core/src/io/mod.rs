//! File formats and persistence. Every writer goes through [`write_atomic`].

mod image;
mod manifest;
mod pgm;
mod report;
mod sinogram;

use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use image::{read_field, read_image, write_field, write_image, ImageFiles};
pub use manifest::{RunManifest, StageRecord};
pub use pgm::{decode_pgm, encode_pgm16, read_pgm};
pub use report::{format_report, parse_report, read_report};
pub use sinogram::{decode_sinogram, encode_sinogram, read_sinogram, write_sinogram, SINOGRAM_MAGIC};

/// Writes `bytes` to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_digest(path: &Path) -> Result<String> {
    Ok(sha256_hex(&read_bytes(path)?))
}

/// CSV with a `position_m` column followed by one column per named series.
pub fn profile_csv(positions: &[f64], columns: &[(&str, &[f64])]) -> String {
    let mut out = String::from("position_m");
    for (name, _) in columns {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (k, p) in positions.iter().enumerate() {
        out.push_str(&p.to_string());
        for (_, v) in columns {
            out.push(',');
            out.push_str(&v[k].to_string());
        }
        out.push('\n');
    }
    out
}
