//! Images: raw f64 LE grid (`.f64`), JSON sidecar (`.json`) and a 16-bit
//! graymap quick-look (`.pgm`).

use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{encode_pgm16, read_bytes, write_atomic};
use crate::error::{Error, Result};
use crate::phantom::{Grid2D, PressureField};
use crate::reconstruction::{ReconImage, ReconMetadata};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Sidecar {
    format: String,
    rows: usize,
    cols: usize,
    grid: Grid2D,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    metadata: Option<ReconMetadata>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImageFiles {
    pub raw: PathBuf,
    pub sidecar: PathBuf,
    pub quicklook: PathBuf,
}

impl ImageFiles {
    pub fn for_stem(stem: &Path) -> Self {
        ImageFiles {
            raw: stem.with_extension("f64"),
            sidecar: stem.with_extension("json"),
            quicklook: stem.with_extension("pgm"),
        }
    }
}

pub fn write_image(stem: &Path, img: &ReconImage) -> Result<ImageFiles> {
    write_grid(stem, &img.grid, &img.values, Some(img.metadata.clone()))
}

/// Writes a phantom in the image format, without reconstruction metadata.
pub fn write_field(stem: &Path, field: &PressureField) -> Result<ImageFiles> {
    write_grid(stem, field.grid(), field.values(), None)
}

fn write_grid(
    stem: &Path,
    grid: &Grid2D,
    values: &Array2<f64>,
    metadata: Option<ReconMetadata>,
) -> Result<ImageFiles> {
    let files = ImageFiles::for_stem(stem);
    let raw: Vec<u8> = values.iter().flat_map(|v| v.to_le_bytes()).collect();
    let sidecar = Sidecar {
        format: "f64le row-major, row index grows with y".into(),
        rows: grid.ny,
        cols: grid.nx,
        grid: *grid,
        metadata,
    };
    let mut json = serde_json::to_vec_pretty(&sidecar).expect("sidecar serializes");
    json.push(b'\n');
    write_atomic(&files.raw, &raw)?;
    write_atomic(&files.sidecar, &json)?;
    write_atomic(&files.quicklook, &encode_pgm16(values))?;
    Ok(files)
}

/// Reads an image given any of its three paths or the bare stem.
pub fn read_image(path: &Path) -> Result<ReconImage> {
    let (grid, values, metadata) = read_grid(path)?;
    let metadata = metadata.ok_or_else(|| {
        Error::parse(path.with_extension("json").display().to_string(), 0, "no reconstruction metadata")
    })?;
    Ok(ReconImage { grid, values, metadata })
}

pub fn read_field(path: &Path) -> Result<PressureField> {
    let (grid, values, _) = read_grid(path)?;
    PressureField::new(grid, values)
}

fn read_grid(path: &Path) -> Result<(Grid2D, Array2<f64>, Option<ReconMetadata>)> {
    let files = ImageFiles::for_stem(path);
    let side_bytes = read_bytes(&files.sidecar)?;
    let side: Sidecar = serde_json::from_slice(&side_bytes).map_err(|e| {
        Error::parse(files.sidecar.display().to_string(), 0, format!("line {}: {e}", e.line()))
    })?;
    if side.rows != side.grid.ny || side.cols != side.grid.nx {
        return Err(Error::parse(
            files.sidecar.display().to_string(),
            0,
            "rows/cols disagree with the grid",
        ));
    }
    let raw = read_bytes(&files.raw)?;
    let n = side.rows * side.cols;
    if raw.len() != 8 * n {
        return Err(Error::parse(
            files.raw.display().to_string(),
            raw.len().min(8 * n) as u64,
            format!("expected {} bytes, found {}", 8 * n, raw.len()),
        ));
    }
    let values: Vec<f64> = raw
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if let Some(k) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::parse(files.raw.display().to_string(), 8 * k as u64, "non-finite value"));
    }
    let values = Array2::from_shape_vec((side.rows, side.cols), values).expect("size checked");
    Ok((side.grid, values, side.metadata))
}
