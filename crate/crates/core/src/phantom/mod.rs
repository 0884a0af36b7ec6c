//! Initial pressure phantoms: geometric shapes and imported ink-pattern bitmaps.

mod grid;
mod shapes;

pub use grid::{Grid2D, DEFAULT_DETECTOR_OFFSET};
pub use shapes::{Shape, ShapeSpec};

use ndarray::Array2;

use crate::error::{Error, Result};

/// Initial pressure `p0(x, y)` in Pa, sampled at pixel centers.
///
/// `values` has shape `(ny, nx)` and is indexed `[[iy, ix]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PressureField {
    grid: Grid2D,
    values: Array2<f64>,
}

impl PressureField {
    pub fn new(grid: Grid2D, values: Array2<f64>) -> Result<Self> {
        if values.dim() != (grid.ny, grid.nx) {
            return Err(Error::invalid(
                "field.values",
                format!(
                    "shape {:?} does not match grid ({}, {})",
                    values.dim(),
                    grid.ny,
                    grid.nx
                ),
            ));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::invalid(
                "field.values",
                format!("initial pressure must be finite and non-negative, found {v}"),
            ));
        }
        Ok(PressureField { grid, values })
    }

    pub fn zeros(grid: Grid2D) -> Self {
        PressureField {
            grid,
            values: Array2::zeros((grid.ny, grid.nx)),
        }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn into_values(self) -> Array2<f64> {
        self.values
    }

    /// Multiplies every value by a non-negative factor.
    pub fn scaled(&self, k: f64) -> Result<Self> {
        PressureField::new(self.grid, self.values.mapv(|v| v * k))
    }

    /// Bilinear interpolation between pixel centers; the field is zero
    /// beyond the outermost pixel centers' neighbours.
    #[inline]
    pub fn sample(&self, x: f64, y: f64) -> f64 {
        let fx = self.grid.fx(x);
        let fy = self.grid.fy(y);
        let nx = self.grid.nx as isize;
        let ny = self.grid.ny as isize;
        let x0 = fx.floor();
        let y0 = fy.floor();
        let ix = x0 as isize;
        let iy = y0 as isize;
        if ix < -1 || iy < -1 || ix >= nx || iy >= ny {
            return 0.0;
        }
        let tx = fx - x0;
        let ty = fy - y0;
        let get = |i: isize, j: isize| -> f64 {
            if i < 0 || j < 0 || i >= nx || j >= ny {
                0.0
            } else {
                self.values[[j as usize, i as usize]]
            }
        };
        let v00 = get(ix, iy);
        let v10 = get(ix + 1, iy);
        let v01 = get(ix, iy + 1);
        let v11 = get(ix + 1, iy + 1);
        (v00 * (1.0 - tx) + v10 * tx) * (1.0 - ty) + (v01 * (1.0 - tx) + v11 * tx) * ty
    }

    /// Index bounding box `(ix0, ix1, iy0, iy1)` (inclusive) of nonzero pixels.
    pub fn support_bounds(&self) -> Option<(usize, usize, usize, usize)> {
        let mut bb: Option<(usize, usize, usize, usize)> = None;
        for ((iy, ix), &v) in self.values.indexed_iter() {
            if v != 0.0 {
                bb = Some(match bb {
                    None => (ix, ix, iy, iy),
                    Some((a, b, c, d)) => (a.min(ix), b.max(ix), c.min(iy), d.max(iy)),
                });
            }
        }
        bb
    }

    /// Largest distance from the rotation axis at which the bilinear field can be nonzero.
    pub fn support_radius(&self) -> Option<f64> {
        let (ix0, ix1, iy0, iy1) = self.support_bounds()?;
        let p = self.grid.pitch;
        let xs = [self.grid.x(ix0) - p, self.grid.x(ix1) + p];
        let ys = [self.grid.y(iy0) - p, self.grid.y(iy1) + p];
        let mut r: f64 = 0.0;
        for x in xs {
            for y in ys {
                r = r.max(x.hypot(y));
            }
        }
        Some(r)
    }

    /// Nearest-pixel resampling onto another grid. Target pixels whose center
    /// falls outside this field read zero.
    pub fn resample(&self, target: &Grid2D) -> PressureField {
        let mut out = Array2::zeros((target.ny, target.nx));
        for iy in 0..target.ny {
            let Some(sy) = self.grid.row_of(target.y(iy)) else {
                continue;
            };
            for ix in 0..target.nx {
                if let Some(sx) = self.grid.column_of(target.x(ix)) {
                    out[[iy, ix]] = self.values[[sy, sx]];
                }
            }
        }
        PressureField {
            grid: *target,
            values: out,
        }
    }
}

/// Paints shapes onto the grid. A pixel takes the amplitude of the last
/// shape containing its center, or zero.
pub fn rasterize(specs: &[ShapeSpec], grid: &Grid2D) -> Result<PressureField> {
    let (gx0, gx1, gy0, gy1) = grid.bounds();
    for (index, spec) in specs.iter().enumerate() {
        if let Some(message) = spec.shape.dimension_error() {
            return Err(Error::Shape { index, message });
        }
        if !(spec.amplitude.is_finite() && spec.amplitude >= 0.0) {
            return Err(Error::Shape {
                index,
                message: format!("amplitude must be non-negative, got {}", spec.amplitude),
            });
        }
        let [cx, cy] = spec.shape.center();
        let (hx, hy) = spec.shape.half_extent();
        if cx - hx < gx0 || cx + hx > gx1 || cy - hy < gy0 || cy + hy > gy1 {
            return Err(Error::Shape {
                index,
                message: "lies outside the grid extent".into(),
            });
        }
    }

    let mut values = Array2::zeros((grid.ny, grid.nx));
    for spec in specs {
        let [cx, cy] = spec.shape.center();
        let (hx, hy) = spec.shape.half_extent();
        let ix0 = grid.fx(cx - hx).floor().max(0.0) as usize;
        let ix1 = (grid.fx(cx + hx).ceil() as usize).min(grid.nx - 1);
        let iy0 = grid.fy(cy - hy).floor().max(0.0) as usize;
        let iy1 = (grid.fy(cy + hy).ceil() as usize).min(grid.ny - 1);
        for iy in iy0..=iy1 {
            let y = grid.y(iy);
            for ix in ix0..=ix1 {
                if spec.shape.contains(grid.x(ix), y) {
                    values[[iy, ix]] = spec.amplitude;
                }
            }
        }
    }
    Ok(PressureField {
        grid: *grid,
        values,
    })
}

/// Converts a grayscale bitmap (row 0 at the top) to a binary pressure map.
///
/// Pixels darker than half of `white_level` receive `amplitude`. The grid is
/// centered on the rotation axis with `pitch = physical_width / columns`.
pub fn import_bitmap(
    pixels: &Array2<f64>,
    white_level: f64,
    physical_width: f64,
    amplitude: f64,
    scan_radius: f64,
) -> Result<PressureField> {
    let (rows, cols) = pixels.dim();
    if rows == 0 || cols == 0 {
        return Err(Error::invalid("bitmap", "image is empty"));
    }
    if !(physical_width.is_finite() && physical_width > 0.0) {
        return Err(Error::invalid(
            "bitmap.physical_width",
            format!("must be positive, got {physical_width}"),
        ));
    }
    if !(amplitude.is_finite() && amplitude >= 0.0) {
        return Err(Error::invalid("bitmap.amplitude", "must be non-negative"));
    }
    let pitch = physical_width / cols as f64;
    let grid = Grid2D::with_scan_radius(cols, rows, pitch, (0.0, 0.0), scan_radius)?;
    let threshold = white_level / 2.0;
    let values = Array2::from_shape_fn((rows, cols), |(iy, ix)| {
        if pixels[[rows - 1 - iy, ix]] < threshold {
            amplitude
        } else {
            0.0
        }
    });
    PressureField::new(grid, values)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldStats {
    pub max: f64,
    /// Nonzero pixel count times pitch squared.
    pub support_area: f64,
    /// Geometric centroid of the nonzero pixels; `None` for an all-zero field.
    pub centroid: Option<(f64, f64)>,
}

pub fn field_statistics(field: &PressureField) -> FieldStats {
    let g = field.grid();
    let mut max = 0.0f64;
    let mut count = 0usize;
    let (mut sx, mut sy) = (0.0, 0.0);
    for ((iy, ix), &v) in field.values().indexed_iter() {
        max = max.max(v);
        if v != 0.0 {
            count += 1;
            sx += g.x(ix);
            sy += g.y(iy);
        }
    }
    FieldStats {
        max,
        support_area: count as f64 * g.pitch * g.pitch,
        centroid: (count > 0).then(|| (sx / count as f64, sy / count as f64)),
    }
}
