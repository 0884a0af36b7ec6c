use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};

/// Default distance from the rotation axis to the line detector.
pub const DEFAULT_DETECTOR_OFFSET: f64 = 13e-3;

/// A regular square-pixel image plane.
///
/// Pixel `(ix, iy)` has its center at
/// `x = cx + (ix - (nx-1)/2) * pitch`, `y = cy + (iy - (ny-1)/2) * pitch`,
/// so `iy` grows with `y` and the grid is centered on `(cx, cy)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    pub nx: usize,
    pub ny: usize,
    pub pitch: f64,
    #[serde(default)]
    pub cx: f64,
    #[serde(default)]
    pub cy: f64,
}

impl Grid2D {
    /// Grid centered on the rotation axis, checked against the default 13 mm scan circle.
    pub fn new(nx: usize, ny: usize, pitch: f64) -> Result<Self> {
        Self::with_scan_radius(nx, ny, pitch, (0.0, 0.0), DEFAULT_DETECTOR_OFFSET)
    }

    pub fn with_scan_radius(
        nx: usize,
        ny: usize,
        pitch: f64,
        center: (f64, f64),
        scan_radius: f64,
    ) -> Result<Self> {
        let grid = Grid2D {
            nx,
            ny,
            pitch,
            cx: center.0,
            cy: center.1,
        };
        grid.validate(scan_radius)?;
        Ok(grid)
    }

    /// 20 mm x 20 mm at 50 um (401 x 401).
    pub fn default_scan() -> Self {
        Grid2D {
            nx: 401,
            ny: 401,
            pitch: 50e-6,
            cx: 0.0,
            cy: 0.0,
        }
    }

    /// Checks the shape invariants and that the grid's extent along each axis
    /// fits inside the detector circle.
    pub fn validate(&self, scan_radius: f64) -> Result<()> {
        ensure(self.nx >= 1, "grid.nx", || "must be at least 1".into())?;
        ensure(self.ny >= 1, "grid.ny", || "must be at least 1".into())?;
        ensure(self.pitch.is_finite() && self.pitch > 0.0, "grid.pitch", || {
            format!("must be positive, got {}", self.pitch)
        })?;
        ensure(self.cx.is_finite() && self.cy.is_finite(), "grid.center", || {
            "must be finite".into()
        })?;
        let reach_x = self.cx.abs() + self.width() / 2.0;
        let reach_y = self.cy.abs() + self.height() / 2.0;
        if reach_x > scan_radius || reach_y > scan_radius {
            return Err(Error::invalid(
                "grid",
                format!(
                    "extent {:.3} mm x {:.3} mm does not fit inside the scan circle of radius {:.3} mm",
                    self.width() * 1e3,
                    self.height() * 1e3,
                    scan_radius * 1e3
                ),
            ));
        }
        Ok(())
    }

    pub fn width(&self) -> f64 {
        self.nx as f64 * self.pitch
    }

    pub fn height(&self) -> f64 {
        self.ny as f64 * self.pitch
    }

    #[inline]
    pub fn x(&self, ix: usize) -> f64 {
        self.cx + (ix as f64 - (self.nx as f64 - 1.0) / 2.0) * self.pitch
    }

    #[inline]
    pub fn y(&self, iy: usize) -> f64 {
        self.cy + (iy as f64 - (self.ny as f64 - 1.0) / 2.0) * self.pitch
    }

    /// Fractional column index of coordinate `x`.
    #[inline]
    pub fn fx(&self, x: f64) -> f64 {
        (x - self.cx) / self.pitch + (self.nx as f64 - 1.0) / 2.0
    }

    #[inline]
    pub fn fy(&self, y: f64) -> f64 {
        (y - self.cy) / self.pitch + (self.ny as f64 - 1.0) / 2.0
    }

    /// Column whose pixel cell contains `x`, if any.
    pub fn column_of(&self, x: f64) -> Option<usize> {
        let f = self.fx(x).round();
        (f >= 0.0 && f < self.nx as f64).then_some(f as usize)
    }

    pub fn row_of(&self, y: f64) -> Option<usize> {
        let f = self.fy(y).round();
        (f >= 0.0 && f < self.ny as f64).then_some(f as usize)
    }

    /// Outer edges `(x_min, x_max, y_min, y_max)` of the pixel cells.
    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        (
            self.cx - self.width() / 2.0,
            self.cx + self.width() / 2.0,
            self.cy - self.height() / 2.0,
            self.cy + self.height() / 2.0,
        )
    }

    /// Largest distance from the rotation axis to any grid corner.
    pub fn max_radius(&self) -> f64 {
        let (x0, x1, y0, y1) = self.bounds();
        x0.abs().max(x1.abs()).hypot(y0.abs().max(y1.abs()))
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
