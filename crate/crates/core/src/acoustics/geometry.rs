use std::f64::consts::TAU;

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::signal::{TimeWindow, Trace};

/// Acquisition protocol: detector circle, angular positions and timing window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanGeometry {
    /// Distance from the rotation axis to the line detector [m].
    pub detector_offset: f64,
    /// Detector angles [rad], strictly increasing in `[0, 2 pi)`.
    pub angles: Vec<f64>,
    pub t_start: f64,
    pub dt: f64,
    pub n_samples: usize,
}

impl ScanGeometry {
    pub fn new(
        detector_offset: f64,
        angles: Vec<f64>,
        t_start: f64,
        dt: f64,
        n_samples: usize,
    ) -> Result<Self> {
        let g = ScanGeometry {
            detector_offset,
            angles,
            t_start,
            dt,
            n_samples,
        };
        g.validate()?;
        Ok(g)
    }

    /// `n` equally spaced angles starting at zero.
    pub fn full_circle(n: usize) -> Vec<f64> {
        (0..n).map(|i| TAU * i as f64 / n as f64).collect()
    }

    /// Geometry whose window records every arrival from within `r_max` of the axis.
    pub fn covering(
        detector_offset: f64,
        n_angles: usize,
        sample_rate: f64,
        r_max: f64,
        sound_speed: f64,
    ) -> Result<Self> {
        ensure(sample_rate > 0.0, "geometry.sample_rate", || {
            format!("must be positive, got {sample_rate}")
        })?;
        ensure(sound_speed > 0.0, "sound_speed", || {
            format!("must be positive, got {sound_speed}")
        })?;
        let dt = 1.0 / sample_rate;
        let t_first = ((detector_offset - r_max).max(0.0) / sound_speed / dt).floor() * dt;
        let t_last = (detector_offset + r_max) / sound_speed;
        let n_samples = ((t_last - t_first) / dt).ceil() as usize + 1;
        ScanGeometry::new(
            detector_offset,
            Self::full_circle(n_angles),
            t_first,
            dt,
            n_samples,
        )
    }

    pub fn validate(&self) -> Result<()> {
        ensure(
            self.detector_offset.is_finite() && self.detector_offset > 0.0,
            "geometry.detector_offset",
            || format!("must be positive, got {}", self.detector_offset),
        )?;
        ensure(self.dt.is_finite() && self.dt > 0.0, "geometry.dt", || {
            format!("must be positive, got {}", self.dt)
        })?;
        ensure(self.n_samples >= 2, "geometry.n_samples", || {
            format!("must be at least 2, got {}", self.n_samples)
        })?;
        ensure(self.t_start.is_finite(), "geometry.t_start", || "must be finite".into())?;
        ensure(!self.angles.is_empty(), "geometry.angles", || "must not be empty".into())?;
        for (i, &a) in self.angles.iter().enumerate() {
            if !(0.0..TAU).contains(&a) {
                return Err(Error::invalid(
                    "geometry.angles",
                    format!("angle #{i} = {a} rad is outside [0, 2pi)"),
                ));
            }
            if i > 0 && a <= self.angles[i - 1] {
                return Err(Error::invalid(
                    "geometry.angles",
                    format!("angles must be strictly increasing (index {i})"),
                ));
            }
        }
        Ok(())
    }

    /// Checks that every arrival from within `r_max` of the axis falls inside the window.
    pub fn validate_coverage(&self, r_max: f64, sound_speed: f64) -> Result<()> {
        let earliest = (self.detector_offset - r_max).max(0.0) / sound_speed;
        let latest = (self.detector_offset + r_max) / sound_speed;
        let w = self.window();
        // allow float slack from constructing the window on a sample lattice
        let slack = 1e-9 * w.dt;
        if w.t_start > earliest + slack {
            return Err(Error::invalid(
                "geometry.t_start",
                format!(
                    "window starts at {:.4e} s but the first arrival is at {:.4e} s",
                    w.t_start, earliest
                ),
            ));
        }
        if w.end() + slack < latest {
            return Err(Error::invalid(
                "geometry.n_samples",
                format!(
                    "window ends at {:.4e} s but the last arrival is at {:.4e} s",
                    w.end(),
                    latest
                ),
            ));
        }
        Ok(())
    }

    pub fn n_angles(&self) -> usize {
        self.angles.len()
    }

    pub fn window(&self) -> TimeWindow {
        TimeWindow {
            t_start: self.t_start,
            dt: self.dt,
            n_samples: self.n_samples,
        }
    }

    pub fn detector_position(&self, i: usize) -> [f64; 2] {
        let (s, c) = self.angles[i].sin_cos();
        [self.detector_offset * c, self.detector_offset * s]
    }

    /// Geometry restricted to the given angle indices.
    pub fn select_angles(&self, keep: &[usize]) -> Result<Self> {
        let mut g = self.clone();
        g.angles = keep.iter().map(|&i| self.angles[i]).collect();
        g.validate()?;
        Ok(g)
    }
}

/// Which quantity the sinogram rows carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    /// Line-integrated pressure [Pa m].
    LinePressure,
    /// Interferometric phase [rad].
    Phase,
}

/// Angle x time matrix of detector traces.
#[derive(Debug, Clone, PartialEq)]
pub struct Sinogram {
    geometry: ScanGeometry,
    stage: Stage,
    data: Array2<f64>,
    sound_speed: f64,
    pub provenance: String,
}

impl Sinogram {
    pub fn new(
        geometry: ScanGeometry,
        stage: Stage,
        data: Array2<f64>,
        sound_speed: f64,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        geometry.validate()?;
        if data.dim() != (geometry.n_angles(), geometry.n_samples) {
            return Err(Error::invalid(
                "sinogram.data",
                format!(
                    "shape {:?} does not match {} angles x {} samples",
                    data.dim(),
                    geometry.n_angles(),
                    geometry.n_samples
                ),
            ));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("sinogram.data", "contains non-finite values"));
        }
        ensure(
            sound_speed.is_finite() && sound_speed > 0.0,
            "sinogram.sound_speed",
            || format!("must be positive, got {sound_speed}"),
        )?;
        Ok(Sinogram {
            geometry,
            stage,
            data,
            sound_speed,
            provenance: provenance.into(),
        })
    }

    pub fn geometry(&self) -> &ScanGeometry {
        &self.geometry
    }

    pub fn stage(&self) -> Stage {
        self.stage
    }

    pub fn data(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn sound_speed(&self) -> f64 {
        self.sound_speed
    }

    pub fn n_angles(&self) -> usize {
        self.geometry.n_angles()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.data.row(i)
    }

    pub fn row_trace(&self, i: usize) -> Trace {
        Trace::new(self.geometry.t_start, self.geometry.dt, self.data.row(i).to_vec())
    }

    /// Same metadata, new data and stage.
    pub fn with_data(&self, stage: Stage, data: Array2<f64>) -> Result<Self> {
        Sinogram::new(
            self.geometry.clone(),
            stage,
            data,
            self.sound_speed,
            self.provenance.clone(),
        )
    }

    /// Keeps only the listed angle rows.
    pub fn select_angles(&self, keep: &[usize]) -> Result<Self> {
        let geometry = self.geometry.select_angles(keep)?;
        let data = self.data.select(ndarray::Axis(0), keep);
        Sinogram::new(geometry, self.stage, data, self.sound_speed, self.provenance.clone())
    }

    pub fn require_stage(&self, stage: Stage) -> Result<()> {
        if self.stage != stage {
            return Err(Error::invalid(
                "sinogram.stage",
                format!("expected {:?}, found {:?}", stage, self.stage),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covering_window_passes_its_own_check() {
        let g = ScanGeometry::covering(13e-3, 360, 60e6, 14.2e-3, 1480.0).unwrap();
        g.validate_coverage(14.2e-3, 1480.0).unwrap();
        assert_eq!(g.n_angles(), 360);
        assert_eq!(g.t_start, 0.0);
        // shrinking the window breaks coverage
        let mut short = g.clone();
        short.n_samples -= 5;
        assert!(short.validate_coverage(14.2e-3, 1480.0).is_err());
        let mut late = g.clone();
        late.t_start = 1e-6;
        assert!(late.validate_coverage(14.2e-3, 1480.0).is_err());
    }

    #[test]
    fn rejects_bad_angles() {
        assert!(ScanGeometry::new(13e-3, vec![0.0, 0.0], 0.0, 1e-8, 10).is_err());
        assert!(ScanGeometry::new(13e-3, vec![0.0, 7.0], 0.0, 1e-8, 10).is_err());
        assert!(ScanGeometry::new(13e-3, vec![], 0.0, 1e-8, 10).is_err());
        assert!(ScanGeometry::new(13e-3, vec![0.0], 0.0, 1e-8, 1).is_err());
        assert!(ScanGeometry::new(0.0, vec![0.0], 0.0, 1e-8, 10).is_err());
    }

    #[test]
    fn sinogram_shape_and_stage_checks() {
        let g = ScanGeometry::new(13e-3, vec![0.0, 1.0], 0.0, 1e-8, 4).unwrap();
        assert!(Sinogram::new(g.clone(), Stage::Phase, Array2::zeros((2, 3)), 1480.0, "").is_err());
        assert!(Sinogram::new(g.clone(), Stage::Phase, Array2::zeros((2, 4)), 0.0, "").is_err());
        let mut bad = Array2::zeros((2, 4));
        bad[[1, 1]] = f64::NAN;
        assert!(Sinogram::new(g.clone(), Stage::Phase, bad, 1480.0, "").is_err());
        let s = Sinogram::new(g, Stage::Phase, Array2::zeros((2, 4)), 1480.0, "").unwrap();
        assert!(s.require_stage(Stage::LinePressure).is_err());
        let one = s.select_angles(&[1]).unwrap();
        assert_eq!(one.geometry().angles, vec![1.0]);
    }
}
