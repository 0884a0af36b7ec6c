//! Image reconstruction: denoising, conversion of phase to detector signal,
//! and back-projection onto circles about the line detector.

use std::f64::consts::TAU;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::acoustics::{ScanGeometry, Sinogram, Stage};
use crate::dsp::{self, Edge};
use crate::error::{ensure, Error, Result};
use crate::optics::OpticalParams;
use crate::phantom::Grid2D;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    /// `b(t) = g(t) - t g'(t)`.
    DerivativeUbp,
    /// `b(t) = g(t)`.
    DelayAndSum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    MaxAbs,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReconConfig {
    /// Denoising low-pass cutoff [Hz].
    pub cutoff: f64,
    pub kernel: Kernel,
    pub interpolation: Interpolation,
    pub normalization: Normalization,
    /// Length of the denoising FIR.
    pub filter_taps: usize,
}

impl Default for ReconConfig {
    fn default() -> Self {
        ReconConfig {
            cutoff: 2e6,
            kernel: Kernel::DerivativeUbp,
            interpolation: Interpolation::Linear,
            normalization: Normalization::MaxAbs,
            filter_taps: 255,
        }
    }
}

impl ReconConfig {
    pub fn validate(&self) -> Result<()> {
        ensure(self.cutoff.is_finite() && self.cutoff > 0.0, "recon.cutoff", || {
            format!("must be positive, got {}", self.cutoff)
        })?;
        ensure(self.filter_taps % 2 == 1, "recon.filter_taps", || {
            format!("must be a positive odd integer, got {}", self.filter_taps)
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconMetadata {
    pub sound_speed: f64,
    pub cutoff: f64,
    pub kernel: Kernel,
    /// SHA-256 of the scan geometry, hex.
    pub geometry_hash: String,
    /// The raw image was divided by this value.
    pub normalization_factor: f64,
    /// Pixel-angle pairs whose delay fell outside the recorded window.
    pub coverage_warnings: u64,
}

/// Reconstructed relative absorbed-energy density on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconImage {
    pub grid: Grid2D,
    /// `(ny, nx)`, indexed `[[iy, ix]]`.
    pub values: Array2<f64>,
    pub metadata: ReconMetadata,
}

/// Stable digest of a scan geometry.
pub fn geometry_hash(g: &ScanGeometry) -> String {
    let json = serde_json::to_vec(g).expect("geometry serializes");
    hex::encode(Sha256::digest(json))
}

/// Zero-phase low-pass of every row at `cutoff` [Hz].
pub fn denoise(s: &Sinogram, cutoff: f64, taps: usize) -> Result<Sinogram> {
    let rate = 1.0 / s.geometry().dt;
    if !(cutoff > 0.0 && cutoff < rate / 2.0) {
        return Err(Error::invalid(
            "recon.cutoff",
            format!("{cutoff} Hz must lie in (0, {}) Hz, the sinogram Nyquist band", rate / 2.0),
        ));
    }
    let h = dsp::lowpass(taps, cutoff / rate)?;
    let rows: Vec<Vec<f64>> = (0..s.n_angles())
        .into_par_iter()
        .map(|i| dsp::filter_zero_phase(&s.row(i).to_vec(), &h, Edge::Reflect))
        .collect();
    let mut data = Array2::zeros(s.data().dim());
    for (i, row) in rows.iter().enumerate() {
        data.row_mut(i).assign(&ndarray::ArrayView1::from(row));
    }
    s.with_data(s.stage(), data)
}

/// Divides phase rows by `(2 pi / lambda) dn/dp`, giving line-integrated pressure.
pub fn phase_to_detector_signal(s: &Sinogram, optics: &OpticalParams) -> Result<Sinogram> {
    s.require_stage(Stage::Phase)?;
    optics.validate()?;
    let k = optics.transduction();
    s.with_data(Stage::LinePressure, s.data().mapv(|v| v / k))
}

/// Back-projection kernel applied to one trace sampled at `t0 + n dt`.
fn kernel_row(g: &[f64], t0: f64, dt: f64, kernel: Kernel) -> Vec<f64> {
    match kernel {
        Kernel::DelayAndSum => g.to_vec(),
        Kernel::DerivativeUbp => {
            let n = g.len();
            (0..n)
                .map(|k| {
                    let d = if k == 0 {
                        (g[1] - g[0]) / dt
                    } else if k == n - 1 {
                        (g[n - 1] - g[n - 2]) / dt
                    } else {
                        (g[k + 1] - g[k - 1]) / (2.0 * dt)
                    };
                    g[k] - (t0 + k as f64 * dt) * d
                })
                .collect()
        }
    }
}

/// Smears each detector trace back over circles of radius `c t` about the
/// detector and sums over angles with weight `2 pi / n_angles`.
pub fn backproject(s: &Sinogram, grid: &Grid2D, cfg: &ReconConfig) -> Result<ReconImage> {
    s.require_stage(Stage::LinePressure)?;
    cfg.validate()?;
    let geo = s.geometry();
    let c = s.sound_speed();
    let (t0, dt, n) = (geo.t_start, geo.dt, geo.n_samples);
    let rows: Vec<Vec<f64>> = (0..geo.n_angles())
        .map(|i| kernel_row(&s.row(i).to_vec(), t0, dt, cfg.kernel))
        .collect();
    let detectors: Vec<[f64; 2]> = (0..geo.n_angles()).map(|i| geo.detector_position(i)).collect();
    let weight = TAU / geo.n_angles() as f64;
    let last = (n - 1) as f64;

    let per_row: Vec<(Vec<f64>, u64)> = (0..grid.ny)
        .into_par_iter()
        .map(|iy| {
            let y = grid.y(iy);
            let mut misses = 0u64;
            let line = (0..grid.nx)
                .map(|ix| {
                    let x = grid.x(ix);
                    let mut acc = 0.0;
                    for (b, d) in rows.iter().zip(&detectors) {
                        let tau = (x - d[0]).hypot(y - d[1]) / c;
                        let u = (tau - t0) / dt;
                        if !(0.0..=last).contains(&u) {
                            misses += 1;
                            continue;
                        }
                        let k = (u as usize).min(n - 2);
                        let f = u - k as f64;
                        acc += b[k] * (1.0 - f) + b[k + 1] * f;
                    }
                    weight * acc
                })
                .collect();
            (line, misses)
        })
        .collect();

    let mut values = Array2::zeros((grid.ny, grid.nx));
    let mut warnings = 0;
    for (iy, (line, misses)) in per_row.into_iter().enumerate() {
        values.row_mut(iy).assign(&ndarray::ArrayView1::from(&line));
        warnings += misses;
    }
    let factor = match cfg.normalization {
        Normalization::None => 1.0,
        Normalization::MaxAbs => {
            let m = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if m > 0.0 {
                m
            } else {
                1.0
            }
        }
    };
    if factor != 1.0 {
        values.mapv_inplace(|v| v / factor);
    }
    Ok(ReconImage {
        grid: *grid,
        values,
        metadata: ReconMetadata {
            sound_speed: c,
            cutoff: cfg.cutoff,
            kernel: cfg.kernel,
            geometry_hash: geometry_hash(geo),
            normalization_factor: factor,
            coverage_warnings: warnings,
        },
    })
}

/// Denoise, convert to detector signal, back-project.
pub fn reconstruct_pipeline(
    s: &Sinogram,
    optics: &OpticalParams,
    grid: &Grid2D,
    cfg: &ReconConfig,
) -> Result<ReconImage> {
    s.require_stage(Stage::Phase)?;
    cfg.validate()?;
    let filtered = denoise(s, cfg.cutoff, cfg.filter_taps)?;
    let g = phase_to_detector_signal(&filtered, optics)?;
    backproject(&g, grid, cfg)
}
