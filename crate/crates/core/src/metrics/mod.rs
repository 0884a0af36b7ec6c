//! Figures of merit: FWHM resolution, noise floor, sensitivity, NEP and the
//! bandwidth-limited resolution bound.

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::optics::OpticalParams;
use crate::phantom::PressureField;
use crate::reconstruction::ReconImage;

/// Widths found in one profile.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Fwhm {
    /// Full widths at half maximum [m], one per qualifying peak, left to right.
    pub widths: Vec<f64>,
    /// Peak positions [m] from the start of the profile.
    pub positions: Vec<f64>,
    /// Peaks at or above half the global maximum that lack a crossing on one flank.
    pub skipped: usize,
}

/// Linear-interpolated position where `p` crosses `level` between samples
/// `a` and `b` (adjacent).
fn crossing(p: &[f64], a: usize, b: usize, level: f64) -> f64 {
    let (pa, pb) = (p[a], p[b]);
    let f = (pa - level) / (pa - pb);
    a as f64 + f * (b as f64 - a as f64)
}

/// FWHM of every local peak that reaches half the global maximum, after
/// subtracting the profile minimum. Each peak is measured at half its own
/// height; a peak whose half-height lobe holds a higher sample is a ripple on
/// that higher peak and is not reported separately.
pub fn fwhm(profile: &[f64], pitch: f64) -> Result<Fwhm> {
    ensure(profile.len() >= 3, "profile", || {
        format!("needs at least 3 samples, got {}", profile.len())
    })?;
    ensure(pitch > 0.0, "pitch", || format!("must be positive, got {pitch}"))?;
    if profile.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("profile", "contains non-finite values"));
    }
    let lo = profile.iter().cloned().fold(f64::INFINITY, f64::min);
    let p: Vec<f64> = profile.iter().map(|v| v - lo).collect();
    let top = p.iter().cloned().fold(0.0, f64::max);
    let mut out = Fwhm::default();
    if top <= 0.0 {
        return Ok(out);
    }
    let n = p.len();
    let mut k = 0;
    while k < n {
        // a plateau counts once, at its first sample
        let mut end = k;
        while end + 1 < n && p[end + 1] == p[k] {
            end += 1;
        }
        let rises = k == 0 || p[k - 1] < p[k];
        let falls = end == n - 1 || p[end + 1] < p[k];
        if rises && falls && p[k] >= 0.5 * top {
            let half = 0.5 * p[k];
            let left = (0..k).rev().find(|&j| p[j] < half);
            let right = (end + 1..n).find(|&j| p[j] < half);
            let lobe = left.map_or(0, |l| l + 1)..right.unwrap_or(n);
            // the first sample of the lobe's maximum owns the lobe
            let owner = lobe.clone().fold(lobe.start, |b, j| if p[j] > p[b] { j } else { b });
            if owner == k {
                match (left, right) {
                    (Some(l), Some(r)) => {
                        let a = crossing(&p, l + 1, l, half);
                        let b = crossing(&p, r - 1, r, half);
                        out.widths.push((b - a) * pitch);
                        out.positions.push(0.5 * (k + end) as f64 * pitch);
                    }
                    _ => out.skipped += 1,
                }
            }
        }
        k = end + 1;
    }
    Ok(out)
}

/// Histogram with equal-width bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub bin_width: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn new(x: &[f64], bins: usize, lo: f64, hi: f64) -> Self {
        let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
        let mut counts = vec![0u64; bins];
        for &v in x {
            let b = ((v - lo) / width).floor();
            if b >= 0.0 && (b as usize) < bins {
                counts[b as usize] += 1;
            } else if v == hi && bins > 0 {
                counts[bins - 1] += 1;
            }
        }
        Histogram {
            lo,
            bin_width: width,
            counts,
        }
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.counts.len())
            .map(|k| self.lo + (k as f64 + 0.5) * self.bin_width)
            .collect()
    }
}

/// Gaussian fit of a phase record by sample mean and standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseFloor {
    pub std_mrad: f64,
    pub mean_mrad: f64,
    pub samples: usize,
    /// Histogram of the record [mrad], +-5 standard deviations about the mean.
    pub histogram: Histogram,
}

pub const MIN_NOISE_SAMPLES: usize = 1000;

/// Maximum-likelihood Gaussian parameters of a phase record [rad], in mrad.
pub fn noise_floor(phase: &[f64]) -> Result<NoiseFloor> {
    ensure(phase.len() >= MIN_NOISE_SAMPLES, "phase", || {
        format!("needs at least {MIN_NOISE_SAMPLES} samples, got {}", phase.len())
    })?;
    let n = phase.len() as f64;
    let mean = phase.iter().sum::<f64>() / n;
    let var = phase.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    let mrad: Vec<f64> = phase.iter().map(|v| v * 1e3).collect();
    let spread = (5e3 * std).max(1e-3);
    Ok(NoiseFloor {
        std_mrad: std * 1e3,
        mean_mrad: mean * 1e3,
        samples: phase.len(),
        histogram: Histogram::new(&mrad, 50, mean * 1e3 - spread, mean * 1e3 + spread),
    })
}

/// `S = 1000 (2 pi / lambda) (dn/dp) L` [mrad/Pa] for a uniform pressure over `path_length`.
pub fn sensitivity_first_principles(optics: &OpticalParams, path_length: f64) -> Result<f64> {
    optics.validate()?;
    ensure(path_length >= 0.0, "path_length", || format!("must be >= 0, got {path_length}"))?;
    Ok(1e3 * optics.transduction() * path_length)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nep {
    /// [Pa]
    pub nep: f64,
    /// [mPa / sqrt(Hz)]
    pub density: f64,
}

/// NEP = noise floor / sensitivity; density = NEP / sqrt(bandwidth), in mPa/sqrt(Hz).
pub fn nep_and_density(noise_floor_mrad: f64, sensitivity: f64, bandwidth: f64) -> Result<Nep> {
    for (field, v) in [
        ("noise_floor", noise_floor_mrad),
        ("sensitivity", sensitivity),
        ("bandwidth", bandwidth),
    ] {
        ensure(v.is_finite() && v > 0.0, field, || format!("must be positive, got {v}"))?;
    }
    let nep = noise_floor_mrad / sensitivity;
    Ok(Nep {
        nep,
        density: 1e3 * nep / bandwidth.sqrt(),
    })
}

/// Best resolution a detector of bandwidth `bandwidth` supports, `0.8 c / BW` [m].
pub fn resolution_bound(sound_speed: f64, bandwidth: f64) -> Result<f64> {
    ensure(sound_speed > 0.0, "sound_speed", || format!("must be positive, got {sound_speed}"))?;
    ensure(bandwidth > 0.0, "bandwidth", || format!("must be positive, got {bandwidth}"))?;
    Ok(0.8 * sound_speed / bandwidth)
}

/// A straight line through the image along which a profile is taken.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "axis", rename_all = "snake_case")]
pub enum CutLine {
    /// Row at height `y` [m]; the profile runs along x.
    Horizontal { y: f64 },
    /// Column at `x` [m]; the profile runs along y.
    Vertical { x: f64 },
}

/// Profile of `values` (`[[iy, ix]]`) along `line` on `grid`.
pub fn profile(values: &ndarray::Array2<f64>, grid: &crate::phantom::Grid2D, line: CutLine) -> Result<Vec<f64>> {
    let outside = |what: &str, v: f64| {
        Error::invalid("metrics.cut_lines", format!("{what} = {v} m is outside the grid"))
    };
    match line {
        CutLine::Horizontal { y } => {
            let iy = grid.row_of(y).ok_or_else(|| outside("y", y))?;
            Ok(values.row(iy).to_vec())
        }
        CutLine::Vertical { x } => {
            let ix = grid.column_of(x).ok_or_else(|| outside("x", x))?;
            Ok(values.column(ix).to_vec())
        }
    }
}

/// FWHM lists of reconstruction and truth along a set of cut lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResolutionStudy {
    pub fwhm_x: Vec<f64>,
    pub fwhm_y: Vec<f64>,
    pub truth_fwhm_x: Vec<f64>,
    pub truth_fwhm_y: Vec<f64>,
    pub skipped: usize,
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

impl ResolutionStudy {
    /// Mean reconstructed width minus mean true width, per axis [m].
    pub fn broadening(&self) -> (Option<f64>, Option<f64>) {
        let d = |a: &[f64], b: &[f64]| Some(mean(a)? - mean(b)?);
        (d(&self.fwhm_x, &self.truth_fwhm_x), d(&self.fwhm_y, &self.truth_fwhm_y))
    }
}

pub fn image_resolution_study(
    image: &ReconImage,
    truth: &PressureField,
    cut_lines: &[CutLine],
) -> Result<ResolutionStudy> {
    if image.grid != *truth.grid() {
        return Err(Error::invalid(
            "truth",
            "image and truth are on different grids",
        ));
    }
    let g = &image.grid;
    let mut out = ResolutionStudy::default();
    for &line in cut_lines {
        let recon = fwhm(&profile(&image.values, g, line)?, g.pitch)?;
        let tru = fwhm(&profile(truth.values(), g, line)?, g.pitch)?;
        out.skipped += recon.skipped;
        let (r, t) = match line {
            CutLine::Horizontal { .. } => (&mut out.fwhm_x, &mut out.truth_fwhm_x),
            CutLine::Vertical { .. } => (&mut out.fwhm_y, &mut out.truth_fwhm_y),
        };
        r.extend(recon.widths);
        t.extend(tru.widths);
    }
    Ok(out)
}

/// Straight-line fit of a phase record against time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSlope {
    /// [rad/s]
    pub slope: f64,
    /// Phase change the slope accumulates over the record [rad].
    pub drift: f64,
    /// Standard deviation of the residual about the line [rad].
    pub residual_std: f64,
}

impl PhaseSlope {
    /// A drift larger than three residual standard deviations means the
    /// receiver is not locked to the transmitter's carrier.
    pub fn coherence_lost(&self) -> bool {
        self.drift.abs() > 3.0 * self.residual_std
    }
}

pub fn phase_slope(trace: &crate::signal::Trace) -> Result<PhaseSlope> {
    ensure(trace.len() >= 3, "phase", || "needs at least 3 samples".into())?;
    let n = trace.len() as f64;
    let tm = (0..trace.len()).map(|k| trace.time(k)).sum::<f64>() / n;
    let ym = trace.values.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (k, y) in trace.values.iter().enumerate() {
        let d = trace.time(k) - tm;
        sxy += d * (y - ym);
        sxx += d * d;
    }
    let slope = sxy / sxx;
    let var = trace
        .values
        .iter()
        .enumerate()
        .map(|(k, y)| (y - ym - slope * (trace.time(k) - tm)).powi(2))
        .sum::<f64>()
        / n;
    Ok(PhaseSlope {
        slope,
        drift: slope * (n - 1.0) * trace.dt,
        residual_std: var.sqrt(),
    })
}

/// The characterization figures of one run. Optional entries are absent when
/// their inputs were not supplied.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricsReport {
    /// [mrad/Pa]
    pub sensitivity: f64,
    /// [mrad]
    pub noise_floor: Option<f64>,
    /// [mrad]
    pub noise_mean: Option<f64>,
    /// [Pa]
    pub nep: Option<f64>,
    /// [mPa/sqrt(Hz)]
    pub nep_density: Option<f64>,
    /// [m]
    pub r_bw: f64,
    /// [m]
    pub fwhm_x: Vec<f64>,
    pub fwhm_y: Vec<f64>,
    pub truth_fwhm_x: Vec<f64>,
    pub truth_fwhm_y: Vec<f64>,
    /// Peaks dropped for lacking a half-maximum crossing.
    pub fwhm_skipped: usize,
    /// Mean recon minus mean truth FWHM [m].
    pub broadening_x: Option<f64>,
    pub broadening_y: Option<f64>,
    /// [Hz]
    pub bandwidth_used: f64,
    /// [m/s]
    pub sound_speed_used: f64,
    /// Fitted phase slope of the noise record [rad/s].
    pub coherence_slope: Option<f64>,
    pub coherence_lost: Option<bool>,
}

/// Inputs of [`build_report`] that are not images.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportInputs {
    pub path_length: f64,
    pub bandwidth: f64,
    pub sound_speed: f64,
}

/// Assembles a report from whichever measurements are available.
pub fn build_report(
    optics: &OpticalParams,
    inputs: ReportInputs,
    study: Option<&ResolutionStudy>,
    noise: Option<(&NoiseFloor, &PhaseSlope)>,
) -> Result<MetricsReport> {
    let sensitivity = sensitivity_first_principles(optics, inputs.path_length)?;
    let mut r = MetricsReport {
        sensitivity,
        r_bw: resolution_bound(inputs.sound_speed, inputs.bandwidth)?,
        bandwidth_used: inputs.bandwidth,
        sound_speed_used: inputs.sound_speed,
        ..MetricsReport::default()
    };
    if let Some((nf, slope)) = noise {
        r.noise_floor = Some(nf.std_mrad);
        r.noise_mean = Some(nf.mean_mrad);
        if nf.std_mrad > 0.0 && sensitivity > 0.0 {
            let n = nep_and_density(nf.std_mrad, sensitivity, inputs.bandwidth)?;
            r.nep = Some(n.nep);
            r.nep_density = Some(n.density);
        }
        r.coherence_slope = Some(slope.slope);
        r.coherence_lost = Some(slope.coherence_lost());
    }
    if let Some(s) = study {
        r.fwhm_x = s.fwhm_x.clone();
        r.fwhm_y = s.fwhm_y.clone();
        r.truth_fwhm_x = s.truth_fwhm_x.clone();
        r.truth_fwhm_y = s.truth_fwhm_y.clone();
        r.fwhm_skipped = s.skipped;
        (r.broadening_x, r.broadening_y) = s.broadening();
    }
    Ok(r)
}
