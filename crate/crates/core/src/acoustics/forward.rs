use std::f64::consts::{FRAC_PI_2, TAU};

use ndarray::Array2;
use rayon::prelude::*;

use super::geometry::{ScanGeometry, Sinogram, Stage};
use crate::error::{ensure, Error, Result};
use crate::phantom::PressureField;
use crate::signal::{TimeWindow, Trace};

/// Amplitude scale of the forward model: line-integrated pressure [Pa m] per
/// unit of 2-D pressure [Pa]. Absolute calibration lives in the sensitivity
/// constant, not here.
pub const FORWARD_SCALE: f64 = 1.0;

/// Discretization knobs of the fast forward model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForwardQuadrature {
    /// Circle points per half-pitch of arc.
    pub circle_density: usize,
    /// Midpoint nodes on `theta` in `(0, pi/2)`.
    pub theta_points: usize,
    /// Spacing of the tabulated circular means, as a fraction of the pixel pitch.
    pub radial_step: f64,
}

impl Default for ForwardQuadrature {
    fn default() -> Self {
        ForwardQuadrature {
            circle_density: 4,
            theta_points: 2048,
            radial_step: 0.03125,
        }
    }
}

/// Axis-aligned box `(x0, x1, y0, y1)` outside of which the bilinear field vanishes.
fn support_box(field: &PressureField) -> Option<(f64, f64, f64, f64)> {
    let (ix0, ix1, iy0, iy1) = field.support_bounds()?;
    let g = field.grid();
    Some((
        g.x(ix0) - g.pitch,
        g.x(ix1) + g.pitch,
        g.y(iy0) - g.pitch,
        g.y(iy1) + g.pitch,
    ))
}

/// Nearest and farthest distance from `p` to a box.
fn box_distances(p: [f64; 2], b: (f64, f64, f64, f64)) -> (f64, f64) {
    let (x0, x1, y0, y1) = b;
    let dx = (x0 - p[0]).max(0.0).max(p[0] - x1);
    let dy = (y0 - p[1]).max(0.0).max(p[1] - y1);
    let fx = (p[0] - x0).abs().max((p[0] - x1).abs());
    let fy = (p[1] - y0).abs().max((p[1] - y1).abs());
    (dx.hypot(dy), fx.hypot(fy))
}

/// Absolute angular interval `(a0, a1)` seen from `p` that contains the box,
/// or `None` when `p` lies inside it.
fn box_sector(p: [f64; 2], b: (f64, f64, f64, f64)) -> Option<(f64, f64)> {
    let (x0, x1, y0, y1) = b;
    if p[0] >= x0 && p[0] <= x1 && p[1] >= y0 && p[1] <= y1 {
        return None;
    }
    let mid = (0.5 * (y0 + y1) - p[1]).atan2(0.5 * (x0 + x1) - p[0]);
    let (mut lo, mut hi) = (0.0f64, 0.0f64);
    for (x, y) in [(x0, y0), (x1, y0), (x0, y1), (x1, y1)] {
        let a = (y - p[1]).atan2(x - p[0]) - mid;
        let a = a - TAU * (a / TAU).round();
        lo = lo.min(a);
        hi = hi.max(a);
    }
    Some((mid + lo, mid + hi))
}

/// Bilinear sampler over a copy of the field padded with a ring of zeros, so
/// that the four reads need no per-read bounds logic.
struct Sampler {
    data: Vec<f64>,
    stride: usize,
    x0: f64,
    y0: f64,
    inv_pitch: f64,
    pitch: f64,
    nx: isize,
    ny: isize,
}

impl Sampler {
    fn new(field: &PressureField) -> Self {
        let g = field.grid();
        let stride = g.nx + 2;
        let mut data = vec![0.0; stride * (g.ny + 2)];
        for ((iy, ix), &v) in field.values().indexed_iter() {
            data[(iy + 1) * stride + ix + 1] = v;
        }
        Sampler {
            data,
            stride,
            x0: g.x(0),
            y0: g.y(0),
            inv_pitch: 1.0 / g.pitch,
            pitch: g.pitch,
            nx: g.nx as isize,
            ny: g.ny as isize,
        }
    }

    #[inline]
    fn sample(&self, x: f64, y: f64) -> f64 {
        let fx = (x - self.x0) * self.inv_pitch;
        let fy = (y - self.y0) * self.inv_pitch;
        let (x0, y0) = (fx.floor(), fy.floor());
        let (ix, iy) = (x0 as isize, y0 as isize);
        if ix < -1 || iy < -1 || ix >= self.nx || iy >= self.ny {
            return 0.0;
        }
        let (tx, ty) = (fx - x0, fy - y0);
        let k = (iy + 1) as usize * self.stride + (ix + 1) as usize;
        let d = &self.data[k..k + self.stride + 2];
        let (v00, v10) = (d[0], d[1]);
        let (v01, v11) = (d[self.stride], d[self.stride + 1]);
        (v00 * (1.0 - tx) + v10 * tx) * (1.0 - ty) + (v01 * (1.0 - tx) + v11 * tx) * ty
    }
}

/// Points between exact `sin_cos` evaluations when walking a circle by rotation.
const REANCHOR: i64 = 64;

fn circle_mean(
    field: &Sampler,
    center: [f64; 2],
    radius: f64,
    density: usize,
    sector: Option<(f64, f64)>,
) -> f64 {
    let spacing = field.pitch / (2.0 * density as f64);
    let n = ((TAU * radius / spacing).ceil() as usize).max(16);
    let step = TAU / n as f64;
    // Points are laid out from the direction facing the origin so that a
    // phantom and detector rotated together sample the same relative points.
    let base = if center == [0.0, 0.0] {
        0.0
    } else {
        (-center[1]).atan2(-center[0])
    };
    let (j0, j1) = match sector {
        None => (0i64, n as i64 - 1),
        Some((a0, a1)) => {
            let shift = TAU * ((0.5 * (a0 + a1) - base) / TAU).round();
            let (r0, r1) = (a0 - base - shift, a1 - base - shift);
            ((r0 / step).ceil() as i64, (r1 / step).floor() as i64)
        }
    };
    let (ds, dc) = step.sin_cos();
    let mut acc = 0.0;
    let mut j = j0;
    while j <= j1 {
        let (mut s, mut c) = (base + j as f64 * step).sin_cos();
        for _ in 0..REANCHOR.min(j1 - j + 1) {
            acc += field.sample(center[0] + radius * c, center[1] + radius * s);
            (c, s) = (c * dc - s * ds, s * dc + c * ds);
        }
        j += REANCHOR;
    }
    acc / n as f64
}

/// Mean of the bilinearly interpolated field over circles about `center`.
///
/// Circle `k` is sampled at `max(16, ceil(2 pi r_k / (pitch/2)))` equally
/// spaced points; points off the grid read zero.
pub fn circular_means(field: &PressureField, center: [f64; 2], radii: &[f64]) -> Result<Vec<f64>> {
    for (k, &r) in radii.iter().enumerate() {
        ensure(r.is_finite() && r > 0.0, "radii", || format!("radius #{k} must be positive"))?;
        if k > 0 && r <= radii[k - 1] {
            return Err(Error::invalid("radii", "must be strictly increasing"));
        }
    }
    let Some(b) = support_box(field) else {
        return Ok(vec![0.0; radii.len()]);
    };
    let sector = box_sector(center, b);
    let sampler = Sampler::new(field);
    Ok(radii
        .iter()
        .map(|&r| circle_mean(&sampler, center, r, 1, sector))
        .collect())
}

/// Tabulated circular means on a uniform radial lattice.
struct RadialTable {
    r0: f64,
    dr: f64,
    means: Vec<f64>,
}

impl RadialTable {
    fn build(field: &PressureField, detector: [f64; 2], quad: &ForwardQuadrature) -> Option<Self> {
        let b = support_box(field)?;
        let (near, far) = box_distances(detector, b);
        let sector = box_sector(detector, b);
        let dr = quad.radial_step * field.grid().pitch;
        let sampler = Sampler::new(field);
        // lattice anchored at zero so that fields with different supports share
        // nodes, which keeps the model exactly linear
        let k0 = (near / dr).floor();
        let r0 = k0 * dr;
        let n = ((far - r0) / dr).ceil() as usize + 2;
        let means = (0..n)
            .map(|k| {
                let r = (k0 + k as f64) * dr;
                if r <= 0.0 {
                    field.sample(detector[0], detector[1])
                } else {
                    circle_mean(&sampler, detector, r, quad.circle_density, sector)
                }
            })
            .collect();
        Some(RadialTable { r0, dr, means })
    }

    #[inline]
    fn eval(&self, r: f64) -> f64 {
        let u = (r - self.r0) / self.dr;
        if u < 0.0 {
            return 0.0;
        }
        let i = u as usize;
        if i + 1 >= self.means.len() {
            return 0.0;
        }
        let f = u - i as f64;
        self.means[i] * (1.0 - f) + self.means[i + 1] * f
    }
}

fn check_inputs(field: &PressureField, detector: [f64; 2], c: f64, window: &TimeWindow) -> Result<()> {
    ensure(c.is_finite() && c > 0.0, "sound_speed", || format!("must be positive, got {c}"))?;
    ensure(window.dt.is_finite() && window.dt > 0.0, "window.dt", || "must be positive".into())?;
    ensure(window.n_samples >= 2, "window.n_samples", || "must be at least 2".into())?;
    let (near, far) = box_distances(detector, field.grid().bounds());
    let slack = 1e-9 * window.dt;
    if window.t_start > near / c + slack || window.end() + slack < far / c {
        return Err(Error::invalid(
            "window",
            format!(
                "[{:.4e}, {:.4e}] s does not cover arrivals from the grid, [{:.4e}, {:.4e}] s",
                window.t_start,
                window.end(),
                near / c,
                far / c
            ),
        ));
    }
    Ok(())
}

pub fn forward_line_signal(
    field: &PressureField,
    detector: [f64; 2],
    c: f64,
    window: TimeWindow,
) -> Result<Trace> {
    forward_line_signal_with(field, detector, c, window, &ForwardQuadrature::default())
}

/// Line-detector signal `g(t)` [Pa m] at `detector` for the sampling `window`.
pub fn forward_line_signal_with(
    field: &PressureField,
    detector: [f64; 2],
    c: f64,
    window: TimeWindow,
    quad: &ForwardQuadrature,
) -> Result<Trace> {
    check_inputs(field, detector, c, &window)?;
    let Some(table) = RadialTable::build(field, detector, quad) else {
        return Ok(Trace::zeros(window));
    };

    let m = quad.theta_points;
    let dtheta = FRAC_PI_2 / m as f64;
    let sines: Vec<f64> = (0..m).map(|k| ((k as f64 + 0.5) * dtheta).sin()).collect();

    // F at the sample midpoints t_start + (j - 1/2) dt for j = 0 ..= n
    let abel = |t: f64| -> f64 {
        let r = c * t;
        if r <= table.r0 {
            return 0.0;
        }
        let acc: f64 = sines.iter().map(|&s| s * table.eval(r * s)).sum();
        r * dtheta * acc
    };
    let n = window.n_samples;
    let f: Vec<f64> = (0..n + 1)
        .map(|j| abel(window.t_start + (j as f64 - 0.5) * window.dt))
        .collect();
    let scale = FORWARD_SCALE / (c * window.dt);
    let values = (0..n).map(|j| scale * (f[j + 1] - f[j])).collect();
    Ok(Trace::new(window.t_start, window.dt, values))
}

pub fn forward_sinogram(field: &PressureField, geometry: &ScanGeometry, c: f64) -> Result<Sinogram> {
    forward_sinogram_with(field, geometry, c, &ForwardQuadrature::default())
}

/// One forward trace per detector angle. Rows are computed in parallel and are
/// independent of the thread count.
pub fn forward_sinogram_with(
    field: &PressureField,
    geometry: &ScanGeometry,
    c: f64,
    quad: &ForwardQuadrature,
) -> Result<Sinogram> {
    geometry.validate()?;
    field.grid().validate(geometry.detector_offset)?;
    geometry.validate_coverage(field.grid().max_radius(), c)?;
    if let Some(r) = field.support_radius() {
        if r >= geometry.detector_offset {
            return Err(Error::invalid(
                "phantom",
                "nonzero pressure reaches the detector circle",
            ));
        }
    }
    let window = geometry.window();
    let rows: Vec<Trace> = (0..geometry.n_angles())
        .into_par_iter()
        .map(|i| forward_line_signal_with(field, geometry.detector_position(i), c, window, quad))
        .collect::<Result<_>>()?;
    let mut data = Array2::zeros((geometry.n_angles(), geometry.n_samples));
    for (i, row) in rows.into_iter().enumerate() {
        data.row_mut(i).assign(&ndarray::ArrayView1::from(&row.values));
    }
    Sinogram::new(
        geometry.clone(),
        Stage::LinePressure,
        data,
        c,
        "forward model: circular means + Abel kernel",
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phantom::{rasterize, Grid2D, Shape, ShapeSpec};

    fn disk(x: f64, y: f64, r: f64, a: f64) -> ShapeSpec {
        ShapeSpec::new(
            Shape::Disk {
                center: [x, y],
                radius: r,
            },
            a,
        )
    }

    #[test]
    fn circular_means_basic_cases() {
        let g = Grid2D::new(201, 201, 50e-6).unwrap();
        let zero = PressureField::zeros(g);
        assert_eq!(circular_means(&zero, [0.0, 0.0], &[1e-3, 2e-3]).unwrap(), vec![0.0, 0.0]);

        let uniform = PressureField::new(g, Array2::from_elem((201, 201), 3.5)).unwrap();
        for m in circular_means(&uniform, [1e-4, -2e-4], &[0.5e-3, 2e-3, 4e-3]).unwrap() {
            assert!((m - 3.5).abs() / 3.5 < 1e-12, "{m}");
        }

        let r_disk = 2e-3;
        let f = rasterize(&[disk(0.0, 0.0, r_disk, 2.0)], &g).unwrap();
        let radii = [0.5e-3, 1.0e-3, r_disk - 2.0 * g.pitch, r_disk + 2.0 * g.pitch, 3e-3];
        let m = circular_means(&f, [0.0, 0.0], &radii).unwrap();
        assert!((m[0] - 2.0).abs() < 1e-12 && (m[1] - 2.0).abs() < 1e-12);
        assert!((m[2] - 2.0).abs() < 1e-12);
        assert_eq!(m[3], 0.0);
        assert_eq!(m[4], 0.0);
    }

    #[test]
    fn circular_means_reject_unsorted() {
        let g = Grid2D::new(11, 11, 50e-6).unwrap();
        let f = PressureField::zeros(g);
        assert!(circular_means(&f, [0.0, 0.0], &[2e-3, 1e-3]).is_err());
        assert!(circular_means(&f, [0.0, 0.0], &[0.0]).is_err());
    }

    #[test]
    fn padded_sampler_matches_field() {
        let g = Grid2D::new(31, 25, 50e-6).unwrap();
        let f = rasterize(&[disk(0.2e-3, -0.1e-3, 0.5e-3, 2.0)], &g).unwrap();
        let s = Sampler::new(&f);
        for k in 0..2000 {
            let x = -0.9e-3 + k as f64 * 0.913e-6;
            let y = 0.7e-3 - k as f64 * 0.71e-6;
            assert!((s.sample(x, y) - f.sample(x, y)).abs() < 1e-12);
        }
    }

    #[test]
    fn sector_matches_full_circle() {
        let g = Grid2D::new(121, 121, 50e-6).unwrap();
        let f = rasterize(&[disk(1e-3, 0.5e-3, 0.7e-3, 1.0)], &g).unwrap();
        let d = [13e-3 * 0.3f64.cos(), 13e-3 * 0.3f64.sin()];
        let b = support_box(&f).unwrap();
        let sector = box_sector(d, b);
        assert!(sector.is_some());
        let s = Sampler::new(&f);
        for k in 0..40 {
            let r = 11.5e-3 + k as f64 * 0.07e-3;
            let full = circle_mean(&s, d, r, 2, None);
            let part = circle_mean(&s, d, r, 2, sector);
            assert!((full - part).abs() <= 1e-14 * full.abs().max(1.0), "{full} {part}");
        }
    }

    #[test]
    fn uniform_field_gives_its_value_at_early_times() {
        // inside a uniform region the 2-D solution starts at p0
        let g = Grid2D::new(201, 201, 50e-6).unwrap();
        let f = PressureField::new(g, Array2::from_elem((201, 201), 1.0)).unwrap();
        let c = 1480.0;
        let window = TimeWindow {
            t_start: 0.0,
            dt: 1.0 / 60e6,
            n_samples: 300,
        };
        let tr = forward_line_signal(&f, [0.0, 0.0], c, window).unwrap();
        // circle of radius c t stays inside the 10 mm grid until ~3.4 us
        for (i, &v) in tr.values[5..150].iter().enumerate() {
            assert!((v - 1.0).abs() < 1e-3, "{i} {v}");
        }
    }

    #[test]
    fn window_must_cover_grid() {
        let g = Grid2D::new(101, 101, 50e-6).unwrap();
        let f = rasterize(&[disk(0.0, 0.0, 1e-3, 1.0)], &g).unwrap();
        let late = TimeWindow {
            t_start: 8e-6,
            dt: 1.0 / 60e6,
            n_samples: 300,
        };
        assert!(forward_line_signal(&f, [13e-3, 0.0], 1480.0, late).is_err());
        let short = TimeWindow {
            t_start: 0.0,
            dt: 1.0 / 60e6,
            n_samples: 100,
        };
        assert!(forward_line_signal(&f, [13e-3, 0.0], 1480.0, short).is_err());
    }

    #[test]
    fn zero_field_zero_trace() {
        let g = Grid2D::new(101, 101, 50e-6).unwrap();
        let f = PressureField::zeros(g);
        let geo = ScanGeometry::covering(13e-3, 8, 60e6, g.max_radius(), 1480.0).unwrap();
        let s = forward_sinogram(&f, &geo, 1480.0).unwrap();
        assert!(s.data().iter().all(|&v| v == 0.0));
    }
}
