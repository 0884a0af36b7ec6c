//! Test-only reference implementations. Nothing here calls into the code paths
//! it is used to check.
#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_2, PI};

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sdoat::phantom::{rasterize, Grid2D, PressureField, Shape, ShapeSpec};
use sdoat::signal::TimeWindow;

/// Bilinear interpolation between pixel centers, zero outside; written
/// independently of `PressureField::sample`.
pub fn bilinear(values: &Array2<f64>, g: &Grid2D, x: f64, y: f64) -> f64 {
    let x0 = g.cx - (g.nx as f64 - 1.0) / 2.0 * g.pitch;
    let y0 = g.cy - (g.ny as f64 - 1.0) / 2.0 * g.pitch;
    let u = (x - x0) / g.pitch;
    let v = (y - y0) / g.pitch;
    let (iu, iv) = (u.floor() as i64, v.floor() as i64);
    let (fu, fv) = (u - iu as f64, v - iv as f64);
    let at = |i: i64, j: i64| {
        if i < 0 || j < 0 || i >= g.nx as i64 || j >= g.ny as i64 {
            0.0
        } else {
            values[[j as usize, i as usize]]
        }
    };
    at(iu, iv) * (1.0 - fu) * (1.0 - fv)
        + at(iu + 1, iv) * fu * (1.0 - fv)
        + at(iu, iv + 1) * (1.0 - fu) * fv
        + at(iu + 1, iv + 1) * fu * fv
}

// Antiderivatives of K(r) = 1/sqrt(R^2 - r^2) on r < R, zero beyond.
fn k1(r: f64, big_r: f64) -> f64 {
    if r >= big_r {
        FRAC_PI_2
    } else {
        (r / big_r).asin()
    }
}

fn k2(r: f64, big_r: f64) -> f64 {
    if r >= big_r {
        big_r * (FRAC_PI_2 - 1.0) + FRAC_PI_2 * (r - big_r)
    } else {
        r * (r / big_r).asin() + (big_r * big_r - r * r).sqrt() - big_r
    }
}

struct Cell {
    rho: f64,
    a: f64,
    b: f64,
    weight: f64,
}

/// Mean of K over a small square whose distance to the detector is
/// distributed as the convolution of two boxes of widths `a` and `b`.
fn cell_kernel(cell: &Cell, big_r: f64, h: f64) -> f64 {
    let (wide, narrow) = if cell.a >= cell.b { (cell.a, cell.b) } else { (cell.b, cell.a) };
    if cell.rho - 0.5 * (wide + narrow) >= big_r {
        return 0.0;
    }
    if narrow < 1e-3 * h {
        return (k1(cell.rho + wide / 2.0, big_r) - k1(cell.rho - wide / 2.0, big_r)) / wide;
    }
    let s = 0.5 * (wide + narrow);
    let d = 0.5 * (wide - narrow);
    (k2(cell.rho + s, big_r) - k2(cell.rho + d, big_r) - k2(cell.rho - d, big_r)
        + k2(cell.rho - s, big_r))
        / (wide * narrow)
}

/// Brute-force line-detector signal: direct area quadrature of
/// `(1/2pi) iint p0 / sqrt(c^2 t^2 - |r - d|^2) dA` over `sub x sub` cells per
/// pixel, followed by a central difference over one sample (half a sample
/// either side) and division by `c`.
pub fn oracle_line_signal(
    field: &PressureField,
    detector: [f64; 2],
    c: f64,
    window: TimeWindow,
    sub: usize,
) -> Vec<f64> {
    let g = *field.grid();
    let values = field.values();
    let h = g.pitch / sub as f64;
    // cells tile the region between the outermost bilinear support lines
    let x_first = g.cx - (g.nx as f64 + 1.0) / 2.0 * g.pitch;
    let y_first = g.cy - (g.ny as f64 + 1.0) / 2.0 * g.pitch;
    let nxs = (g.nx + 1) * sub;
    let nys = (g.ny + 1) * sub;
    let mut cells = Vec::new();
    for j in 0..nys {
        let y = y_first + (j as f64 + 0.5) * h;
        for i in 0..nxs {
            let x = x_first + (i as f64 + 0.5) * h;
            let p = bilinear(values, &g, x, y);
            if p == 0.0 {
                continue;
            }
            let (dx, dy) = (x - detector[0], y - detector[1]);
            let rho = dx.hypot(dy);
            cells.push(Cell {
                rho,
                a: h * (dx / rho).abs(),
                b: h * (dy / rho).abs(),
                weight: p * h * h,
            });
        }
    }
    let n = window.n_samples;
    let big_f: Vec<f64> = (0..n + 1)
        .into_par_iter()
        .map(|j| {
            let t = window.t_start + (j as f64 - 0.5) * window.dt;
            let big_r = c * t;
            if big_r <= 0.0 {
                return 0.0;
            }
            cells
                .iter()
                .map(|cell| cell.weight * cell_kernel(cell, big_r, h))
                .sum::<f64>()
                / (2.0 * PI)
        })
        .collect();
    (0..n)
        .map(|j| (big_f[j + 1] - big_f[j]) / (window.dt * c))
        .collect()
}

pub fn rel_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

pub fn disk(x: f64, y: f64, r: f64, a: f64) -> ShapeSpec {
    ShapeSpec::new(
        Shape::Disk {
            center: [x, y],
            radius: r,
        },
        a,
    )
}

/// A few disks and ellipses with random placement, size and amplitude.
pub fn random_phantom(grid: &Grid2D, seed: u64) -> PressureField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = grid.width().min(grid.height()) / 2.0;
    let n = rng.gen_range(2..5);
    let specs: Vec<ShapeSpec> = (0..n)
        .map(|_| {
            let r = rng.gen_range(0.08..0.3) * half;
            let lim = half - r - grid.pitch;
            let center = [rng.gen_range(-lim..lim), rng.gen_range(-lim..lim)];
            let amp = rng.gen_range(0.5..2.0);
            if rng.gen_bool(0.5) {
                ShapeSpec::new(Shape::Disk { center, radius: r }, amp)
            } else {
                ShapeSpec::new(
                    Shape::Ellipse {
                        center,
                        width: 2.0 * r,
                        height: r * rng.gen_range(0.8..2.0),
                    },
                    amp,
                )
            }
        })
        .collect();
    rasterize(&specs, grid).unwrap()
}
