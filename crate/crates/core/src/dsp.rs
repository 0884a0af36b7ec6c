//! Windowed-sinc FIR design and centered (zero-phase) filtering.
//!
//! All filters here are odd-length and symmetric, applied centered on the
//! output sample, so they introduce no group delay.

use std::f64::consts::PI;

use crate::error::{Error, Result};

pub fn blackman(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    let m = (n - 1) as f64;
    (0..n)
        .map(|k| {
            let x = k as f64 / m;
            0.42 - 0.5 * (2.0 * PI * x).cos() + 0.08 * (4.0 * PI * x).cos()
        })
        .collect()
}

/// Blackman-windowed sinc low-pass with unit DC gain. `cutoff` is in cycles per
/// sample and must lie in `(0, 0.5)`.
pub fn lowpass(num_taps: usize, cutoff: f64) -> Result<Vec<f64>> {
    if num_taps == 0 || num_taps.is_multiple_of(2) {
        return Err(Error::invalid(
            "filter_taps",
            format!("must be a positive odd integer, got {num_taps}"),
        ));
    }
    if !(cutoff > 0.0 && cutoff < 0.5) {
        return Err(Error::invalid(
            "cutoff",
            format!("normalized cutoff {cutoff} must lie in (0, 0.5), i.e. below Nyquist"),
        ));
    }
    let half = (num_taps / 2) as f64;
    let window = blackman(num_taps);
    let mut taps: Vec<f64> = window
        .iter()
        .enumerate()
        .map(|(k, w)| {
            // mirror the left half so the taps are exactly symmetric
            let x = (k as f64 - half).abs();
            let w = if (k as f64) > half { window[num_taps - 1 - k] } else { *w };
            let sinc = if x == 0.0 {
                2.0 * cutoff
            } else {
                (2.0 * PI * cutoff * x).sin() / (PI * x)
            };
            w * sinc
        })
        .collect();
    let dc: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= dc);
    Ok(taps)
}

/// Magnitude response at normalized frequency `f` (cycles per sample).
pub fn magnitude_response(taps: &[f64], f: f64) -> f64 {
    let half = (taps.len() / 2) as f64;
    let (mut re, mut im) = (0.0, 0.0);
    for (k, &h) in taps.iter().enumerate() {
        let ph = -2.0 * PI * f * (k as f64 - half);
        re += h * ph.cos();
        im += h * ph.sin();
    }
    re.hypot(im)
}

/// How samples beyond the ends of a record are filled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edge {
    Zero,
    /// Mirror about the end samples (`x[-1] = x[1]`), which keeps DC exact.
    Reflect,
}

#[inline]
fn reflect_index(mut i: isize, n: isize) -> usize {
    if n == 1 {
        return 0;
    }
    let period = 2 * (n - 1);
    i = i.rem_euclid(period);
    if i >= n {
        i = period - i;
    }
    i as usize
}

/// Centered convolution `y[n] = sum_k h[k] x[n + k - half]`.
pub fn filter_zero_phase(x: &[f64], taps: &[f64], edge: Edge) -> Vec<f64> {
    let n = x.len() as isize;
    let half = (taps.len() / 2) as isize;
    (0..n)
        .map(|i| {
            let lo = i - half;
            if lo >= 0 && i + half < n {
                let s = &x[lo as usize..(i + half + 1) as usize];
                return s.iter().zip(taps).map(|(a, b)| a * b).sum();
            }
            let mut acc = 0.0;
            for (k, &h) in taps.iter().enumerate() {
                let j = lo + k as isize;
                let v = match edge {
                    Edge::Zero if j < 0 || j >= n => 0.0,
                    Edge::Zero => x[j as usize],
                    Edge::Reflect => x[reflect_index(j, n)],
                };
                acc += h * v;
            }
            acc
        })
        .collect()
}

/// Centered filtering evaluated only at every `factor`-th input sample
/// (`y[m]` is aligned with `x[m * factor]`).
pub fn filter_decimate(x: &[f64], taps: &[f64], factor: usize, edge: Edge) -> Vec<f64> {
    let n = x.len() as isize;
    let half = (taps.len() / 2) as isize;
    let out_len = x.len().div_ceil(factor);
    (0..out_len)
        .map(|m| {
            let i = (m * factor) as isize;
            let lo = i - half;
            if lo >= 0 && i + half < n {
                let s = &x[lo as usize..(i + half + 1) as usize];
                return s.iter().zip(taps).map(|(a, b)| a * b).sum();
            }
            let mut acc = 0.0;
            for (k, &h) in taps.iter().enumerate() {
                let j = lo + k as isize;
                let v = match edge {
                    Edge::Zero if j < 0 || j >= n => 0.0,
                    Edge::Zero => x[j as usize],
                    Edge::Reflect => x[reflect_index(j, n)],
                };
                acc += h * v;
            }
            acc
        })
        .collect()
}
