//! Software-defined receiver: coherent IQ down-conversion, phase extraction
//! and shot averaging.
//!
//! Down-conversion mixes the RF samples with `cos` and `-sin` of the local
//! oscillator on the transmitter's own clock, so a carrier `2B cos(w t + phi)`
//! becomes `B e^{j phi}` plus a component at `2 w` that the filters remove.
//! Filtering runs in two stages: an anti-alias low-pass evaluated only at the
//! decimated instants, then the demodulation low-pass at the output rate.

use std::f64::consts::{PI, TAU};

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::acoustics::{ScanGeometry, Sinogram, Stage};
use crate::dsp::{self, Edge};
use crate::error::{ensure, Error, Result};
use crate::optics::RfTrace;
use crate::signal::Trace;

/// Samples with `|IQ|` below this fraction of the record maximum carry no
/// usable phase and are interpolated from their neighbours.
pub const MAGNITUDE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct IqTrace {
    pub sample_rate: f64,
    pub start_time: f64,
    pub i_samples: Vec<f64>,
    pub q_samples: Vec<f64>,
}

impl IqTrace {
    pub fn new(sample_rate: f64, start_time: f64, i_samples: Vec<f64>, q_samples: Vec<f64>) -> Result<Self> {
        ensure(sample_rate.is_finite() && sample_rate > 0.0, "iq.sample_rate", || {
            format!("must be positive, got {sample_rate}")
        })?;
        ensure(i_samples.len() == q_samples.len(), "iq", || {
            format!("{} I samples but {} Q samples", i_samples.len(), q_samples.len())
        })?;
        if i_samples.iter().chain(&q_samples).any(|v| !v.is_finite()) {
            return Err(Error::invalid("iq", "contains non-finite samples"));
        }
        Ok(IqTrace {
            sample_rate,
            start_time,
            i_samples,
            q_samples,
        })
    }

    pub fn len(&self) -> usize {
        self.i_samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.i_samples.is_empty()
    }

    pub fn magnitude(&self, n: usize) -> f64 {
        self.i_samples[n].hypot(self.q_samples[n])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReceiverConfig {
    pub local_oscillator_frequency: f64,
    pub output_rate: f64,
    /// Demodulation low-pass cutoff at the output rate [Hz].
    pub lowpass_cutoff: f64,
    pub filter_taps: usize,
    /// Length of the anti-alias filter run at the RF rate before decimation.
    pub anti_alias_taps: usize,
}

impl Default for ReceiverConfig {
    fn default() -> Self {
        ReceiverConfig {
            local_oscillator_frequency: 75e6,
            output_rate: 60e6,
            lowpass_cutoff: 3e6,
            filter_taps: 255,
            anti_alias_taps: 127,
        }
    }
}

impl ReceiverConfig {
    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("receiver.local_oscillator_frequency", self.local_oscillator_frequency),
            ("receiver.output_rate", self.output_rate),
            ("receiver.lowpass_cutoff", self.lowpass_cutoff),
        ] {
            ensure(v.is_finite() && v > 0.0, field, || format!("must be positive, got {v}"))?;
        }
        ensure(
            self.lowpass_cutoff < self.output_rate / 2.0,
            "receiver.lowpass_cutoff",
            || {
                format!(
                    "{} Hz is not below the output Nyquist frequency {} Hz",
                    self.lowpass_cutoff,
                    self.output_rate / 2.0
                )
            },
        )?;
        for (field, n) in [
            ("receiver.filter_taps", self.filter_taps),
            ("receiver.anti_alias_taps", self.anti_alias_taps),
        ] {
            ensure(n % 2 == 1, field, || format!("must be a positive odd integer, got {n}"))?;
        }
        Ok(())
    }

    /// Integer ratio between the RF rate and the output rate.
    pub fn decimation(&self, rf_rate: f64) -> Result<usize> {
        self.validate()?;
        let ratio = rf_rate / self.output_rate;
        let m = ratio.round();
        if m < 1.0 || (ratio - m).abs() > 1e-9 * ratio {
            return Err(Error::invalid(
                "receiver.output_rate",
                format!(
                    "RF rate {rf_rate} Hz is not an integer multiple of the output rate {} Hz",
                    self.output_rate
                ),
            ));
        }
        Ok(m as usize)
    }

    /// Output samples at each end of a record that the filters corrupt.
    pub fn guard_samples(&self, rf_rate: f64) -> Result<usize> {
        let m = self.decimation(rf_rate)?;
        Ok(self.filter_taps / 2 + (self.anti_alias_taps / 2).div_ceil(m) + 1)
    }
}

/// Mixes `rf` to baseband on the shared clock, low-passes and decimates.
/// A carrier `2B cos(2 pi f_LO t + phi)` comes out as `I + jQ = B e^{j phi}`.
/// The first and last [`ReceiverConfig::guard_samples`] outputs carry filter
/// edge transients.
pub fn downconvert(rf: &RfTrace, cfg: &ReceiverConfig) -> Result<IqTrace> {
    let m = cfg.decimation(rf.sample_rate)?;
    ensure(!rf.is_empty(), "rf", || "empty trace".into())?;
    let w = TAU * cfg.local_oscillator_frequency;
    let (mut i_mix, mut q_mix) = (Vec::with_capacity(rf.len()), Vec::with_capacity(rf.len()));
    for (n, &v) in rf.samples.iter().enumerate() {
        let (s, c) = (w * rf.time(n)).sin_cos();
        i_mix.push(v * c);
        q_mix.push(-v * s);
    }
    // anti-alias stage: half the output Nyquist band, at the RF rate
    let stage1 = dsp::lowpass(cfg.anti_alias_taps, 0.25 / m as f64)?;
    let stage2 = dsp::lowpass(cfg.filter_taps, cfg.lowpass_cutoff / cfg.output_rate)?;
    let i_dec = dsp::filter_decimate(&i_mix, &stage1, m, Edge::Reflect);
    let q_dec = dsp::filter_decimate(&q_mix, &stage1, m, Edge::Reflect);
    let i = dsp::filter_zero_phase(&i_dec, &stage2, Edge::Reflect);
    let q = dsp::filter_zero_phase(&q_dec, &stage2, Edge::Reflect);
    IqTrace::new(rf.sample_rate / m as f64, rf.start_time, i, q)
}

/// Removes jumps larger than `pi` between successive samples.
pub fn unwrap(phase: &mut [f64]) {
    let mut offset = 0.0;
    for n in 1..phase.len() {
        let raw = phase[n];
        let prev = phase[n - 1];
        let step = raw + offset - prev;
        if step.abs() > PI {
            offset -= TAU * (step / TAU).round();
        }
        phase[n] = raw + offset;
    }
}

/// Four-quadrant phase of the IQ record, unwrapped. Samples whose magnitude
/// falls below [`MAGNITUDE_FLOOR`] of the maximum are bridged by linear
/// interpolation.
pub fn extract_phase(iq: &IqTrace) -> Result<Trace> {
    let n = iq.len();
    let mags: Vec<f64> = (0..n).map(|k| iq.magnitude(k)).collect();
    let max = mags.iter().cloned().fold(0.0, f64::max);
    if max <= 0.0 {
        return Err(Error::NoCarrier { angle: None });
    }
    let good: Vec<usize> = (0..n).filter(|&k| mags[k] >= MAGNITUDE_FLOOR * max).collect();
    let mut wrapped: Vec<f64> = good
        .iter()
        .map(|&k| iq.q_samples[k].atan2(iq.i_samples[k]))
        .collect();
    unwrap(&mut wrapped);

    let mut out = vec![0.0; n];
    let mut g = 0;
    for (k, v) in out.iter_mut().enumerate() {
        while g + 1 < good.len() && good[g + 1] <= k {
            g += 1;
        }
        *v = if good[g] == k {
            wrapped[g]
        } else if k < good[0] {
            wrapped[0]
        } else if g + 1 == good.len() {
            wrapped[g]
        } else {
            let (k0, k1) = (good[g] as f64, good[g + 1] as f64);
            let f = (k as f64 - k0) / (k1 - k0);
            wrapped[g] * (1.0 - f) + wrapped[g + 1] * f
        };
    }
    Ok(Trace::new(iq.start_time, 1.0 / iq.sample_rate, out))
}

/// Pointwise mean of shots sharing one time base.
pub fn average_shots(shots: &[Trace]) -> Result<Trace> {
    let first = shots
        .first()
        .ok_or_else(|| Error::invalid("shots", "no shots to average"))?;
    for (k, s) in shots.iter().enumerate().skip(1) {
        if s.len() != first.len() {
            return Err(Error::invalid(
                "shots",
                format!("shot #{k} has {} samples, shot #0 has {}", s.len(), first.len()),
            ));
        }
        if s.dt != first.dt || s.t_start != first.t_start {
            return Err(Error::invalid("shots", format!("shot #{k} has a different time base")));
        }
    }
    let k = shots.len() as f64;
    let values = (0..first.len())
        .map(|n| shots.iter().map(|s| s.values[n]).sum::<f64>() / k)
        .collect();
    Ok(Trace::new(first.t_start, first.dt, values))
}

/// Cuts the samples of `phase` that fall on the acquisition window of `geometry`.
fn crop_to_window(phase: &Trace, geometry: &ScanGeometry) -> Result<Vec<f64>> {
    if (phase.dt - geometry.dt).abs() > 1e-9 * geometry.dt {
        return Err(Error::invalid(
            "receiver.output_rate",
            format!(
                "output sample spacing {:e} s differs from the scan's {:e} s",
                phase.dt, geometry.dt
            ),
        ));
    }
    let shift = (geometry.t_start - phase.t_start) / phase.dt;
    let k0 = shift.round();
    if (shift - k0).abs() > 1e-6 || k0 < 0.0 || k0 as usize + geometry.n_samples > phase.len() {
        return Err(Error::invalid(
            "rf",
            "demodulated record does not contain the acquisition window on its sample lattice",
        ));
    }
    let k0 = k0 as usize;
    Ok(phase.values[k0..k0 + geometry.n_samples].to_vec())
}

/// Demodulates every shot of every angle and averages the shots of each angle
/// into one phase row. `rf_source(angle, shot)` produces the RF record, which
/// must span the acquisition window of `geometry` (plus filter guard).
/// Angles run in parallel; each row depends only on its own inputs.
pub fn demodulate_scan<F>(
    geometry: &ScanGeometry,
    shots_per_angle: usize,
    rf_source: F,
    cfg: &ReceiverConfig,
    sound_speed: f64,
) -> Result<Sinogram>
where
    F: Fn(usize, usize) -> Result<RfTrace> + Sync,
{
    geometry.validate()?;
    cfg.validate()?;
    ensure(shots_per_angle >= 1, "shots_per_angle", || "must be at least 1".into())?;
    let rows: Vec<Vec<f64>> = (0..geometry.n_angles())
        .into_par_iter()
        .map(|a| {
            let shots = (0..shots_per_angle)
                .map(|s| {
                    let rf = rf_source(a, s)?;
                    let iq = downconvert(&rf, cfg)?;
                    extract_phase(&iq).map_err(|e| match e {
                        Error::NoCarrier { .. } => Error::NoCarrier { angle: Some(a) },
                        other => other,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            crop_to_window(&average_shots(&shots)?, geometry)
        })
        .collect::<Result<_>>()?;
    let mut data = Array2::zeros((geometry.n_angles(), geometry.n_samples));
    for (a, row) in rows.into_iter().enumerate() {
        data.row_mut(a).assign(&ndarray::ArrayView1::from(&row));
    }
    Sinogram::new(
        geometry.clone(),
        Stage::Phase,
        data,
        sound_speed,
        format!("IQ demodulation, {shots_per_angle} shots per angle"),
    )
}
