use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::RfTrace;
use crate::dsp;
use crate::error::{ensure, Result};
use crate::signal::Trace;

/// Stochastic and deterministic impairments of one shot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseModel {
    /// Standard deviation of the additive phase noise of a single shot [rad].
    pub phase_noise_std: f64,
    /// One-sided bandwidth of the phase noise [Hz]; 0 means white up to the
    /// Nyquist frequency of the phase series.
    pub phase_noise_bandwidth: f64,
    /// Per-shot multiplicative jitter of the fringe contrast `B`, relative.
    pub amplitude_noise_std: f64,
    /// White additive noise on the RF samples (electrical units).
    pub rf_noise_std: f64,
    /// Frequency mismatch between modulating and demodulating oscillators [Hz].
    pub carrier_offset: f64,
    /// Rate of change of that mismatch, expressed as phase acceleration [rad/s^2].
    pub carrier_phase_drift: f64,
    pub rng_seed: u64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel {
            phase_noise_std: 0.55e-3,
            phase_noise_bandwidth: 2e6,
            amplitude_noise_std: 0.0,
            rf_noise_std: 0.0,
            carrier_offset: 0.0,
            carrier_phase_drift: 0.0,
            rng_seed: 0,
        }
    }
}

const PHASE_NOISE_TAPS: usize = 255;

/// Independent random streams per shot.
#[derive(Clone, Copy)]
enum Channel {
    Phase = 0,
    Amplitude = 1,
    Rf = 2,
}

impl NoiseModel {
    /// No noise and no carrier impairment.
    pub fn off() -> Self {
        NoiseModel {
            phase_noise_std: 0.0,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("noise.phase_noise_std", self.phase_noise_std),
            ("noise.phase_noise_bandwidth", self.phase_noise_bandwidth),
            ("noise.amplitude_noise_std", self.amplitude_noise_std),
            ("noise.rf_noise_std", self.rf_noise_std),
        ];
        for (field, v) in nonneg {
            ensure(v.is_finite() && v >= 0.0, field, || format!("must be >= 0, got {v}"))?;
        }
        ensure(self.carrier_offset.is_finite(), "noise.carrier_offset", || "must be finite".into())?;
        ensure(
            self.carrier_phase_drift.is_finite(),
            "noise.carrier_phase_drift",
            || "must be finite".into(),
        )?;
        Ok(())
    }

    pub fn is_coherent(&self) -> bool {
        self.carrier_offset == 0.0 && self.carrier_phase_drift == 0.0
    }

    /// ChaCha keyed by the seed, one stream per (shot, channel). Draw `k` of a
    /// stream depends only on `(seed, shot, channel, k)`, never on which thread
    /// asks or in what order shots are processed.
    fn rng(&self, shot: u64, channel: Channel) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.rng_seed);
        rng.set_stream(shot.wrapping_mul(4).wrapping_add(channel as u64));
        rng
    }

    /// Gaussian phase noise for `n` samples spaced `dt`, band-limited to
    /// `phase_noise_bandwidth` with its variance preserved.
    fn phase_noise(&self, shot: u64, n: usize, dt: f64) -> Result<Vec<f64>> {
        let mut rng = self.rng(shot, Channel::Phase);
        let sigma = self.phase_noise_std;
        let cutoff = self.phase_noise_bandwidth * dt;
        if self.phase_noise_bandwidth == 0.0 || cutoff >= 0.5 {
            return Ok((0..n)
                .map(|_| sigma * rng.sample::<f64, _>(StandardNormal))
                .collect());
        }
        let mut taps = dsp::lowpass(PHASE_NOISE_TAPS, cutoff)?;
        let norm = taps.iter().map(|h| h * h).sum::<f64>().sqrt();
        taps.iter_mut().for_each(|h| *h *= sigma / norm);
        let white: Vec<f64> = (0..n + taps.len() - 1)
            .map(|_| rng.sample(StandardNormal))
            .collect();
        Ok(white
            .windows(taps.len())
            .map(|w| w.iter().zip(&taps).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Phase error `2 pi offset t + drift t^2 / 2` of an unsynchronized receiver.
    pub fn carrier_error(&self, t: f64) -> f64 {
        TAU * self.carrier_offset * t + 0.5 * self.carrier_phase_drift * t * t
    }
}

/// Series that can be corrupted by a [`NoiseModel`].
pub trait NoiseTarget: Sized {
    fn with_noise(&self, model: &NoiseModel, shot_index: u64) -> Result<Self>;
}

/// Phase series: additive phase noise plus the carrier impairment.
impl NoiseTarget for Trace {
    fn with_noise(&self, model: &NoiseModel, shot_index: u64) -> Result<Self> {
        model.validate()?;
        let mut out = self.clone();
        if model.phase_noise_std > 0.0 {
            let noise = model.phase_noise(shot_index, self.len(), self.dt)?;
            out.values.iter_mut().zip(noise).for_each(|(v, e)| *v += e);
        }
        if !model.is_coherent() {
            for (n, v) in out.values.iter_mut().enumerate() {
                *v += model.carrier_error(self.time(n));
            }
        }
        Ok(out)
    }
}

/// RF trace: contrast jitter (a per-shot gain on `B`, hence on the whole
/// balanced signal) and additive electrical noise.
impl NoiseTarget for RfTrace {
    fn with_noise(&self, model: &NoiseModel, shot_index: u64) -> Result<Self> {
        model.validate()?;
        let mut out = self.clone();
        if model.amplitude_noise_std > 0.0 {
            let z: f64 = model.rng(shot_index, Channel::Amplitude).sample(StandardNormal);
            let gain = (1.0 + model.amplitude_noise_std * z).max(0.0);
            out.samples.iter_mut().for_each(|v| *v *= gain);
        }
        if model.rf_noise_std > 0.0 {
            let mut rng = model.rng(shot_index, Channel::Rf);
            for v in out.samples.iter_mut() {
                *v += model.rf_noise_std * rng.sample::<f64, _>(StandardNormal);
            }
        }
        Ok(out)
    }
}

/// Applies `model` to a phase series or an RF trace for shot `shot_index`.
pub fn apply_noise<T: NoiseTarget>(x: &T, model: &NoiseModel, shot_index: u64) -> Result<T> {
    x.with_noise(model, shot_index)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phase(n: usize) -> Trace {
        Trace::new(2e-6, 1.0 / 60e6, (0..n).map(|k| (k as f64 * 0.01).sin()).collect())
    }

    #[test]
    fn zero_model_is_identity() {
        let p = phase(500);
        assert_eq!(apply_noise(&p, &NoiseModel::off(), 3).unwrap(), p);
        let rf = RfTrace {
            sample_rate: 600e6,
            start_time: 0.0,
            samples: vec![0.5, -0.25, 1.0],
        };
        assert_eq!(apply_noise(&rf, &NoiseModel::off(), 3).unwrap(), rf);
    }

    #[test]
    fn same_key_same_noise_different_key_different_noise() {
        let p = phase(2000);
        let m = NoiseModel {
            rng_seed: 42,
            amplitude_noise_std: 0.1,
            rf_noise_std: 0.01,
            ..Default::default()
        };
        let a = apply_noise(&p, &m, 5).unwrap();
        assert_eq!(a, apply_noise(&p, &m, 5).unwrap());
        assert_ne!(a, apply_noise(&p, &m, 6).unwrap());
        let other = NoiseModel { rng_seed: 43, ..m };
        assert_ne!(a, apply_noise(&p, &other, 5).unwrap());

        let rf = RfTrace {
            sample_rate: 600e6,
            start_time: 0.0,
            samples: vec![1.0; 100],
        };
        assert_eq!(apply_noise(&rf, &m, 1).unwrap(), apply_noise(&rf, &m, 1).unwrap());
        assert_ne!(apply_noise(&rf, &m, 1).unwrap(), apply_noise(&rf, &m, 2).unwrap());
    }

    #[test]
    fn band_limited_noise_keeps_its_variance() {
        let m = NoiseModel {
            rng_seed: 9,
            ..Default::default()
        };
        let n = 200_000;
        let noise = m.phase_noise(0, n, 1.0 / 60e6).unwrap();
        let mean = noise.iter().sum::<f64>() / n as f64;
        let var = noise.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        assert!((var.sqrt() / 0.55e-3 - 1.0).abs() < 0.02, "{}", var.sqrt());
        assert!(mean.abs() < 0.02e-3);
        let high: f64 = noise
            .windows(2)
            .map(|w| (w[1] - w[0]).powi(2))
            .sum::<f64>()
            / n as f64;
        // first difference of 2 MHz noise at 60 MS/s has far less power than
        // that of white noise (2 sigma^2)
        assert!(high < 0.05 * 2.0 * var);
    }

    #[test]
    fn carrier_error_is_a_ramp() {
        let p = Trace::new(0.0, 1e-6, vec![0.0; 11]);
        let m = NoiseModel {
            carrier_offset: 1000.0,
            ..NoiseModel::off()
        };
        let out = apply_noise(&p, &m, 0).unwrap();
        for (n, v) in out.values.iter().enumerate() {
            assert!((v - TAU * 1000.0 * n as f64 * 1e-6).abs() < 1e-15);
        }
    }

    #[test]
    fn negative_std_rejected() {
        let m = NoiseModel {
            phase_noise_std: -1.0,
            ..Default::default()
        };
        assert!(apply_noise(&phase(10), &m, 0).is_err());
    }
}
