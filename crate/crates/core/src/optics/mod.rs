//! Optical front end: pressure-to-phase transduction and the balanced
//! heterodyne signal.
//!
//! The two photodiodes of the balanced detector see counterphase fringes
//! `I1 = A + B cos(w0 t + dphi)` and `I2 = A - B cos(w0 t + dphi)`; their
//! difference `2B cos(w0 t + dphi)` carries the phase on a carrier at `f0`
//! with the background `A` cancelled.

mod noise;

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::signal::Trace;

pub use noise::{apply_noise, NoiseModel, NoiseTarget};

/// Interferometer constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OpticalParams {
    /// Probe wavelength [m].
    pub wavelength: f64,
    /// Piezo-optic coefficient dn/dp [1/Pa].
    pub piezo_optic: f64,
    /// Probe path through the acoustic field [m]; the beam crosses the
    /// 100 mm cuvette twice.
    pub interaction_length: f64,
    /// Heterodyne carrier [Hz].
    pub carrier_frequency: f64,
    /// Fringe contrast `B`.
    pub fringe_contrast: f64,
    /// Background intensity `A`.
    pub background: f64,
}

impl Default for OpticalParams {
    fn default() -> Self {
        OpticalParams {
            wavelength: 632.8e-9,
            piezo_optic: 1.35e-10,
            interaction_length: 0.2,
            carrier_frequency: 75e6,
            fringe_contrast: 1.0,
            background: 1.0,
        }
    }
}

impl OpticalParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("optics.wavelength", self.wavelength),
            ("optics.piezo_optic", self.piezo_optic),
            ("optics.interaction_length", self.interaction_length),
            ("optics.carrier_frequency", self.carrier_frequency),
            ("optics.fringe_contrast", self.fringe_contrast),
        ];
        for (field, v) in positive {
            ensure(v.is_finite() && v > 0.0, field, || format!("must be positive, got {v}"))?;
        }
        ensure(
            self.background.is_finite() && self.background >= 0.0,
            "optics.background",
            || format!("must be non-negative, got {}", self.background),
        )?;
        Ok(())
    }

    /// Phase per unit line-integrated pressure, `(2 pi / lambda) dn/dp` [rad/(Pa m)].
    pub fn transduction(&self) -> f64 {
        TAU / self.wavelength * self.piezo_optic
    }
}

/// Real-valued electrical signal from the balanced photodetector.
#[derive(Debug, Clone, PartialEq)]
pub struct RfTrace {
    pub sample_rate: f64,
    /// Time of sample 0 on the clock shared by transmitter and receiver [s].
    pub start_time: f64,
    pub samples: Vec<f64>,
}

impl RfTrace {
    pub fn time(&self, n: usize) -> f64 {
        self.start_time + n as f64 / self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// `dphi(t) = (2 pi / lambda) (dn/dp) g(t)` for a line-integrated pressure `g` [Pa m].
pub fn pressure_to_phase(g: &Trace, optics: &OpticalParams) -> Trace {
    let k = optics.transduction();
    Trace::new(g.t_start, g.dt, g.values.iter().map(|v| k * v).collect())
}

/// Balanced heterodyne signal `I1 - I2` sampled at `rf_rate` over the span of
/// `phase`, which is linearly interpolated onto the RF clock.
pub fn synthesize_balanced(phase: &Trace, optics: &OpticalParams, rf_rate: f64) -> Result<RfTrace> {
    optics.validate()?;
    let f0 = optics.carrier_frequency;
    if !(rf_rate >= 4.0 * f0) {
        return Err(Error::invalid(
            "rf_rate",
            format!("{rf_rate} Hz undersamples the {f0} Hz carrier (need at least 4 f0)"),
        ));
    }
    ensure(!phase.is_empty(), "phase", || "empty phase series".into())?;
    if phase.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("phase", "contains non-finite values"));
    }
    let span = (phase.len() - 1) as f64 * phase.dt;
    let n = (span * rf_rate + 1e-6).floor() as usize + 1;
    let (a, b) = (optics.background, optics.fringe_contrast);
    let samples = (0..n)
        .map(|k| {
            let t = phase.t_start + k as f64 / rf_rate;
            let arg = TAU * f0 * t + phase.interpolate(t);
            let fringe = b * arg.cos();
            let i1 = a + fringe;
            let i2 = a - fringe;
            i1 - i2
        })
        .collect();
    Ok(RfTrace {
        sample_rate: rf_rate,
        start_time: phase.t_start,
        samples,
    })
}

/// Phase change for a uniform refractive-index change `dn` over `length`.
pub fn index_change_to_phase(dn: f64, length: f64, optics: &OpticalParams) -> f64 {
    2.0 * PI * length * dn / optics.wavelength
}
