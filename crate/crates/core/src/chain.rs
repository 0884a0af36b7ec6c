//! The simulated acquisition: line pressure -> phase -> balanced RF signal ->
//! receiver -> averaged phase sinogram.

use serde::{Deserialize, Serialize};

use crate::acoustics::{ScanGeometry, Sinogram, Stage};
use crate::error::{ensure, Result};
use crate::optics::{apply_noise, pressure_to_phase, synthesize_balanced, NoiseModel, OpticalParams, RfTrace};
use crate::receiver::{demodulate_scan, ReceiverConfig};
use crate::signal::Trace;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcquisitionConfig {
    pub optics: OpticalParams,
    pub noise: NoiseModel,
    pub receiver: ReceiverConfig,
    /// Simulation rate of the electrical signal [Hz].
    pub rf_rate: f64,
    pub shots_per_angle: usize,
}

impl Default for AcquisitionConfig {
    fn default() -> Self {
        AcquisitionConfig {
            optics: OpticalParams::default(),
            noise: NoiseModel::default(),
            receiver: ReceiverConfig::default(),
            rf_rate: 600e6,
            shots_per_angle: 4,
        }
    }
}

impl AcquisitionConfig {
    pub fn validate(&self) -> Result<()> {
        self.optics.validate()?;
        self.noise.validate()?;
        self.receiver.validate()?;
        self.receiver.decimation(self.rf_rate)?;
        ensure(self.shots_per_angle >= 1, "acquisition.shots_per_angle", || {
            "must be at least 1".into()
        })?;
        Ok(())
    }
}

/// The phase series of one shot, extended by `guard` samples on both sides
/// (holding the end values) so that filter transients fall outside the window.
fn padded(phase: &Trace, guard: usize) -> Trace {
    let n = phase.len();
    let mut values = Vec::with_capacity(n + 2 * guard);
    values.extend(std::iter::repeat_n(phase.values[0], guard));
    values.extend_from_slice(&phase.values);
    values.extend(std::iter::repeat_n(phase.values[n - 1], guard));
    Trace::new(phase.t_start - guard as f64 * phase.dt, phase.dt, values)
}

/// RF record of shot `shot` at angle `angle`. Shot indices are global
/// (`angle * shots_per_angle + shot`) so every shot draws its own noise.
pub fn shot_rf(line_pressure: &Trace, angle: usize, shot: usize, cfg: &AcquisitionConfig) -> Result<RfTrace> {
    let guard = cfg.receiver.guard_samples(cfg.rf_rate)?;
    let index = (angle * cfg.shots_per_angle + shot) as u64;
    let phase = padded(&pressure_to_phase(line_pressure, &cfg.optics), guard);
    let phase = apply_noise(&phase, &cfg.noise, index)?;
    let rf = synthesize_balanced(&phase, &cfg.optics, cfg.rf_rate)?;
    apply_noise(&rf, &cfg.noise, index)
}

/// Runs every row of a line-pressure sinogram through the optical and
/// receiver chain and returns the shot-averaged phase sinogram.
pub fn acquire(line_pressure: &Sinogram, cfg: &AcquisitionConfig) -> Result<Sinogram> {
    cfg.validate()?;
    line_pressure.require_stage(Stage::LinePressure)?;
    let mut out = demodulate_scan(
        line_pressure.geometry(),
        cfg.shots_per_angle,
        |a, s| shot_rf(&line_pressure.row_trace(a), a, s, cfg),
        &cfg.receiver,
        line_pressure.sound_speed(),
    )?;
    out.provenance = format!("{}; {}", line_pressure.provenance, out.provenance);
    Ok(out)
}

/// Phase sinogram of a run without a phantom; `geometry` only sets the timing
/// and the number of records.
pub fn acquire_noise(
    geometry: &ScanGeometry,
    sound_speed: f64,
    cfg: &AcquisitionConfig,
) -> Result<Sinogram> {
    let zeros = Sinogram::new(
        geometry.clone(),
        Stage::LinePressure,
        ndarray::Array2::zeros((geometry.n_angles(), geometry.n_samples)),
        sound_speed,
        "no phantom",
    )?;
    acquire(&zeros, cfg)
}
