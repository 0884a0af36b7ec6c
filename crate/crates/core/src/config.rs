//! Scenario files: one TOML document describes one experiment.
//!
//! ```toml
//! seed = 42
//! output_dir = "out"
//!
//! [grid]
//! nx = 401
//! ny = 401
//! pitch = 50e-6
//!
//! [[phantom.shapes]]
//! kind = "ellipse"
//! center = [0.0, 0.0]
//! width = 3e-3
//! height = 4e-3
//! amplitude = 1000.0
//!
//! [geometry]
//! detector_offset = 13e-3
//! n_angles = 360
//!
//! [medium]
//! sound_speed = 1480.0
//!
//! [noise]
//! phase_noise_std = 0.55e-3
//!
//! [metrics]
//! cut_lines = [{ axis = "horizontal", y = 0.0 }]
//! ```
//!
//! Every section is optional except `phantom`; omitted keys take the
//! documented defaults. Unknown keys are rejected. Relative paths are taken
//! from the directory holding the config file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::acoustics::{sound_speed, ScanGeometry, WaterState};
use crate::chain::AcquisitionConfig;
use crate::error::{ensure, Error, Result};
use crate::io::{read_bytes, read_pgm, sha256_hex};
use crate::metrics::CutLine;
use crate::optics::{NoiseModel, OpticalParams};
use crate::phantom::{import_bitmap, rasterize, Grid2D, PressureField, ShapeSpec};
use crate::receiver::ReceiverConfig;
use crate::reconstruction::ReconConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BitmapConfig {
    pub path: PathBuf,
    /// Physical width of the picture [m].
    pub width: f64,
    #[serde(default = "unit")]
    pub amplitude: f64,
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhantomConfig {
    #[serde(default)]
    pub shapes: Vec<ShapeSpec>,
    pub bitmap: Option<BitmapConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub nx: usize,
    pub ny: usize,
    pub pitch: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        let g = Grid2D::default_scan();
        GridConfig {
            nx: g.nx,
            ny: g.ny,
            pitch: g.pitch,
        }
    }
}

/// Detector circle and timing. Without `t_start`/`n_samples` the window is
/// chosen to record every arrival from the grid. The sample interval is
/// always the receiver's output interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    pub detector_offset: f64,
    pub n_angles: usize,
    pub t_start: Option<f64>,
    pub n_samples: Option<usize>,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig {
            detector_offset: 13e-3,
            n_angles: 360,
            t_start: None,
            n_samples: None,
        }
    }
}

/// Either a sound speed or a water temperature; the default is 1480 m/s.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MediumConfig {
    pub sound_speed: Option<f64>,
    /// [degC]
    pub temperature: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AcquisitionSection {
    pub rf_rate: f64,
    pub shots_per_angle: usize,
}

impl Default for AcquisitionSection {
    fn default() -> Self {
        let a = AcquisitionConfig::default();
        AcquisitionSection {
            rf_rate: a.rf_rate,
            shots_per_angle: a.shots_per_angle,
        }
    }
}

/// Thresholds that turn `metrics` into a CI gate; unset ones are not checked.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GateConfig {
    pub noise_floor_max: Option<f64>,
    pub nep_density_min: Option<f64>,
    pub nep_density_max: Option<f64>,
    pub fwhm_min: Option<f64>,
    pub fwhm_max: Option<f64>,
    pub coherence_required: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsConfig {
    pub cut_lines: Vec<CutLine>,
    /// Optical path through the pressure field used for the sensitivity [m].
    pub path_length: f64,
    /// Bandwidth for NEP density and the resolution bound; defaults to the
    /// reconstruction cutoff.
    pub bandwidth: Option<f64>,
    /// Single-shot records in the phantom-free noise run.
    pub noise_records: usize,
    pub gate: GateConfig,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        MetricsConfig {
            cut_lines: vec![CutLine::Horizontal { y: 0.0 }, CutLine::Vertical { x: 0.0 }],
            path_length: 0.2,
            bandwidth: None,
            noise_records: 1000,
            gate: GateConfig::default(),
        }
    }
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Seeds every random draw; replaces `noise.rng_seed`.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    pub phantom: PhantomConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub medium: MediumConfig,
    #[serde(default)]
    pub optics: OpticalParams,
    #[serde(default)]
    pub noise: NoiseModel,
    #[serde(default)]
    pub receiver: ReceiverConfig,
    #[serde(default)]
    pub acquisition: AcquisitionSection,
    #[serde(default)]
    pub recon: ReconConfig,
    #[serde(default)]
    pub metrics: MetricsConfig,
}

impl ScenarioConfig {
    /// Parses TOML text; relative paths are resolved against `base_dir`.
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: ScenarioConfig = toml::from_str(text).map_err(|e| {
            let offset = e.span().map(|s| s.start).unwrap_or(0);
            Error::parse("config", offset as u64, e.message().to_string())
        })?;
        if let Some(b) = cfg.phantom.bitmap.as_mut() {
            if b.path.is_relative() {
                b.path = base_dir.join(&b.path);
            }
        }
        if cfg.output_dir.is_relative() {
            cfg.output_dir = base_dir.join(&cfg.output_dir);
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = read_bytes(path)?;
        let text = String::from_utf8(bytes)
            .map_err(|e| Error::parse("config", e.utf8_error().valid_up_to() as u64, "not UTF-8"))?;
        let dir = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, dir)
    }

    /// Checks every invariant of every section before any computation.
    pub fn validate(&self) -> Result<()> {
        let p = &self.phantom;
        ensure(!p.shapes.is_empty() || p.bitmap.is_some(), "phantom", || {
            "needs shapes or a bitmap".into()
        })?;
        ensure(p.shapes.is_empty() || p.bitmap.is_none(), "phantom", || {
            "give shapes or a bitmap, not both".into()
        })?;
        if let Some(b) = &p.bitmap {
            ensure(b.path.is_file(), "phantom.bitmap.path", || {
                format!("{} does not exist", b.path.display())
            })?;
        }
        let grid = self.grid()?;
        self.sound_speed()?;
        self.acquisition().validate()?;
        self.recon.validate()?;
        ensure(self.recon.cutoff < 0.5 * self.receiver.output_rate, "recon.cutoff", || {
            format!("must be below the Nyquist rate of {} Hz", 0.5 * self.receiver.output_rate)
        })?;
        let geometry = self.geometry()?;
        geometry.validate_coverage(grid.max_radius(), self.sound_speed()?)?;
        let m = &self.metrics;
        ensure(m.path_length.is_finite() && m.path_length > 0.0, "metrics.path_length", || {
            format!("must be positive, got {}", m.path_length)
        })?;
        if let Some(bw) = m.bandwidth {
            ensure(bw.is_finite() && bw > 0.0, "metrics.bandwidth", || format!("must be positive, got {bw}"))?;
        }
        ensure(m.noise_records >= 1, "metrics.noise_records", || "must be at least 1".into())?;
        let (xmin, xmax, ymin, ymax) = grid.bounds();
        for (k, line) in m.cut_lines.iter().enumerate() {
            let inside = match *line {
                CutLine::Horizontal { y } => (ymin..=ymax).contains(&y),
                CutLine::Vertical { x } => (xmin..=xmax).contains(&x),
            };
            ensure(inside, "metrics.cut_lines", || format!("line #{k} lies outside the grid"))?;
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid2D> {
        Grid2D::new(self.grid.nx, self.grid.ny, self.grid.pitch)
            .and_then(|g| g.validate(self.geometry.detector_offset).map(|_| g))
    }

    pub fn sound_speed(&self) -> Result<f64> {
        match (self.medium.sound_speed, self.medium.temperature) {
            (Some(_), Some(_)) => Err(Error::invalid(
                "medium",
                "give sound_speed or temperature, not both",
            )),
            (Some(c), None) => {
                ensure(c.is_finite() && c > 0.0, "medium.sound_speed", || format!("must be positive, got {c}"))?;
                Ok(c)
            }
            (None, Some(t)) => sound_speed(&WaterState { temperature: t }),
            (None, None) => Ok(1480.0),
        }
    }

    pub fn geometry(&self) -> Result<ScanGeometry> {
        let g = &self.geometry;
        ensure(g.n_angles >= 1, "geometry.n_angles", || "must be at least 1".into())?;
        let rate = self.receiver.output_rate;
        let covering = ScanGeometry::covering(
            g.detector_offset,
            g.n_angles,
            rate,
            self.grid()?.max_radius(),
            self.sound_speed()?,
        )?;
        ScanGeometry::new(
            g.detector_offset,
            covering.angles,
            g.t_start.unwrap_or(covering.t_start),
            1.0 / rate,
            g.n_samples.unwrap_or(covering.n_samples),
        )
    }

    pub fn acquisition(&self) -> AcquisitionConfig {
        AcquisitionConfig {
            optics: self.optics,
            noise: NoiseModel {
                rng_seed: self.seed,
                ..self.noise
            },
            receiver: self.receiver,
            rf_rate: self.acquisition.rf_rate,
            shots_per_angle: self.acquisition.shots_per_angle,
        }
    }

    /// The same acquisition with one shot per record, for the noise run.
    pub fn noise_acquisition(&self) -> AcquisitionConfig {
        AcquisitionConfig {
            shots_per_angle: 1,
            ..self.acquisition()
        }
    }

    pub fn bandwidth(&self) -> f64 {
        self.metrics.bandwidth.unwrap_or(self.recon.cutoff)
    }

    /// Ground-truth initial pressure on the simulation grid.
    pub fn phantom(&self) -> Result<PressureField> {
        let grid = self.grid()?;
        match &self.phantom.bitmap {
            Some(b) => {
                let (pixels, white) = read_pgm(&b.path)?;
                let field = import_bitmap(&pixels, white, b.width, b.amplitude, self.geometry.detector_offset)?;
                Ok(field.resample(&grid))
            }
            None => rasterize(&self.phantom.shapes, &grid),
        }
    }

    /// Digest of everything that influences the outputs, bitmap content included.
    pub fn digest(&self) -> Result<String> {
        let mut bytes = serde_json::to_vec(self).expect("config serializes");
        if let Some(b) = &self.phantom.bitmap {
            bytes.extend_from_slice(&read_bytes(&b.path)?);
        }
        bytes.extend_from_slice(env!("CARGO_PKG_VERSION").as_bytes());
        Ok(sha256_hex(&bytes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ScenarioConfig> {
        ScenarioConfig::from_toml(text, Path::new("/tmp"))
    }

    const MIN: &str = "[[phantom.shapes]]\nkind = \"disk\"\ncenter = [0.0, 0.0]\nradius = 1e-3\namplitude = 1.0\n";

    #[test]
    fn minimal_config_takes_defaults() {
        let c = parse(MIN).unwrap();
        c.validate().unwrap();
        assert_eq!(c.geometry.n_angles, 360);
        assert_eq!(c.acquisition.shots_per_angle, 4);
        assert_eq!(c.sound_speed().unwrap(), 1480.0);
        let g = c.geometry().unwrap();
        assert_eq!(g.n_angles(), 360);
        assert!((g.dt * 60e6 - 1.0).abs() < 1e-12);
        assert_eq!(c.output_dir, Path::new("/tmp/out"));
    }

    #[test]
    fn errors_name_the_field() {
        let field_of = |extra: &str| match parse(&format!("{MIN}{extra}")).and_then(|c| c.validate()) {
            Err(Error::Invalid { field, .. }) => field,
            Err(Error::Parse { message, .. }) => format!("parse: {message}"),
            other => panic!("{extra}: {other:?}"),
        };
        assert_eq!(field_of("[optics]\nwavelength = -1.0\n"), "optics.wavelength");
        assert_eq!(field_of("[noise]\nphase_noise_std = -1.0\n"), "noise.phase_noise_std");
        assert_eq!(field_of("[receiver]\nfilter_taps = 254\n"), "receiver.filter_taps");
        assert_eq!(field_of("[recon]\ncutoff = 0.0\n"), "recon.cutoff");
        assert_eq!(field_of("[grid]\npitch = 1e-3\n"), "grid");
        assert_eq!(field_of("[acquisition]\nshots_per_angle = 0\n"), "acquisition.shots_per_angle");
        assert_eq!(field_of("[medium]\nsound_speed = 1480.0\ntemperature = 20.0\n"), "medium");
        assert_eq!(field_of("[metrics]\ncut_lines = [{ axis = \"vertical\", x = 0.5 }]\n"), "metrics.cut_lines");
        assert!(field_of("[optics]\nbogus = 1\n").starts_with("parse"));
        let shape_typo = MIN.replace("radius", "radius = 1e-3\nradus");
        assert!(matches!(parse(&shape_typo), Err(Error::Parse { .. })));
        let roundtrip: ScenarioConfig = toml::from_str(&toml::to_string(&parse(MIN).unwrap()).unwrap()).unwrap();
        assert_eq!(roundtrip.phantom, parse(MIN).unwrap().phantom);
    }

    #[test]
    fn phantom_sources_are_exclusive() {
        let both = format!("{MIN}[phantom.bitmap]\npath = \"x.pgm\"\nwidth = 4e-3\n");
        assert!(parse(&both).unwrap().validate().is_err());
        assert!(parse("[phantom]\n").unwrap().validate().is_err());
    }
}
