//! Orchestration: in-memory stages and the file-producing commands behind the CLI.
//!
//! Output directory layout:
//!
//! | file | written by |
//! |---|---|
//! | `sinogram.sdsg` | simulate: shot-averaged phase sinogram |
//! | `noise.sdsg` | simulate: single-shot phase records without a phantom |
//! | `truth.{f64,json,pgm}` | simulate: rasterized initial pressure |
//! | `image.{f64,json,pgm}` | reconstruct |
//! | `profile_<k>.csv` | reconstruct: image along each configured cut line |
//! | `report.txt` | metrics |
//! | `noise_histogram.csv` | metrics |
//! | `manifest.json` | every command |

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::acoustics::{forward_sinogram, Sinogram, Stage};
use crate::chain::{acquire, acquire_noise};
use crate::config::{GateConfig, ScenarioConfig};
use crate::error::{Error, Result};
use crate::io::{
    file_digest, format_report, profile_csv, read_field, read_image, read_sinogram, write_atomic,
    write_field, write_image, write_sinogram, ImageFiles, RunManifest, StageRecord,
};
use crate::metrics::{
    build_report, image_resolution_study, noise_floor, phase_slope, profile, CutLine, MetricsReport,
    NoiseFloor, PhaseSlope, ReportInputs,
};
use crate::phantom::PressureField;
use crate::reconstruction::{reconstruct_pipeline, ReconImage};
use crate::signal::Trace;

pub const SINOGRAM_FILE: &str = "sinogram.sdsg";
pub const NOISE_FILE: &str = "noise.sdsg";
pub const TRUTH_STEM: &str = "truth";
pub const IMAGE_STEM: &str = "image";
pub const REPORT_FILE: &str = "report.txt";
pub const HISTOGRAM_FILE: &str = "noise_histogram.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Ground truth and shot-averaged phase sinogram of the configured scenario.
pub fn simulate(cfg: &ScenarioConfig) -> Result<(PressureField, Sinogram)> {
    cfg.validate()?;
    let truth = cfg.phantom()?;
    let geometry = cfg.geometry()?;
    let lp = forward_sinogram(&truth, &geometry, cfg.sound_speed()?)?;
    let phase = acquire(&lp, &cfg.acquisition())?;
    Ok((truth, phase))
}

/// Single-shot phase records of a run without a phantom, one per
/// `metrics.noise_records`, on the scan's time window.
pub fn noise_run(cfg: &ScenarioConfig) -> Result<Sinogram> {
    cfg.validate()?;
    let scan = cfg.geometry()?;
    let keep: Vec<usize> = (0..cfg.metrics.noise_records).collect();
    let mut geometry = scan.clone();
    geometry.angles = (0..keep.len())
        .map(|k| std::f64::consts::TAU * k as f64 / keep.len() as f64)
        .collect();
    acquire_noise(&geometry, cfg.sound_speed()?, &cfg.noise_acquisition())
}

pub fn reconstruct(cfg: &ScenarioConfig, phase: &Sinogram) -> Result<ReconImage> {
    cfg.recon.validate()?;
    cfg.optics.validate()?;
    let grid = cfg.grid()?;
    reconstruct_pipeline(phase, &cfg.optics, &grid, &cfg.recon)
}

/// Noise floor over every sample of the records, and the phase slope of the
/// record average (a carrier offset ramps every record identically).
pub fn noise_statistics(noise: &Sinogram) -> Result<(NoiseFloor, PhaseSlope)> {
    noise.require_stage(Stage::Phase)?;
    let flat: Vec<f64> = noise.data().iter().cloned().collect();
    let nf = noise_floor(&flat)?;
    let mean_row = noise.data().mean_axis(ndarray::Axis(0)).expect("rows exist");
    let g = noise.geometry();
    let slope = phase_slope(&Trace::new(g.t_start, g.dt, mean_row.to_vec()))?;
    Ok((nf, slope))
}

pub fn measure(
    cfg: &ScenarioConfig,
    image: &ReconImage,
    truth: Option<&PressureField>,
    noise: Option<&Sinogram>,
) -> Result<MetricsReport> {
    let study = truth
        .map(|t| image_resolution_study(image, t, &cfg.metrics.cut_lines))
        .transpose()?;
    let stats = noise.map(noise_statistics).transpose()?;
    build_report(
        &cfg.optics,
        ReportInputs {
            path_length: cfg.metrics.path_length,
            bandwidth: cfg.bandwidth(),
            sound_speed: image.metadata.sound_speed,
        },
        study.as_ref(),
        stats.as_ref().map(|(n, s)| (n, s)),
    )
}

/// Violated gate thresholds, as human-readable lines.
pub fn gate_violations(gate: &GateConfig, r: &MetricsReport) -> Vec<String> {
    let mut out = Vec::new();
    let mut check = |name: &str, value: Option<f64>, min: Option<f64>, max: Option<f64>| {
        let Some(v) = value else {
            if min.is_some() || max.is_some() {
                out.push(format!("{name} was not measured"));
            }
            return;
        };
        if let Some(m) = min.filter(|&m| v < m) {
            out.push(format!("{name} = {v} is below {m}"));
        }
        if let Some(m) = max.filter(|&m| v > m) {
            out.push(format!("{name} = {v} is above {m}"));
        }
    };
    check("noise_floor", r.noise_floor, None, gate.noise_floor_max);
    check("nep_density", r.nep_density, gate.nep_density_min, gate.nep_density_max);
    for w in r.fwhm_x.iter().chain(&r.fwhm_y) {
        check("fwhm", Some(*w), gate.fwhm_min, gate.fwhm_max);
    }
    if gate.coherence_required && r.coherence_lost != Some(false) {
        out.push("carrier coherence lost (phase ramp in the noise record)".into());
    }
    out
}

/// What a command wrote, or that nothing needed doing.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Written(Vec<PathBuf>),
    UpToDate,
}

struct Stamp {
    name: &'static str,
    started: Instant,
    inputs: Vec<PathBuf>,
}

fn digests(paths: &[PathBuf]) -> Result<BTreeMap<String, String>> {
    paths
        .iter()
        .map(|p| {
            let name = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            Ok((name, file_digest(p)?))
        })
        .collect()
}

fn open_manifest(cfg: &ScenarioConfig) -> Result<RunManifest> {
    let hash = cfg.digest()?;
    let path = cfg.output_dir.join(MANIFEST_FILE);
    Ok(match RunManifest::read(&path) {
        Ok(m) if m.config_hash == hash => m,
        _ => RunManifest::new(hash, cfg.seed),
    })
}

fn finish(cfg: &ScenarioConfig, stamp: Stamp, outputs: Vec<PathBuf>, warnings: &[(&str, u64)]) -> Result<Outcome> {
    let mut manifest = open_manifest(cfg)?;
    manifest.record(StageRecord {
        name: stamp.name.into(),
        inputs: digests(&stamp.inputs)?,
        outputs: digests(&outputs)?,
        wall_seconds: stamp.started.elapsed().as_secs_f64(),
    });
    for (k, v) in warnings {
        manifest.warnings.insert(format!("{}.{k}", stamp.name), *v);
    }
    manifest.write(&cfg.output_dir.join(MANIFEST_FILE))?;
    Ok(Outcome::Written(outputs))
}

fn image_files(paths: ImageFiles) -> [PathBuf; 3] {
    [paths.raw, paths.sidecar, paths.quicklook]
}

pub fn cmd_simulate(cfg: &ScenarioConfig) -> Result<Outcome> {
    let stamp = Stamp {
        name: "simulate",
        started: Instant::now(),
        inputs: cfg.phantom.bitmap.iter().map(|b| b.path.clone()).collect(),
    };
    let (truth, phase) = simulate(cfg)?;
    let noise = noise_run(cfg)?;
    let out = &cfg.output_dir;
    let mut written = vec![out.join(SINOGRAM_FILE), out.join(NOISE_FILE)];
    write_sinogram(&written[0], &phase)?;
    write_sinogram(&written[1], &noise)?;
    written.extend(image_files(write_field(&out.join(TRUTH_STEM), &truth)?));
    finish(cfg, stamp, written, &[])
}

pub fn cmd_reconstruct(cfg: &ScenarioConfig, sinogram: &Path) -> Result<Outcome> {
    let stamp = Stamp {
        name: "reconstruct",
        started: Instant::now(),
        inputs: vec![sinogram.to_path_buf()],
    };
    let phase = read_sinogram(sinogram)?;
    let image = reconstruct(cfg, &phase)?;
    let out = &cfg.output_dir;
    let mut written = image_files(write_image(&out.join(IMAGE_STEM), &image)?).to_vec();
    let g = &image.grid;
    for (k, &line) in cfg.metrics.cut_lines.iter().enumerate() {
        let values = profile(&image.values, g, line)?;
        let positions: Vec<f64> = match line {
            CutLine::Horizontal { .. } => (0..g.nx).map(|i| g.x(i)).collect(),
            CutLine::Vertical { .. } => (0..g.ny).map(|i| g.y(i)).collect(),
        };
        let path = out.join(format!("profile_{k}.csv"));
        write_atomic(&path, profile_csv(&positions, &[("value", &values)]).as_bytes())?;
        written.push(path);
    }
    let warnings = [("coverage_warnings", image.metadata.coverage_warnings)];
    finish(cfg, stamp, written, &warnings)
}

pub fn cmd_metrics(
    cfg: &ScenarioConfig,
    image: &Path,
    truth: Option<&Path>,
    noise: Option<&Path>,
) -> Result<Outcome> {
    let mut inputs = vec![image.with_extension("f64")];
    inputs.extend(truth.map(|t| t.with_extension("f64")));
    inputs.extend(noise.map(Path::to_path_buf));
    let stamp = Stamp {
        name: "metrics",
        started: Instant::now(),
        inputs,
    };
    let img = read_image(image)?;
    let truth = truth.map(read_field).transpose()?;
    let noise = noise.map(read_sinogram).transpose()?;
    let report = measure(cfg, &img, truth.as_ref(), noise.as_ref())?;
    let out = &cfg.output_dir;
    let mut written = vec![out.join(REPORT_FILE)];
    write_atomic(&written[0], format_report(&report).as_bytes())?;
    if let Some(n) = &noise {
        let (nf, _) = noise_statistics(n)?;
        let counts: Vec<f64> = nf.histogram.counts.iter().map(|&c| c as f64).collect();
        let csv = profile_csv(&nf.histogram.centers(), &[("count", &counts)]).replace("position_m", "phase_mrad");
        let path = out.join(HISTOGRAM_FILE);
        write_atomic(&path, csv.as_bytes())?;
        written.push(path);
    }
    let outcome = finish(cfg, stamp, written, &[("fwhm_skipped", report.fwhm_skipped as u64)])?;
    let violations = gate_violations(&cfg.metrics.gate, &report);
    if !violations.is_empty() {
        return Err(Error::Gate(violations.join("; ")));
    }
    Ok(outcome)
}

/// True when the manifest in the output directory was produced by this exact
/// configuration and every recorded output still has its recorded digest.
pub fn up_to_date(cfg: &ScenarioConfig) -> Result<bool> {
    let Ok(m) = RunManifest::read(&cfg.output_dir.join(MANIFEST_FILE)) else {
        return Ok(false);
    };
    if m.config_hash != cfg.digest()? {
        return Ok(false);
    }
    for name in ["simulate", "reconstruct", "metrics"] {
        let Some(stage) = m.stage(name) else {
            return Ok(false);
        };
        for (file, digest) in &stage.outputs {
            match file_digest(&cfg.output_dir.join(file)) {
                Ok(d) if &d == digest => {}
                _ => return Ok(false),
            }
        }
    }
    Ok(true)
}

/// simulate, reconstruct and metrics into the output directory, skipped when
/// the directory already holds this configuration's results.
pub fn cmd_pipeline(cfg: &ScenarioConfig) -> Result<Outcome> {
    cfg.validate()?;
    if up_to_date(cfg)? {
        return Ok(Outcome::UpToDate);
    }
    let out = &cfg.output_dir;
    let mut all = Vec::new();
    let mut take = |o: Outcome| {
        if let Outcome::Written(v) = o {
            all.extend(v);
        }
    };
    take(cmd_simulate(cfg)?);
    take(cmd_reconstruct(cfg, &out.join(SINOGRAM_FILE))?);
    take(cmd_metrics(
        cfg,
        &out.join(IMAGE_STEM),
        Some(&out.join(TRUTH_STEM)),
        Some(&out.join(NOISE_FILE)),
    )?);
    Ok(Outcome::Written(all))
}

/// Human-readable description of every file format, for `sdoat formats`.
pub const FORMATS: &str = "\
sinogram (.sdsg)
  bytes 0..8    magic \"SDOATSG1\"
  bytes 8..16   header length H, u64 little-endian
  next H bytes  JSON header: format_version (1), stage (\"line_pressure\" | \"phase\"),
                rows, cols, sample_rate [Hz], sound_speed [m/s] (required),
                geometry {detector_offset, angles [rad], t_start, dt, n_samples}, provenance
  rest          rows * cols f64 little-endian, row-major (one row per angle)

image / truth (.f64 + .json + .pgm)
  .f64   ny * nx f64 little-endian, row-major, row index grows with y
  .json  {format, rows, cols, grid {nx, ny, pitch, cx, cy}, metadata?}; metadata holds
         sound_speed, cutoff, kernel, geometry_hash, normalization_factor, coverage_warnings
         and is present for reconstructions only
  .pgm   16-bit binary graymap quick-look, value range mapped to 0..65535, top row = max y

profile_<k>.csv      position_m,value along metrics.cut_lines[k]
noise_histogram.csv  phase_mrad,count
report.txt           key=value per line; lists comma-separated; absent optional keys omitted
manifest.json        config_hash, tool_version, seed, stages [{name, inputs, outputs
                     (file -> sha256 hex), wall_seconds}], warnings
config (.toml)       see the crate documentation of `sdoat::config`
";
