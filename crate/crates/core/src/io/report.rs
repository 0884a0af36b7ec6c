//! Metrics reports as flat `key=value` text, one entry per line. Lists are
//! comma-separated; absent optional entries are omitted.

use std::path::Path;

use super::read_bytes;
use crate::error::{Error, Result};
use crate::metrics::MetricsReport;

fn list(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

pub fn format_report(r: &MetricsReport) -> String {
    let mut lines = vec![format!("sensitivity_mrad_per_pa={}", r.sensitivity)];
    let mut opt = |key: &str, v: Option<f64>| {
        if let Some(v) = v {
            lines.push(format!("{key}={v}"));
        }
    };
    opt("noise_floor_mrad", r.noise_floor);
    opt("noise_mean_mrad", r.noise_mean);
    opt("nep_pa", r.nep);
    opt("nep_density_mpa_per_rthz", r.nep_density);
    lines.push(format!("r_bw_m={}", r.r_bw));
    lines.push(format!("fwhm_x_m={}", list(&r.fwhm_x)));
    lines.push(format!("fwhm_y_m={}", list(&r.fwhm_y)));
    lines.push(format!("truth_fwhm_x_m={}", list(&r.truth_fwhm_x)));
    lines.push(format!("truth_fwhm_y_m={}", list(&r.truth_fwhm_y)));
    lines.push(format!("fwhm_skipped={}", r.fwhm_skipped));
    for (key, v) in [("broadening_x_m", r.broadening_x), ("broadening_y_m", r.broadening_y)] {
        if let Some(v) = v {
            lines.push(format!("{key}={v}"));
        }
    }
    lines.push(format!("bandwidth_used_hz={}", r.bandwidth_used));
    lines.push(format!("sound_speed_used_m_per_s={}", r.sound_speed_used));
    if let Some(v) = r.coherence_slope {
        lines.push(format!("coherence_slope_rad_per_s={v}"));
    }
    if let Some(v) = r.coherence_lost {
        lines.push(format!("coherence_lost={v}"));
    }
    let mut out = lines.join("\n");
    out.push('\n');
    out
}

pub fn parse_report(text: &str) -> Result<MetricsReport> {
    let mut r = MetricsReport::default();
    let (mut have_sens, mut have_rbw) = (false, false);
    let mut offset = 0usize;
    for line in text.split_inclusive('\n') {
        let at = offset;
        offset += line.len();
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |m: String| Error::parse("report", at as u64, m);
        let (key, value) = line.split_once('=').ok_or_else(|| err(format!("no '=' in {line:?}")))?;
        let num = |v: &str| v.parse::<f64>().map_err(|_| err(format!("{key}: bad number {v:?}")));
        let nums = |v: &str| -> Result<Vec<f64>> {
            if v.is_empty() {
                Ok(Vec::new())
            } else {
                v.split(',').map(num).collect()
            }
        };
        match key {
            "sensitivity_mrad_per_pa" => {
                r.sensitivity = num(value)?;
                have_sens = true;
            }
            "noise_floor_mrad" => r.noise_floor = Some(num(value)?),
            "noise_mean_mrad" => r.noise_mean = Some(num(value)?),
            "nep_pa" => r.nep = Some(num(value)?),
            "nep_density_mpa_per_rthz" => r.nep_density = Some(num(value)?),
            "r_bw_m" => {
                r.r_bw = num(value)?;
                have_rbw = true;
            }
            "fwhm_x_m" => r.fwhm_x = nums(value)?,
            "fwhm_y_m" => r.fwhm_y = nums(value)?,
            "truth_fwhm_x_m" => r.truth_fwhm_x = nums(value)?,
            "truth_fwhm_y_m" => r.truth_fwhm_y = nums(value)?,
            "fwhm_skipped" => {
                r.fwhm_skipped = value.parse().map_err(|_| err(format!("{key}: bad count {value:?}")))?
            }
            "broadening_x_m" => r.broadening_x = Some(num(value)?),
            "broadening_y_m" => r.broadening_y = Some(num(value)?),
            "bandwidth_used_hz" => r.bandwidth_used = num(value)?,
            "sound_speed_used_m_per_s" => r.sound_speed_used = num(value)?,
            "coherence_slope_rad_per_s" => r.coherence_slope = Some(num(value)?),
            "coherence_lost" => {
                r.coherence_lost = Some(value.parse().map_err(|_| err(format!("{key}: expected true or false")))?)
            }
            _ => return Err(err(format!("unknown key {key:?}"))),
        }
    }
    if !(have_sens && have_rbw) {
        return Err(Error::parse("report", offset as u64, "missing sensitivity or r_bw"));
    }
    Ok(r)
}

pub fn read_report(path: &Path) -> Result<MetricsReport> {
    let bytes = read_bytes(path)?;
    let text = String::from_utf8(bytes)
        .map_err(|e| Error::parse("report", e.utf8_error().valid_up_to() as u64, "not UTF-8"))?;
    parse_report(&text)
}
