//! File formats: byte-level round trips and the seed-7 regression fixture.

use std::path::{Path, PathBuf};

use ndarray::Array2;
use proptest::prelude::*;
use sdoat::acoustics::{ScanGeometry, Sinogram, Stage};
use sdoat::config::ScenarioConfig;
use sdoat::io::{decode_sinogram, encode_sinogram, format_report, parse_report, sha256_hex, write_image};
use sdoat::metrics::MetricsReport;
use sdoat::pipeline;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn small() -> ScenarioConfig {
    ScenarioConfig::load(&fixture("small.toml")).unwrap()
}

/// Reconstruction of `seed7.sdsg` with the small scenario, as written to `image.f64`.
const GOLDEN_IMAGE: &str = "3b80f420033ce13f80dc6638c218ea69ff10fbb105fa4e6e24b464cbb2e4b19a";

#[test]
fn simulation_reproduces_the_fixture_sinogram() {
    let (_, phase) = pipeline::simulate(&small()).unwrap();
    let expected = std::fs::read(fixture("seed7.sdsg")).unwrap();
    assert!(encode_sinogram(&phase) == expected, "sinogram differs from the fixture");
}

#[test]
fn fixture_sinogram_reconstructs_to_the_golden_image() {
    let cfg = small();
    let bytes = std::fs::read(fixture("seed7.sdsg")).unwrap();
    let phase = decode_sinogram(&bytes).unwrap();
    let img = pipeline::reconstruct(&cfg, &phase).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let files = write_image(&dir.path().join("image"), &img).unwrap();
    let raw = std::fs::read(files.raw).unwrap();
    assert_eq!(sha256_hex(&raw), GOLDEN_IMAGE);
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![-1e6f64..1e6, -1e-6f64..1e-6, Just(0.0), Just(-0.0)]
}

prop_compose! {
    fn sinogram()(rows in 1usize..6, cols in 2usize..40, t_start in 0.0f64..1e-4,
                  rate in 1e6f64..1e9, c in 1400.0f64..1600.0, phase in any::<bool>())
                 (data in prop::collection::vec(finite(), rows * cols),
                  rows in Just(rows), cols in Just(cols), t_start in Just(t_start),
                  rate in Just(rate), c in Just(c), phase in Just(phase),
                  note in "[ -~]{0,20}") -> Sinogram {
        let geo = ScanGeometry::new(13e-3, ScanGeometry::full_circle(rows), t_start, 1.0 / rate, cols).unwrap();
        let stage = if phase { Stage::Phase } else { Stage::LinePressure };
        Sinogram::new(geo, stage, Array2::from_shape_vec((rows, cols), data).unwrap(), c, note).unwrap()
    }
}

fn opt() -> impl Strategy<Value = Option<f64>> {
    prop::option::of(finite())
}

prop_compose! {
    fn report()(sensitivity in finite(), floors in (opt(), opt(), opt(), opt()),
                r_bw in finite(), fx in prop::collection::vec(finite(), 0..4),
                fy in prop::collection::vec(finite(), 0..4), tx in prop::collection::vec(finite(), 0..3),
                ty in prop::collection::vec(finite(), 0..3), skipped in 0usize..10,
                broad in (opt(), opt()), bandwidth in finite(), c in finite(),
                slope in opt(), lost in prop::option::of(any::<bool>())) -> MetricsReport {
        MetricsReport {
            sensitivity,
            noise_floor: floors.0,
            noise_mean: floors.1,
            nep: floors.2,
            nep_density: floors.3,
            r_bw,
            fwhm_x: fx,
            fwhm_y: fy,
            truth_fwhm_x: tx,
            truth_fwhm_y: ty,
            fwhm_skipped: skipped,
            broadening_x: broad.0,
            broadening_y: broad.1,
            bandwidth_used: bandwidth,
            sound_speed_used: c,
            coherence_slope: slope,
            coherence_lost: lost,
        }
    }
}

proptest! {
    #[test]
    fn sinogram_bytes_round_trip(s in sinogram()) {
        let bytes = encode_sinogram(&s);
        let back = decode_sinogram(&bytes).unwrap();
        prop_assert_eq!(encode_sinogram(&back), bytes);
        let bits = |a: &Array2<f64>| a.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        prop_assert_eq!(bits(back.data()), bits(s.data()));
        prop_assert_eq!(back.geometry(), s.geometry());
        prop_assert_eq!(back.stage(), s.stage());
    }

    #[test]
    fn truncated_sinogram_is_rejected(s in sinogram(), cut in 1usize..64) {
        let bytes = encode_sinogram(&s);
        let keep = bytes.len().saturating_sub(cut);
        prop_assert!(decode_sinogram(&bytes[..keep]).is_err());
    }

    #[test]
    fn report_text_round_trip(r in report()) {
        let text = format_report(&r);
        let back = parse_report(&text).unwrap();
        prop_assert_eq!(format_report(&back), text);
    }
}
