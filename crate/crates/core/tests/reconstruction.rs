mod common;

use common::{bilinear, disk, rel_l2};
use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sdoat::acoustics::{forward_sinogram, ScanGeometry, Sinogram, Stage};
use sdoat::chain::{acquire, AcquisitionConfig};
use sdoat::metrics::{fwhm, profile, CutLine};
use sdoat::optics::NoiseModel;
use sdoat::phantom::{rasterize, Grid2D, Shape, ShapeSpec};
use sdoat::reconstruction::{denoise, reconstruct_pipeline, ReconConfig, ReconImage};

const C: f64 = 1480.0;
/// One pixel, with room for the rounding in pixel-centre coordinates.
const PIXEL: f64 = 1.0 + 1e-9;

fn grid() -> Grid2D {
    Grid2D::new(241, 241, 50e-6).unwrap()
}

fn scan(grid: &Grid2D, n_angles: usize) -> ScanGeometry {
    ScanGeometry::covering(13e-3, n_angles, 60e6, grid.max_radius(), C).unwrap()
}

fn phase_sinogram(specs: &[ShapeSpec], grid: &Grid2D, cfg: &AcquisitionConfig) -> Sinogram {
    let field = rasterize(specs, grid).unwrap();
    let lp = forward_sinogram(&field, &scan(grid, 360), C).unwrap();
    acquire(&lp, cfg).unwrap()
}

fn quiet() -> AcquisitionConfig {
    AcquisitionConfig {
        noise: NoiseModel::off(),
        ..AcquisitionConfig::default()
    }
}

fn image(specs: &[ShapeSpec], grid: &Grid2D) -> ReconImage {
    let s = phase_sinogram(specs, grid, &quiet());
    reconstruct_pipeline(&s, &quiet().optics, grid, &ReconConfig::default()).unwrap()
}

/// Pixel of the largest value within `radius` of `(x, y)`.
fn local_peak(img: &ReconImage, x: f64, y: f64, radius: f64) -> (f64, f64) {
    let g = &img.grid;
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for iy in 0..g.ny {
        for ix in 0..g.nx {
            let (px, py) = (g.x(ix), g.y(iy));
            if (px - x).hypot(py - y) <= radius && img.values[[iy, ix]] > best.0 {
                best = (img.values[[iy, ix]], px, py);
            }
        }
    }
    (best.1, best.2)
}

#[test]
fn off_axis_disk_peaks_in_place() {
    let g = grid();
    let img = image(&[disk(2e-3, 0.0, 150e-6, 1.0)], &g);
    let (x, y) = local_peak(&img, 0.0, 0.0, 1.0);
    assert!((x - 2e-3).abs() <= PIXEL * g.pitch && y.abs() <= PIXEL * g.pitch, "peak at ({x}, {y})");
}

#[test]
fn disks_three_millimetres_apart_are_resolved() {
    let g = grid();
    let img = image(&[disk(-1.5e-3, 0.0, 200e-6, 1.0), disk(1.5e-3, 0.0, 200e-6, 1.0)], &g);
    let p = profile(&img.values, &g, CutLine::Horizontal { y: 0.0 }).unwrap();
    let at = |x: f64| g.column_of(x).unwrap();
    let left = p[at(-1.6e-3)..=at(-1.4e-3)].iter().cloned().fold(f64::MIN, f64::max);
    let right = p[at(1.4e-3)..=at(1.6e-3)].iter().cloned().fold(f64::MIN, f64::max);
    let valley = p[at(-1.0e-3)..=at(1.0e-3)].iter().cloned().fold(f64::MAX, f64::min);
    assert!(valley <= 0.5 * left.min(right), "valley {valley}, peaks {left} {right}");
    let w = fwhm(&p, g.pitch).unwrap();
    assert_eq!(w.widths.len(), 2, "{w:?}");
}

#[test]
fn centered_disk_image_is_rotationally_symmetric() {
    let g = grid();
    let img = image(&[disk(0.0, 0.0, 1e-3, 1.0)], &g);
    let peak = img.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for k in 0..=30 {
        let r = k as f64 * 0.1e-3;
        let ring: Vec<f64> = (0..72)
            .map(|a| {
                let th = a as f64 * std::f64::consts::TAU / 72.0;
                bilinear(&img.values, &g, r * th.cos(), r * th.sin())
            })
            .collect();
        let m = ring.iter().sum::<f64>() / 72.0;
        let sd = (ring.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / 72.0).sqrt();
        assert!(sd <= 0.02 * peak, "r = {r}: sd {sd}");
    }
}

#[test]
fn dropping_one_angle_barely_changes_the_image() {
    let g = grid();
    let s = phase_sinogram(&[disk(1e-3, -0.5e-3, 300e-6, 1.0), disk(-2e-3, 1e-3, 200e-6, 0.5)], &g, &quiet());
    let keep: Vec<usize> = (0..360).filter(|&i| i != 123).collect();
    let fewer = s.select_angles(&keep).unwrap();
    let o = quiet().optics;
    let full = reconstruct_pipeline(&s, &o, &g, &ReconConfig::default()).unwrap();
    let part = reconstruct_pipeline(&fewer, &o, &g, &ReconConfig::default()).unwrap();
    let e = rel_l2(part.values.as_slice().unwrap(), full.values.as_slice().unwrap());
    // the uncancelled arc of the missing row dominates; about 1.5-2.5% with the derivative kernel
    assert!(e < 0.03, "{e}");
}

#[test]
fn quarter_turn_of_phantom_turns_the_image() {
    let g = grid();
    let specs = [
        ShapeSpec::new(Shape::Ellipse { center: [1.5e-3, 0.5e-3], width: 3e-3, height: 1e-3 }, 1.0),
        disk(-2e-3, -2e-3, 300e-6, 0.7),
    ];
    let turned: Vec<ShapeSpec> = specs
        .iter()
        .map(|s| ShapeSpec::new(s.shape.rotated_quarter_turn(), s.amplitude))
        .collect();
    let a = image(&specs, &g);
    let b = image(&turned, &g);
    let n = g.nx;
    let a_turned = Array2::from_shape_fn((n, n), |(iy, ix)| a.values[[n - 1 - ix, iy]]);
    let e = rel_l2(b.values.as_slice().unwrap(), a_turned.as_slice().unwrap());
    assert!(e < 0.01, "{e}");
}

#[test]
fn point_spread_width_does_not_depend_on_source_angle() {
    let g = grid();
    let mut widths = Vec::new();
    for deg in [0.0f64, 30.0, 45.0, 110.0] {
        let (s, c) = deg.to_radians().sin_cos();
        // snap to a pixel centre so both cut lines pass through the source
        let snap = |v: f64| (v / g.pitch).round() * g.pitch;
        let (x, y) = (snap(3e-3 * c), snap(3e-3 * s));
        let img = image(&[disk(x, y, 60e-6, 1.0)], &g);
        for line in [CutLine::Horizontal { y }, CutLine::Vertical { x }] {
            let p = profile(&img.values, &g, line).unwrap();
            let w = fwhm(&p, g.pitch).unwrap();
            assert_eq!(w.widths.len(), 1, "{deg} deg {line:?}: {w:?}");
            widths.push(w.widths[0]);
        }
    }
    let lo = widths.iter().cloned().fold(f64::MAX, f64::min);
    let hi = widths.iter().cloned().fold(f64::MIN, f64::max);
    assert!(hi / lo - 1.0 < 0.10, "{widths:?}");
}

#[test]
fn point_sources_within_four_millimetres_land_within_a_pixel() {
    let g = grid();
    // the derivative kernel pushes peaks outward by about 0.3 px per mm of
    // radius, so the pixel criterion holds out to 4 mm
    let spots = [(4.0e-3, 0.0), (-3.0e-3, 2.5e-3), (0.0, -4.0e-3), (2.5e-3, 3.0e-3), (-2.0e-3, -2.5e-3), (0.0, 0.0)];
    let specs: Vec<ShapeSpec> = spots.iter().map(|&(x, y)| disk(x, y, 60e-6, 1.0)).collect();
    let img = image(&specs, &g);
    for (x, y) in spots {
        let (px, py) = local_peak(&img, x, y, 1e-3);
        assert!(
            (px - x).abs() <= PIXEL * g.pitch && (py - y).abs() <= PIXEL * g.pitch,
            "source ({x}, {y}) imaged at ({px}, {py})"
        );
    }
}

#[test]
fn denoising_white_noise_keeps_the_passband_share_of_variance() {
    let geo = ScanGeometry::new(13e-3, vec![0.0, 1.0], 0.0, 1.0 / 60e6, 100_000).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let data = Array2::from_shape_fn((2, 100_000), |_| StandardNormal.sample(&mut rng));
    let s = Sinogram::new(geo, Stage::Phase, data, C, "").unwrap();
    let out = denoise(&s, 2e6, 255).unwrap();
    let v: Vec<f64> = out.data().iter().cloned().collect();
    let var = v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64;
    let expected = 2.0 * 2e6 / 60e6;
    assert!((var / expected - 1.0).abs() < 0.10, "{var} vs {expected}");
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let g = Grid2D::new(121, 121, 100e-6).unwrap();
    let cfg = AcquisitionConfig {
        noise: NoiseModel { rng_seed: 5, amplitude_noise_std: 0.01, rf_noise_std: 0.01, ..NoiseModel::default() },
        ..AcquisitionConfig::default()
    };
    let field = rasterize(&[disk(1e-3, 1e-3, 400e-6, 1000.0)], &g).unwrap();
    let geo = ScanGeometry::covering(13e-3, 90, 60e6, g.max_radius(), C).unwrap();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let lp = forward_sinogram(&field, &geo, C).unwrap();
            let ph = acquire(&lp, &cfg).unwrap();
            let img = reconstruct_pipeline(&ph, &cfg.optics, &g, &ReconConfig::default()).unwrap();
            (ph.data().clone(), img.values)
        })
    };
    let (s1, i1) = run(1);
    let (s4, i4) = run(4);
    let bits = |a: &Array2<f64>| a.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&s1), bits(&s4));
    assert_eq!(bits(&i1), bits(&i4));
}
