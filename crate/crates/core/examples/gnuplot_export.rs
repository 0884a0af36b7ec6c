//! Reconstructed and true profiles through an ellipse as CSV, plus a gnuplot
//! script that plots them.
//!
//! ```text
//! cargo run --release --example gnuplot_export -- [out_dir]
//! gnuplot -p <out_dir>/profiles.gp
//! ```

use std::path::PathBuf;

use sdoat::acoustics::{forward_sinogram, ScanGeometry};
use sdoat::chain::{acquire, AcquisitionConfig};
use sdoat::io::{profile_csv, write_atomic};
use sdoat::metrics::{profile, CutLine};
use sdoat::phantom::{rasterize, Grid2D, Shape, ShapeSpec};
use sdoat::reconstruction::{reconstruct_pipeline, ReconConfig};

const SCRIPT: &str = "\
set datafile separator ','
set key autotitle columnhead
set xlabel 'x [mm]'
plot 'profile_x.csv' using ($1*1e3):2 with lines, '' using ($1*1e3):3 with lines
";

fn main() -> sdoat::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("sdoat-gnuplot"));
    let c = 1480.0;
    let grid = Grid2D::new(201, 201, 50e-6)?;
    let ellipse = ShapeSpec::new(Shape::Ellipse { center: [0.0, 0.0], width: 3e-3, height: 4e-3 }, 1000.0);
    let truth = rasterize(&[ellipse], &grid)?;
    let geometry = ScanGeometry::covering(13e-3, 180, 60e6, grid.max_radius(), c)?;
    let cfg = AcquisitionConfig::default();
    let phase = acquire(&forward_sinogram(&truth, &geometry, c)?, &cfg)?;
    let img = reconstruct_pipeline(&phase, &cfg.optics, &grid, &ReconConfig::default())?;

    let line = CutLine::Horizontal { y: 0.0 };
    let recon = profile(&img.values, &grid, line)?;
    let peak = truth.values().iter().cloned().fold(0.0, f64::max);
    let exact: Vec<f64> = profile(truth.values(), &grid, line)?.iter().map(|v| v / peak).collect();
    let xs: Vec<f64> = (0..grid.nx).map(|i| grid.x(i)).collect();
    let csv = profile_csv(&xs, &[("reconstruction", &recon), ("truth", &exact)]);
    write_atomic(&out.join("profile_x.csv"), csv.as_bytes())?;
    write_atomic(&out.join("profiles.gp"), SCRIPT.as_bytes())?;
    println!("wrote {} and profiles.gp", out.join("profile_x.csv").display());
    Ok(())
}
