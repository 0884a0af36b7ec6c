//! End-to-end image of a point-like source and a 1 mm disk: forward model,
//! noisy acquisition, back-projection, then cut-line widths.
//!
//! ```text
//! cargo run --release --example reconstruct_disk -- [out_dir]
//! ```

use std::path::PathBuf;

use sdoat::acoustics::{forward_sinogram, ScanGeometry};
use sdoat::chain::{acquire, AcquisitionConfig};
use sdoat::io::write_image;
use sdoat::metrics::{fwhm, profile, resolution_bound, CutLine};
use sdoat::phantom::{rasterize, Grid2D, Shape, ShapeSpec};
use sdoat::reconstruction::{reconstruct_pipeline, ReconConfig};

fn main() -> sdoat::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("sdoat-disk"));
    let c = 1480.0;
    let grid = Grid2D::new(241, 241, 50e-6)?;
    let specs = [
        ShapeSpec::new(Shape::Disk { center: [-2e-3, 0.0], radius: 50e-6 }, 2e4),
        ShapeSpec::new(Shape::Disk { center: [2e-3, 0.0], radius: 0.5e-3 }, 1000.0),
    ];
    let field = rasterize(&specs, &grid)?;
    let geometry = ScanGeometry::covering(13e-3, 360, 60e6, grid.max_radius(), c)?;
    let cfg = AcquisitionConfig::default();
    let phase = acquire(&forward_sinogram(&field, &geometry, c)?, &cfg)?;
    let img = reconstruct_pipeline(&phase, &cfg.optics, &grid, &ReconConfig::default())?;

    let p = profile(&img.values, &grid, CutLine::Horizontal { y: 0.0 })?;
    let w = fwhm(&p, grid.pitch)?;
    for (x, width) in w.positions.iter().zip(&w.widths) {
        println!("peak at x = {:+.2} mm, FWHM {:.0} um", (grid.x(0) + x) * 1e3, width * 1e6);
    }
    println!("bandwidth bound 0.8 c / BW = {:.0} um", resolution_bound(c, 2e6)? * 1e6);
    let files = write_image(&out.join("image"), &img)?;
    println!("wrote {}", files.quicklook.display());
    Ok(())
}
