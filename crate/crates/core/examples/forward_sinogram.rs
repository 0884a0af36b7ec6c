//! Line-detector signals of a small disk: the bipolar N-shaped pulse arrives
//! at the time of flight and moves with the detector angle.
//!
//! ```text
//! cargo run --release --example forward_sinogram -- [out_dir]
//! ```

use std::path::PathBuf;

use sdoat::acoustics::{forward_sinogram, ScanGeometry};
use sdoat::io::write_sinogram;
use sdoat::phantom::{rasterize, Grid2D, Shape, ShapeSpec};

fn main() -> sdoat::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("sdoat-forward"));
    let c = 1480.0;
    let grid = Grid2D::new(161, 161, 50e-6)?;
    let disk = ShapeSpec::new(Shape::Disk { center: [2e-3, 0.0], radius: 0.3e-3 }, 1000.0);
    let field = rasterize(&[disk], &grid)?;
    let geometry = ScanGeometry::covering(13e-3, 36, 60e6, grid.max_radius(), c)?;
    let s = forward_sinogram(&field, &geometry, c)?;

    for i in (0..36).step_by(6) {
        let row = s.row_trace(i);
        let (k, peak) = row.values.iter().enumerate().fold((0, 0.0f64), |b, (k, &v)| if v > b.1 { (k, v) } else { b });
        let d = geometry.detector_position(i);
        let first = ((d[0] - 2e-3).hypot(d[1]) - 0.3e-3) / c;
        println!(
            "angle {:5.1} deg: peak {peak:.3e} Pa m at {:.3} us, near edge arrives at {:.3} us",
            geometry.angles[i].to_degrees(),
            row.time(k) * 1e6,
            first * 1e6
        );
    }
    write_sinogram(&out.join("line_pressure.sdsg"), &s)?;
    println!("wrote {}", out.join("line_pressure.sdsg").display());
    Ok(())
}
