//! Rasterizes a few primitives onto the default 20 mm grid and writes the
//! truth image (raw f64, JSON sidecar and a PGM quicklook).
//!
//! ```text
//! cargo run --release --example phantom_shapes -- [out_dir]
//! ```

use std::path::PathBuf;

use sdoat::io::write_field;
use sdoat::phantom::{field_statistics, rasterize, Grid2D, Shape, ShapeSpec};

fn main() -> sdoat::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("sdoat-phantom"));
    let grid = Grid2D::default_scan();
    let specs = [
        ShapeSpec::new(Shape::Ellipse { center: [0.0, 0.0], width: 3e-3, height: 4e-3 }, 1000.0),
        ShapeSpec::new(Shape::Disk { center: [4e-3, 3e-3], radius: 0.5e-3 }, 800.0),
        ShapeSpec::new(Shape::Rectangle { center: [-4e-3, -3e-3], width: 2e-3, height: 1e-3 }, 600.0),
        ShapeSpec::new(Shape::Annulus { center: [-4e-3, 4e-3], inner_radius: 0.6e-3, outer_radius: 1.0e-3 }, 400.0),
    ];
    let field = rasterize(&specs, &grid)?;
    let stats = field_statistics(&field);
    println!("grid {} x {} at {} um", grid.nx, grid.ny, grid.pitch * 1e6);
    println!("{stats:?}");
    let files = write_field(&out.join("phantom"), &field)?;
    println!("wrote {}", files.quicklook.display());
    Ok(())
}
