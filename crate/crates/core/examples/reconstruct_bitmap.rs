//! Letters from a grayscale bitmap, driven by a scenario file: the same path
//! the command-line tool takes, minus the files.
//!
//! ```text
//! cargo run --release --example reconstruct_bitmap -- [out_dir]
//! ```

use std::path::{Path, PathBuf};

use sdoat::config::ScenarioConfig;
use sdoat::io::{write_field, write_image};
use sdoat::pipeline;

const SCENARIO: &str = r#"
seed = 3

[phantom.bitmap]
path = "tests/fixtures/ob.pgm"
width = 4e-3
amplitude = 1000.0
"#;

fn main() -> sdoat::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("sdoat-bitmap"));
    let cfg = ScenarioConfig::from_toml(SCENARIO, Path::new(env!("CARGO_MANIFEST_DIR")))?;
    let (truth, phase) = pipeline::simulate(&cfg)?;
    let img = pipeline::reconstruct(&cfg, &phase)?;
    write_field(&out.join("truth"), &truth)?;
    let files = write_image(&out.join("image"), &img)?;
    println!(
        "{} angles, {} samples per trace; normalized by {:.3e}",
        phase.n_angles(),
        phase.geometry().n_samples,
        img.metadata.normalization_factor
    );
    println!("wrote {} and the truth next to it", files.quicklook.display());
    Ok(())
}
