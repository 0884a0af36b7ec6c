//! simulate, reconstruct and metrics into one output directory, with the run
//! manifest; a second call finds everything up to date.
//!
//! ```text
//! cargo run --release --example full_pipeline -- [out_dir]
//! ```

use std::path::{Path, PathBuf};

use sdoat::config::ScenarioConfig;
use sdoat::pipeline::{self, Outcome};

fn main() -> sdoat::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("sdoat-pipeline"));
    let mut cfg = ScenarioConfig::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/small.toml"))?;
    cfg.output_dir = out;
    for attempt in 1..=2 {
        match pipeline::cmd_pipeline(&cfg)? {
            Outcome::UpToDate => println!("run {attempt}: up to date"),
            Outcome::Written(files) => println!("run {attempt}: wrote {} files", files.len()),
        }
    }
    let manifest = std::fs::read_to_string(cfg.output_dir.join(pipeline::MANIFEST_FILE)).map_err(|e| sdoat::Error::io(pipeline::MANIFEST_FILE, e))?;
    println!("{manifest}");
    Ok(())
}
