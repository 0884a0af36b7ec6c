//! The characterization report of a small scenario, as `metrics` writes it.
//!
//! ```text
//! cargo run --release --example metrics_report
//! ```

use std::path::Path;

use sdoat::config::ScenarioConfig;
use sdoat::io::format_report;
use sdoat::pipeline;

fn main() -> sdoat::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let cfg = ScenarioConfig::load(&dir.join("tests/fixtures/small.toml"))?;
    let (truth, phase) = pipeline::simulate(&cfg)?;
    let image = pipeline::reconstruct(&cfg, &phase)?;
    let noise = pipeline::noise_run(&cfg)?;
    let report = pipeline::measure(&cfg, &image, Some(&truth), Some(&noise))?;
    print!("{}", format_report(&report));
    for v in pipeline::gate_violations(&cfg.metrics.gate, &report) {
        println!("gate: {v}");
    }
    Ok(())
}
