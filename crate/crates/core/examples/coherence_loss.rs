//! What a shared carrier buys: with the demodulator offset from the
//! modulator, every record picks up a phase ramp of 2 pi times the offset.
//!
//! ```text
//! cargo run --release --example coherence_loss
//! ```

use std::f64::consts::TAU;

use sdoat::acoustics::ScanGeometry;
use sdoat::chain::{acquire_noise, AcquisitionConfig};
use sdoat::metrics::phase_slope;
use sdoat::optics::NoiseModel;

fn main() -> sdoat::Result<()> {
    let geometry = ScanGeometry::new(13e-3, vec![0.0], 2e-6, 1.0 / 60e6, 1200)?;
    for offset in [0.0, 100.0, 1000.0, 10_000.0] {
        let cfg = AcquisitionConfig {
            noise: NoiseModel { carrier_offset: offset, ..NoiseModel::default() },
            shots_per_angle: 1,
            ..AcquisitionConfig::default()
        };
        let s = acquire_noise(&geometry, 1480.0, &cfg)?;
        let fit = phase_slope(&s.row_trace(0))?;
        println!(
            "offset {offset:>7.0} Hz: slope {:>10.1} rad/s (2 pi f = {:>8.1}), drift {:+.2e} rad, residual {:.2e} rad, lost: {}",
            fit.slope,
            TAU * offset,
            fit.drift,
            fit.residual_std,
            fit.coherence_lost()
        );
    }
    Ok(())
}
