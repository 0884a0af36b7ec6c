//! Phantom-free single-shot records: noise floor, histogram and the
//! noise-equivalent pressure that follows from the sensitivity.
//!
//! ```text
//! cargo run --release --example noise_floor -- [records]
//! ```

use sdoat::chain::{acquire_noise, AcquisitionConfig};
use sdoat::acoustics::ScanGeometry;
use sdoat::metrics::{nep_and_density, noise_floor, sensitivity_first_principles};

fn main() -> sdoat::Result<()> {
    let records: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(200);
    let cfg = AcquisitionConfig { shots_per_angle: 1, ..AcquisitionConfig::default() };
    let geometry = ScanGeometry::new(13e-3, ScanGeometry::full_circle(records), 0.0, 1.0 / 60e6, 1100)?;
    let s = acquire_noise(&geometry, 1480.0, &cfg)?;
    let samples: Vec<f64> = s.data().iter().cloned().collect();
    let nf = noise_floor(&samples)?;

    println!("{} samples: std {:.4} mrad, mean {:+.5} mrad", nf.samples, nf.std_mrad, nf.mean_mrad);
    let peak = *nf.histogram.counts.iter().max().unwrap_or(&1) as f64;
    for (x, &n) in nf.histogram.centers().iter().zip(&nf.histogram.counts).step_by(4) {
        println!("{:+7.3} mrad {}", x, "#".repeat((60.0 * n as f64 / peak) as usize));
    }
    let sens = sensitivity_first_principles(&cfg.optics, 0.2)?;
    let nep = nep_and_density(nf.std_mrad, sens, 2e6)?;
    println!("sensitivity {sens:.3} mrad/Pa -> NEP {:.2} Pa, {:.3} mPa/rtHz over 2 MHz", nep.nep, nep.density);
    Ok(())
}
