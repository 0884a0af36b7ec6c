use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sdoat::config::ScenarioConfig;
use sdoat::pipeline::{self, Outcome};
use sdoat::Error;

#[derive(Parser)]
#[command(name = "sdoat", version, about = "Software-defined optoacoustic tomography simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; defaults to one per core.
    #[arg(long)]
    threads: Option<usize>,
    /// Overrides the config's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Phantom -> phase sinogram, plus the phantom-free noise records.
    Simulate(Common),
    /// Phase sinogram -> image and cut-line profiles.
    Reconstruct {
        #[command(flatten)]
        common: Common,
        /// Defaults to sinogram.sdsg in the output directory.
        #[arg(long)]
        sinogram: Option<PathBuf>,
    },
    /// Image (+ truth, + noise records) -> report; exits 4 when a gate fails.
    Metrics {
        #[command(flatten)]
        common: Common,
        /// Defaults to the image in the output directory.
        #[arg(long)]
        image: Option<PathBuf>,
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long)]
        noise: Option<PathBuf>,
    },
    /// simulate, reconstruct and metrics; skipped when already up to date.
    Pipeline(Common),
    /// Checks a scenario file without computing anything.
    ValidateConfig(Common),
    /// Prints the file format specifications.
    Formats,
}

fn load(c: &Common) -> Result<ScenarioConfig, Error> {
    if let Some(n) = c.threads {
        if n == 0 {
            return Err(Error::invalid("--threads", "must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::compute("thread pool", e.to_string()))?;
    }
    let mut cfg = ScenarioConfig::load(&c.config)?;
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(o) = &c.out {
        cfg.output_dir = o.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Uses the explicit path, else the default file in the output directory if it exists.
fn input(explicit: &Option<PathBuf>, cfg: &ScenarioConfig, default: &str, probe_ext: &str) -> Option<PathBuf> {
    explicit.clone().or_else(|| {
        let p = cfg.output_dir.join(default);
        let probe = if probe_ext.is_empty() { p.clone() } else { p.with_extension(probe_ext) };
        probe.is_file().then_some(p)
    })
}

fn run(cli: Cli) -> Result<(), Error> {
    let outcome = match &cli.command {
        Command::Formats => {
            print!("{}", pipeline::FORMATS);
            return Ok(());
        }
        Command::ValidateConfig(c) => {
            let cfg = load(c)?;
            let g = cfg.geometry()?;
            println!(
                "ok: {} angles x {} samples, grid {} x {}, seed {}",
                g.n_angles(),
                g.n_samples,
                cfg.grid.nx,
                cfg.grid.ny,
                cfg.seed
            );
            return Ok(());
        }
        Command::Simulate(c) => pipeline::cmd_simulate(&load(c)?)?,
        Command::Reconstruct { common, sinogram } => {
            let cfg = load(common)?;
            let s = sinogram.clone().unwrap_or_else(|| cfg.output_dir.join(pipeline::SINOGRAM_FILE));
            pipeline::cmd_reconstruct(&cfg, &s)?
        }
        Command::Metrics { common, image, truth, noise } => {
            let cfg = load(common)?;
            let image = image.clone().unwrap_or_else(|| cfg.output_dir.join(pipeline::IMAGE_STEM));
            let truth = input(truth, &cfg, pipeline::TRUTH_STEM, "f64");
            let noise = input(noise, &cfg, pipeline::NOISE_FILE, "");
            pipeline::cmd_metrics(&cfg, &image, truth.as_deref(), noise.as_deref())?
        }
        Command::Pipeline(c) => pipeline::cmd_pipeline(&load(c)?)?,
    };
    match outcome {
        Outcome::UpToDate => println!("up-to-date"),
        Outcome::Written(files) => {
            for f in files {
                println!("wrote {}", f.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
