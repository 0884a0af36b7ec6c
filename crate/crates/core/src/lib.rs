//! Simulation and signal processing for software-defined optoacoustic tomography
//! with a rotating integrating line detector read out by a heterodyne
//! interferometer and a software-defined radio receiver.

pub mod acoustics;
pub mod chain;
pub mod config;
pub mod dsp;
pub mod error;
pub mod io;
pub mod metrics;
pub mod optics;
pub mod phantom;
pub mod pipeline;
pub mod receiver;
pub mod reconstruction;
pub mod signal;

pub use error::{Error, Result};
