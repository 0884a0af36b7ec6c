//! Forward acoustics for a rotating integrating line detector.
//!
//! With the line detector perpendicular to the image plane the problem is the
//! 2-D wave equation with a point receiver. For initial pressure `p0` and a
//! detector at `d`, the recorded signal is
//!
//! ```text
//! g(t) = (1/c) d/dt F(t),   F(t) = integral_0^{ct} rho M(rho) / sqrt(c^2 t^2 - rho^2) d rho
//! ```
//!
//! where `M(rho)` is the mean of `p0` over the circle of radius `rho` about `d`.
//! `F` is evaluated after substituting `rho = ct sin(theta)`, which removes the
//! endpoint singularity, and the time derivative is a central difference of
//! `F` taken half a sample either side of each output sample, so every output
//! is the mean of `g` over its own sample interval.

mod forward;
mod geometry;
mod sound_speed;

pub use forward::{
    circular_means, forward_line_signal, forward_line_signal_with, forward_sinogram,
    forward_sinogram_with, ForwardQuadrature, FORWARD_SCALE,
};
pub use geometry::{ScanGeometry, Sinogram, Stage};
pub use sound_speed::{sound_speed, WaterState};
