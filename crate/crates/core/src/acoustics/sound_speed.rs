use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bath temperature in degrees Celsius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaterState {
    pub temperature: f64,
}

// Pure water, T in degrees C, valid on [0, 95].
const COEFFS: [f64; 6] = [
    1402.385,
    5.038813,
    -5.799136e-2,
    3.287156e-4,
    -1.398845e-6,
    2.787860e-9,
];

/// Speed of sound in pure water from the fifth-order temperature polynomial.
pub fn sound_speed(water: &WaterState) -> Result<f64> {
    let t = water.temperature;
    if !(0.0..=95.0).contains(&t) {
        return Err(Error::invalid(
            "water.temperature",
            format!("{t} degC is outside the valid interval [0, 95] degC"),
        ));
    }
    Ok(COEFFS.iter().rev().fold(0.0, |acc, &c| acc * t + c))
}
