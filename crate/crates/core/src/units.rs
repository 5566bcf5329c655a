//! Unit helpers. Everything inside the crate is SI: seconds for times and
//! rad/s for angular frequencies. Boundary code (files, CLI) speaks ns, ps and
//! ordinary-frequency MHz and converts through these functions.

use std::f64::consts::PI;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub fn ns(value: f64) -> f64 {
    value * 1e-9
}

pub fn ps(value: f64) -> f64 {
    value * 1e-12
}

pub fn to_ns(seconds: f64) -> f64 {
    seconds * 1e9
}

pub fn to_ps(seconds: f64) -> f64 {
    seconds * 1e12
}

/// Ordinary frequency in MHz to angular frequency in rad/s.
pub fn mhz_to_angular(mhz: f64) -> f64 {
    2.0 * PI * mhz * 1e6
}

/// Angular frequency in rad/s to ordinary frequency in MHz.
pub fn angular_to_mhz(omega: f64) -> f64 {
    omega / (2.0 * PI * 1e6)
}

/// Angular free spectral range for a round-trip time.
pub fn fsr_from_round_trip(tau_f: f64) -> f64 {
    2.0 * PI / tau_f
}
