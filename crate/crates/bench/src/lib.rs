//! Shared fixtures for the criterion benches.

use mhtc_core::channel::{rayleigh_coeffs, FadingSpec};
use mhtc_core::NetworkConfig;

/// The simulation scenario used throughout: R = 4, α = 3, β = 1, Rayleigh.
pub fn scenario(lambda: f64, gamma: f64, m: usize, d_max: Option<f64>) -> NetworkConfig {
    let hop = rayleigh_coeffs(FadingSpec::new(3.0, 1.0)).expect("valid fading spec");
    NetworkConfig::new(lambda, gamma, 4.0, m, d_max, hop)
}
