//! Physical constants (CODATA 2018, SI) and the unit conversions used at the
//! crate's interfaces.
//!
//! Everything inside the crate is computed in SI with angular frequencies.
//! Public helpers that take or return ordinary frequencies, electronvolts or
//! micrometres say so in their names.

use std::f64::consts::PI;

/// Reduced Planck constant ħ (J·s)
pub const HBAR: f64 = 1.054_571_817e-34;

/// Vacuum permittivity ε₀ (F/m)
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;

/// Boltzmann constant (J/K)
pub const K_B: f64 = 1.380_649e-23;

/// Elementary charge (C)
pub const E_CHARGE: f64 = 1.602_176_634e-19;

/// Atomic mass unit (kg)
pub const AMU: f64 = 1.660_539_066_60e-27;

/// Electron mass (kg)
pub const M_ELECTRON: f64 = 9.109_383_701_5e-31;

/// Coulomb constant 1/(4πε₀) (N·m²/C²)
pub const COULOMB_K: f64 = 1.0 / (4.0 * PI * EPSILON_0);

/// Immutable bundle of the constants, for code that wants to pass them around
/// as a value rather than reach for the module-level items.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    pub hbar: f64,
    pub epsilon_0: f64,
    pub k_b: f64,
    pub e: f64,
    pub amu: f64,
}

impl Constants {
    pub const CODATA_2018: Constants = Constants {
        hbar: HBAR,
        epsilon_0: EPSILON_0,
        k_b: K_B,
        e: E_CHARGE,
        amu: AMU,
    };
}

impl Default for Constants {
    fn default() -> Self {
        Self::CODATA_2018
    }
}

// Unit conversions. Each is a single multiplication or division.

#[inline]
pub fn ev_to_joule(ev: f64) -> f64 {
    ev * E_CHARGE
}

#[inline]
pub fn joule_to_ev(j: f64) -> f64 {
    j / E_CHARGE
}

/// Ordinary frequency (Hz) to angular frequency (rad/s).
#[inline]
pub fn hz_to_angular(f: f64) -> f64 {
    2.0 * PI * f
}

/// Angular frequency (rad/s) to ordinary frequency (Hz).
#[inline]
pub fn angular_to_hz(omega: f64) -> f64 {
    omega / (2.0 * PI)
}

#[inline]
pub fn khz(f_khz: f64) -> f64 {
    hz_to_angular(f_khz * 1e3)
}

#[inline]
pub fn mhz(f_mhz: f64) -> f64 {
    hz_to_angular(f_mhz * 1e6)
}
