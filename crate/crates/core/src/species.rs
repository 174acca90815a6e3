//! Ion species registry.
//!
//! Masses are ion masses: the neutral atomic mass less the electrons removed
//! by ionization. The Penning-trap cyclotron frequency is set by the ion mass,
//! so that is what every other module consumes.

use std::f64::consts::PI;

use crate::constants::{AMU, E_CHARGE, M_ELECTRON};
use crate::error::{Error, Result};

/// Mass, charge and (optionally) the cooling-transition data of a trapped ion.
#[derive(Debug, Clone, PartialEq)]
pub struct IonSpecies {
    pub name: String,
    /// kg
    pub mass: f64,
    /// C
    pub charge: f64,
    /// Natural linewidth Γ of the cooling transition (rad/s).
    pub linewidth: Option<f64>,
    /// Cooling-transition wavelength (m).
    pub wavelength: Option<f64>,
}

/// Atomic masses (u) of the neutral atoms in the registry.
const CA40_ATOMIC_MASS_U: f64 = 39.962_590_9;
const TH232_ATOMIC_MASS_U: f64 = 232.038_053_6;

impl IonSpecies {
    /// Builds a species from a neutral atomic mass and a positive charge state.
    pub fn from_atomic_mass(name: &str, atomic_mass_u: f64, charge_state: i32) -> Result<Self> {
        if charge_state == 0 {
            return Err(Error::InvalidParameter(format!("{name}: charge state must be nonzero")));
        }
        let mass = atomic_mass_u * AMU - charge_state as f64 * M_ELECTRON;
        Self::new(name, mass, charge_state as f64 * E_CHARGE)
    }

    pub fn new(name: &str, mass: f64, charge: f64) -> Result<Self> {
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::InvalidParameter(format!("{name}: mass must be positive, got {mass}")));
        }
        if charge == 0.0 || !charge.is_finite() {
            return Err(Error::InvalidParameter(format!("{name}: charge must be nonzero")));
        }
        Ok(IonSpecies {
            name: name.to_string(),
            mass,
            charge,
            linewidth: None,
            wavelength: None,
        })
    }

    pub fn with_transition(mut self, linewidth: f64, wavelength: f64) -> Result<Self> {
        if !(linewidth > 0.0) || !(wavelength > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "{}: transition linewidth and wavelength must be positive",
                self.name
            )));
        }
        self.linewidth = Some(linewidth);
        self.wavelength = Some(wavelength);
        Ok(self)
    }

    /// ⁴⁰Ca⁺ with its 397 nm S₁/₂ → P₁/₂ cooling line (Γ = 2π × 21.6 MHz).
    pub fn ca40() -> Self {
        Self::from_atomic_mass("Ca-40+", CA40_ATOMIC_MASS_U, 1)
            .and_then(|s| s.with_transition(2.0 * PI * 21.6e6, 397e-9))
            .expect("registry entry is valid")
    }

    /// ²³²Th⁺. No cooling transition is registered.
    pub fn th232() -> Self {
        Self::from_atomic_mass("Th-232+", TH232_ATOMIC_MASS_U, 1).expect("registry entry is valid")
    }

    /// Charge in units of the elementary charge.
    pub fn charge_state(&self) -> f64 {
        self.charge / E_CHARGE
    }
}

/// Looks a species up by label. Labels are case-insensitive.
pub fn species(name: &str) -> Result<IonSpecies> {
    match name.trim().to_ascii_lowercase().as_str() {
        "ca-40+" | "40ca+" | "ca40+" => Ok(IonSpecies::ca40()),
        "th-232+" | "232th+" | "th232+" => Ok(IonSpecies::th232()),
        _ => Err(Error::UnknownSpecies(name.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn calcium_mass_and_charge() {
        let ca = species("Ca-40+").unwrap();
        let expected = 39.9625909 * 1.66053906660e-27 - 9.1093837015e-31;
        assert!((ca.mass - expected).abs() / expected < 1e-15);
        assert!((ca.mass - 6.6359e-26).abs() / 6.6359e-26 < 1e-4);
        assert_eq!(ca.charge, E_CHARGE);
        assert!(ca.linewidth.is_some());
    }

    #[test]
    fn thorium_mass() {
        let th = species("Th-232+").unwrap();
        assert!((th.mass - 3.8524e-25).abs() / 3.8524e-25 < 1e-3);
        let ca = IonSpecies::ca40();
        let ratio = th.mass / ca.mass;
        assert!((ratio - 232.038 / 39.963).abs() / ratio < 1e-4);
    }

    #[test]
    fn unknown_label() {
        assert_eq!(species("Xx-1+"), Err(Error::UnknownSpecies("Xx-1+".into())));
    }

    #[test]
    fn user_supplied_species_validated() {
        assert!(IonSpecies::new("bad", -1.0, E_CHARGE).is_err());
        assert!(IonSpecies::new("bad", 1e-26, 0.0).is_err());
        let custom = IonSpecies::from_atomic_mass("Mg-24+", 23.985, 1).unwrap();
        assert!(custom.mass > 0.0);
    }
}
