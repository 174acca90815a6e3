//! Doppler-cooling time model, its inversion for the initial energy, the
//! residual-gas (blocked-beam) energy relaxation, and the scattering force
//! used by the trajectory integrator.
//!
//! Cooling time from an initial energy E:
//!
//! ```text
//! t = (4/3) t₀ √r (E/E₀)^{3/2}
//! E₀ = ħΓ√(1+s)/2,  t₀ = (1+s)/(sΓ/2),  r = (ħK)²/(2mE₀),  K = 2π/λ
//! ```

use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::Serialize;

use crate::constants::{ev_to_joule, joule_to_ev, HBAR};
use crate::error::{Error, Result};
use crate::species::IonSpecies;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoolingModel {
    /// Saturation parameter I/I_s.
    pub s: f64,
    /// rad/s
    pub linewidth: f64,
    /// m
    pub wavelength: f64,
    /// kg
    pub mass: f64,
    /// J
    pub e0: f64,
    /// s
    pub t0: f64,
    pub r: f64,
    /// 1/m
    pub k: f64,
}

impl CoolingModel {
    pub fn new(species: &IonSpecies, s: f64, linewidth: f64, wavelength: f64) -> Result<Self> {
        if !(s > 0.0) || !(linewidth > 0.0) || !(wavelength > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "cooling model needs s, linewidth, wavelength > 0; got {s}, {linewidth}, {wavelength}"
            )));
        }
        let k = 2.0 * PI / wavelength;
        let e0 = HBAR * linewidth * (1.0 + s).sqrt() / 2.0;
        let t0 = (1.0 + s) / (s * linewidth / 2.0);
        let r = (HBAR * k).powi(2) / (2.0 * species.mass * e0);
        Ok(CoolingModel { s, linewidth, wavelength, mass: species.mass, e0, t0, r, k })
    }

    /// Uses the transition registered with the species.
    pub fn for_species(species: &IonSpecies, s: f64) -> Result<Self> {
        match (species.linewidth, species.wavelength) {
            (Some(g), Some(l)) => Self::new(species, s, g, l),
            _ => Err(Error::InvalidParameter(format!("{} has no cooling transition", species.name))),
        }
    }

    fn prefactor(&self) -> f64 {
        4.0 / 3.0 * self.t0 * self.r.sqrt()
    }
}

/// Time (s) to cool from energy `energy` (J).
pub fn cooling_time(model: &CoolingModel, energy: f64) -> Result<f64> {
    if !(energy > 0.0) {
        return Err(Error::InvalidParameter(format!("energy must be positive, got {energy}")));
    }
    Ok(model.prefactor() * (energy / model.e0).powf(1.5))
}

/// Inverse of [`cooling_time`]: initial energy (J) that takes `t` seconds to cool.
pub fn initial_energy(model: &CoolingModel, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("time must be non-negative, got {t}")));
    }
    Ok(model.e0 * (t / model.prefactor()).powf(2.0 / 3.0))
}

/// Energy relaxation towards `e_inf_ev` with time constant `tau_gas` while the
/// cooling light is blocked.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeatingModel {
    /// s
    pub tau_gas: f64,
    /// eV
    pub e_inf_ev: f64,
}

impl HeatingModel {
    pub const DEFAULT_E_INF_EV: f64 = 17.0;
    pub const DEFAULT_TAU_GAS: f64 = 225.0;

    pub fn new(tau_gas: f64, e_inf_ev: f64) -> Result<Self> {
        if !(tau_gas > 0.0) {
            return Err(Error::InvalidParameter(format!("tau_gas must be positive, got {tau_gas}")));
        }
        Ok(HeatingModel { tau_gas, e_inf_ev })
    }
}

impl Default for HeatingModel {
    fn default() -> Self {
        HeatingModel { tau_gas: Self::DEFAULT_TAU_GAS, e_inf_ev: Self::DEFAULT_E_INF_EV }
    }
}

/// E(t_B) = E_inf + (E_start − E_inf)·exp(−t_B/τ), all energies in eV.
pub fn blocked_beam_energy(heating: &HeatingModel, e_start_ev: f64, t_blocked: f64) -> Result<f64> {
    if !(t_blocked >= 0.0) {
        return Err(Error::InvalidParameter(format!("blocking time must be >= 0, got {t_blocked}")));
    }
    Ok(heating.e_inf_ev + (e_start_ev - heating.e_inf_ev) * (-t_blocked / heating.tau_gas).exp())
}

/// Fits the gas time constant from (t_B, cooling time) pairs.
///
/// Each cooling time is mapped to an energy through [`initial_energy`]; the
/// relaxation model with the given `e_start_ev` and `e_inf_ev` is then fitted
/// in τ alone by golden-section search on log τ (relative energy residuals).
pub fn fit_gas_time_constant(
    samples: &[(f64, f64)],
    model: &CoolingModel,
    e_start_ev: f64,
    e_inf_ev: f64,
) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::FitFailed { iterations: 0, reason: "need at least two samples".into() });
    }
    let energies: Vec<(f64, f64)> = samples
        .iter()
        .map(|&(tb, t)| Ok((tb, joule_to_ev(initial_energy(model, t)?))))
        .collect::<Result<_>>()?;
    let cost = |log_tau: f64| {
        let h = HeatingModel { tau_gas: log_tau.exp(), e_inf_ev };
        energies
            .iter()
            .map(|&(tb, e)| {
                let m = blocked_beam_energy(&h, e_start_ev, tb).unwrap_or(f64::NAN);
                ((m - e) / e).powi(2)
            })
            .sum::<f64>()
    };
    // coarse scan to pick the basin, then golden section
    let grid: Vec<f64> = (0..=200).map(|i| (1e-1f64).ln() + i as f64 * (1e6f64 / 1e-1).ln() / 200.0).collect();
    let best = grid
        .iter()
        .copied()
        .min_by(|a, b| cost(*a).total_cmp(&cost(*b)))
        .expect("non-empty grid");
    let step = grid[1] - grid[0];
    let (mut a, mut b) = (best - step, best + step);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut iterations = 0;
    while b - a > 1e-10 && iterations < 500 {
        let c = b - phi * (b - a);
        let d = a + phi * (b - a);
        if cost(c) < cost(d) {
            b = d;
        } else {
            a = c;
        }
        iterations += 1;
    }
    let tau = (0.5 * (a + b)).exp();
    if !tau.is_finite() {
        return Err(Error::FitFailed { iterations, reason: "non-finite time constant".into() });
    }
    Ok(tau)
}

/// Radiation-pressure force (N) of one beam on an ion moving with `velocity`.
/// `detuning` is the laser detuning from resonance (rad/s, negative = red).
pub fn scattering_force(
    model: &CoolingModel,
    velocity: &Vector3<f64>,
    detuning: f64,
    direction: &Vector3<f64>,
) -> Result<Vector3<f64>> {
    if (direction.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter("beam direction must be a unit vector".into()));
    }
    Ok(direction * scattering_magnitude(model, direction.dot(velocity), detuning))
}

pub(crate) fn scattering_magnitude(model: &CoolingModel, v_along: f64, detuning: f64) -> f64 {
    let g = model.linewidth;
    let x = 2.0 * (detuning - model.k * v_along) / g;
    HBAR * model.k * (g / 2.0) * model.s / (1.0 + model.s + x * x)
}

/// Analytic dF/dv (N·s/m) of one beam at zero velocity; negative for red
/// detuning, i.e. a drag.
pub fn drag_coefficient(model: &CoolingModel, detuning: f64) -> f64 {
    let g = model.linewidth;
    let x = 2.0 * detuning / g;
    let denom = 1.0 + model.s + x * x;
    HBAR * model.k * (g / 2.0) * model.s * 8.0 * model.k * detuning / (g * g * denom * denom)
}

/// Convenience wrappers in electronvolts.
pub fn cooling_time_ev(model: &CoolingModel, energy_ev: f64) -> Result<f64> {
    cooling_time(model, ev_to_joule(energy_ev))
}

pub fn initial_energy_ev(model: &CoolingModel, t: f64) -> Result<f64> {
    initial_energy(model, t).map(joule_to_ev)
}
