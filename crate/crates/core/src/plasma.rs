//! Cold-plasma estimates for a laser-cooled ion cloud: plasma frequency from
//! the spheroid aspect ratio, rigid rotation frequency, density, ion number
//! and an upper temperature bound from the Coulomb coupling parameter.

use std::f64::consts::PI;

use serde::Serialize;

use crate::constants::{E_CHARGE, EPSILON_0, K_B};
use crate::error::{Error, Result};
use crate::numeric::bisect;
use crate::species::IonSpecies;

/// Prolate spheroid with semi-axis `z0` along B and `r0` radially.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlasmaSpheroid {
    /// m
    pub z0: f64,
    /// m
    pub r0: f64,
}

impl PlasmaSpheroid {
    pub fn new(z0: f64, r0: f64) -> Result<Self> {
        if !(z0 >= 0.0) || !(r0 >= 0.0) {
            return Err(Error::InvalidParameter(format!("semi-axes must be non-negative: {z0}, {r0}")));
        }
        Ok(PlasmaSpheroid { z0, r0 })
    }

    pub fn alpha(&self) -> f64 {
        self.z0 / self.r0
    }

    /// m³
    pub fn volume(&self) -> f64 {
        4.0 / 3.0 * PI * self.r0 * self.r0 * self.z0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlasmaProperties {
    /// rad/s
    pub omega_p: f64,
    /// rad/s
    pub omega_r: f64,
    /// 1/m³
    pub n0: f64,
    pub n_ions: Option<f64>,
    /// m
    pub a0: Option<f64>,
    pub gamma: Option<f64>,
    /// K
    pub t_bound: Option<f64>,
}

impl PlasmaProperties {
    pub fn with_ion_count(mut self, spheroid: &PlasmaSpheroid) -> Self {
        self.n_ions = Some(count_ions(spheroid, self.n0));
        self
    }

    pub fn with_temperature_bound(mut self, a0: f64, gamma_critical: f64) -> Result<Self> {
        self.t_bound = Some(temperature_bound(a0, gamma_critical)?);
        self.a0 = Some(a0);
        self.gamma = Some(gamma_critical);
        Ok(self)
    }
}

/// ω_z²/ω_p² of a uniformly charged prolate spheroid with aspect ratio α > 1.
pub fn aspect_ratio_relation(alpha: f64) -> Result<f64> {
    if !(alpha > 1.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "aspect ratio must be > 1 (prolate), got {alpha}"
        )));
    }
    let a2m1 = alpha * alpha - 1.0;
    let u = alpha / a2m1.sqrt();
    // (u/2)·ln((u+1)/(u−1)) − 1 = Σ_{k≥1} u^{−2k}/(2k+1); the sum avoids the
    // cancellation near the sphere limit where u → ∞.
    let bracket = if u > 4.0 {
        let inv2 = 1.0 / (u * u);
        let mut term = inv2;
        let mut sum: f64 = 0.0;
        let mut k = 1.0;
        while term > 1e-18 * sum.max(f64::MIN_POSITIVE) {
            sum += term / (2.0 * k + 1.0);
            term *= inv2;
            k += 1.0;
        }
        sum
    } else {
        let s = a2m1.sqrt();
        let u_minus_1 = 1.0 / (s * (alpha + s));
        0.5 * u * (2.0 / u_minus_1).ln_1p() - 1.0
    };
    Ok(bracket / a2m1)
}

/// Aspect ratio giving the requested ω_z²/ω_p² (must lie in (0, 1/3)).
pub fn invert_aspect_ratio(ratio: f64) -> Result<f64> {
    if !(ratio > 0.0 && ratio < 1.0 / 3.0) {
        return Err(Error::InvalidParameter(format!(
            "omega_z^2/omega_p^2 must lie in (0, 1/3) for a prolate spheroid, got {ratio}"
        )));
    }
    let f = |log_am1: f64| aspect_ratio_relation(1.0 + log_am1.exp()).unwrap_or(f64::NAN) - ratio;
    let x = bisect(f, (1e-12f64).ln(), (1e8f64).ln(), 1e-15)?;
    Ok(1.0 + x.exp())
}

/// Plasma frequency, slow rotation frequency and density for a spheroid of
/// aspect ratio `alpha` in a trap with single-ion axial frequency `omega_z`.
pub fn solve_plasma(alpha: f64, omega_z: f64, omega_c: f64, species: &IonSpecies) -> Result<PlasmaProperties> {
    let relation = aspect_ratio_relation(alpha)?;
    let omega_p = omega_z / relation.sqrt();
    plasma_from_frequency(omega_p, omega_c, species)
}

/// Same as [`solve_plasma`] starting from a known ω_p.
pub fn plasma_from_frequency(omega_p: f64, omega_c: f64, species: &IonSpecies) -> Result<PlasmaProperties> {
    let disc = omega_c * omega_c / 4.0 - omega_p * omega_p / 2.0;
    // allow round-off at the Brillouin edge
    if disc < -1e-12 * omega_c * omega_c {
        return Err(Error::InvalidParameter(format!(
            "Brillouin limit exceeded: omega_p^2 = {:.4e} > omega_c^2/2 = {:.4e}",
            omega_p * omega_p,
            omega_c * omega_c / 2.0
        )));
    }
    let omega_r = omega_c / 2.0 - disc.max(0.0).sqrt();
    let n0 = EPSILON_0 * species.mass * omega_p * omega_p / (species.charge * species.charge);
    Ok(PlasmaProperties { omega_p, omega_r, n0, n_ions: None, a0: None, gamma: None, t_bound: None })
}

/// N = n₀ · (4/3)π r₀² z₀.
pub fn count_ions(spheroid: &PlasmaSpheroid, n0: f64) -> f64 {
    n0 * spheroid.volume()
}

/// Γ = e²/(4πε₀ a₀ k_B T).
pub fn coulomb_coupling(a0: f64, temperature: f64) -> f64 {
    E_CHARGE * E_CHARGE / (4.0 * PI * EPSILON_0 * a0 * K_B * temperature)
}

/// Temperature at which the coupling reaches `gamma_critical` (178 for an
/// infinite one-component plasma); the crystal is at most this warm.
pub fn temperature_bound(a0: f64, gamma_critical: f64) -> Result<f64> {
    if !(a0 > 0.0) || !(gamma_critical > 0.0) {
        return Err(Error::InvalidParameter("a0 and Gamma must be positive".into()));
    }
    Ok(E_CHARGE * E_CHARGE / (4.0 * PI * EPSILON_0 * a0 * K_B * gamma_critical))
}

pub const GAMMA_CRYSTALLIZATION: f64 = 178.0;
