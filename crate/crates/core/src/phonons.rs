//! Mean phonon numbers of the modified-cyclotron and magnetron modes under
//! Doppler cooling with an axialization drive.
//!
//! The drive couples the two radial modes through an exchange term of
//! strength g (rad/s). Together with constant cooling/heating rates per mode
//! the expectation values ⟨n_c'⟩, ⟨n_m⟩ and the coherence ⟨c⟩ obey a closed
//! linear system:
//!
//! ```text
//! d⟨n_c'⟩/dt = −g⟨c⟩ − R_c'⟨n_c'⟩ + R_c'^h
//! d⟨n_m⟩/dt  = +g⟨c⟩ − R_m⟨n_m⟩  + R_m^h
//! d⟨c⟩/dt    = −(R_c' + R_m)/2 ⟨c⟩ + 2g(⟨n_c'⟩ − ⟨n_m⟩)
//! ```
//!
//! with net rates R_j = R_j^c − R_j^h. Crystal branches (common and stretch)
//! are two independent copies of the same system.

use serde::Serialize;

use crate::constants::HBAR;
use crate::error::{Error, Result};
use crate::modes::{omega_1, TrapConfig};
use crate::numeric::rk4_step;
use crate::species::IonSpecies;

/// Cooling and heating rates (1/s) of the two radial modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeRates {
    pub c_cool: f64,
    pub c_heat: f64,
    pub m_cool: f64,
    pub m_heat: f64,
}

impl ModeRates {
    pub fn new(c_cool: f64, c_heat: f64, m_cool: f64, m_heat: f64) -> Result<Self> {
        let r = ModeRates { c_cool, c_heat, m_cool, m_heat };
        if [c_cool, c_heat, m_cool, m_heat].iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
            return Err(Error::InvalidParameter(format!("rates must be finite and >= 0: {r:?}")));
        }
        Ok(r)
    }

    /// Net modified-cyclotron rate R_c' = R^c − R^h.
    pub fn net_c(&self) -> f64 {
        self.c_cool - self.c_heat
    }

    pub fn net_m(&self) -> f64 {
        self.m_cool - self.m_heat
    }

    fn require_positive(&self) -> Result<()> {
        if !(self.net_c() > 0.0) {
            return Err(Error::NoSteadyState { mode: "c'".into(), rate: self.net_c() });
        }
        if !(self.net_m() > 0.0) {
            return Err(Error::NoSteadyState { mode: "m".into(), rate: self.net_m() });
        }
        Ok(())
    }
}

/// Quadrupolar RF drive A(t) = A_ax sin(ω t) applied as A(t)(x² − y²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxializationDrive {
    /// J/m²
    pub amplitude: f64,
    /// rad/s, nominally ω_c
    pub omega: f64,
    /// Applied peak-to-peak voltage, when the drive was built from one.
    pub v_ax_pp: Option<f64>,
}

impl AxializationDrive {
    pub fn new(amplitude: f64, omega: f64) -> Result<Self> {
        if !(amplitude >= 0.0) || !(omega > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "drive needs amplitude >= 0 and omega > 0, got {amplitude}, {omega}"
            )));
        }
        Ok(AxializationDrive { amplitude, omega, v_ax_pp: None })
    }

    /// A_ax = `calibration` · V_ax. The calibration (J/m² per V_pp) is an
    /// experimental constant and has to be supplied.
    pub fn from_voltage(v_ax_pp: f64, calibration: f64, omega: f64) -> Result<Self> {
        let mut d = Self::new(v_ax_pp * calibration, omega)?;
        d.v_ax_pp = Some(v_ax_pp);
        Ok(d)
    }
}

/// Zero-point length scale X = √(2ħ/(mω₁)) of a radial mode pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeScale {
    /// m
    pub x: f64,
}

impl ModeScale {
    pub fn new(mass: f64, omega_1: f64) -> Result<Self> {
        if !(mass > 0.0) || !(omega_1 > 0.0) {
            return Err(Error::InvalidParameter("mass and omega_1 must be positive".into()));
        }
        Ok(ModeScale { x: (2.0 * HBAR / (mass * omega_1)).sqrt() })
    }

    /// Scale of a single ion's radial modes.
    pub fn single_ion(trap: &TrapConfig, species: &IonSpecies) -> Result<Self> {
        let w1 = omega_1(trap.omega_c(species), trap.axial_omega(species))?;
        Self::new(species.mass, w1)
    }

    /// Scales (X₋, X₊) of a balanced crystal's common and stretch branches,
    /// using ω₁^± = √(ω_c² − 2(Ω_z^±)²)/2.
    pub fn crystal(trap: &TrapConfig, species: &IonSpecies) -> Result<(Self, Self)> {
        let wc = trap.omega_c(species);
        let wz = trap.axial_omega(species);
        let minus = Self::new(species.mass, omega_1(wc, wz)?)?;
        let plus = Self::new(species.mass, omega_1(wc, 3f64.sqrt() * wz)?)?;
        Ok((minus, plus))
    }
}

/// Exchange rate g = A_ax X²/ħ (rad/s).
pub fn coupling_strength(drive: &AxializationDrive, scale: &ModeScale) -> f64 {
    drive.amplitude * scale.x * scale.x / HBAR
}

/// Mean phonon numbers and radial coherence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhononState {
    pub n_c: f64,
    pub n_m: f64,
    pub c: f64,
}

impl PhononState {
    pub fn new(n_c: f64, n_m: f64, c: f64) -> Self {
        PhononState { n_c, n_m, c }
    }
}

/// ⟨n_j⟩_f = R_j^h / (R_j^c − R_j^h) for each mode without drive.
pub fn steady_state_free(rates: &ModeRates) -> Result<(f64, f64)> {
    rates.require_positive()?;
    Ok((rates.c_heat / rates.net_c(), rates.m_heat / rates.net_m()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxializedSteadyState {
    pub n_c: f64,
    pub n_m: f64,
    /// Rate-weighted mean the two modes share under strong drive.
    pub n_ax: f64,
}

/// Closed-form steady state with exchange rate `g`.
pub fn steady_state_axialized(rates: &ModeRates, g: f64) -> Result<AxializedSteadyState> {
    let (nc_f, nm_f) = steady_state_free(rates)?;
    let (rc, rm) = (rates.net_c(), rates.net_m());
    let n_ax = (rc * nc_f + rm * nm_f) / (rc + rm);
    let drive = 4.0 * g * g;
    let rr = rc * rm;
    Ok(AxializedSteadyState {
        n_c: (drive * n_ax + rr * nc_f) / (drive + rr),
        n_m: (drive * n_ax + rr * nm_f) / (drive + rr),
        n_ax,
    })
}

/// Largest stable step recommended for [`integrate_rate_equations`].
pub fn recommended_dt(rates: &ModeRates, g: f64) -> f64 {
    let fastest = [rates.net_c().abs(), rates.net_m().abs(), g.abs()]
        .into_iter()
        .fold(0.0, f64::max);
    0.01 / fastest.max(f64::MIN_POSITIVE)
}

fn derivative(rates: &ModeRates, g: f64, y: &[f64; 3]) -> [f64; 3] {
    let (rc, rm) = (rates.net_c(), rates.net_m());
    let [n_c, n_m, c] = *y;
    [
        -g * c - rc * n_c + rates.c_heat,
        g * c - rm * n_m + rates.m_heat,
        -0.5 * (rc + rm) * c + 2.0 * g * (n_c - n_m),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhononSample {
    pub t: f64,
    pub state: PhononState,
}

/// Integrates the rate equations with fixed-step RK4 from t = 0 to `t_final`.
/// The returned series includes the initial state and one sample per step;
/// the last step is shortened to land exactly on `t_final`.
pub fn integrate_rate_equations(
    state0: PhononState,
    rates: &ModeRates,
    g: f64,
    t_final: f64,
    dt: f64,
) -> Result<Vec<PhononSample>> {
    if !(dt > 0.0) || !(t_final >= dt) {
        return Err(Error::InvalidParameter(format!("need dt > 0 and t_final >= dt, got {dt}, {t_final}")));
    }
    // Gershgorin bound on the spectral radius of the linear system; RK4 is
    // unstable on the negative real axis beyond |λ·dt| ≈ 2.785.
    let (rc, rm) = (rates.net_c().abs(), rates.net_m().abs());
    let radius = (rc + g.abs()).max(rm + g.abs()).max(0.5 * (rc + rm) + 4.0 * g.abs());
    if radius * dt > 2.78 {
        return Err(Error::StepSize(format!(
            "dt = {dt:.3e} s exceeds the RK4 stability limit {:.3e} s",
            2.78 / radius
        )));
    }
    let f = |y: &[f64; 3]| derivative(rates, g, y);
    let mut y = [state0.n_c, state0.n_m, state0.c];
    let tolerance = 1e-9 * (1.0 + y[0].abs() + y[1].abs());
    let steps = (t_final / dt).ceil() as usize;
    let mut out = Vec::with_capacity(steps + 1);
    out.push(PhononSample { t: 0.0, state: state0 });
    let mut t = 0.0;
    for _ in 0..steps {
        let h = dt.min(t_final - t);
        if h <= 0.0 {
            break;
        }
        y = rk4_step(&f, &y, h);
        t += h;
        if !y.iter().all(|v| v.is_finite()) || y[0] < -tolerance || y[1] < -tolerance {
            return Err(Error::StepSize(format!(
                "phonon number went negative or non-finite at t = {t:.3e} s with dt = {dt:.3e} s"
            )));
        }
        out.push(PhononSample { t, state: PhononState::new(y[0], y[1], y[2]) });
    }
    Ok(out)
}

/// Lorentzian sideband rates for one mode: R^c on the red sideband (δ + ω),
/// R^h on the blue one (δ − ω), each η²·(sΓ/2)·L(x)/L(0) with
/// L(x) = 1/(1 + s + (2x/Γ)²). `eta_sq` is a user-supplied Lamb–Dicke scale;
/// this is a model choice, not a derived result.
pub fn lorentzian_rates(s: f64, linewidth: f64, detuning: f64, omega_mode: f64, eta_sq: f64) -> Result<(f64, f64)> {
    if !(linewidth > 0.0) || !(s >= 0.0) || !(eta_sq >= 0.0) {
        return Err(Error::InvalidParameter("need linewidth > 0, s >= 0, eta^2 >= 0".into()));
    }
    let lorentz = |x: f64| 1.0 / (1.0 + s + (2.0 * x / linewidth).powi(2));
    let scale = eta_sq * s * linewidth / 2.0 / lorentz(0.0);
    Ok((scale * lorentz(detuning + omega_mode), scale * lorentz(detuning - omega_mode)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{khz, mhz};
    use nalgebra::{Matrix3, Vector3};
    use proptest::prelude::*;

    fn rates() -> ModeRates {
        ModeRates::new(3.0, 1.0, 1.5, 0.5).unwrap()
    }

    #[test]
    fn free_steady_state_arithmetic() {
        let (nc, nm) = steady_state_free(&ModeRates::new(2.0, 1.0, 4.0, 0.0).unwrap()).unwrap();
        assert_eq!(nc, 1.0);
        assert_eq!(nm, 0.0);
        let err = steady_state_free(&ModeRates::new(1.0, 1.0, 2.0, 1.0).unwrap()).unwrap_err();
        assert!(matches!(err, Error::NoSteadyState { .. }));
    }

    #[test]
    fn zero_drive_reduces_to_free() {
        let r = rates();
        let (nc, nm) = steady_state_free(&r).unwrap();
        let ax = steady_state_axialized(&r, 0.0).unwrap();
        assert_eq!(ax.n_c, nc);
        assert_eq!(ax.n_m, nm);
    }

    #[test]
    fn very_strong_drive_shares_phonons() {
        let r = ModeRates::new(10.0, 1.0, 0.3, 0.2).unwrap();
        let g = 1e6 * (r.net_c() * r.net_m()).sqrt() / 2.0;
        let ax = steady_state_axialized(&r, g).unwrap();
        assert!((ax.n_c - ax.n_ax).abs() / ax.n_ax < 1e-6);
        assert!((ax.n_m - ax.n_ax).abs() / ax.n_ax < 1e-6);
    }

    #[test]
    fn symmetric_rates_share_free_value() {
        let r = ModeRates::new(2.0, 0.5, 2.0, 0.5).unwrap();
        for g in [0.0, 0.1, 10.0, 1e4] {
            let ax = steady_state_axialized(&r, g).unwrap();
            assert!((ax.n_ax - 0.5 / 1.5).abs() < 1e-15);
        }
    }

    #[test]
    fn closed_form_matches_linear_solve() {
        // Setting the derivatives to zero gives a 3x3 linear system.
        for (r, g) in [(rates(), 0.7), (ModeRates::new(5.0, 0.2, 0.4, 0.1).unwrap(), 3.0)] {
            let (rc, rm) = (r.net_c(), r.net_m());
            let a = Matrix3::new(-rc, 0.0, -g, 0.0, -rm, g, 2.0 * g, -2.0 * g, -0.5 * (rc + rm));
            let b = Vector3::new(-r.c_heat, -r.m_heat, 0.0);
            let x = a.lu().solve(&b).unwrap();
            let ax = steady_state_axialized(&r, g).unwrap();
            assert!((x[0] - ax.n_c).abs() / ax.n_c < 1e-10);
            assert!((x[1] - ax.n_m).abs() / ax.n_m < 1e-10);
        }
    }

    #[test]
    fn decoupled_relaxation_is_exponential() {
        let r = rates();
        let (nc_f, nm_f) = steady_state_free(&r).unwrap();
        let t = 3.0 / r.net_c();
        let s0 = PhononState::new(20.0, 7.0, 0.0);
        let series = integrate_rate_equations(s0, &r, 0.0, t, 1e-4).unwrap();
        let last = series.last().unwrap();
        assert!((last.t - t).abs() < 1e-12);
        let nc = nc_f + (20.0 - nc_f) * (-r.net_c() * t).exp();
        let nm = nm_f + (7.0 - nm_f) * (-r.net_m() * t).exp();
        assert!((last.state.n_c - nc).abs() / nc < 1e-8);
        assert!((last.state.n_m - nm).abs() / nm < 1e-8);
    }

    #[test]
    fn symmetric_fixed_point_keeps_zero_coherence() {
        let r = ModeRates::new(2.0, 0.5, 2.0, 0.5).unwrap();
        let series = integrate_rate_equations(PhononState::new(4.0, 4.0, 0.0), &r, 5.0, 3.0, 1e-3).unwrap();
        assert!(series.iter().all(|s| s.state.c.abs() < 1e-12));
    }

    #[test]
    fn oversized_step_is_reported() {
        let r = ModeRates::new(1000.0, 0.0, 1000.0, 0.0).unwrap();
        let err = integrate_rate_equations(PhononState::new(1.0, 1.0, 0.0), &r, 0.0, 1.0, 0.01).unwrap_err();
        assert!(matches!(err, Error::StepSize(_)));
        assert!(integrate_rate_equations(PhononState::new(1.0, 1.0, 0.0), &r, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn coupling_scales_and_cross_check() {
        let ca = IonSpecies::ca40();
        let trap = TrapConfig::from_frequencies_hz(2.689370e6, 333e3, ca.clone()).unwrap();
        let scale = ModeScale::single_ion(&trap, &ca).unwrap();
        let drive = AxializationDrive::new(1e-18, mhz(2.689370)).unwrap();
        let g = coupling_strength(&drive, &scale);
        // independent route: g = 2A/(mω₁) with ω₁ = (ω_c' − ω_m)/2
        let wc = mhz(2.689370);
        let wz = khz(333.0);
        let w1 = 0.5 * (wc * wc - 2.0 * wz * wz).sqrt();
        let g2 = 2.0 * 1e-18 / (ca.mass * w1);
        assert!((g - g2).abs() / g2 < 1e-12);
        assert_eq!(coupling_strength(&AxializationDrive::new(0.0, wc).unwrap(), &scale), 0.0);
        let drive2 = AxializationDrive::new(2e-18, wc).unwrap();
        assert!((coupling_strength(&drive2, &scale) / g - 2.0).abs() < 1e-12);
        let half = ModeScale::new(ca.mass, 2.0 * w1).unwrap();
        assert!((coupling_strength(&drive, &half) / g - 0.5).abs() < 1e-12);
    }

    #[test]
    fn crystal_scales_order() {
        let ca = IonSpecies::ca40();
        let trap = TrapConfig::from_frequencies_hz(2.689370e6, 333e3, ca.clone()).unwrap();
        let (minus, plus) = ModeScale::crystal(&trap, &ca).unwrap();
        // ω₁⁺ < ω₁⁻ so X₊ > X₋
        assert!(plus.x > minus.x);
    }

    #[test]
    fn lorentzian_sideband_properties() {
        let gamma = mhz(21.6);
        let (c, h) = lorentzian_rates(1.0, gamma, 0.0, mhz(2.67), 0.01).unwrap();
        assert!((c - h).abs() <= 1e-12 * c);
        let (c, h) = lorentzian_rates(1.0, gamma, -gamma / 2.0, mhz(2.67), 0.01).unwrap();
        assert!(c > h);
        let (c, h) = lorentzian_rates(1.0, gamma, -gamma / 3.0, 0.0, 0.01).unwrap();
        assert_eq!(c, h);
    }

    #[test]
    fn monotone_in_drive_strength() {
        // n_m,f > n_ax > n_c,f: magnetron decreases, cyclotron increases with g
        let r = ModeRates::new(10.0, 1.0, 1.0, 0.8).unwrap();
        let mut prev = steady_state_axialized(&r, 0.0).unwrap();
        for i in 1..200 {
            let g = 0.05 * i as f64;
            let cur = steady_state_axialized(&r, g).unwrap();
            assert!(cur.n_m <= prev.n_m + 1e-15);
            assert!(cur.n_c >= prev.n_c - 1e-15);
            prev = cur;
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn flow_preserves_nonnegativity(
            cc in 0.5f64..5.0, hc in 0.0f64..0.9, cm in 0.5f64..5.0, hm in 0.0f64..0.9,
            g in 0.0f64..5.0, n0c in 0.0f64..50.0, n0m in 0.0f64..50.0,
        ) {
            let r = ModeRates::new(cc, hc * cc, cm, hm * cm).unwrap();
            let dt = recommended_dt(&r, g);
            let series = integrate_rate_equations(PhononState::new(n0c, n0m, 0.0), &r, g, 5.0, dt).unwrap();
            for s in &series {
                prop_assert!(s.state.n_c >= -1e-9 && s.state.n_m >= -1e-9);
            }
        }

        #[test]
        fn free_limit_matches_long_time(cc in 0.5f64..5.0, hc in 0.0f64..0.9, cm in 0.5f64..5.0, hm in 0.0f64..0.9) {
            let r = ModeRates::new(cc, hc * cc, cm, hm * cm).unwrap();
            let (nc, nm) = steady_state_free(&r).unwrap();
            let slowest = r.net_c().min(r.net_m());
            let t = 30.0 / slowest;
            let series = integrate_rate_equations(PhononState::new(10.0, 10.0, 0.0), &r, 0.0, t, recommended_dt(&r, 0.0)).unwrap();
            let last = series.last().unwrap().state;
            prop_assert!((last.n_c - nc).abs() <= 1e-6 * nc.max(1e-3));
            prop_assert!((last.n_m - nm).abs() <= 1e-6 * nm.max(1e-3));
        }
    }
}
