//! Acceptance suite: one PASS/FAIL line per criterion, with wall-clock budgets.
//! Runs as a plain binary so the lines are always printed.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};

use penning::analysis::{differentiate_counts, fit_emg, fit_gaussian, EMGParams};
use penning::beamline::{
    capture_ensemble, extraction_scan, time_of_flight, EnergyDistribution, PotentialProfile, TrapGeometry,
    CALIBRATED_SWITCH_TIME, CALIBRATION_ENERGY_EV, CALIBRATION_SIGMA_EV,
};
use penning::cooling::{initial_energy, CoolingModel};
use penning::dynamics::{
    action_exchange, crystal_at_rest, simulate, spectrum, Axis, ParticleState, Signal, SimulationConfig, SpectralPeak,
};
use penning::modes::{
    balanced_crystal_modes, linearized_normal_modes, omega_1, reproduce_table, single_ion_modes, TrapConfig,
    CA_CRYSTAL_TABLE,
};
use penning::phonons::{integrate_rate_equations, recommended_dt, steady_state_axialized, AxializationDrive, ModeRates, PhononState};
use penning::plasma::{invert_aspect_ratio, solve_plasma, temperature_bound, GAMMA_CRYSTALLIZATION};
use penning::IonSpecies;

type Check = Result<String, String>;

const F_C_HZ: f64 = 2.689_370e6;

// Independent copies of the constants used by the oracles.
const HBAR: f64 = 1.054_571_817e-34;
const QE: f64 = 1.602_176_634e-19;
const EPS0: f64 = 8.854_187_812_8e-12;
const KB: f64 = 1.380_649e-23;
const AMU: f64 = 1.660_539_066_60e-27;
const ME: f64 = 9.109_383_701_5e-31;

fn ca_mass() -> f64 {
    39.962_590_9 * AMU - ME
}

fn ca_trap(f_z: f64) -> TrapConfig {
    TrapConfig::from_frequencies_hz(F_C_HZ, f_z, IonSpecies::ca40()).unwrap()
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

/// Printed mode table at 7 T: f_c'-, f_c'+ (MHz), f_z-, f_z+, f_m-, f_m+ (kHz)
/// and the number of decimals shown for each entry.
const PRINTED: [([f64; 6], [i32; 6]); 6] = [
    ([2.684, 2.673, 170.0, 294.0, 5.4, 16.0], [3, 3, 0, 0, 1, 0]),
    ([2.674, 2.643, 286.0, 495.0, 15.0, 46.0], [3, 3, 0, 0, 0, 0]),
    ([2.669, 2.626, 333.0, 577.0, 21.0, 63.0], [3, 3, 0, 0, 0, 0]),
    ([2.663, 2.608, 376.0, 651.0, 27.0, 81.0], [3, 3, 0, 0, 0, 0]),
    ([2.652, 2.574, 445.0, 771.0, 37.0, 115.0], [3, 3, 0, 0, 0, 0]),
    ([2.641, 2.539, 504.0, 873.0, 48.0, 150.0], [3, 3, 0, 0, 0, 0]),
];

fn rounds_to(value: f64, printed: f64, decimals: i32) -> bool {
    let p = 10f64.powi(decimals);
    (value * p).round() == (printed * p).round()
}

fn c1_table() -> Check {
    let rows = reproduce_table(F_C_HZ, &CA_CRYSTAL_TABLE).map_err(|e| e.to_string())?;
    let mut matched = 0;
    let mut misses = Vec::new();
    for (r, (computed, (printed, decimals))) in rows.iter().zip(PRINTED.iter()).enumerate() {
        // closed-form oracle straight from the single-ion relations
        let wc = 2.0 * PI * F_C_HZ;
        let wz = 2.0 * PI * printed[2] * 1e3;
        let split = |w: f64| {
            let w1 = (wc * wc - 2.0 * w * w).sqrt() / 2.0;
            (wc / 2.0 + w1, wc / 2.0 - w1)
        };
        let (cm, mm) = split(wz);
        let (cp, mp) = split(3f64.sqrt() * wz);
        let oracle = [cm / 2e6 / PI, cp / 2e6 / PI, wz / 2e3 / PI, 3f64.sqrt() * wz / 2e3 / PI, mm / 2e3 / PI, mp / 2e3 / PI];
        for i in 0..6 {
            ensure(
                (computed.values[i] - oracle[i]).abs() <= 1e-9 * oracle[i],
                format!("row {} col {i}: library {} vs oracle {}", r + 1, computed.values[i], oracle[i]),
            )?;
            if rounds_to(computed.values[i], printed[i], decimals[i]) {
                matched += 1;
            } else {
                misses.push(format!("row {} col {i}: {:.4} vs {}", r + 1, computed.values[i], printed[i]));
            }
        }
    }
    ensure(matched == 36, format!("{matched}/36 match; {}", misses.join("; ")))?;
    Ok("36/36 frequencies match at displayed rounding".into())
}

fn c2_unbalanced() -> Check {
    let trap = ca_trap(333e3);
    let modes = linearized_normal_modes(&[IonSpecies::th232(), IonSpecies::ca40()], &trap).map_err(|e| e.to_string())?;
    let mut got: Vec<f64> = modes.iter().map(|m| m.omega / (2.0 * PI)).collect();
    // (value, last-digit unit), Hz
    let quoted = [(2.647e6, 1e3), (416e3, 1e3), (68e3, 1e3), (21e3, 1e3), (165e3, 1e3), (482e3, 1e3)];
    let mut report = Vec::new();
    for (q, unit) in quoted {
        let k = got
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - q).abs().total_cmp(&(b.1 - q).abs()))
            .map(|(k, _)| k)
            .ok_or("ran out of modes")?;
        let f = got.remove(k);
        ensure((f - q).abs() <= unit, format!("{q} Hz: nearest computed {f:.1} Hz"))?;
        report.push(format!("{:.3}", f / if q > 1e6 { 1e6 } else { 1e3 }));
    }
    Ok(format!("computed {} (MHz, then kHz)", report.join(", ")))
}

fn c3_plasma() -> Check {
    let ca = IonSpecies::ca40();
    let alpha = invert_aspect_ratio((170.0f64 / 386.0).powi(2)).map_err(|e| e.to_string())?;
    let p = solve_plasma(alpha, 2.0 * PI * 170e3, 2.0 * PI * F_C_HZ, &ca).map_err(|e| e.to_string())?;
    let fp = p.omega_p / (2.0 * PI);
    let fr = p.omega_r / (2.0 * PI);
    let n_cm3 = p.n0 * 1e-6;
    let t = temperature_bound(20e-6, GAMMA_CRYSTALLIZATION).map_err(|e| e.to_string())?;
    // oracles: n0 = ε₀mω_p²/q², ω_r from the rotating-frame quadratic, T from Γ
    let n_oracle = EPS0 * ca_mass() * p.omega_p * p.omega_p / (QE * QE) * 1e-6;
    let wc = 2.0 * PI * F_C_HZ;
    let wr_oracle = (wc - (wc * wc - 2.0 * p.omega_p * p.omega_p).sqrt()) / 2.0;
    let t_oracle = QE * QE / (4.0 * PI * EPS0 * 20e-6 * KB * 178.0);
    ensure((n_cm3 - n_oracle).abs() / n_oracle < 1e-9, "density disagrees with oracle")?;
    ensure((p.omega_r - wr_oracle).abs() / wr_oracle < 1e-9, "rotation disagrees with oracle")?;
    ensure((t - t_oracle).abs() / t_oracle < 1e-9, "temperature disagrees with oracle")?;
    ensure((fp - 386e3).abs() / 386e3 < 0.05, format!("f_p = {fp}"))?;
    ensure((fr - 27.8e3).abs() / 27.8e3 < 0.05, format!("f_r = {fr}"))?;
    ensure((n_cm3 - 1.3e8).abs() / 1.3e8 < 0.05, format!("n0 = {n_cm3:e}"))?;
    ensure((t - 4.7e-3).abs() / 4.7e-3 < 0.05 && t <= 5e-3, format!("T = {t}"))?;
    Ok(format!(
        "alpha = {alpha:.4}, f_p = {:.1} kHz, f_r = {:.2} kHz, n0 = {:.3e} cm^-3, T <= {:.2} mK",
        fp / 1e3,
        fr / 1e3,
        n_cm3,
        t * 1e3
    ))
}

fn c4_cooling() -> Check {
    let ca = IonSpecies::ca40();
    let gamma = 2.0 * PI * 21.6e6;
    let model = CoolingModel::new(&ca, 3.8, gamma, 397e-9).map_err(|e| e.to_string())?;
    let e = initial_energy(&model, 165.0).map_err(|e| e.to_string())? / QE;
    // brute-force oracle: bisect t(E) = (4/3)t₀√r(E/E₀)^{3/2} = 165 s
    let s = 3.8;
    let e0 = HBAR * gamma * (1.0f64 + s).sqrt() / 2.0;
    let t0 = (1.0 + s) / (s * gamma / 2.0);
    let k = 2.0 * PI / 397e-9;
    let r = (HBAR * k).powi(2) / (2.0 * ca_mass() * e0);
    let t_of = |ev: f64| 4.0 / 3.0 * t0 * r.sqrt() * (ev * QE / e0).powf(1.5);
    let (mut lo, mut hi) = (1e-6, 1e3);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if t_of(mid) < 165.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let oracle = 0.5 * (lo + hi);
    ensure((e - oracle).abs() / oracle < 1e-9, format!("library {e} eV vs oracle {oracle} eV"))?;
    ensure((e - 4.2).abs() <= 2.3, format!("E = {e:.3} eV outside 4.2 +/- 2.3 eV"))?;
    Ok(format!("E(165 s) = {e:.3} eV; brute-force oracle {oracle:.3} eV; band 4.2 +/- 2.3 eV"))
}

/// Steady state from solving the 3×3 linear system directly.
fn linear_steady_state(rates: &ModeRates, g: f64) -> (f64, f64) {
    let (rc, rm) = (rates.net_c(), rates.net_m());
    let a = Matrix3::new(-rc, 0.0, -g, 0.0, -rm, g, 2.0 * g, -2.0 * g, -0.5 * (rc + rm));
    let b = Vector3::new(-rates.c_heat, -rates.m_heat, 0.0);
    let x = a.lu().solve(&b).expect("nonsingular");
    (x[0], x[1])
}

/// Integrates far enough that the slowest decay (≥ min net rate) has died out.
fn ode_limit(rates: &ModeRates, g: f64, n0: PhononState) -> Result<PhononState, String> {
    let t_final = 40.0 / rates.net_c().min(rates.net_m());
    let dt = recommended_dt(rates, g).min(t_final);
    let s = integrate_rate_equations(n0, rates, g, t_final, dt).map_err(|e| e.to_string())?;
    Ok(s.last().unwrap().state)
}

fn random_rates(rng: &mut ChaCha8Rng) -> ModeRates {
    let mut pair = || {
        let cool = 10f64.powf(rng.random_range(2.0..3.0));
        (cool, cool * rng.random_range(0.05..0.8))
    };
    let (cc, ch) = pair();
    let (mc, mh) = pair();
    ModeRates::new(cc, ch, mc, mh).unwrap()
}

fn c5a_phonon_limits() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let rates = random_rates(&mut rng);
        let g = rng.random_range(0.0..1.0) * 10.0 * (rates.net_c() * rates.net_m()).sqrt() / 2.0;
        let n0 = PhononState::new(rng.random_range(0.0..20.0), rng.random_range(0.0..20.0), 0.0);
        let closed = steady_state_axialized(&rates, g).map_err(|e| e.to_string())?;
        let (oc, om) = linear_steady_state(&rates, g);
        ensure(
            (closed.n_c - oc).abs() / oc < 1e-10 && (closed.n_m - om).abs() / om < 1e-10,
            format!("set {k}: closed form disagrees with linear solve"),
        )?;
        let lim = ode_limit(&rates, g, n0)?;
        let rel = ((lim.n_c - closed.n_c).abs() / closed.n_c).max((lim.n_m - closed.n_m).abs() / closed.n_m);
        worst = worst.max(rel);
        ensure(rel < 1e-6, format!("set {k}: ODE limit off by {rel:e}"))?;
    }
    Ok(format!("100 random sets, worst relative deviation {worst:.1e}"))
}

fn c5b_strong_drive() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let mut ok = 0;
    let mut worst: f64 = 0.0;
    let mut bound_ok = true;
    for _ in 0..100 {
        let rates = random_rates(&mut rng);
        let g = 10.0 * (rates.net_c() * rates.net_m()).sqrt() / 2.0;
        let lim = ode_limit(&rates, g, PhononState::new(0.0, 0.0, 0.0))?;
        let closed = steady_state_axialized(&rates, g).map_err(|e| e.to_string())?;
        let ratio = (lim.n_c - lim.n_m).abs() / closed.n_ax;
        worst = worst.max(ratio);
        if ratio < 1e-2 {
            ok += 1;
        }
        // what the closed form does guarantee: the free-mode gap shrinks 101-fold
        let free_gap = (rates.c_heat / rates.net_c() - rates.m_heat / rates.net_m()).abs();
        bound_ok &= ((lim.n_c - lim.n_m).abs() * 101.0 - free_gap).abs() <= 1e-6 * free_gap;
    }
    let detail = format!(
        "{ok}/100 sets meet |n_c - n_m|/n_ax < 1e-2 (worst {worst:.3}); gap = free gap / 101 holds: {bound_ok}"
    );
    if ok == 100 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn nearest(peaks: &[SpectralPeak], f: f64) -> f64 {
    peaks.iter().map(|p| p.frequency).min_by(|a, b| (a - f).abs().total_cmp(&(b - f).abs())).unwrap_or(f64::NAN)
}

fn spectra_match(ions: &[ParticleState], trap: &TrapConfig, expected: &[(String, f64)], duration: f64) -> Result<f64, String> {
    let cfg = SimulationConfig::new(trap.clone(), 1.0 / (50.0 * F_C_HZ), duration).with_stride(10);
    let traj = simulate(ions, &cfg).map_err(|e| e.to_string())?;
    let mut signals: Vec<Signal> = (0..ions.len()).map(Signal::Ion).collect();
    if ions.len() == 2 {
        signals.extend([Signal::Common, Signal::Stretch]);
    }
    let mut peaks = Vec::new();
    for axis in [Axis::X, Axis::Z] {
        for &s in &signals {
            peaks.extend(spectrum(&traj, axis, s).map_err(|e| e.to_string())?);
        }
    }
    let mut worst: f64 = 0.0;
    for (label, f) in expected {
        let rel = (nearest(&peaks, *f) - f).abs() / f;
        ensure(rel < 1e-3, format!("{label}: {:.1} Hz vs {f:.1} Hz", nearest(&peaks, *f)))?;
        worst = worst.max(rel);
    }
    Ok(worst)
}

fn hz_list(modes: &penning::modes::ModeSet) -> Vec<(String, f64)> {
    modes.iter().map(|m| (m.branch.label().to_string(), m.omega / (2.0 * PI))).collect()
}

fn c6_spectra() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let ca = IonSpecies::ca40();
    let mut worst: f64 = 0.0;
    let mut runs = 0;
    for _ in 0..3 {
        let f_z = rng.random_range(250e3..500e3);
        let trap = ca_trap(f_z);
        let a = rng.random_range(2e-6..8e-6);
        let ion = ParticleState::new(
            ca.clone(),
            Vector3::new(a, 0.0, rng.random_range(1e-6..5e-6)),
            Vector3::new(0.0, rng.random_range(10.0..40.0), 0.0),
        )
        .unwrap();
        let expected = hz_list(&single_ion_modes(&trap, &ca).map_err(|e| e.to_string())?);
        worst = worst.max(spectra_match(&[ion], &trap, &expected, 5e-3)?);
        runs += 1;
    }
    for pair in [[ca.clone(), ca.clone()], [IonSpecies::th232(), ca.clone()]] {
        let f_z = rng.random_range(300e3..450e3);
        let trap = ca_trap(f_z);
        let modes = if pair[0] == pair[1] {
            balanced_crystal_modes(&trap, &ca)
        } else {
            linearized_normal_modes(&pair, &trap)
        }
        .map_err(|e| e.to_string())?;
        let mut ions = crystal_at_rest(&pair, &trap).map_err(|e| e.to_string())?;
        let d = (ions[0].position - ions[1].position).norm();
        let a = d / 200.0;
        let wr = 2.0 * PI * rng.random_range(300e3..500e3);
        let wc = 2.0 * PI * F_C_HZ;
        ions[0].position += Vector3::new(a, -0.5 * a, 0.7 * a);
        ions[1].position += Vector3::new(-0.3 * a, 0.8 * a, -0.4 * a);
        ions[0].velocity = Vector3::new(0.0, a * wr, 0.0);
        ions[1].velocity = Vector3::new(-a * wc, 0.0, 0.0);
        worst = worst.max(spectra_match(&ions, &trap, &hz_list(&modes), 8e-3)?);
        runs += 1;
    }
    Ok(format!("{runs} randomized runs (1 ion, Ca-Ca, Th-Ca), worst relative deviation {worst:.1e}"))
}

fn c7_exchange() -> Check {
    let ca = IonSpecies::ca40();
    let mut lines = Vec::new();
    for f_z in [170e3, 333e3, 504e3] {
        let trap = ca_trap(f_z);
        let wc = trap.omega_c(&ca);
        let w1 = omega_1(wc, trap.axial_omega(&ca)).map_err(|e| e.to_string())?;
        let wm = wc / 2.0 - w1;
        let r = 10e-6;
        let ion = ParticleState::new(ca.clone(), Vector3::new(r, 0.0, 0.0), Vector3::new(0.0, -wm * r, 0.0)).unwrap();
        let t_swap = 0.5e-3;
        let kappa = PI / (2.0 * t_swap);
        let drive = AxializationDrive::new(2.0 * ca.mass * w1 * kappa, wc).map_err(|e| e.to_string())?;
        let cfg =
            SimulationConfig::new(trap, 1.0 / (50.0 * F_C_HZ), 2.0 * t_swap).with_drive(drive).with_stride(20);
        let acts = action_exchange(&simulate(&[ion], &cfg).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let i0 = acts[0].i_m;
        let to_c = acts.iter().map(|a| a.i_c).fold(0.0, f64::max) / i0;
        let back = acts.last().unwrap().i_m / i0;
        ensure(to_c > 0.99 && back > 0.99, format!("f_z = {f_z}: to cyclotron {to_c:.4}, back {back:.4}"))?;
        lines.push(format!("{:.0} kHz: {to_c:.4}/{back:.4}", f_z / 1e3));
    }
    Ok(format!("transfer/return fractions {}", lines.join(", ")))
}

fn emg_samples(mean: f64, sd: f64, tau: f64, n: usize, seed: u64) -> Vec<f64> {
    let sigma = (sd * sd - tau * tau).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = Normal::new(mean - tau, sigma).unwrap();
    let e = Exp::new(1.0 / tau).unwrap();
    (0..n).map(|_| g.sample(&mut rng) + e.sample(&mut rng)).collect()
}

fn c8_beamline() -> Check {
    let ca = IonSpecies::ca40();
    // flat potential against L/v
    let mut worst: f64 = 0.0;
    for (len, ev) in [(0.5, 20.0), (1.533, 150.8), (2.264, 150.8), (3.0, 400.0)] {
        let p = PotentialProfile::flat(len, 0.0).map_err(|e| e.to_string())?;
        let t = time_of_flight(&p, ev, &ca, 0.0, len).map_err(|e| e.to_string())?;
        let oracle = len / (2.0 * ev * QE / ca_mass()).sqrt();
        worst = worst.max((t - oracle).abs() / oracle);
    }
    ensure(worst < 1e-6, format!("flat TOF off by {worst:e}"))?;

    // extraction-scan derivative round trip
    let e_trap = emg_samples(17.0, 1.5, 1.0, 50_000, 8);
    let barriers: Vec<f64> = (0..=80).map(|k| 10.0 + 0.25 * k as f64).collect();
    let scan = extraction_scan(&e_trap, &barriers).map_err(|e| e.to_string())?;
    let pts: Vec<(f64, f64)> = scan.iter().map(|&(b, n)| (b, n as f64)).collect();
    let dens: Vec<(f64, f64)> = differentiate_counts(&pts).map_err(|e| e.to_string())?.into_iter().map(|(x, d)| (x, -d)).collect();
    let fit = fit_emg(&dens, None).map_err(|e| e.to_string())?;
    ensure((fit.mean() - 17.0).abs() <= 0.1, format!("scan mean {}", fit.mean()))?;
    ensure((fit.sd() - 1.5).abs() <= 0.2, format!("scan sd {}", fit.sd()))?;

    // calibrated capture
    let protocol = TrapGeometry::calibrated(&ca).protocol(CALIBRATED_SWITCH_TIME).map_err(|e| e.to_string())?;
    let dist = EnergyDistribution::gaussian(CALIBRATION_ENERGY_EV, CALIBRATION_SIGMA_EV).map_err(|e| e.to_string())?;
    let stats = capture_ensemble(&protocol, &dist, 5000, &ca, 8).map_err(|e| e.to_string())?;
    ensure((0.15..=0.5).contains(&stats.fraction), format!("capture fraction {}", stats.fraction))?;
    Ok(format!(
        "flat TOF max rel err {worst:.1e}; scan fit mean {:.3} eV sd {:.3} eV; capture fraction {:.3}",
        fit.mean(),
        fit.sd(),
        stats.fraction
    ))
}

fn c9_fits() -> Check {
    let truth = EMGParams::new(15.5, 1.0, 1.5, 1000.0).unwrap();
    let grid: Vec<f64> = (0..89).map(|k| 8.0 + 0.25 * k as f64).collect();
    let clean: Vec<(f64, f64)> = grid.iter().map(|&x| (x, truth.value(x))).collect();
    let fit = fit_emg(&clean, None).map_err(|e| e.to_string())?;
    let p = fit.params;
    for (name, got, want) in [("mu", p.mu, 15.5), ("sigma", p.sigma, 1.0), ("tau", p.tau, 1.5), ("amplitude", p.amplitude, 1000.0)] {
        ensure((got - want).abs() / want < 1e-4, format!("EMG {name}: {got} vs {want}"))?;
    }

    let (c, s, a, o) = (9.3, 2.25 / (2.0 * (2.0 * 2f64.ln()).sqrt()), 100.0, 3.0);
    let prof: Vec<(f64, f64)> =
        (0..=100).map(|k| 0.2 * k as f64).map(|x| (x, o + a * (-(x - c) * (x - c) / (2.0 * s * s)).exp())).collect();
    let g = fit_gaussian(&prof).map_err(|e| e.to_string())?;
    for (name, got, want) in [("center", g.center, c), ("sigma", g.sigma, s), ("amplitude", g.amplitude, a), ("offset", g.offset, o), ("fwhm", g.fwhm, 2.25)] {
        ensure((got - want).abs() / want < 1e-4, format!("Gaussian {name}: {got} vs {want}"))?;
    }

    let (mean, sd) = (truth.mean(), truth.sd());
    let (mut dm, mut ds): (f64, f64) = (0.0, 0.0);
    for seed in 0..30 {
        let mut rng = ChaCha8Rng::seed_from_u64(900 + seed);
        let noise = Normal::new(0.0, 0.03).unwrap();
        let noisy: Vec<(f64, f64)> = clean.iter().map(|&(x, y)| (x, y * (1.0 + noise.sample(&mut rng)))).collect();
        let f = fit_emg(&noisy, None).map_err(|e| format!("seed {seed}: {e}"))?;
        dm = dm.max((f.mean() - mean).abs());
        ds = ds.max((f.sd() - sd).abs());
    }
    ensure(dm <= 0.1 && ds <= 0.2, format!("3% noise: worst |d mean| {dm:.3}, |d sd| {ds:.3}"))?;
    Ok(format!("zero-noise exact to 1e-4; 30 noisy seeds worst |d mean| {dm:.4} eV, |d sd| {ds:.4} eV"))
}

fn main() -> ExitCode {
    let criteria: [(&str, &str, Option<f64>, fn() -> Check); 10] = [
        ("1", "mode table reproduction", Some(1.0), c1_table),
        ("2", "unbalanced Th-Ca crystal", Some(1.0), c2_unbalanced),
        ("3", "plasma chain", Some(1.0), c3_plasma),
        ("4", "cooling-time inversion", None, c4_cooling),
        ("5a", "phonon ODE limits", Some(10.0), c5a_phonon_limits),
        ("5b", "strong-drive equality", Some(10.0), c5b_strong_drive),
        ("6", "trajectory spectra", Some(60.0), c6_spectra),
        ("7", "classical axialization exchange", Some(60.0), c7_exchange),
        ("8", "beamline properties", None, c8_beamline),
        ("9", "fit recovery", Some(10.0), c9_fits),
    ];
    let mut failed = 0;
    for (id, name, budget, run) in criteria {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        let result = match (result, budget) {
            (Ok(d), Some(b)) if secs > b => Err(format!("{d}; took {secs:.2} s > {b} s")),
            (r, _) => r,
        };
        let (tag, detail) = match &result {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        failed += result.is_err() as usize;
        println!("criterion {id} {tag} ({name}, {secs:.2} s): {detail}");
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion line(s) failed");
        ExitCode::FAILURE
    }
}
