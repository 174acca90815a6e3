//! Ion transport from the source to the capture trap: time-of-flight
//! spread, in-flight capture by switching the entrance electrode, and the
//! extraction scan that measures the trapped-energy distribution.
//!
//! cargo run --release --example beamline_capture

use penning::analysis::{differentiate_counts, fit_emg};
use penning::beamline::{
    capture_ensemble, extraction_scan, transport_ensemble, EnergyDistribution, PotentialProfile, TrapGeometry,
    CALIBRATED_SWITCH_TIME, CALIBRATION_ENERGY_EV, CALIBRATION_SIGMA_EV,
};
use penning::IonSpecies;

fn main() -> penning::Result<()> {
    let ca = IonSpecies::ca40();
    let geometry = TrapGeometry::calibrated(&ca);
    let source = EnergyDistribution::gaussian(CALIBRATION_ENERGY_EV, CALIBRATION_SIGMA_EV)?;

    let drift = PotentialProfile::flat(geometry.drift, 0.0)?;
    let tof = transport_ensemble(&drift, &source, 20_000, &ca, 0.0, geometry.drift, 1)?;
    println!("drift {:.3} m: mean TOF {:.2} us, FWHM {:.2} us", geometry.drift, tof.mean * 1e6, tof.fwhm * 1e6);

    println!("\nswitch time scan");
    for dt in [-6e-6, -3e-6, 0.0, 3e-6, 6e-6] {
        let protocol = geometry.protocol(CALIBRATED_SWITCH_TIME + dt)?;
        let stats = capture_ensemble(&protocol, &source, 4000, &ca, 2)?;
        println!(
            "  t_switch = {:>5.1} us  captured {:>5.1} %  E_trap = {:>5.2} +/- {:.2} eV",
            protocol.switch_time * 1e6,
            100.0 * stats.fraction,
            stats.mean_e_trap,
            stats.sd_e_trap
        );
    }

    let stats = capture_ensemble(&geometry.protocol(CALIBRATED_SWITCH_TIME)?, &source, 20_000, &ca, 3)?;
    let barriers: Vec<f64> = (0..=60).map(|k| 0.5 * k as f64).collect();
    let scan = extraction_scan(&stats.e_trap, &barriers)?;
    let counts: Vec<(f64, f64)> = scan.iter().map(|&(b, n)| (b, n as f64)).collect();
    let density: Vec<(f64, f64)> = differentiate_counts(&counts)?.into_iter().map(|(e, d)| (e, -d)).collect();
    let fit = fit_emg(&density, None)?;
    println!(
        "\nextraction scan of {} trapped ions: EMG mean {:.2} eV, sd {:.2} eV (ensemble {:.2}, {:.2})",
        stats.trapped,
        fit.mean(),
        fit.sd(),
        stats.mean_e_trap,
        stats.sd_e_trap
    );
    Ok(())
}
