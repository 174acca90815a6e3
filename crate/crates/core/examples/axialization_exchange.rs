//! Classical picture of axialization: a resonant quadrupole drive at ω_c
//! converts magnetron action into modified-cyclotron action and back.
//!
//! cargo run --release --example axialization_exchange

use std::f64::consts::PI;

use nalgebra::Vector3;
use penning::dynamics::{action_exchange, classical_exchange_rate, simulate, ParticleState, SimulationConfig};
use penning::modes::{omega_1, TrapConfig, CA_CYCLOTRON_HZ};
use penning::phonons::AxializationDrive;
use penning::IonSpecies;

fn main() -> penning::Result<()> {
    let ca = IonSpecies::ca40();
    let trap = TrapConfig::from_frequencies_hz(CA_CYCLOTRON_HZ, 333e3, ca.clone())?;
    let wc = trap.omega_c(&ca);
    let w1 = omega_1(wc, trap.axial_omega(&ca))?;

    // pure magnetron orbit of 10 µm
    let r = 10e-6;
    let ion = ParticleState::new(ca.clone(), Vector3::new(r, 0.0, 0.0), Vector3::new(0.0, -(wc / 2.0 - w1) * r, 0.0))?;

    let t_swap = 0.5e-3;
    let amplitude = 2.0 * ca.mass * w1 * PI / (2.0 * t_swap);
    for (label, omega) in [("resonant", wc), ("detuned by 20 kHz", wc + 2.0 * PI * 20e3)] {
        let drive = AxializationDrive::new(amplitude, omega)?;
        let kappa = classical_exchange_rate(&drive, &trap, &ca)?;
        let cfg = SimulationConfig::new(trap.clone(), 1.0 / (50.0 * CA_CYCLOTRON_HZ), 2.0 * t_swap)
            .with_drive(drive)
            .with_stride(20);
        let acts = action_exchange(&simulate(std::slice::from_ref(&ion), &cfg)?)?;
        let i0 = acts[0].i_m;
        println!("\n{label}: A_ax = {amplitude:.3e} J/m^2, kappa = {kappa:.1} 1/s, swap at {:.3} ms", PI / (2.0 * kappa) * 1e3);
        for a in acts.iter().step_by(acts.len() / 10) {
            println!("  t = {:>6.3} ms  I_c'/I0 = {:.4}  I_m/I0 = {:.4}", a.t * 1e3, a.i_c / i0, a.i_m / i0);
        }
    }
    Ok(())
}
