//! Integrates a two-ion Ca⁺ crystal slightly off equilibrium and compares
//! the spectral peaks of its common and stretch motion with the analytic
//! mode frequencies. Writes the spectrum to `spectrum.csv` when an output
//! directory is given.
//!
//! cargo run --release --example trajectory_spectrum [out_dir]

use std::f64::consts::TAU;

use nalgebra::Vector3;
use penning::dynamics::{crystal_at_rest, simulate, spectrum, write_spectrum_csv, Axis, Signal, SimulationConfig};
use penning::modes::{balanced_crystal_modes, Branch, TrapConfig, CA_CYCLOTRON_HZ};
use penning::IonSpecies;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ca = IonSpecies::ca40();
    let trap = TrapConfig::from_frequencies_hz(CA_CYCLOTRON_HZ, 333e3, ca.clone())?;
    let mut ions = crystal_at_rest(&[ca.clone(), ca.clone()], &trap)?;
    let d = (ions[0].position - ions[1].position).norm();
    let a = d / 200.0;
    ions[0].position += Vector3::new(a, 0.0, a);
    ions[1].position += Vector3::new(0.3 * a, 0.0, 0.2 * a);
    ions[0].velocity.y = a * TAU * 2.6e6;

    let cfg = SimulationConfig::new(trap.clone(), 1.0 / (50.0 * CA_CYCLOTRON_HZ), 5e-3).with_stride(10);
    let t0 = std::time::Instant::now();
    let traj = simulate(&ions, &cfg)?;
    println!("{} samples in {:.2} s", traj.len(), t0.elapsed().as_secs_f64());
    let e0 = traj.energy[0];
    let drift = traj.energy.iter().map(|e| ((e - e0) / e0).abs()).fold(0.0, f64::max);
    println!("max relative energy change {drift:.2e}");

    let modes = balanced_crystal_modes(&trap, &ca)?;
    let checks: [(Axis, Signal, &[Branch]); 4] = [
        (Axis::X, Signal::Common, &[Branch::CyclotronMinus, Branch::MagnetronMinus]),
        (Axis::X, Signal::Stretch, &[Branch::CyclotronPlus, Branch::MagnetronPlus]),
        (Axis::Z, Signal::Common, &[Branch::AxialMinus]),
        (Axis::Z, Signal::Stretch, &[Branch::AxialPlus]),
    ];
    for (axis, signal, branches) in checks {
        let peaks = spectrum(&traj, axis, signal)?;
        for &b in branches {
            let f = modes.hz(b).unwrap();
            let got = peaks.iter().map(|p| p.frequency).min_by(|x, y| (x - f).abs().total_cmp(&(y - f).abs())).unwrap();
            println!("{axis:?} {signal:?} {b:>3}: peak {got:>12.2} Hz, analytic {f:>12.2} Hz, rel {:+.1e}", (got - f) / f);
        }
    }

    if let Some(dir) = std::env::args().nth(1) {
        std::fs::create_dir_all(&dir)?;
        let path = std::path::Path::new(&dir).join("spectrum.csv");
        write_spectrum_csv(&spectrum(&traj, Axis::X, Signal::Common)?, std::fs::File::create(&path)?)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
