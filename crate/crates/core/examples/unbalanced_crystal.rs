//! Normal modes of a Th⁺–Ca⁺ pair, and how they move away from the
//! balanced Ca⁺–Ca⁺ values as the partner mass grows.
//!
//! cargo run --example unbalanced_crystal

use penning::modes::{axial_equilibrium, linearized_normal_modes, TrapConfig, CA_CYCLOTRON_HZ};
use penning::IonSpecies;

fn main() -> penning::Result<()> {
    let ca = IonSpecies::ca40();
    let th = IonSpecies::th232();
    let trap = TrapConfig::from_frequencies_hz(CA_CYCLOTRON_HZ, 333e3, ca.clone())?;

    let geo = axial_equilibrium(&[th.clone(), ca.clone()], &trap)?;
    println!("Th-Ca separation {:.3} um, positions {:?} um", geo.distance * 1e6, geo.positions.iter().map(|z| z * 1e6).collect::<Vec<_>>());

    let modes = linearized_normal_modes(&[th, ca.clone()], &trap)?;
    for m in modes.iter() {
        println!("  {:>3}  {:>12.3} kHz", m.branch, m.omega / std::f64::consts::TAU / 1e3);
    }

    // Mass ratio sweep with a fictitious singly charged partner.
    println!("\nmass ratio   c'-        c'+        z-       z+       m-      m+   (kHz)");
    for ratio in [1.0, 1.5, 2.0, 3.0, 4.0, 5.8] {
        let heavy = IonSpecies::new("partner", ratio * ca.mass, ca.charge)?;
        let set = linearized_normal_modes(&[heavy, ca.clone()], &trap)?;
        let cells: Vec<String> = set.iter().map(|m| format!("{:>9.2}", m.omega / std::f64::consts::TAU / 1e3)).collect();
        println!("{ratio:>6.1}  {}", cells.join(""));
    }
    Ok(())
}
