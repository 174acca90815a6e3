//! Mean phonon numbers of the modified-cyclotron and magnetron modes under
//! Doppler cooling, with and without the axialization drive.
//!
//! cargo run --example phonon_dynamics

use penning::phonons::{
    coupling_strength, integrate_rate_equations, steady_state_axialized, steady_state_free, AxializationDrive,
    ModeRates, ModeScale, PhononState,
};
use penning::modes::{TrapConfig, CA_CYCLOTRON_HZ};
use penning::IonSpecies;

fn main() -> penning::Result<()> {
    // The magnetron mode barely cools on its own.
    let rates = ModeRates::new(2000.0, 200.0, 120.0, 100.0)?;
    let (nc, nm) = steady_state_free(&rates)?;
    println!("no drive: n_c' = {nc:.3}, n_m = {nm:.3}");

    let ca = IonSpecies::ca40();
    let trap = TrapConfig::from_frequencies_hz(CA_CYCLOTRON_HZ, 333e3, ca.clone())?;
    let scale = ModeScale::single_ion(&trap, &ca)?;
    println!("X = {:.2} nm", scale.x * 1e9);

    println!("\n  A_ax (J/m^2)     g (1/s)    n_c'      n_m      n_ax");
    for a in [0.0, 1e-19, 1e-18, 1e-17, 1e-16] {
        let drive = AxializationDrive::new(a, trap.omega_c(&ca))?;
        let g = coupling_strength(&drive, &scale);
        let s = steady_state_axialized(&rates, g)?;
        println!("  {a:>10.1e}  {g:>10.2}  {:>8.4}  {:>8.4}  {:>8.4}", s.n_c, s.n_m, s.n_ax);
    }

    let g = 500.0;
    let series = integrate_rate_equations(PhononState::new(0.0, 50.0, 0.0), &rates, g, 0.1, 1e-5)?;
    println!("\ng = {g}/s, starting from a hot magnetron mode");
    for s in series.iter().step_by(1000) {
        println!("  t = {:>6.3} s  n_c' = {:>8.4}  n_m = {:>8.4}", s.t, s.state.n_c, s.state.n_m);
    }
    Ok(())
}
