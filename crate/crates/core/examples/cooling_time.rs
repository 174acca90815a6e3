//! Doppler cooling time of a hot Ca⁺ ion and the energy inferred back from a
//! measured cooling time; residual-gas heating with the beam blocked.
//!
//! cargo run --example cooling_time

use penning::constants::{ev_to_joule, joule_to_ev};
use penning::cooling::{blocked_beam_energy, cooling_time, fit_gas_time_constant, initial_energy, CoolingModel, HeatingModel};
use penning::IonSpecies;

fn main() -> penning::Result<()> {
    let model = CoolingModel::for_species(&IonSpecies::ca40(), 3.8)?;
    println!("E0 = {:.3e} eV, t0 = {:.3e} s, r = {:.3e}", joule_to_ev(model.e0), model.t0, model.r);
    for ev in [0.1, 1.0, 4.2, 10.0] {
        println!("  E = {ev:>5.1} eV  ->  t = {:>8.2} s", cooling_time(&model, ev_to_joule(ev))?);
    }
    let e = joule_to_ev(initial_energy(&model, 165.0)?);
    println!("a 165 s cooling time means E = {e:.3} eV");

    let heating = HeatingModel::default();
    println!("\nblocked beam, E_start = {e:.2} eV, tau = {} s", heating.tau_gas);
    let mut pairs = Vec::new();
    for t_b in [0.0, 60.0, 120.0, 240.0, 480.0, 960.0] {
        let eb = blocked_beam_energy(&heating, e, t_b)?;
        let t = cooling_time(&model, ev_to_joule(eb))?;
        println!("  t_B = {t_b:>5.0} s  E = {eb:>6.2} eV  cooling {t:>8.1} s");
        pairs.push((t_b, t));
    }
    let tau = fit_gas_time_constant(&pairs, &model, e, heating.e_inf_ev)?;
    println!("time constant recovered from those points: {tau:.1} s");
    Ok(())
}
