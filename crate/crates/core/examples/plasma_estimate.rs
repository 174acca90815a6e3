//! Cold-plasma view of a small Ca⁺ cloud: aspect ratio to plasma frequency,
//! rotation frequency, density, ion number and a temperature bound.
//!
//! cargo run --example plasma_estimate

use std::f64::consts::TAU;

use penning::modes::CA_CYCLOTRON_HZ;
use penning::plasma::{
    aspect_ratio_relation, invert_aspect_ratio, solve_plasma, PlasmaSpheroid, GAMMA_CRYSTALLIZATION,
};
use penning::IonSpecies;

fn main() -> penning::Result<()> {
    let ca = IonSpecies::ca40();
    let (f_z, f_p): (f64, f64) = (170e3, 386e3);
    let alpha = invert_aspect_ratio((f_z / f_p).powi(2))?;
    println!("f_z = {} kHz, f_p = {} kHz  ->  alpha = z0/r0 = {alpha:.4}", f_z / 1e3, f_p / 1e3);

    let r0 = 41.5e-6;
    let cloud = PlasmaSpheroid::new(alpha * r0, r0)?;
    let p = solve_plasma(alpha, TAU * f_z, TAU * CA_CYCLOTRON_HZ, &ca)?
        .with_ion_count(&cloud)
        .with_temperature_bound(20e-6, GAMMA_CRYSTALLIZATION)?;
    println!("f_r = {:.2} kHz", p.omega_r / TAU / 1e3);
    println!("n0  = {:.3e} cm^-3", p.n0 * 1e-6);
    println!("N   = {:.1} ions in {:.2e} cm^3", p.n_ions.unwrap(), cloud.volume() * 1e6);
    println!("T  <= {:.2} mK at a0 = 20 um", p.t_bound.unwrap() * 1e3);

    println!("\n alpha   w_z^2/w_p^2");
    for a in [1.01, 1.2, 1.8, 3.0, 10.0, 100.0] {
        println!("{a:>6.2}   {:.5}", aspect_ratio_relation(a)?);
    }
    Ok(())
}
