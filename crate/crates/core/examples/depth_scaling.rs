//! Trap-depth scaling of the axial frequency (∝ √V) and the ion–ion
//! distance (∝ V^{-1/3}), plus the Paul-trap Mathieu parameters.
//!
//! cargo run --example depth_scaling

use std::f64::consts::TAU;

use penning::modes::{
    calibrate_mathieu_r0, fit_depth_scaling, ion_ion_distance, mathieu_q, DepthPoint, CA_CRYSTAL_TABLE,
};
use penning::IonSpecies;

fn main() -> penning::Result<()> {
    let ca = IonSpecies::ca40();
    let rows: Vec<DepthPoint> = CA_CRYSTAL_TABLE
        .iter()
        .map(|r| {
            let f_z = r.values[2] * 1e3;
            DepthPoint { depth: r.values[6], f_z, distance: Some(ion_ion_distance(&ca, TAU * f_z)) }
        })
        .collect();
    let fit = fit_depth_scaling(&rows)?;
    println!("f_z = {:.1} Hz/sqrt(V) * sqrt(V_TD)", fit.c_freq);
    println!("d   = {:.3} um*V^(1/3) * V_TD^(-1/3)", fit.c_dist.unwrap() * 1e6);
    println!("worst relative f_z residual {:.3e}", fit.max_relative_freq_residual(&rows));
    for (p, r) in rows.iter().zip(&fit.freq_residuals) {
        println!("  V = {:>5.1} V  f_z = {:>6.0} Hz  residual {:>+8.1} Hz  d = {:.2} um", p.depth, p.f_z, r, p.distance.unwrap() * 1e6);
    }

    let (v_rf, f_rf) = (230.0, 600e3);
    let r0 = calibrate_mathieu_r0(&ca, v_rf, TAU * f_rf, 0.49)?;
    let (qz, qr) = mathieu_q(&ca, v_rf, TAU * f_rf, r0);
    println!("\nPaul trap: r0_eff = {:.3} mm gives q_z = {qz:.3}, q_r = {qr:.3}", r0 * 1e3);
    Ok(())
}
