//! Single-ion and balanced-crystal modes at 7 T, and the six-row Ca⁺–Ca⁺
//! table recomputed from the measured axial frequencies.
//!
//! cargo run --example mode_table

use penning::modes::{
    balanced_crystal_modes, reproduce_table, single_ion_modes, Branch, TrapConfig, CA_CRYSTAL_TABLE,
    CA_CYCLOTRON_HZ, TABLE_COLUMNS,
};
use penning::IonSpecies;

fn main() -> penning::Result<()> {
    let ca = IonSpecies::ca40();
    let trap = TrapConfig::from_frequencies_hz(CA_CYCLOTRON_HZ, 333e3, ca.clone())?;
    println!("B = {:.5} T", trap.b_field);

    println!("\nsingle ion, f_z = 333 kHz");
    for m in single_ion_modes(&trap, &ca)?.iter() {
        println!("  {:>3}  {:>12.3} Hz", m.branch, m.omega / std::f64::consts::TAU);
    }
    println!("balanced crystal");
    let crystal = balanced_crystal_modes(&trap, &ca)?;
    for b in Branch::CRYSTAL {
        println!("  {:>3}  {:>12.3} Hz", b, crystal.hz(b).unwrap());
    }

    println!("\n{}", TABLE_COLUMNS[..6].join("  "));
    for (row, printed) in reproduce_table(CA_CYCLOTRON_HZ, &CA_CRYSTAL_TABLE)?.iter().zip(&CA_CRYSTAL_TABLE) {
        let cells: Vec<String> = (0..6)
            .map(|i| {
                let mark = if row.matches[i] { ' ' } else { '*' };
                format!("{:>9.4}{mark}", row.values[i])
            })
            .collect();
        println!("{}   (printed f_z- {} kHz)", cells.join(" "), printed.values[2]);
    }
    Ok(())
}
