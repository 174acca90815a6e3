//! Eigenfrequencies of one ion and of a two-ion crystal aligned with the
//! magnetic field.
//!
//! Three routes are provided:
//!
//! * closed forms for a single ion,
//! * closed forms for a balanced (equal-mass) crystal,
//! * a general linearized solver that expands trap + Coulomb potential around
//!   the axial equilibrium, adds the Lorentz coupling, and diagonalizes the
//!   first-order dynamics matrix. It handles unbalanced pairs such as
//!   Th⁺–Ca⁺ and reduces to the closed forms for equal masses.
//!
//! Angular frequencies (rad/s) are used throughout; [`ModeSet::hz`] converts.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::constants::{angular_to_hz, EPSILON_0};
use crate::error::{Error, Result};
use crate::numeric::bisect;
use crate::species::IonSpecies;

/// Field strength and axial confinement of an ideal Penning trap.
///
/// `omega_z` is the axial frequency a single ion of `reference` species would
/// have; the trap curvature for any other species follows from its q/m.
#[derive(Debug, Clone, PartialEq)]
pub struct TrapConfig {
    /// T
    pub b_field: f64,
    /// rad/s
    pub omega_z: f64,
    pub reference: IonSpecies,
}

impl TrapConfig {
    pub fn new(b_field: f64, omega_z: f64, reference: IonSpecies) -> Result<Self> {
        if !(b_field > 0.0) {
            return Err(Error::InvalidParameter(format!("B must be positive, got {b_field}")));
        }
        if !(omega_z > 0.0) {
            return Err(Error::InvalidParameter(format!("omega_z must be positive, got {omega_z}")));
        }
        let trap = TrapConfig { b_field, omega_z, reference };
        let wc = trap.omega_c(&trap.reference);
        if wc * wc <= 2.0 * omega_z * omega_z {
            return Err(Error::RadialInstability {
                branch: "c'/m".into(),
                omega_c_sq: wc * wc,
                limit: 2.0 * omega_z * omega_z,
            });
        }
        Ok(trap)
    }

    /// Builds a trap from the reference species' measured cyclotron and axial
    /// frequencies (both in Hz). The field is obtained by inverting ω_c = qB/m.
    pub fn from_frequencies_hz(f_c: f64, f_z: f64, reference: IonSpecies) -> Result<Self> {
        let b = field_from_cyclotron(&reference, 2.0 * PI * f_c);
        Self::new(b, 2.0 * PI * f_z, reference)
    }

    pub fn omega_c(&self, species: &IonSpecies) -> f64 {
        cyclotron_frequency(species, self.b_field)
    }

    /// Axial frequency of a single ion of `species` in this trap.
    pub fn axial_omega(&self, species: &IonSpecies) -> f64 {
        let ratio = (species.charge / self.reference.charge) * (self.reference.mass / species.mass);
        self.omega_z * ratio.sqrt()
    }
}

/// ω_c = qB/m (rad/s).
pub fn cyclotron_frequency(species: &IonSpecies, b_field: f64) -> f64 {
    species.charge * b_field / species.mass
}

/// Inverse of [`cyclotron_frequency`]: the field that yields `omega_c`.
pub fn field_from_cyclotron(species: &IonSpecies, omega_c: f64) -> f64 {
    omega_c * species.mass / species.charge
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Branch {
    ModifiedCyclotron,
    Axial,
    Magnetron,
    CyclotronMinus,
    CyclotronPlus,
    AxialMinus,
    AxialPlus,
    MagnetronMinus,
    MagnetronPlus,
}

impl Branch {
    pub fn label(self) -> &'static str {
        match self {
            Branch::ModifiedCyclotron => "c'",
            Branch::Axial => "z",
            Branch::Magnetron => "m",
            Branch::CyclotronMinus => "c'-",
            Branch::CyclotronPlus => "c'+",
            Branch::AxialMinus => "z-",
            Branch::AxialPlus => "z+",
            Branch::MagnetronMinus => "m-",
            Branch::MagnetronPlus => "m+",
        }
    }

    /// Crystal branches in the column order of the published mode table.
    pub const CRYSTAL: [Branch; 6] = [
        Branch::CyclotronMinus,
        Branch::CyclotronPlus,
        Branch::AxialMinus,
        Branch::AxialPlus,
        Branch::MagnetronMinus,
        Branch::MagnetronPlus,
    ];

    pub const SINGLE: [Branch; 3] = [Branch::ModifiedCyclotron, Branch::Axial, Branch::Magnetron];
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mode {
    pub branch: Branch,
    /// rad/s
    pub omega: f64,
}

/// Labelled eigenfrequencies: 3 for one ion, 6 for a two-ion crystal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeSet {
    pub modes: Vec<Mode>,
}

impl ModeSet {
    fn from_pairs(pairs: &[(Branch, f64)]) -> Self {
        ModeSet {
            modes: pairs.iter().map(|&(branch, omega)| Mode { branch, omega }).collect(),
        }
    }

    pub fn omega(&self, branch: Branch) -> Option<f64> {
        self.modes.iter().find(|m| m.branch == branch).map(|m| m.omega)
    }

    /// Ordinary frequency (Hz) of a branch.
    pub fn hz(&self, branch: Branch) -> Option<f64> {
        self.omega(branch).map(angular_to_hz)
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Mode> {
        self.modes.iter()
    }
}

fn radial_split(omega_c: f64, omega_axial: f64, branch: &str) -> Result<(f64, f64)> {
    let disc = omega_c * omega_c - 2.0 * omega_axial * omega_axial;
    if disc <= 0.0 {
        return Err(Error::RadialInstability {
            branch: branch.to_string(),
            omega_c_sq: omega_c * omega_c,
            limit: 2.0 * omega_axial * omega_axial,
        });
    }
    let omega_1 = 0.5 * disc.sqrt();
    Ok((0.5 * omega_c + omega_1, 0.5 * omega_c - omega_1))
}

/// ω₁ = √(ω_c² − 2ω_z²)/2 for an axial frequency `omega_axial` (a single-ion
/// ω_z or a crystal Ω_z^±).
pub fn omega_1(omega_c: f64, omega_axial: f64) -> Result<f64> {
    radial_split(omega_c, omega_axial, "c'/m").map(|(p, m)| 0.5 * (p - m))
}

/// Single-ion modes from ω_c and ω_z directly. `omega_z = 0` is allowed and
/// gives the field-free radial limit.
pub fn single_ion_frequencies(omega_c: f64, omega_z: f64) -> Result<ModeSet> {
    if !(omega_c > 0.0) || !(omega_z >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need omega_c > 0 and omega_z >= 0, got {omega_c}, {omega_z}"
        )));
    }
    let (wp, wm) = radial_split(omega_c, omega_z, "c'/m")?;
    Ok(ModeSet::from_pairs(&[
        (Branch::ModifiedCyclotron, wp),
        (Branch::Axial, omega_z),
        (Branch::Magnetron, wm),
    ]))
}

pub fn single_ion_modes(trap: &TrapConfig, species: &IonSpecies) -> Result<ModeSet> {
    single_ion_frequencies(trap.omega_c(species), trap.axial_omega(species))
}

/// Balanced-crystal modes from ω_c and the single-ion ω_z of the species.
pub fn balanced_crystal_frequencies(omega_c: f64, omega_z: f64) -> Result<ModeSet> {
    if !(omega_c > 0.0) || !(omega_z >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need omega_c > 0 and omega_z >= 0, got {omega_c}, {omega_z}"
        )));
    }
    let z_minus = omega_z;
    let z_plus = 3f64.sqrt() * omega_z;
    let (cm, mm) = radial_split(omega_c, z_minus, "c'-/m-")?;
    let (cp, mp) = radial_split(omega_c, z_plus, "c'+/m+")?;
    Ok(ModeSet::from_pairs(&[
        (Branch::CyclotronMinus, cm),
        (Branch::CyclotronPlus, cp),
        (Branch::AxialMinus, z_minus),
        (Branch::AxialPlus, z_plus),
        (Branch::MagnetronMinus, mm),
        (Branch::MagnetronPlus, mp),
    ]))
}

pub fn balanced_crystal_modes(trap: &TrapConfig, species: &IonSpecies) -> Result<ModeSet> {
    balanced_crystal_frequencies(trap.omega_c(species), trap.axial_omega(species))
}

/// Equilibrium separation of two identical ions in a harmonic axial well,
/// d = (q²/(2πε₀ m ω_z²))^{1/3}.
pub fn ion_ion_distance(species: &IonSpecies, omega_z: f64) -> f64 {
    let q = species.charge;
    (q * q / (2.0 * PI * EPSILON_0 * species.mass * omega_z * omega_z)).cbrt()
}

/// Axial equilibrium of a two-ion string.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrystalGeometry {
    /// Axial positions relative to the trap centre (m), ordered as the input ions.
    pub positions: Vec<f64>,
    /// m
    pub distance: f64,
}

/// Solves the axial force balance k₁z₁ = −k₂z₂ = q₁q₂/(4πε₀d²).
pub fn axial_equilibrium(ions: &[IonSpecies], trap: &TrapConfig) -> Result<CrystalGeometry> {
    match ions {
        [_] => Ok(CrystalGeometry { positions: vec![0.0], distance: 0.0 }),
        [a, b] => {
            if a.charge.signum() != b.charge.signum() {
                return Err(Error::Geometry("opposite charges attract; no separated equilibrium".into()));
            }
            if a.charge.signum() != trap.reference.charge.signum() {
                return Err(Error::Geometry("trap confines the opposite charge sign".into()));
            }
            let k = |s: &IonSpecies| s.mass * trap.axial_omega(s).powi(2);
            let (ka, kb) = (k(a), k(b));
            let kappa = a.charge * b.charge / (4.0 * PI * EPSILON_0);
            let d = (kappa * (1.0 / ka + 1.0 / kb)).cbrt();
            let za = kappa / (ka * d * d);
            Ok(CrystalGeometry { positions: vec![za, za - d], distance: d })
        }
        _ => Err(Error::InvalidParameter(format!(
            "linearized solver supports 1 or 2 ions, got {}",
            ions.len()
        ))),
    }
}

/// Relative tolerance on the real part of an eigenvalue, as a fraction of the
/// largest imaginary part, below which the mode counts as oscillatory.
pub const STABILITY_TOLERANCE: f64 = 1e-6;

const CONTINUATION_STEPS: usize = 240;

/// Dimensionless ion parameters: mass in units of the reference mass,
/// trap stiffness in units of m_ref ω_z², cyclotron frequency in units of ω_z.
#[derive(Clone, Copy, Debug)]
struct ScaledIon {
    mass: f64,
    stiffness: f64,
    cyclotron: f64,
}

fn scaled_ions(ions: &[IonSpecies], trap: &TrapConfig) -> Vec<ScaledIon> {
    ions.iter()
        .map(|s| ScaledIon {
            mass: s.mass / trap.reference.mass,
            stiffness: s.charge / trap.reference.charge,
            cyclotron: trap.omega_c(s) / trap.omega_z,
        })
        .collect()
}

/// Positive oscillation frequencies of the axial and radial blocks in units of
/// ω_z, sorted ascending. Fails if any eigenvalue has a real part above the
/// stability tolerance.
fn block_frequencies(ions: &[ScaledIon], check: bool) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = ions.len();
    // Coulomb curvature κ/d³ at equilibrium equals k₁k₂/(k₁+k₂).
    let coulomb = if n == 2 {
        ions[0].stiffness * ions[1].stiffness / (ions[0].stiffness + ions[1].stiffness)
    } else {
        0.0
    };
    let mut k_axial = DMatrix::<f64>::zeros(n, n);
    let mut k_radial = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        k_axial[(i, i)] = ions[i].stiffness + 2.0 * coulomb;
        k_radial[(i, i)] = -0.5 * ions[i].stiffness - coulomb;
        for j in 0..n {
            if i != j {
                k_axial[(i, j)] = -2.0 * coulomb;
                k_radial[(i, j)] = coulomb;
            }
        }
    }

    // Axial: state (z, v_z).
    let mut axial = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        axial[(i, n + i)] = 1.0;
        for j in 0..n {
            axial[(n + i, j)] = -k_axial[(i, j)] / ions[i].mass;
        }
    }

    // Radial: state (x, y, v_x, v_y), each block of length n.
    let mut radial = DMatrix::<f64>::zeros(4 * n, 4 * n);
    for i in 0..n {
        radial[(i, 2 * n + i)] = 1.0;
        radial[(n + i, 3 * n + i)] = 1.0;
        for j in 0..n {
            radial[(2 * n + i, j)] = -k_radial[(i, j)] / ions[i].mass;
            radial[(3 * n + i, n + j)] = -k_radial[(i, j)] / ions[i].mass;
        }
        // a = (q/m) v × B with B along +z
        radial[(2 * n + i, 3 * n + i)] = ions[i].cyclotron;
        radial[(3 * n + i, 2 * n + i)] = -ions[i].cyclotron;
    }

    let positive = |m: DMatrix<f64>| -> Result<Vec<f64>> {
        let eig = m.complex_eigenvalues();
        let max_im = eig.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
        if check {
            if let Some(bad) = eig.iter().find(|c| c.re.abs() > STABILITY_TOLERANCE * max_im) {
                return Err(Error::UnstableMode { re: bad.re, im: bad.im });
            }
        }
        let mut f: Vec<f64> = eig.iter().filter(|c| c.im > 0.0).map(|c| c.im).collect();
        f.sort_by(|a, b| a.total_cmp(b));
        Ok(f)
    };
    Ok((positive(axial)?, positive(radial)?))
}

/// Matches `next` onto the labelled `prev` by minimizing the summed relative
/// frequency change over all permutations.
fn match_by_continuity(prev: &[f64], next: &[f64]) -> Vec<f64> {
    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                out.push(q);
            }
        }
        out
    }
    if prev.len() != next.len() {
        return next.to_vec();
    }
    let best = permutations(prev.len())
        .into_iter()
        .min_by(|a, b| {
            let cost = |p: &Vec<usize>| {
                p.iter()
                    .enumerate()
                    .map(|(i, &j)| ((next[j] - prev[i]) / prev[i]).abs())
                    .sum::<f64>()
            };
            cost(a).total_cmp(&cost(b))
        })
        .expect("at least one permutation");
    best.iter().map(|&j| next[j]).collect()
}

/// General linearized normal modes of one or two ions.
///
/// For two ions the masses are continued geometrically from the equal-mass
/// crystal (both ions carrying the second ion's mass) to the requested pair;
/// the ± labels are carried along by continuity. At equal masses the radial
/// frequencies sort as m⁻ < m⁺ < c'⁺ < c'⁻ and the axial ones as z⁻ < z⁺.
pub fn linearized_normal_modes(ions: &[IonSpecies], trap: &TrapConfig) -> Result<ModeSet> {
    axial_equilibrium(ions, trap)?;
    let scaled = scaled_ions(ions, trap);
    let wz = trap.omega_z;
    match scaled.as_slice() {
        [_] => {
            let (axial, radial) = block_frequencies(&scaled, true)?;
            Ok(ModeSet::from_pairs(&[
                (Branch::ModifiedCyclotron, radial[1] * wz),
                (Branch::Axial, axial[0] * wz),
                (Branch::Magnetron, radial[0] * wz),
            ]))
        }
        [first, second] => {
            if (first.stiffness - second.stiffness).abs() > 1e-12 * first.stiffness.abs() {
                return Err(Error::Geometry("general solver requires equal charges".into()));
            }
            let (axial, final_radial) = block_frequencies(&scaled, true)?;
            let ratio = first.mass / second.mass;
            let mut radial: Vec<f64> = Vec::new();
            let steps = if (ratio - 1.0).abs() < 1e-15 { 0 } else { CONTINUATION_STEPS };
            for step in 0..=steps {
                let t = if steps == 0 { 1.0 } else { step as f64 / steps as f64 };
                let mass = second.mass * ratio.powf(t);
                let ion = ScaledIon {
                    mass,
                    stiffness: first.stiffness,
                    cyclotron: first.cyclotron * first.mass / mass,
                };
                let current = if step == steps {
                    final_radial.clone()
                } else {
                    block_frequencies(&[ion, *second], false)?.1
                };
                radial = if radial.is_empty() { current } else { match_by_continuity(&radial, &current) };
            }
            // radial is labelled [m-, m+, c'+, c'-]
            Ok(ModeSet::from_pairs(&[
                (Branch::CyclotronMinus, radial[3] * wz),
                (Branch::CyclotronPlus, radial[2] * wz),
                (Branch::AxialMinus, axial[0] * wz),
                (Branch::AxialPlus, axial[1] * wz),
                (Branch::MagnetronMinus, radial[0] * wz),
                (Branch::MagnetronPlus, radial[1] * wz),
            ]))
        }
        _ => Err(Error::InvalidParameter(format!(
            "linearized solver supports 1 or 2 ions, got {}",
            ions.len()
        ))),
    }
}

/// One row of a trap-depth scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthPoint {
    /// V
    pub depth: f64,
    /// Hz
    pub f_z: f64,
    /// m
    pub distance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DepthScalingFit {
    /// Hz/√V in f_z = c·√V
    pub c_freq: f64,
    /// m·V^{1/3} in d = c·V^{−1/3}; `None` unless every row carries a distance.
    pub c_dist: Option<f64>,
    /// f_z − fit (Hz), per row.
    pub freq_residuals: Vec<f64>,
    /// d − fit (m), per row.
    pub dist_residuals: Vec<f64>,
}

impl DepthScalingFit {
    pub fn max_relative_freq_residual(&self, rows: &[DepthPoint]) -> f64 {
        self.freq_residuals
            .iter()
            .zip(rows)
            .map(|(r, p)| (r / p.f_z).abs())
            .fold(0.0, f64::max)
    }
}

/// Least-squares fits of f_z ∝ √V_TD and d ∝ V_TD^{−1/3} (both through the
/// origin, so each has a closed-form coefficient).
pub fn fit_depth_scaling(rows: &[DepthPoint]) -> Result<DepthScalingFit> {
    if rows.len() < 2 {
        return Err(Error::FitFailed { iterations: 0, reason: "need at least two rows".into() });
    }
    let first = rows[0].depth;
    if rows.iter().all(|r| (r.depth - first).abs() <= 1e-12 * first.abs()) {
        return Err(Error::FitFailed { iterations: 0, reason: "all rows share one trap depth".into() });
    }
    if rows.iter().any(|r| !(r.depth > 0.0)) {
        return Err(Error::Input("trap depths must be positive".into()));
    }
    let sxy: f64 = rows.iter().map(|r| r.f_z * r.depth.sqrt()).sum();
    let sxx: f64 = rows.iter().map(|r| r.depth).sum();
    let c_freq = sxy / sxx;
    let freq_residuals = rows.iter().map(|r| r.f_z - c_freq * r.depth.sqrt()).collect();

    let (c_dist, dist_residuals) = if rows.iter().all(|r| r.distance.is_some()) {
        let basis = |r: &DepthPoint| r.depth.powf(-1.0 / 3.0);
        let sxy: f64 = rows.iter().map(|r| r.distance.unwrap() * basis(r)).sum();
        let sxx: f64 = rows.iter().map(|r| basis(r).powi(2)).sum();
        let c = sxy / sxx;
        (Some(c), rows.iter().map(|r| r.distance.unwrap() - c * basis(r)).collect())
    } else {
        (None, Vec::new())
    };
    Ok(DepthScalingFit { c_freq, c_dist, freq_residuals, dist_residuals })
}

/// Mathieu parameters (q_z, q_r) of a ring-type Paul trap with effective size
/// `r0_eff`. `v_rf_pp` is the peak-to-peak RF amplitude; q_r = q_z/2.
pub fn mathieu_q(species: &IonSpecies, v_rf_pp: f64, omega_rf: f64, r0_eff: f64) -> (f64, f64) {
    let v0 = 0.5 * v_rf_pp;
    let q_z = 4.0 * species.charge * v0 / (species.mass * omega_rf * omega_rf * r0_eff * r0_eff);
    (q_z, 0.5 * q_z)
}

/// Effective size parameter that yields the target `q_z` (1-D root find).
pub fn calibrate_mathieu_r0(species: &IonSpecies, v_rf_pp: f64, omega_rf: f64, q_z: f64) -> Result<f64> {
    if !(q_z > 0.0 && v_rf_pp > 0.0 && omega_rf > 0.0) {
        return Err(Error::InvalidParameter("q_z, V_RF and omega_RF must be positive".into()));
    }
    let f = |r0: f64| mathieu_q(species, v_rf_pp, omega_rf, r0).0 - q_z;
    // q_z decreases monotonically in r0; widen the bracket until it straddles.
    let mut hi = 1e-3;
    while f(hi) > 0.0 {
        hi *= 2.0;
        if hi > 1e3 {
            return Err(Error::InvalidParameter("no r0 up to 1 km reaches q_z".into()));
        }
    }
    let mut lo = hi;
    while f(lo) < 0.0 {
        lo *= 0.5;
    }
    bisect(f, lo, hi, 1e-15)
}

/// Displayed decimals of each column of the reference crystal table.
pub const TABLE_COLUMNS: [&str; 7] = [
    "f_cp_minus_MHz",
    "f_cp_plus_MHz",
    "f_z_minus_kHz",
    "f_z_plus_kHz",
    "f_m_minus_kHz",
    "f_m_plus_kHz",
    "V_TD_V",
];

/// A row of the 7 T ⁴⁰Ca⁺–⁴⁰Ca⁺ crystal table: values as printed, plus the
/// number of displayed decimals of each mode column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableRow {
    pub values: [f64; 7],
    pub decimals: [u32; 6],
}

/// Measured/derived mode table of the 7 T balanced Ca⁺ crystal. Units as in
/// [`TABLE_COLUMNS`]. The axial column Ω_z⁻ is the measured input.
pub const CA_CRYSTAL_TABLE: [TableRow; 6] = [
    TableRow { values: [2.684, 2.673, 170.0, 294.0, 5.4, 16.0, 7.8], decimals: [3, 3, 0, 0, 1, 0] },
    TableRow { values: [2.674, 2.643, 286.0, 495.0, 15.0, 46.0, 24.6], decimals: [3, 3, 0, 0, 0, 0] },
    TableRow { values: [2.669, 2.626, 333.0, 577.0, 21.0, 63.0, 32.6], decimals: [3, 3, 0, 0, 0, 0] },
    TableRow { values: [2.663, 2.608, 376.0, 651.0, 27.0, 81.0, 40.6], decimals: [3, 3, 0, 0, 0, 0] },
    TableRow { values: [2.652, 2.574, 445.0, 771.0, 37.0, 115.0, 55.6], decimals: [3, 3, 0, 0, 0, 0] },
    TableRow { values: [2.641, 2.539, 504.0, 873.0, 48.0, 150.0, 69.8], decimals: [3, 3, 0, 0, 0, 0] },
];

/// Cyclotron frequency of ⁴⁰Ca⁺ used for calibrating the 7 T field (Hz).
pub const CA_CYCLOTRON_HZ: f64 = 2.689_370e6;

/// Recomputed table row: six mode frequencies in table units plus the depth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComputedRow {
    pub values: [f64; 7],
    /// computed − printed, per mode column
    pub deltas: [f64; 6],
    /// true when the computed value rounds to the printed one
    pub matches: [bool; 6],
}

/// Recomputes every row of `table` from the cyclotron frequency (Hz) and the
/// row's measured Ω_z⁻ using the balanced-crystal closed forms.
pub fn reproduce_table(f_c_hz: f64, table: &[TableRow]) -> Result<Vec<ComputedRow>> {
    let omega_c = 2.0 * PI * f_c_hz;
    table
        .iter()
        .map(|row| {
            let modes = balanced_crystal_frequencies(omega_c, 2.0 * PI * row.values[2] * 1e3)?;
            let scale = [1e6, 1e6, 1e3, 1e3, 1e3, 1e3];
            let mut values = [0.0; 7];
            let mut deltas = [0.0; 6];
            let mut matches = [false; 6];
            for (i, branch) in Branch::CRYSTAL.iter().enumerate() {
                values[i] = modes.hz(*branch).expect("crystal branch") / scale[i];
                deltas[i] = values[i] - row.values[i];
                let p = 10f64.powi(row.decimals[i] as i32);
                matches[i] = ((values[i] * p).round() - (row.values[i] * p).round()).abs() < 0.5;
            }
            values[6] = row.values[6];
            Ok(ComputedRow { values, deltas, matches })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{khz, mhz};
    use proptest::prelude::*;

    fn ca_trap(f_z_khz: f64) -> TrapConfig {
        TrapConfig::from_frequencies_hz(CA_CYCLOTRON_HZ, f_z_khz * 1e3, IonSpecies::ca40()).unwrap()
    }

    #[test]
    fn cyclotron_at_seven_tesla() {
        let ca = IonSpecies::ca40();
        let f = angular_to_hz(cyclotron_frequency(&ca, 7.0));
        assert!((f - 2.690e6).abs() < 0.5e3, "{f}");
        let b = field_from_cyclotron(&ca, mhz(2.689370));
        assert!((b - 6.9983).abs() < 1e-3, "{b}");
        assert_eq!(cyclotron_frequency(&ca, 0.0), 0.0);
    }

    #[test]
    fn single_ion_field_free_limit() {
        let m = single_ion_frequencies(mhz(2.0), 0.0).unwrap();
        assert!((m.omega(Branch::ModifiedCyclotron).unwrap() - mhz(2.0)).abs() < 1e-6);
        assert!(m.omega(Branch::Magnetron).unwrap().abs() < 1e-6);
    }

    #[test]
    fn single_ion_333khz() {
        let m = single_ion_frequencies(mhz(2.689370), khz(333.0)).unwrap();
        let fm = m.hz(Branch::Magnetron).unwrap();
        let fc = m.hz(Branch::ModifiedCyclotron).unwrap();
        assert!((fm - 20.7e3).abs() < 0.1e3, "{fm}");
        assert!((fc - 2.6686e6).abs() < 0.1e3, "{fc}");
        let wc = mhz(2.689370);
        let s: f64 = m.iter().map(|x| x.omega * x.omega).sum();
        assert!((s - wc * wc).abs() / (wc * wc) < 1e-12);
    }

    #[test]
    fn single_ion_instability() {
        let wc = mhz(1.0);
        let err = single_ion_frequencies(wc, wc / 2f64.sqrt() * 1.01).unwrap_err();
        assert!(matches!(err, Error::RadialInstability { .. }));
    }

    #[test]
    fn balanced_table_rows() {
        let m = balanced_crystal_modes(&ca_trap(333.0), &IonSpecies::ca40()).unwrap();
        let expect = [(Branch::CyclotronMinus, 2.669e6), (Branch::CyclotronPlus, 2.626e6),
            (Branch::AxialMinus, 333e3), (Branch::AxialPlus, 577e3),
            (Branch::MagnetronMinus, 21e3), (Branch::MagnetronPlus, 63e3)];
        for (b, f) in expect {
            let got = m.hz(b).unwrap();
            assert!((got - f).abs() < 0.6e3, "{b}: {got} vs {f}");
        }
        let m = balanced_crystal_modes(&ca_trap(170.0), &IonSpecies::ca40()).unwrap();
        assert!((m.hz(Branch::MagnetronMinus).unwrap() - 5.4e3).abs() < 0.05e3);
        assert!((m.hz(Branch::CyclotronPlus).unwrap() - 2.673e6).abs() < 0.6e3);
    }

    #[test]
    fn balanced_weak_confinement_limit() {
        let wc = mhz(2.689370);
        let m = balanced_crystal_frequencies(wc, 1e-3).unwrap();
        assert!(m.omega(Branch::MagnetronPlus).unwrap() < 1e-6);
        assert!((m.omega(Branch::CyclotronPlus).unwrap() - wc).abs() / wc < 1e-12);
    }

    #[test]
    fn balanced_stretch_instability_names_branch() {
        let wc = mhz(1.0);
        // 2ω_z² < ω_c² < 6ω_z²: common branch fine, stretch branch unstable
        match balanced_crystal_frequencies(wc, wc / 2.0).unwrap_err() {
            Error::RadialInstability { branch, .. } => assert_eq!(branch, "c'+/m+"),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn distance_against_brute_force_minimum() {
        let ca = IonSpecies::ca40();
        let wz = khz(333.0);
        let d = ion_ion_distance(&ca, wz);
        assert!((d - 11.7e-6).abs() < 0.1e-6, "{d}");
        // U(d) for symmetric positions ±d/2: two harmonic terms plus Coulomb
        let k = ca.mass * wz * wz;
        let energy = |x: f64| 2.0 * 0.5 * k * (x / 2.0).powi(2) + ca.charge.powi(2) / (4.0 * PI * EPSILON_0 * x);
        let (mut lo, mut hi) = (1e-6, 1e-4);
        for _ in 0..200 {
            let a = lo + (hi - lo) / 3.0;
            let b = hi - (hi - lo) / 3.0;
            if energy(a) < energy(b) { hi = b } else { lo = a }
        }
        let brute = 0.5 * (lo + hi);
        assert!((brute - d).abs() / d < 1e-6);
        let d2 = ion_ion_distance(&ca, 2.0 * wz);
        assert!((d / d2 - 2f64.powf(2.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn equilibrium_matches_closed_distance() {
        let trap = ca_trap(333.0);
        let ca = IonSpecies::ca40();
        let g = axial_equilibrium(&[ca.clone(), ca.clone()], &trap).unwrap();
        let d = ion_ion_distance(&ca, trap.omega_z);
        assert!((g.distance - d).abs() / d < 1e-12);
        assert!((g.positions[0] + g.positions[1]).abs() < 1e-12 * d);
    }

    #[test]
    fn general_solver_single_ion_reduction() {
        let trap = ca_trap(333.0);
        let ca = IonSpecies::ca40();
        let a = linearized_normal_modes(std::slice::from_ref(&ca), &trap).unwrap();
        let b = single_ion_modes(&trap, &ca).unwrap();
        for br in Branch::SINGLE {
            let (x, y) = (a.omega(br).unwrap(), b.omega(br).unwrap());
            assert!((x - y).abs() / y < 1e-10, "{br}: {x} {y}");
        }
    }

    #[test]
    fn general_solver_thorium_calcium() {
        let trap = ca_trap(333.0);
        let m = linearized_normal_modes(&[IonSpecies::th232(), IonSpecies::ca40()], &trap).unwrap();
        let khz_of = |b| m.hz(b).unwrap() / 1e3;
        assert!((khz_of(Branch::CyclotronMinus) - 2647.0).abs() <= 1.0);
        assert!((khz_of(Branch::CyclotronPlus) - 416.0).abs() <= 1.0);
        assert!((khz_of(Branch::AxialMinus) - 165.0).abs() <= 1.0);
        assert!((khz_of(Branch::AxialPlus) - 482.0).abs() <= 1.0);
        // Continuity from the balanced crystal keeps the in-phase magnetron
        // mode (≈21 kHz) on the "−" branch.
        assert!((khz_of(Branch::MagnetronMinus) - 21.0).abs() <= 1.0);
        assert!((khz_of(Branch::MagnetronPlus) - 68.0).abs() <= 1.0);
    }

    #[test]
    fn general_solver_rejects_three_ions() {
        let ca = IonSpecies::ca40();
        let err = linearized_normal_modes(&[ca.clone(), ca.clone(), ca], &ca_trap(333.0)).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter(_)));
    }

    #[test]
    fn general_solver_detects_instability() {
        // A very heavy partner pushes its radial branches past the stability edge.
        let trap = ca_trap(333.0);
        let heavy = IonSpecies::from_atomic_mass("heavy", 4000.0, 1).unwrap();
        let err = linearized_normal_modes(&[heavy, IonSpecies::ca40()], &trap).unwrap_err();
        assert!(matches!(err, Error::UnstableMode { .. }), "{err:?}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]
        #[test]
        fn general_solver_matches_balanced(b in 1.0f64..10.0, frac in 0.05f64..0.38) {
            let ca = IonSpecies::ca40();
            let wc = cyclotron_frequency(&ca, b);
            // stretch stability needs ω_z < ω_c/√6 ≈ 0.408 ω_c
            let trap = TrapConfig::new(b, frac * wc, ca.clone()).unwrap();
            let general = linearized_normal_modes(&[ca.clone(), ca.clone()], &trap).unwrap();
            let analytic = balanced_crystal_modes(&trap, &ca).unwrap();
            for br in Branch::CRYSTAL {
                let (x, y) = (general.omega(br).unwrap(), analytic.omega(br).unwrap());
                prop_assert!((x - y).abs() / y < 1e-9, "{} {} {}", br, x, y);
            }
        }

        #[test]
        fn single_ion_invariant(wc in 1e5f64..1e8, frac in 0.0f64..0.7) {
            let m = single_ion_frequencies(wc, frac * wc).unwrap();
            let s: f64 = m.iter().map(|x| x.omega * x.omega).sum();
            prop_assert!((s - wc * wc).abs() / (wc * wc) < 1e-12);
        }

        #[test]
        fn balanced_sum_rule(wc in 1e5f64..1e8, frac in 0.0f64..0.4) {
            let m = balanced_crystal_frequencies(wc, frac * wc).unwrap();
            for (c, mg) in [(Branch::CyclotronMinus, Branch::MagnetronMinus), (Branch::CyclotronPlus, Branch::MagnetronPlus)] {
                let s = m.omega(c).unwrap() + m.omega(mg).unwrap();
                prop_assert!((s - wc).abs() / wc < 1e-12);
            }
        }
    }

    #[test]
    fn table_reproduced_and_ordered() {
        let rows = reproduce_table(CA_CYCLOTRON_HZ, &CA_CRYSTAL_TABLE).unwrap();
        for r in &rows {
            assert!(r.matches.iter().all(|&m| m), "{r:?}");
            let v = r.values;
            // m- < m+ < z- < z+ < c'+ < c'-
            let chain = [v[4], v[5], v[2], v[3], v[1] * 1e3, v[0] * 1e3];
            assert!(chain.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn depth_scaling_on_table() {
        let rows: Vec<DepthPoint> = CA_CRYSTAL_TABLE
            .iter()
            .map(|r| DepthPoint { depth: r.values[6], f_z: r.values[2] * 1e3, distance: None })
            .collect();
        let fit = fit_depth_scaling(&rows).unwrap();
        assert!((fit.c_freq - 60e3).abs() < 1.5e3, "{}", fit.c_freq);
        assert!(fit.max_relative_freq_residual(&rows) < 0.06);
    }

    #[test]
    fn depth_scaling_exact_recovery_and_distances() {
        let ca = IonSpecies::ca40();
        let rows: Vec<DepthPoint> = [4.0f64, 9.0, 25.0]
            .iter()
            .map(|&v| {
                let f = 50.0 * v.sqrt();
                DepthPoint { depth: v, f_z: f, distance: Some(ion_ion_distance(&ca, 2.0 * PI * f)) }
            })
            .collect();
        let fit = fit_depth_scaling(&rows).unwrap();
        assert!((fit.c_freq - 50.0).abs() < 1e-12);
        assert!(fit.freq_residuals.iter().all(|r| r.abs() < 1e-9));
        // d ∝ ω_z^{-2/3} ∝ V^{-1/3} exactly
        let c = fit.c_dist.unwrap();
        for r in &rows {
            assert!((r.distance.unwrap() * r.depth.cbrt() - c).abs() / c < 1e-12);
        }
    }

    #[test]
    fn depth_scaling_degenerate() {
        let one = [DepthPoint { depth: 1.0, f_z: 1.0, distance: None }];
        assert!(fit_depth_scaling(&one).is_err());
        let same = [one[0], DepthPoint { depth: 1.0, f_z: 2.0, distance: None }];
        assert!(fit_depth_scaling(&same).is_err());
    }

    #[test]
    fn mathieu_calibration() {
        let ca = IonSpecies::ca40();
        let w = khz(600.0);
        let r0 = calibrate_mathieu_r0(&ca, 230.0, w, 0.49).unwrap();
        // closed form: r0² = 4qV₀/(m ω² q_z)
        let closed = (4.0 * ca.charge * 115.0 / (ca.mass * w * w * 0.49)).sqrt();
        assert!((r0 - closed).abs() / closed < 1e-12);
        let (qz, qr) = mathieu_q(&ca, 230.0, w, r0);
        assert!((qz - 0.49).abs() < 1e-12);
        assert!((qr - 0.245).abs() < 1e-12);
        let (qz2, _) = mathieu_q(&ca, 460.0, w, r0);
        assert!((qz2 / qz - 2.0).abs() < 1e-12);
    }
}
