//! One-dimensional axial transport from the ion source into the Penning trap.
//!
//! Potentials are piecewise linear in z, so the force is constant on every
//! segment. Time of flight and the in-flight capture kinematics are computed
//! segment by segment in closed form.

use std::io::{BufRead, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::Serialize;

use crate::analysis::{fit_gaussian, EMGParams};
use crate::constants::{ev_to_joule, joule_to_ev};
use crate::error::{Error, Result};
use crate::species::IonSpecies;

const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949_4;

/// V(z) on nodes (z in m, V in volts), linear in between and constant
/// beyond either end.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PotentialProfile {
    pub nodes: Vec<(f64, f64)>,
    pub label: String,
}

impl PotentialProfile {
    pub fn new(nodes: Vec<(f64, f64)>, label: &str) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidParameter(format!("profile needs at least 2 nodes, got {}", nodes.len())));
        }
        if nodes.iter().any(|(z, v)| !z.is_finite() || !v.is_finite()) {
            return Err(Error::InvalidParameter("profile nodes must be finite".into()));
        }
        if let Some(k) = nodes.windows(2).position(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::InvalidParameter(format!(
                "profile z must be strictly increasing (nodes {} and {})",
                k,
                k + 1
            )));
        }
        Ok(PotentialProfile { nodes, label: label.to_string() })
    }

    /// Constant potential `volts` over [0, length].
    pub fn flat(length: f64, volts: f64) -> Result<Self> {
        Self::new(vec![(0.0, volts), (length, volts)], "flat")
    }

    /// Parses two columns `z_mm V_volts`, whitespace or comma separated,
    /// with '#' comments.
    pub fn parse<R: BufRead>(reader: R, label: &str) -> Result<Self> {
        let mut nodes = Vec::new();
        for (k, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::Input(format!("line {}: {e}", k + 1)))?;
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let cols: Vec<&str> = body.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
            if cols.len() != 2 {
                return Err(Error::Input(format!("line {}: expected 'z_mm V_volts', got '{body}'", k + 1)));
            }
            let parse = |s: &str| s.parse::<f64>().map_err(|e| Error::Input(format!("line {}: '{s}': {e}", k + 1)));
            nodes.push((parse(cols[0])? * 1e-3, parse(cols[1])?));
        }
        Self::new(nodes, label)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
        let label = path.file_stem().and_then(|s| s.to_str()).unwrap_or("profile");
        Self::parse(std::io::BufReader::new(f), label)
    }

    pub fn write<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# {}\n# z_mm V_volts", self.label)?;
        for (z, v) in &self.nodes {
            writeln!(w, "{} {}", z * 1e3, v)?;
        }
        Ok(())
    }

    pub fn z_min(&self) -> f64 {
        self.nodes[0].0
    }

    pub fn z_max(&self) -> f64 {
        self.nodes[self.nodes.len() - 1].0
    }

    pub fn value(&self, z: f64) -> f64 {
        let n = &self.nodes;
        if z <= n[0].0 {
            return n[0].1;
        }
        if z >= n[n.len() - 1].0 {
            return n[n.len() - 1].1;
        }
        let k = n.partition_point(|p| p.0 <= z) - 1;
        let (z0, v0) = n[k];
        let (z1, v1) = n[k + 1];
        v0 + (v1 - v0) * (z - z0) / (z1 - z0)
    }

    /// Breakpoints of [a, b]: the ends plus every node strictly inside.
    fn breakpoints(&self, a: f64, b: f64) -> Vec<f64> {
        let mut pts = vec![a];
        pts.extend(self.nodes.iter().map(|p| p.0).filter(|&z| z > a && z < b));
        pts.push(b);
        pts
    }

    /// Largest V on [a, b].
    pub fn max_on(&self, a: f64, b: f64) -> f64 {
        self.breakpoints(a, b).iter().map(|&z| self.value(z)).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Smallest V on [a, b].
    pub fn min_on(&self, a: f64, b: f64) -> f64 {
        self.breakpoints(a, b).iter().map(|&z| self.value(z)).fold(f64::INFINITY, f64::min)
    }
}

/// Time (s) for an ion of total energy `e0_ev` (kinetic + qV, in eV) to move
/// from `z_start` to `z_end`.
///
/// On a segment where the kinetic energy goes linearly from K₀ to K₁ over a
/// length L, ∫dz/v = √(m/2)·2L/(√K₀ + √K₁), which is exact.
pub fn time_of_flight(profile: &PotentialProfile, e0_ev: f64, species: &IonSpecies, z_start: f64, z_end: f64) -> Result<f64> {
    if !(z_end > z_start) {
        return Err(Error::InvalidParameter(format!("z_end ({z_end}) must exceed z_start ({z_start})")));
    }
    let e0 = ev_to_joule(e0_ev);
    let kinetic = |z: f64| e0 - species.charge * profile.value(z);
    let pts = profile.breakpoints(z_start, z_end);
    let root_half_m = (0.5 * species.mass).sqrt();
    let mut t = 0.0;
    for w in pts.windows(2) {
        let (za, zb) = (w[0], w[1]);
        let (ka, kb) = (kinetic(za), kinetic(zb));
        if !(ka > 0.0) {
            return Err(Error::TurningPoint { z: za });
        }
        if !(kb > 0.0) {
            // first zero of the linear kinetic energy on this segment
            return Err(Error::TurningPoint { z: za + (zb - za) * ka / (ka - kb) });
        }
        t += root_half_m * 2.0 * (zb - za) / (ka.sqrt() + kb.sqrt());
    }
    Ok(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum EnergyShape {
    Gaussian,
    /// Exponentially modified Gaussian with exponential scale `tau` (eV).
    /// `mean` and `sigma` of the distribution are the overall mean and
    /// standard deviation.
    Emg { tau: f64 },
}

/// Source kinetic-energy distribution (eV).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyDistribution {
    pub mean: f64,
    /// Standard deviation; 0 gives a monoenergetic beam.
    pub sigma: f64,
    pub shape: EnergyShape,
}

impl EnergyDistribution {
    pub fn gaussian(mean: f64, sigma: f64) -> Result<Self> {
        Self::new(mean, sigma, EnergyShape::Gaussian)
    }

    pub fn new(mean: f64, sigma: f64, shape: EnergyShape) -> Result<Self> {
        if !(sigma >= 0.0) || !mean.is_finite() {
            return Err(Error::InvalidParameter(format!("energy distribution needs sigma >= 0, got {sigma}")));
        }
        if let EnergyShape::Emg { tau } = shape {
            if !(tau > 0.0 && tau < sigma) {
                return Err(Error::InvalidParameter(format!("EMG tau = {tau} must lie in (0, sigma = {sigma})")));
            }
        }
        Ok(EnergyDistribution { mean, sigma, shape })
    }

    /// Draws `n` energies from a generator seeded with `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        if self.sigma == 0.0 {
            return Ok(vec![self.mean; n]);
        }
        match self.shape {
            EnergyShape::Gaussian => {
                let d = Normal::new(self.mean, self.sigma).map_err(|e| Error::InvalidParameter(e.to_string()))?;
                Ok((0..n).map(|_| d.sample(&mut rng)).collect())
            }
            EnergyShape::Emg { tau } => {
                let p = EMGParams::from_moments(self.mean, self.sigma, tau, 1.0)?;
                let g = Normal::new(p.mu, p.sigma).map_err(|e| Error::InvalidParameter(e.to_string()))?;
                let e = Exp::new(1.0 / tau).map_err(|e| Error::InvalidParameter(e.to_string()))?;
                Ok((0..n).map(|_| g.sample(&mut rng) + e.sample(&mut rng)).collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub bin_centers: Vec<f64>,
    pub counts: Vec<usize>,
    pub bin_width: f64,
}

impl Histogram {
    /// `bins` equal-width bins spanning the data; all-equal data gives one bin.
    pub fn from_samples(data: &[f64], bins: usize) -> Histogram {
        if data.is_empty() {
            return Histogram { bin_centers: Vec::new(), counts: Vec::new(), bin_width: 0.0 };
        }
        let lo = data.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = data.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if hi <= lo {
            return Histogram { bin_centers: vec![lo], counts: vec![data.len()], bin_width: 0.0 };
        }
        let width = (hi - lo) / bins as f64;
        let mut counts = vec![0; bins];
        for &x in data {
            let k = (((x - lo) / width) as usize).min(bins - 1);
            counts[k] += 1;
        }
        let bin_centers = (0..bins).map(|k| lo + (k as f64 + 0.5) * width).collect();
        Histogram { bin_centers, counts, bin_width: width }
    }

    /// CSV `bin_center_us,counts` for times stored in seconds.
    pub fn write_csv_us<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "bin_center_us,counts")?;
        for (c, n) in self.bin_centers.iter().zip(&self.counts) {
            writeln!(w, "{},{}", c * 1e6, n)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TofEnsemble {
    /// Times of flight of the transmitted ions (s).
    pub tofs: Vec<f64>,
    pub lost: usize,
    pub loss_fraction: f64,
    /// s
    pub mean: f64,
    /// s; from a Gaussian fit to the histogram, or 2√(2 ln 2)·sd when the
    /// fit is not possible.
    pub fwhm: f64,
    pub histogram: Histogram,
}

pub const TOF_HISTOGRAM_BINS: usize = 60;

/// Samples `n` source energies and maps them through [`time_of_flight`];
/// blocked ions count as lost.
pub fn transport_ensemble(
    profile: &PotentialProfile,
    dist: &EnergyDistribution,
    n: usize,
    species: &IonSpecies,
    z_start: f64,
    z_end: f64,
    seed: u64,
) -> Result<TofEnsemble> {
    if n == 0 {
        return Err(Error::InvalidParameter("ensemble size must be >= 1".into()));
    }
    let mut tofs = Vec::with_capacity(n);
    let mut lost = 0;
    for e in dist.sample(n, seed)? {
        match time_of_flight(profile, e, species, z_start, z_end) {
            Ok(t) => tofs.push(t),
            Err(Error::TurningPoint { .. }) => lost += 1,
            Err(other) => return Err(other),
        }
    }
    let histogram = Histogram::from_samples(&tofs, TOF_HISTOGRAM_BINS);
    let (mean, fwhm) = if tofs.is_empty() {
        (f64::NAN, f64::NAN)
    } else {
        let mean = tofs.iter().sum::<f64>() / tofs.len() as f64;
        let sd = (tofs.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / tofs.len() as f64).sqrt();
        let fwhm = if histogram.bin_width > 0.0 {
            let pts: Vec<(f64, f64)> =
                histogram.bin_centers.iter().zip(&histogram.counts).map(|(c, &k)| (*c, k as f64)).collect();
            fit_gaussian(&pts).map(|g| g.fwhm).unwrap_or(FWHM_PER_SIGMA * sd)
        } else {
            0.0
        };
        (mean, fwhm)
    };
    Ok(TofEnsemble { tofs, lost, loss_fraction: lost as f64 / n as f64, mean, fwhm, histogram })
}

/// Injection and trapping potentials of the capture trap. Both profiles
/// span the whole path, starting at the source (first node), and must share
/// the same z range.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaptureProtocol {
    pub injection: PotentialProfile,
    pub trapping: PotentialProfile,
    /// s after ejection at which the trapping potential is applied
    pub switch_time: f64,
}

impl CaptureProtocol {
    pub fn new(injection: PotentialProfile, trapping: PotentialProfile, switch_time: f64) -> Result<Self> {
        if !(switch_time > 0.0) {
            return Err(Error::InvalidParameter(format!("switch_time must be positive, got {switch_time}")));
        }
        if injection.z_min() != trapping.z_min() || injection.z_max() != trapping.z_max() {
            return Err(Error::InvalidParameter("injection and trapping profiles must span the same z range".into()));
        }
        Ok(CaptureProtocol { injection, trapping, switch_time })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CaptureStatus {
    Trapped,
    /// Inside the profile at the switch but not bound by both barriers.
    Unbound,
    /// Left the profile (through either end) before the switch.
    Missed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CaptureOutcome {
    pub status: CaptureStatus,
    /// Total energy above the well minimum (eV), for trapped ions.
    pub e_trap: Option<f64>,
    /// Position at the switch (m), when still inside the profile.
    pub z_switch: Option<f64>,
}

impl CaptureOutcome {
    pub fn trapped(&self) -> bool {
        self.status == CaptureStatus::Trapped
    }
}

/// Ion state at time `t` after leaving the first node of `profile` with total
/// energy `e0` (J) towards +z; `None` once it has left through either end.
fn propagate(profile: &PotentialProfile, e0: f64, species: &IonSpecies, t: f64) -> Option<(f64, f64)> {
    let nodes = &profile.nodes;
    let qm = species.charge / species.mass;
    let k0 = e0 - species.charge * nodes[0].1;
    if !(k0 > 0.0) {
        // cannot leave the source
        return Some((nodes[0].0, 0.0));
    }
    let (mut z, mut v) = (nodes[0].0, (2.0 * k0 / species.mass).sqrt());
    let mut seg = 0usize;
    let mut remaining = t;
    let last = nodes.len() - 2;
    for _ in 0..1_000_000 {
        let (za, va) = nodes[seg];
        let (zb, vb) = nodes[seg + 1];
        let a = -qm * (vb - va) / (zb - za);
        // time to the next node in the direction of motion, or back out
        let (t_exit, z_exit, v_exit, next): (f64, f64, f64, Option<isize>) = {
            let to = |target: f64| -> Option<f64> {
                let v2 = v * v + 2.0 * a * (target - z);
                if v2 < 0.0 {
                    None
                } else {
                    Some(v2.sqrt())
                }
            };
            let forward = v > 0.0 || (v == 0.0 && a > 0.0);
            let backward = v < 0.0 || (v == 0.0 && a < 0.0);
            if forward {
                match to(zb) {
                    Some(s) => (time_between(v, s, a, zb - z), zb, s, Some(seg as isize + 1)),
                    None => {
                        let s = -to(za).unwrap_or(0.0);
                        (time_between(v, s, a, za - z), za, s, Some(seg as isize - 1))
                    }
                }
            } else if backward {
                match to(za) {
                    Some(s) => (time_between(v, -s, a, za - z), za, -s, Some(seg as isize - 1)),
                    None => {
                        let s = to(zb).unwrap_or(0.0);
                        (time_between(v, s, a, zb - z), zb, s, Some(seg as isize + 1))
                    }
                }
            } else {
                // at rest with no force: stays forever
                (f64::INFINITY, z, 0.0, None)
            }
        };
        if t_exit >= remaining {
            let zt = z + v * remaining + 0.5 * a * remaining * remaining;
            return Some((zt.clamp(za, zb), v + a * remaining));
        }
        remaining -= t_exit;
        z = z_exit;
        v = v_exit;
        match next {
            Some(s) if s < 0 || s as usize > last => return None,
            Some(s) => seg = s as usize,
            None => unreachable!(),
        }
    }
    None
}

/// Time to move by `dz` starting at velocity `v0` and ending at `v1` under
/// constant acceleration `a`.
fn time_between(v0: f64, v1: f64, a: f64, dz: f64) -> f64 {
    if (v0 + v1).abs() > 1e-12 * (v0.abs() + v1.abs()) && (v0 + v1) != 0.0 {
        // dz = (v0 + v1) t / 2 is exact for constant acceleration
        let t = 2.0 * dz / (v0 + v1);
        if t.is_finite() && t >= 0.0 {
            return t;
        }
    }
    if a != 0.0 {
        ((v1 - v0) / a).max(0.0)
    } else {
        0.0
    }
}

/// Follows one ion through the injection potential and applies the trapping
/// potential at `protocol.switch_time - ejection_time`.
pub fn capture(protocol: &CaptureProtocol, e0_ev: f64, species: &IonSpecies, ejection_time: f64) -> Result<CaptureOutcome> {
    let flight = protocol.switch_time - ejection_time;
    if !(flight >= 0.0) {
        return Err(Error::InvalidParameter("ion ejected after the switch".into()));
    }
    let e0 = ev_to_joule(e0_ev);
    let Some((z, v)) = propagate(&protocol.injection, e0, species, flight) else {
        return Ok(CaptureOutcome { status: CaptureStatus::Missed, e_trap: None, z_switch: None });
    };
    let trap = &protocol.trapping;
    let energy = 0.5 * species.mass * v * v + species.charge * trap.value(z);
    let left = species.charge * trap.max_on(trap.z_min(), z);
    let right = species.charge * trap.max_on(z, trap.z_max());
    if energy < left && energy < right {
        let well = species.charge * well_minimum(trap, z);
        Ok(CaptureOutcome {
            status: CaptureStatus::Trapped,
            e_trap: Some(joule_to_ev(energy - well).max(0.0)),
            z_switch: Some(z),
        })
    } else {
        Ok(CaptureOutcome { status: CaptureStatus::Unbound, e_trap: None, z_switch: Some(z) })
    }
}

/// Lowest potential between the barrier maxima enclosing `z`.
fn well_minimum(profile: &PotentialProfile, z: f64) -> f64 {
    let argmax = |a: f64, b: f64| {
        profile
            .breakpoints(a, b)
            .into_iter()
            .max_by(|p, q| profile.value(*p).total_cmp(&profile.value(*q)))
            .unwrap_or(z)
    };
    let zl = argmax(profile.z_min(), z);
    let zr = argmax(z, profile.z_max());
    profile.min_on(zl, zr)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaptureStats {
    pub attempted: usize,
    pub trapped: usize,
    pub fraction: f64,
    /// eV, over trapped ions
    pub mean_e_trap: f64,
    pub sd_e_trap: f64,
    pub e_trap: Vec<f64>,
}

/// Runs [`capture`] for `n` energies drawn from `dist`.
pub fn capture_ensemble(
    protocol: &CaptureProtocol,
    dist: &EnergyDistribution,
    n: usize,
    species: &IonSpecies,
    seed: u64,
) -> Result<CaptureStats> {
    if n == 0 {
        return Err(Error::InvalidParameter("ensemble size must be >= 1".into()));
    }
    let mut e_trap = Vec::new();
    for e in dist.sample(n, seed)? {
        if let Some(et) = capture(protocol, e, species, 0.0)?.e_trap {
            e_trap.push(et);
        }
    }
    let k = e_trap.len();
    let mean = if k > 0 { e_trap.iter().sum::<f64>() / k as f64 } else { f64::NAN };
    let sd = if k > 0 { (e_trap.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / k as f64).sqrt() } else { f64::NAN };
    Ok(CaptureStats { attempted: n, trapped: k, fraction: k as f64 / n as f64, mean_e_trap: mean, sd_e_trap: sd, e_trap })
}

/// Number of ions whose trapped energy exceeds each barrier (eV above the
/// well minimum), i.e. the ions that escape when the barrier is lowered to
/// that height.
pub fn extraction_scan(e_trap: &[f64], barriers: &[f64]) -> Result<Vec<(f64, usize)>> {
    if e_trap.is_empty() {
        return Err(Error::Input("empty trapped ensemble".into()));
    }
    let mut sorted = e_trap.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(barriers
        .iter()
        .map(|&b| {
            let below = sorted.partition_point(|&e| e <= b);
            (b, sorted.len() - below)
        })
        .collect())
}

/// Synthetic capture trap: grounded drift of length `drift`, then entrance
/// barrier, flat well of length `well`, far barrier, and a drop back to
/// ground. Voltages are in volts, lengths in metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrapGeometry {
    pub drift: f64,
    pub well: f64,
    /// ramp length of each electrode edge
    pub edge: f64,
    pub v_entrance_open: f64,
    pub v_entrance_closed: f64,
    pub v_well: f64,
    pub v_far: f64,
}

/// Mean time of flight the synthetic drift is calibrated to (s).
pub const CALIBRATION_TOF: f64 = 83.9e-6;
/// Source energy of the calibration (eV).
pub const CALIBRATION_ENERGY_EV: f64 = 150.8;
pub const CALIBRATION_SIGMA_EV: f64 = 10.4;
/// Switch time of [`TrapGeometry::calibrated`] (s after ejection).
pub const CALIBRATED_SWITCH_TIME: f64 = 93e-6;

/// Grounded drift length over which an ion of energy `e0_ev` needs `tof`.
pub fn drift_for_tof(species: &IonSpecies, e0_ev: f64, tof: f64) -> f64 {
    tof * (2.0 * ev_to_joule(e0_ev) / species.mass).sqrt()
}

impl TrapGeometry {
    /// Hand-tuned stand-in for the unpublished electrode potentials: drift
    /// matched to the calibration TOF, 180 V closed entrance, 134 V well
    /// floor. With [`CALIBRATED_SWITCH_TIME`] and a 150.8 ± 10.4 eV Ca⁺ beam
    /// it traps about a third of the ions near 17 eV.
    pub fn calibrated(species: &IonSpecies) -> Self {
        TrapGeometry {
            drift: drift_for_tof(species, CALIBRATION_ENERGY_EV, CALIBRATION_TOF),
            well: 0.02,
            edge: 0.01,
            v_entrance_open: 145.0,
            v_entrance_closed: 180.0,
            v_well: 134.0,
            v_far: 160.0,
        }
    }

    fn nodes(&self, v_entrance: f64) -> Vec<(f64, f64)> {
        let (d, w, e) = (self.drift, self.well, self.edge);
        vec![
            (0.0, 0.0),
            (d, 0.0),
            (d + e, v_entrance),
            (d + 2.0 * e, v_entrance),
            (d + 3.0 * e, self.v_well),
            (d + 3.0 * e + w, self.v_well),
            (d + 4.0 * e + w, self.v_far),
            (d + 5.0 * e + w, self.v_far),
            (d + 6.0 * e + w, 0.0),
            (d + 7.0 * e + w, 0.0),
        ]
    }

    pub fn protocol(&self, switch_time: f64) -> Result<CaptureProtocol> {
        CaptureProtocol::new(
            PotentialProfile::new(self.nodes(self.v_entrance_open), "injection")?,
            PotentialProfile::new(self.nodes(self.v_entrance_closed), "trapping")?,
            switch_time,
        )
    }
}
