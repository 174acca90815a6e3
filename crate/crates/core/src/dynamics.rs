//! Classical trajectories of one or two ions in an ideal Penning trap, with an
//! optional quadrupolar axialization drive and Doppler-cooling beams.
//!
//! The integrator splits each step into the radial motion in B plus the
//! radial trap field, which is linear and solved exactly (velocities rotate
//! at ω_c' and ω_m), and kicks from everything else: axial trap force,
//! Coulomb repulsion, RF drive and radiation pressure. Strang steps are composed into a fourth-order
//! symmetric scheme. Because every sub-kick vanishes at a force balance, a
//! crystal started at its equilibrium stays there to round-off.

use std::io::Write;

use nalgebra::Vector3;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::constants::COULOMB_K;
use crate::cooling::{scattering_magnitude, CoolingModel};
use crate::error::{Error, Result};
use crate::modes::{axial_equilibrium, omega_1, TrapConfig};
use crate::phonons::AxializationDrive;
use crate::species::IonSpecies;

const MIN_SEPARATION: f64 = 1e-9;

/// Minimum number of samples accepted by [`spectrum`].
pub const MIN_SPECTRUM_SAMPLES: usize = 1 << 12;

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleState {
    /// m
    pub position: Vector3<f64>,
    /// m/s
    pub velocity: Vector3<f64>,
    pub species: IonSpecies,
}

impl ParticleState {
    pub fn new(species: IonSpecies, position: Vector3<f64>, velocity: Vector3<f64>) -> Result<Self> {
        if position.iter().chain(velocity.iter()).any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("particle state must be finite".into()));
        }
        Ok(ParticleState { position, velocity, species })
    }

    pub fn at_rest(species: IonSpecies, position: Vector3<f64>) -> Result<Self> {
        Self::new(species, position, Vector3::zeros())
    }
}

/// Ions placed at their axial equilibrium on the trap axis, at rest.
pub fn crystal_at_rest(ions: &[IonSpecies], trap: &TrapConfig) -> Result<Vec<ParticleState>> {
    let geometry = axial_equilibrium(ions, trap)?;
    ions.iter()
        .zip(&geometry.positions)
        .map(|(s, &z)| ParticleState::at_rest(s.clone(), Vector3::new(0.0, 0.0, z)))
        .collect()
}

/// A Doppler-cooling beam. It acts on every ion whose mass equals the mass
/// the cooling model was built for.
#[derive(Debug, Clone, PartialEq)]
pub struct LaserBeam {
    pub model: CoolingModel,
    /// rad/s, negative = red
    pub detuning: f64,
    /// unit vector along the propagation direction
    pub direction: Vector3<f64>,
}

impl LaserBeam {
    pub fn new(model: CoolingModel, detuning: f64, direction: Vector3<f64>) -> Result<Self> {
        let n = direction.norm();
        if !(n > 0.0) || !detuning.is_finite() {
            return Err(Error::InvalidParameter("beam needs a finite detuning and nonzero direction".into()));
        }
        Ok(LaserBeam { model, detuning, direction: direction / n })
    }

    fn addresses(&self, species: &IonSpecies) -> bool {
        (species.mass - self.model.mass).abs() <= 1e-9 * self.model.mass
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    /// s
    pub dt: f64,
    /// s
    pub duration: f64,
    pub trap: TrapConfig,
    pub drive: Option<AxializationDrive>,
    pub beams: Vec<LaserBeam>,
    /// Record every `record_stride`-th step.
    pub record_stride: usize,
}

impl SimulationConfig {
    pub fn new(trap: TrapConfig, dt: f64, duration: f64) -> Self {
        SimulationConfig { dt, duration, trap, drive: None, beams: Vec::new(), record_stride: 1 }
    }

    pub fn with_drive(mut self, drive: AxializationDrive) -> Self {
        self.drive = Some(drive);
        self
    }

    pub fn with_beams(mut self, beams: Vec<LaserBeam>) -> Self {
        self.beams = beams;
        self
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.record_stride = stride;
        self
    }

    /// Number of recorded samples, floor(duration/(dt·stride)).
    pub fn samples(&self) -> usize {
        (self.duration / (self.dt * self.record_stride as f64) + 1e-9).floor() as usize
    }

    /// Largest admissible step for these ions: 0.05 of the fastest
    /// modified-cyclotron period.
    pub fn max_dt(&self, ions: &[IonSpecies]) -> Result<f64> {
        let mut fastest: f64 = 0.0;
        for s in ions {
            let wc = self.trap.omega_c(s).abs();
            let w1 = omega_1(wc, self.trap.axial_omega(s))?;
            fastest = fastest.max(wc / 2.0 + w1);
        }
        Ok(0.05 * 2.0 * std::f64::consts::PI / fastest)
    }

    fn validate(&self, ions: &[IonSpecies]) -> Result<usize> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::StepSize(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.duration >= self.dt) {
            return Err(Error::InvalidParameter(format!(
                "duration {} shorter than dt {}",
                self.duration, self.dt
            )));
        }
        if self.record_stride == 0 {
            return Err(Error::InvalidParameter("record_stride must be >= 1".into()));
        }
        let max_dt = self.max_dt(ions)?;
        if self.dt >= max_dt {
            return Err(Error::StepSize(format!(
                "dt = {:.3e} s must be below 0.05/f_c' = {:.3e} s",
                self.dt, max_dt
            )));
        }
        let n = self.samples();
        if n == 0 {
            return Err(Error::InvalidParameter("duration shorter than one record stride".into()));
        }
        Ok(n)
    }
}

/// Uniformly sampled trajectory. Per-ion series are indexed `[ion][sample]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub positions: Vec<Vec<Vector3<f64>>>,
    pub velocities: Vec<Vec<Vector3<f64>>>,
    /// Kinetic + trap + Coulomb energy (J); the RF drive is excluded.
    pub energy: Vec<f64>,
    pub species: Vec<IonSpecies>,
    pub trap: TrapConfig,
    pub drive: Option<AxializationDrive>,
    pub beams_on: bool,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn sample_interval(&self) -> f64 {
        if self.times.len() < 2 {
            return 0.0;
        }
        self.times[1] - self.times[0]
    }

    /// Canonical angular momentum L_z of the whole system at every sample.
    pub fn angular_momentum(&self) -> Vec<f64> {
        (0..self.len())
            .map(|k| {
                self.species
                    .iter()
                    .enumerate()
                    .map(|(i, s)| {
                        canonical_lz(s, &self.positions[i][k], &self.velocities[i][k], self.trap.b_field)
                    })
                    .sum()
            })
            .collect()
    }

    /// CSV with columns t, then x,y,z,vx,vy,vz per ion (suffix _0, _1, ...).
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let mut header = vec!["t".to_string()];
        for i in 0..self.species.len() {
            for c in ["x", "y", "z", "vx", "vy", "vz"] {
                header.push(format!("{c}_{i}"));
            }
        }
        writeln!(w, "{}", header.join(","))?;
        for k in 0..self.len() {
            write!(w, "{:e}", self.times[k])?;
            for i in 0..self.species.len() {
                let (p, v) = (self.positions[i][k], self.velocities[i][k]);
                for c in p.iter().chain(v.iter()) {
                    write!(w, ",{c:e}")?;
                }
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// L_z = m(x v_y − y v_x) + (qB/2)(x² + y²), including the vector-potential term.
pub fn canonical_lz(species: &IonSpecies, position: &Vector3<f64>, velocity: &Vector3<f64>, b_field: f64) -> f64 {
    let (x, y) = (position.x, position.y);
    species.mass * (x * velocity.y - y * velocity.x) + 0.5 * species.charge * b_field * (x * x + y * y)
}

/// Kinetic + trap + Coulomb energy (J) of a set of ions.
pub fn total_energy(ions: &[ParticleState], trap: &TrapConfig) -> f64 {
    let sys = System::new(ions, trap, None, &[]);
    let pos: Vec<[f64; 3]> = ions.iter().map(|p| to_arr(&p.position)).collect();
    let vel: Vec<[f64; 3]> = ions.iter().map(|p| to_arr(&p.velocity)).collect();
    sys.energy(&pos, &vel)
}

fn to_arr(v: &Vector3<f64>) -> [f64; 3] {
    [v.x, v.y, v.z]
}

fn to_vec(a: &[f64; 3]) -> Vector3<f64> {
    Vector3::new(a[0], a[1], a[2])
}

struct Ion {
    mass: f64,
    charge: f64,
    omega_c: f64,
    /// q times the trap curvature (N/m); axial force is −k z, radial +k r/2.
    k: f64,
    beams: Vec<usize>,
}

struct System<'a> {
    ions: Vec<Ion>,
    drive: Option<AxializationDrive>,
    beams: &'a [LaserBeam],
}

impl<'a> System<'a> {
    fn new(states: &[ParticleState], trap: &TrapConfig, drive: Option<AxializationDrive>, beams: &'a [LaserBeam]) -> Self {
        let curvature = trap.reference.mass * trap.omega_z * trap.omega_z / trap.reference.charge;
        let ions = states
            .iter()
            .map(|p| Ion {
                mass: p.species.mass,
                charge: p.species.charge,
                omega_c: trap.omega_c(&p.species),
                k: p.species.charge * curvature,
                beams: (0..beams.len()).filter(|&b| beams[b].addresses(&p.species)).collect(),
            })
            .collect();
        System { ions, drive, beams }
    }

    fn forces(&self, t: f64, pos: &[[f64; 3]], vel: &[[f64; 3]], out: &mut [[f64; 3]]) {
        let a_t = self.drive.map(|d| d.amplitude * (d.omega * t).sin()).unwrap_or(0.0);
        for (i, ion) in self.ions.iter().enumerate() {
            let [x, y, z] = pos[i];
            // the radial trap field is part of the exact flow
            let mut f = [-2.0 * a_t * x, 2.0 * a_t * y, -ion.k * z];
            for &b in &ion.beams {
                let beam = &self.beams[b];
                let d = &beam.direction;
                let v_along = d.x * vel[i][0] + d.y * vel[i][1] + d.z * vel[i][2];
                let mag = scattering_magnitude(&beam.model, v_along, beam.detuning);
                f[0] += mag * d.x;
                f[1] += mag * d.y;
                f[2] += mag * d.z;
            }
            out[i] = f;
        }
        if self.ions.len() == 2 {
            let r = [pos[0][0] - pos[1][0], pos[0][1] - pos[1][1], pos[0][2] - pos[1][2]];
            let d2 = r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
            let s = COULOMB_K * self.ions[0].charge * self.ions[1].charge / (d2 * d2.sqrt());
            for c in 0..3 {
                out[0][c] += s * r[c];
                out[1][c] -= s * r[c];
            }
        }
    }

    fn energy(&self, pos: &[[f64; 3]], vel: &[[f64; 3]]) -> f64 {
        let mut e = 0.0;
        for (i, ion) in self.ions.iter().enumerate() {
            let [x, y, z] = pos[i];
            let v = vel[i];
            e += 0.5 * ion.mass * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
            e += 0.5 * ion.k * (z * z - 0.5 * (x * x + y * y));
        }
        if self.ions.len() == 2 {
            let d = separation(pos);
            e += COULOMB_K * self.ions[0].charge * self.ions[1].charge / d;
        }
        e
    }
}

fn separation(pos: &[[f64; 3]]) -> f64 {
    let r = [pos[0][0] - pos[1][0], pos[0][1] - pos[1][1], pos[0][2] - pos[1][2]];
    (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt()
}

/// Exact flow over one substep of the linear radial problem
/// ü = (ω_z²/2)u − iω_c u̇ (u = x + iy), plus free axial drift. It is a
/// complex 2×2 map on (u, u̇) built from the eigenfrequencies ω_± = ω_c/2 ± ω₁.
#[derive(Clone, Copy)]
struct RadialFlow {
    uu: Complex64,
    uv: Complex64,
    vu: Complex64,
    vv: Complex64,
    h: f64,
}

impl RadialFlow {
    fn new(omega_c: f64, omega_z: f64, h: f64) -> Self {
        let w1 = 0.5 * (omega_c * omega_c - 2.0 * omega_z * omega_z).sqrt();
        let (wp, wm) = (0.5 * omega_c + w1, 0.5 * omega_c - w1);
        let ep = Complex64::from_polar(1.0, -wp * h);
        let em = Complex64::from_polar(1.0, -wm * h);
        let i = Complex64::new(0.0, 1.0);
        let n = 1.0 / (2.0 * w1);
        RadialFlow {
            uu: (ep * -wm + em * wp) * n,
            uv: i * (ep - em) * n,
            vu: i * (ep - em) * (wp * wm * n),
            vv: (ep * wp - em * wm) * n,
            h,
        }
    }

    fn apply(&self, p: &mut [f64; 3], v: &mut [f64; 3]) {
        let u = Complex64::new(p[0], p[1]);
        let du = Complex64::new(v[0], v[1]);
        let u1 = self.uu * u + self.uv * du;
        let du1 = self.vu * u + self.vv * du;
        p[0] = u1.re;
        p[1] = u1.im;
        p[2] += v[2] * self.h;
        v[0] = du1.re;
        v[1] = du1.im;
    }
}

// Fourth-order symmetric composition of Strang steps.
fn yoshida_weights() -> [f64; 3] {
    let cbrt2 = 2f64.cbrt();
    let w1 = 1.0 / (2.0 - cbrt2);
    [w1, -cbrt2 * w1, w1]
}

/// Integrates the equations of motion and records every `record_stride`-th
/// state starting at t = 0.
pub fn simulate(ions: &[ParticleState], config: &SimulationConfig) -> Result<Trajectory> {
    if ions.is_empty() || ions.len() > 2 {
        return Err(Error::InvalidParameter(format!("simulate supports 1 or 2 ions, got {}", ions.len())));
    }
    let species: Vec<IonSpecies> = ions.iter().map(|p| p.species.clone()).collect();
    let n_samples = config.validate(&species)?;
    let sys = System::new(ions, &config.trap, config.drive, &config.beams);

    let mut pos: Vec<[f64; 3]> = ions.iter().map(|p| to_arr(&p.position)).collect();
    let mut vel: Vec<[f64; 3]> = ions.iter().map(|p| to_arr(&p.velocity)).collect();
    let n = ions.len();
    if n == 2 && separation(&pos) < MIN_SEPARATION {
        return Err(Error::Singularity { i: 0, j: 1 });
    }

    let weights = yoshida_weights();
    let flows: Vec<Vec<RadialFlow>> = weights
        .iter()
        .map(|w| {
            sys.ions
                .iter()
                .map(|ion| RadialFlow::new(ion.omega_c, (ion.k / ion.mass).sqrt(), w * config.dt))
                .collect()
        })
        .collect();

    let mut traj = Trajectory {
        times: Vec::with_capacity(n_samples),
        positions: vec![Vec::with_capacity(n_samples); n],
        velocities: vec![Vec::with_capacity(n_samples); n],
        energy: Vec::with_capacity(n_samples),
        species,
        trap: config.trap.clone(),
        drive: config.drive,
        beams_on: !config.beams.is_empty(),
    };
    let record = |t: f64, pos: &[[f64; 3]], vel: &[[f64; 3]], traj: &mut Trajectory| {
        traj.times.push(t);
        for i in 0..n {
            traj.positions[i].push(to_vec(&pos[i]));
            traj.velocities[i].push(to_vec(&vel[i]));
        }
        traj.energy.push(sys.energy(pos, vel));
    };

    let mut force = vec![[0.0; 3]; n];
    let kick = |t: f64, h: f64, pos: &[[f64; 3]], vel: &mut [[f64; 3]], force: &mut [[f64; 3]]| {
        sys.forces(t, pos, vel, force);
        for i in 0..n {
            let s = h / sys.ions[i].mass;
            for c in 0..3 {
                vel[i][c] += s * force[i][c];
            }
        }
    };

    record(0.0, &pos, &vel, &mut traj);
    let total_steps = (n_samples - 1) * config.record_stride;
    for step in 1..=total_steps {
        let mut t = (step - 1) as f64 * config.dt;
        for (w, flow) in weights.iter().zip(&flows) {
            let h = w * config.dt;
            kick(t, 0.5 * h, &pos, &mut vel, &mut force);
            for i in 0..n {
                flow[i].apply(&mut pos[i], &mut vel[i]);
            }
            t += h;
            kick(t, 0.5 * h, &pos, &mut vel, &mut force);
        }
        t = step as f64 * config.dt;
        if n == 2 && separation(&pos) < MIN_SEPARATION {
            return Err(Error::Singularity { i: 0, j: 1 });
        }
        if pos.iter().chain(vel.iter()).flatten().any(|c| !c.is_finite()) {
            return Err(Error::StepSize(format!("non-finite state at t = {t:.6e} s")));
        }
        if step % config.record_stride == 0 {
            record(t, &pos, &vel, &mut traj);
        }
    }
    Ok(traj)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

/// Which signal to analyse: one ion's coordinate, or the normal-mode
/// combinations of a two-ion crystal. `Common` is (u₁ + u₂)/√2 (in-phase,
/// the "−" branches of a balanced crystal); `Stretch` is (u₁ − u₂)/√2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Signal {
    Ion(usize),
    Common,
    Stretch,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralPeak {
    /// Hz
    pub frequency: f64,
    /// Coordinate amplitude (m) estimated from the windowed peak height.
    pub amplitude: f64,
}

/// Peaks of the amplitude spectrum of the selected coordinate, strongest
/// first. A 4-term Blackman–Harris window keeps leakage below 10⁻⁴ of the
/// main peak; peak positions come from a parabola through the log magnitude
/// of the three bins around each local maximum.
pub fn spectrum(traj: &Trajectory, axis: Axis, signal: Signal) -> Result<Vec<SpectralPeak>> {
    let n = traj.len();
    if n < MIN_SPECTRUM_SAMPLES {
        return Err(Error::TooShort { len: n, min: MIN_SPECTRUM_SAMPLES });
    }
    let a = axis.index();
    let ions = traj.species.len();
    let series: Vec<f64> = match signal {
        Signal::Ion(i) => {
            if i >= ions {
                return Err(Error::InvalidParameter(format!("ion index {i} out of range")));
            }
            traj.positions[i].iter().map(|p| p[a]).collect()
        }
        Signal::Common | Signal::Stretch => {
            if ions != 2 {
                return Err(Error::InvalidParameter("mode combinations need two ions".into()));
            }
            let sign = if signal == Signal::Common { 1.0 } else { -1.0 };
            (0..n)
                .map(|k| (traj.positions[0][k][a] + sign * traj.positions[1][k][a]) / 2f64.sqrt())
                .collect()
        }
    };
    let dt = traj.sample_interval();
    Ok(peaks(&series, dt, 1e-4))
}

fn blackman_harris(k: usize, n: usize) -> f64 {
    use std::f64::consts::PI;
    let x = 2.0 * PI * k as f64 / (n - 1) as f64;
    0.35875 - 0.48829 * x.cos() + 0.14128 * (2.0 * x).cos() - 0.01168 * (3.0 * x).cos()
}

fn peaks(series: &[f64], dt: f64, rel_threshold: f64) -> Vec<SpectralPeak> {
    let n = series.len();
    let mean = series.iter().sum::<f64>() / n as f64;
    let len = 4 * n.next_power_of_two();
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    let mut wsum = 0.0;
    for (k, &x) in series.iter().enumerate() {
        let w = blackman_harris(k, n);
        wsum += w;
        buf[k] = Complex64::new((x - mean) * w, 0.0);
    }
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    let mag: Vec<f64> = buf[..len / 2].iter().map(|c| 2.0 * c.norm() / wsum).collect();
    let max = mag.iter().skip(1).cloned().fold(0.0, f64::max);
    if max <= 0.0 {
        return Vec::new();
    }
    let floor = rel_threshold * max;
    let df = 1.0 / (len as f64 * dt);
    let mut out = Vec::new();
    for k in 1..mag.len() - 1 {
        let (l, c, r) = (mag[k - 1], mag[k], mag[k + 1]);
        if c >= floor && c > l && c >= r && l > 0.0 && r > 0.0 {
            let (ll, lc, lr) = (l.ln(), c.ln(), r.ln());
            let denom = ll - 2.0 * lc + lr;
            let delta = if denom != 0.0 { 0.5 * (ll - lr) / denom } else { 0.0 };
            out.push(SpectralPeak {
                frequency: (k as f64 + delta) * df,
                amplitude: (lc - 0.25 * (ll - lr) * delta).exp(),
            });
        }
    }
    out.sort_by(|a, b| b.amplitude.total_cmp(&a.amplitude));
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ActionSample {
    /// s
    pub t: f64,
    /// modified-cyclotron action (J·s)
    pub i_c: f64,
    /// magnetron action (J·s)
    pub i_m: f64,
}

/// Splits the radial motion u = x + iy of a single ion into its circular
/// components and returns their classical actions. With u̇ = v_x + i v_y:
///
/// ```text
/// U₊ = (i u̇ − ω_m u)/(2ω₁),  U₋ = (ω_c' u − i u̇)/(2ω₁)
/// I_c' = m ω₁ |U₊|²,          I_m = m ω₁ |U₋|²
/// ```
///
/// Valid for the ideal quadrupole field only; used as a diagnostic.
pub fn action_exchange(traj: &Trajectory) -> Result<Vec<ActionSample>> {
    if traj.species.len() != 1 {
        return Err(Error::NotApplicable("action decomposition needs a single ion".into()));
    }
    if traj.drive.is_none() {
        return Err(Error::NotApplicable("no axialization drive in this run".into()));
    }
    if traj.beams_on {
        return Err(Error::NotApplicable("actions are only meaningful without cooling beams".into()));
    }
    let s = &traj.species[0];
    let wc = traj.trap.omega_c(s);
    let w1 = omega_1(wc, traj.trap.axial_omega(s))?;
    let (w_plus, w_minus) = (wc / 2.0 + w1, wc / 2.0 - w1);
    let i = Complex64::new(0.0, 1.0);
    Ok((0..traj.len())
        .map(|k| {
            let p = traj.positions[0][k];
            let v = traj.velocities[0][k];
            let u = Complex64::new(p.x, p.y);
            let du = Complex64::new(v.x, v.y);
            let up = (i * du - w_minus * u) / (2.0 * w1);
            let um = (w_plus * u - i * du) / (2.0 * w1);
            ActionSample { t: traj.times[k], i_c: s.mass * w1 * up.norm_sqr(), i_m: s.mass * w1 * um.norm_sqr() }
        })
        .collect())
}

/// Classical exchange rate κ = A_ax/(2 m ω₁) (rad/s): under a resonant drive
/// the actions trade as cos²(κt) / sin²(κt), so full transfer takes π/(2κ).
pub fn classical_exchange_rate(drive: &AxializationDrive, trap: &TrapConfig, species: &IonSpecies) -> Result<f64> {
    let w1 = omega_1(trap.omega_c(species), trap.axial_omega(species))?;
    Ok(drive.amplitude / (2.0 * species.mass * w1))
}

/// Writes `f_Hz,amplitude` rows.
pub fn write_spectrum_csv<W: Write>(peaks: &[SpectralPeak], mut w: W) -> std::io::Result<()> {
    writeln!(w, "f_Hz,amplitude")?;
    for p in peaks {
        writeln!(w, "{:e},{:e}", p.frequency, p.amplitude)?;
    }
    Ok(())
}
