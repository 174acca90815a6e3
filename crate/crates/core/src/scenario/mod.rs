//! Scenario runner behind the `penning` binary: reads a [`ScenarioConfig`],
//! runs one named recipe and writes its results. Series go to CSV and
//! scalar summaries to JSON unless a single format is forced.

pub mod config;

use std::f64::consts::PI;
use std::fmt;
use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use nalgebra::Vector3;
use serde_json::{json, Map, Value};

use crate::analysis::{differentiate_counts, fit_emg, fit_gaussian, fit_two_peaks, read_two_column, GaussianFitResult};
use crate::beamline::{
    capture_ensemble, extraction_scan, time_of_flight, transport_ensemble, CaptureProtocol, EnergyDistribution,
    EnergyShape, Histogram, PotentialProfile, TrapGeometry, CALIBRATED_SWITCH_TIME,
};
use crate::constants::{angular_to_hz, joule_to_ev, ev_to_joule};
use crate::cooling::{cooling_time, initial_energy, CoolingModel};
use crate::dynamics::{
    action_exchange, crystal_at_rest, simulate, spectrum, Axis, LaserBeam, Signal, SimulationConfig,
    MIN_SPECTRUM_SAMPLES,
};
use crate::modes::{
    balanced_crystal_modes, linearized_normal_modes, reproduce_table, single_ion_modes, ModeSet, TrapConfig,
    CA_CRYSTAL_TABLE, TABLE_COLUMNS,
};
use crate::phonons::{
    coupling_strength, integrate_rate_equations, recommended_dt, steady_state_axialized, steady_state_free,
    AxializationDrive, ModeRates, ModeScale, PhononState,
};
use crate::plasma::{invert_aspect_ratio, plasma_from_frequency, solve_plasma, PlasmaSpheroid};
use crate::species::{species, IonSpecies};

pub use config::ScenarioConfig;
use config::{non_negative, positive, AxisName, BeamlineMode, FitModel, ModesKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Modes,
    Table1,
    Phonons,
    Cool,
    Trajectory,
    Beamline,
    Plasma,
    Fit,
}

impl Subcommand {
    pub const ALL: [Subcommand; 8] = [
        Subcommand::Modes,
        Subcommand::Table1,
        Subcommand::Phonons,
        Subcommand::Cool,
        Subcommand::Trajectory,
        Subcommand::Beamline,
        Subcommand::Plasma,
        Subcommand::Fit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Modes => "modes",
            Subcommand::Table1 => "table1",
            Subcommand::Phonons => "phonons",
            Subcommand::Cool => "cool",
            Subcommand::Trajectory => "trajectory",
            Subcommand::Beamline => "beamline",
            Subcommand::Plasma => "plasma",
            Subcommand::Fit => "fit",
        }
    }
}

impl fmt::Display for Subcommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Subcommand {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Subcommand::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| anyhow!("unknown subcommand '{s}'"))
    }
}

/// `Auto` writes series as CSV and summaries as JSON.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Auto,
    Csv,
    Json,
}

/// A named table of rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Series {
    fn new(name: &str, columns: &[&str]) -> Self {
        Series { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k].as_f64().unwrap_or(f64::NAN)).collect())
    }

    fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(cell).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }

    fn to_json(&self) -> Value {
        json!({ "columns": self.columns, "rows": self.rows })
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Everything one subcommand produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub subcommand: Subcommand,
    pub series: Vec<Series>,
    pub summary: Map<String, Value>,
}

impl Report {
    fn new(subcommand: Subcommand) -> Self {
        Report { subcommand, series: Vec::new(), summary: Map::new() }
    }

    fn set(&mut self, key: &str, value: impl Into<Value>) {
        self.summary.insert(key.into(), value.into());
    }

    pub fn series(&self, name: &str) -> Option<&Series> {
        self.series.iter().find(|s| s.name == name)
    }

    /// Writes `<subcommand>_<series>.{csv,json}` and
    /// `<subcommand>_summary.{json,csv}` into `dir`, creating it if needed.
    pub fn write(&self, dir: &Path, format: OutputFormat) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;
        let mut written = Vec::new();
        let open = |name: String| -> Result<(PathBuf, std::io::BufWriter<fs::File>)> {
            let path = dir.join(name);
            let f = fs::File::create(&path).with_context(|| format!("cannot write {}", path.display()))?;
            Ok((path, std::io::BufWriter::new(f)))
        };
        for s in &self.series {
            let stem = format!("{}_{}", self.subcommand, s.name);
            if format == OutputFormat::Json {
                let (path, mut w) = open(format!("{stem}.json"))?;
                serde_json::to_writer_pretty(&mut w, &s.to_json())?;
                writeln!(w)?;
                w.flush()?;
                written.push(path);
            } else {
                let (path, mut w) = open(format!("{stem}.csv"))?;
                s.write_csv(&mut w)?;
                w.flush()?;
                written.push(path);
            }
        }
        let stem = format!("{}_summary", self.subcommand);
        if format == OutputFormat::Csv {
            let (path, mut w) = open(format!("{stem}.csv"))?;
            writeln!(w, "key,value")?;
            for (k, v) in &self.summary {
                let text = match v {
                    Value::Array(_) | Value::Object(_) => format!("\"{}\"", v.to_string().replace('"', "\"\"")),
                    other => cell(other),
                };
                writeln!(w, "{k},{text}")?;
            }
            w.flush()?;
            written.push(path);
        } else {
            let (path, mut w) = open(format!("{stem}.json"))?;
            serde_json::to_writer_pretty(&mut w, &self.summary)?;
            writeln!(w)?;
            w.flush()?;
            written.push(path);
        }
        Ok(written)
    }
}

/// Runs one recipe. `seed` drives every Monte-Carlo draw.
pub fn run(subcommand: Subcommand, cfg: &ScenarioConfig, seed: u64) -> Result<Report> {
    let report = match subcommand {
        Subcommand::Modes => run_modes(cfg),
        Subcommand::Table1 => run_table1(cfg),
        Subcommand::Phonons => run_phonons(cfg),
        Subcommand::Cool => run_cool(cfg),
        Subcommand::Trajectory => run_trajectory(cfg),
        Subcommand::Beamline => run_beamline(cfg, seed),
        Subcommand::Plasma => run_plasma(cfg),
        Subcommand::Fit => run_fit(cfg),
    };
    report.with_context(|| format!("{subcommand} failed"))
}

/// Loads `config_path`, runs the recipe and writes the files.
pub fn run_file(
    subcommand: Subcommand,
    config_path: &Path,
    out_dir: &Path,
    seed: Option<u64>,
    format: OutputFormat,
) -> Result<Vec<PathBuf>> {
    let cfg = ScenarioConfig::load(config_path)?;
    let seed = seed.or(cfg.seed).unwrap_or(0);
    run(subcommand, &cfg, seed)?.write(out_dir, format)
}

fn lookup(label: &str) -> Result<IonSpecies> {
    Ok(species(label)?)
}

fn build_trap(cfg: &ScenarioConfig) -> Result<TrapConfig> {
    let t = cfg.section(&cfg.trap, "trap")?;
    let reference = lookup(&t.species)?;
    let f_z = positive("trap.f_z_khz", t.f_z_khz)? * 1e3;
    let trap = match (t.f_c_mhz, t.b_field_t) {
        (Some(f_c), None) => TrapConfig::from_frequencies_hz(positive("trap.f_c_mhz", f_c)? * 1e6, f_z, reference)?,
        (None, Some(b)) => TrapConfig::new(positive("trap.b_field_t", b)?, 2.0 * PI * f_z, reference)?,
        _ => bail!("[trap] needs exactly one of f_c_mhz and b_field_t"),
    };
    Ok(trap)
}

fn trap_summary(report: &mut Report, trap: &TrapConfig) {
    report.set("b_field_t", trap.b_field);
    report.set("reference_species", trap.reference.name.clone());
    report.set("f_z_hz", angular_to_hz(trap.omega_z));
    report.set("f_c_hz", angular_to_hz(trap.omega_c(&trap.reference)));
}

fn modes_series(name: &str, modes: &ModeSet) -> Series {
    let mut s = Series::new(name, &["branch", "f_hz", "omega_rad_per_s"]);
    for m in modes.iter() {
        s.push(vec![json!(m.branch.label()), json!(angular_to_hz(m.omega)), json!(m.omega)]);
    }
    s
}

fn run_modes(cfg: &ScenarioConfig) -> Result<Report> {
    let sec = cfg.section(&cfg.modes, "modes")?;
    let trap = build_trap(cfg)?;
    let mut report = Report::new(Subcommand::Modes);
    trap_summary(&mut report, &trap);
    let one = || -> Result<IonSpecies> {
        match &sec.species {
            Some(label) => lookup(label),
            None => Ok(trap.reference.clone()),
        }
    };
    let (kind, modes) = match sec.kind {
        ModesKind::Single => ("single", single_ion_modes(&trap, &one()?)?),
        ModesKind::Balanced => ("balanced", balanced_crystal_modes(&trap, &one()?)?),
        ModesKind::General => {
            if sec.ions.is_empty() {
                bail!("modes.kind = \"general\" needs a non-empty ions list");
            }
            let ions = sec.ions.iter().map(|l| lookup(l)).collect::<Result<Vec<_>>>()?;
            ("general", linearized_normal_modes(&ions, &trap)?)
        }
    };
    report.set("kind", kind);
    for m in modes.iter() {
        report.set(&format!("f_{}_hz", m.branch.label()), angular_to_hz(m.omega));
    }
    report.series.push(modes_series("frequencies", &modes));
    Ok(report)
}

fn run_table1(cfg: &ScenarioConfig) -> Result<Report> {
    let sec = cfg.section(&cfg.table1, "table1")?;
    let f_c_hz = positive("table1.f_c_mhz", sec.f_c_mhz)? * 1e6;
    let rows = reproduce_table(f_c_hz, &CA_CRYSTAL_TABLE)?;
    let mut columns = vec!["row".to_string()];
    for c in &TABLE_COLUMNS[..6] {
        columns.push(c.to_string());
        columns.push(format!("{c}_printed"));
        columns.push(format!("{c}_delta"));
    }
    columns.push(TABLE_COLUMNS[6].to_string());
    columns.push("all_match".into());
    let mut series = Series { name: "rows".into(), columns, rows: Vec::new() };
    let mut max_delta = [0.0f64; 6];
    let mut matched = 0;
    for (k, (computed, printed)) in rows.iter().zip(CA_CRYSTAL_TABLE.iter()).enumerate() {
        let mut row = vec![json!(k + 1)];
        for i in 0..6 {
            row.push(json!(computed.values[i]));
            row.push(json!(printed.values[i]));
            row.push(json!(computed.deltas[i]));
            max_delta[i] = max_delta[i].max(computed.deltas[i].abs());
            matched += computed.matches[i] as usize;
        }
        row.push(json!(computed.values[6]));
        row.push(json!(computed.matches.iter().all(|&m| m)));
        series.push(row);
    }
    let mut report = Report::new(Subcommand::Table1);
    report.set("f_c_hz", f_c_hz);
    report.set("cells_total", 6 * rows.len());
    report.set("cells_matching_rounding", matched);
    report.set("all_within_rounding", matched == 6 * rows.len());
    let mut deltas = Map::new();
    for (c, d) in TABLE_COLUMNS.iter().zip(max_delta) {
        deltas.insert(c.to_string(), json!(d));
    }
    report.set("max_abs_delta", Value::Object(deltas));
    report.series.push(series);
    Ok(report)
}

fn run_phonons(cfg: &ScenarioConfig) -> Result<Report> {
    let sec = cfg.section(&cfg.phonons, "phonons")?;
    let rates = ModeRates::new(sec.r_c_cool_per_s, sec.r_c_heat_per_s, sec.r_m_cool_per_s, sec.r_m_heat_per_s)?;
    let g = match (sec.g_per_s, sec.a_ax_j_per_m2) {
        (Some(g), None) => non_negative("phonons.g_per_s", g)?,
        (None, Some(a)) => {
            let trap = build_trap(cfg).context("a_ax_j_per_m2 needs a [trap] section")?;
            let drive = AxializationDrive::new(a, trap.omega_c(&trap.reference))?;
            coupling_strength(&drive, &ModeScale::single_ion(&trap, &trap.reference)?)
        }
        (None, None) => 0.0,
        (Some(_), Some(_)) => bail!("give either phonons.g_per_s or phonons.a_ax_j_per_m2, not both"),
    };
    let t_final = positive("phonons.t_final_s", sec.t_final_s)?;
    let dt = match sec.dt_s {
        Some(dt) => positive("phonons.dt_s", dt)?,
        None => recommended_dt(&rates, g).min(t_final),
    };
    let n0 = PhononState::new(
        non_negative("phonons.n_c_initial", sec.n_c_initial)?,
        non_negative("phonons.n_m_initial", sec.n_m_initial)?,
        0.0,
    );
    let samples = integrate_rate_equations(n0, &rates, g, t_final, dt)?;
    let stride = sec.record_every.max(1);
    let mut series = Series::new("series", &["t_s", "n_c", "n_m", "coherence"]);
    for (k, s) in samples.iter().enumerate() {
        if k % stride == 0 || k + 1 == samples.len() {
            series.push(vec![json!(s.t), json!(s.state.n_c), json!(s.state.n_m), json!(s.state.c)]);
        }
    }
    let (free_c, free_m) = steady_state_free(&rates)?;
    let ax = steady_state_axialized(&rates, g)?;
    let last = samples.last().expect("at least the initial state").state;
    let mut report = Report::new(Subcommand::Phonons);
    report.set("g_per_s", g);
    report.set("dt_s", dt);
    report.set("steps", samples.len() - 1);
    report.set("n_c_free", free_c);
    report.set("n_m_free", free_m);
    report.set("n_c_steady", ax.n_c);
    report.set("n_m_steady", ax.n_m);
    report.set("n_ax", ax.n_ax);
    report.set("n_c_final", last.n_c);
    report.set("n_m_final", last.n_m);
    report.set("rel_diff_c", (last.n_c - ax.n_c).abs() / ax.n_c.abs().max(f64::MIN_POSITIVE));
    report.set("rel_diff_m", (last.n_m - ax.n_m).abs() / ax.n_m.abs().max(f64::MIN_POSITIVE));
    report.series.push(series);
    Ok(report)
}

fn run_cool(cfg: &ScenarioConfig) -> Result<Report> {
    let sec = cfg.section(&cfg.cool, "cool")?;
    let sp = lookup(&sec.species)?;
    let linewidth = match sec.linewidth_mhz {
        Some(f) => 2.0 * PI * positive("cool.linewidth_mhz", f)? * 1e6,
        None => sp.linewidth.ok_or_else(|| anyhow!("{} has no cooling line; set linewidth_mhz", sp.name))?,
    };
    let wavelength = match sec.wavelength_nm {
        Some(l) => positive("cool.wavelength_nm", l)? * 1e-9,
        None => sp.wavelength.ok_or_else(|| anyhow!("{} has no cooling line; set wavelength_nm", sp.name))?,
    };
    let model = CoolingModel::new(&sp, sec.saturation, linewidth, wavelength)?;
    if sec.energy_ev.is_empty() && sec.time_s.is_empty() {
        bail!("[cool] needs energy_ev and/or time_s values");
    }
    let mut series = Series::new("values", &["direction", "energy_ev", "time_s"]);
    let mut forward = Vec::new();
    for &e in &sec.energy_ev {
        let t = cooling_time(&model, ev_to_joule(positive("cool.energy_ev", e)?))?;
        series.push(vec![json!("forward"), json!(e), json!(t)]);
        forward.push(json!({ "energy_ev": e, "time_s": t }));
    }
    let mut inverse = Vec::new();
    for &t in &sec.time_s {
        let e = joule_to_ev(initial_energy(&model, non_negative("cool.time_s", t)?)?);
        series.push(vec![json!("inverse"), json!(e), json!(t)]);
        inverse.push(json!({ "time_s": t, "energy_ev": e }));
    }
    let mut report = Report::new(Subcommand::Cool);
    report.set("species", sp.name.clone());
    report.set("saturation", model.s);
    report.set("linewidth_hz", angular_to_hz(model.linewidth));
    report.set("wavelength_m", model.wavelength);
    report.set("e0_ev", joule_to_ev(model.e0));
    report.set("t0_s", model.t0);
    report.set("recoil_ratio", model.r);
    report.set("forward", Value::Array(forward));
    report.set("inverse", Value::Array(inverse));
    report.series.push(series);
    Ok(report)
}

fn parse_signal(s: &str) -> Result<Signal> {
    match s {
        "common" => Ok(Signal::Common),
        "stretch" => Ok(Signal::Stretch),
        _ => s
            .strip_prefix("ion")
            .and_then(|i| i.parse().ok())
            .map(Signal::Ion)
            .ok_or_else(|| anyhow!("trajectory.signal must be ionN, common or stretch, got '{s}'")),
    }
}

fn run_trajectory(cfg: &ScenarioConfig) -> Result<Report> {
    let sec = cfg.section(&cfg.trajectory, "trajectory")?;
    let trap = build_trap(cfg)?;
    if sec.ions.is_empty() {
        bail!("trajectory.ions is empty");
    }
    let ions = sec.ions.iter().map(|l| lookup(l)).collect::<Result<Vec<_>>>()?;
    let mut state = crystal_at_rest(&ions, &trap)?;
    for (key, list, scale, is_pos) in
        [("displacement_um", &sec.displacement_um, 1e-6, true), ("velocity_m_per_s", &sec.velocity_m_per_s, 1.0, false)]
    {
        if list.is_empty() {
            continue;
        }
        if list.len() != ions.len() {
            bail!("trajectory.{key} needs one [x, y, z] per ion ({} given, {} ions)", list.len(), ions.len());
        }
        for (p, v) in state.iter_mut().zip(list) {
            let d = Vector3::new(v[0], v[1], v[2]) * scale;
            if is_pos {
                p.position += d;
            } else {
                p.velocity += d;
            }
        }
    }
    let dt = positive("trajectory.dt_ns", sec.dt_ns)? * 1e-9;
    let duration = positive("trajectory.duration_ms", sec.duration_ms)? * 1e-3;
    let mut sim = SimulationConfig::new(trap.clone(), dt, duration).with_stride(sec.record_every.max(1));
    if let Some(a) = sec.drive_a_ax_j_per_m2 {
        let omega = match sec.drive_f_mhz {
            Some(f) => 2.0 * PI * positive("trajectory.drive_f_mhz", f)? * 1e6,
            None => trap.omega_c(&ions[0]),
        };
        sim = sim.with_drive(AxializationDrive::new(a, omega)?);
    }
    if let Some(s) = sec.beam_saturation {
        let detuning = 2.0
            * PI
            * 1e6
            * sec.beam_detuning_mhz.ok_or_else(|| anyhow!("beam_saturation needs beam_detuning_mhz"))?;
        let d = sec.beam_direction.ok_or_else(|| anyhow!("beam_saturation needs beam_direction"))?;
        let mut beams: Vec<LaserBeam> = Vec::new();
        for sp in &ions {
            if sp.linewidth.is_some() && !beams.iter().any(|b| b.model.mass == sp.mass) {
                let model = CoolingModel::for_species(sp, s)?;
                beams.push(LaserBeam::new(model, detuning, Vector3::new(d[0], d[1], d[2]))?);
            }
        }
        if beams.is_empty() {
            bail!("no ion in trajectory.ions has a cooling transition");
        }
        sim = sim.with_beams(beams);
    }
    let traj = simulate(&state, &sim)?;

    let mut report = Report::new(Subcommand::Trajectory);
    trap_summary(&mut report, &trap);
    report.set("samples", traj.len());
    report.set("sample_interval_s", traj.sample_interval());
    let e0 = traj.energy[0];
    let drift = traj.energy.iter().map(|e| (e - e0).abs()).fold(0.0, f64::max) / e0.abs().max(f64::MIN_POSITIVE);
    report.set("max_rel_energy_change", drift);
    let analytic = if ions.len() == 1 { single_ion_modes(&trap, &ions[0])? } else { linearized_normal_modes(&ions, &trap)? };
    report.series.push(modes_series("analytic_modes", &analytic));

    if !sec.spectrum_only {
        let mut cols = vec!["t_s".to_string()];
        for i in 0..ions.len() {
            for c in ["x_m", "y_m", "z_m", "vx_m_per_s", "vy_m_per_s", "vz_m_per_s"] {
                cols.push(format!("{c}_{i}"));
            }
        }
        cols.push("energy_j".into());
        let mut series = Series { name: "series".into(), columns: cols, rows: Vec::with_capacity(traj.len()) };
        for k in 0..traj.len() {
            let mut row = vec![json!(traj.times[k])];
            for i in 0..ions.len() {
                let (p, v) = (traj.positions[i][k], traj.velocities[i][k]);
                row.extend(p.iter().chain(v.iter()).map(|c| json!(c)));
            }
            row.push(json!(traj.energy[k]));
            series.push(row);
        }
        report.series.push(series);
    }

    if traj.len() >= MIN_SPECTRUM_SAMPLES {
        let axis = match sec.axis {
            AxisName::X => Axis::X,
            AxisName::Y => Axis::Y,
            AxisName::Z => Axis::Z,
        };
        let peaks = spectrum(&traj, axis, parse_signal(&sec.signal)?)?;
        let mut s = Series::new("spectrum", &["f_hz", "amplitude_m"]);
        for p in &peaks {
            s.push(vec![json!(p.frequency), json!(p.amplitude)]);
        }
        report.set("strongest_peak_hz", peaks.first().map(|p| p.frequency));
        report.series.push(s);
    } else {
        report.set("spectrum_skipped", format!("{} samples < {}", traj.len(), MIN_SPECTRUM_SAMPLES));
    }

    if let Ok(actions) = action_exchange(&traj) {
        let mut s = Series::new("actions", &["t_s", "i_c_js", "i_m_js"]);
        for a in &actions {
            s.push(vec![json!(a.t), json!(a.i_c), json!(a.i_m)]);
        }
        report.series.push(s);
    }
    Ok(report)
}

fn energy_distribution(sec: &config::BeamlineSection) -> Result<EnergyDistribution> {
    let shape = match sec.energy_tau_ev {
        Some(tau) => EnergyShape::Emg { tau },
        None => EnergyShape::Gaussian,
    };
    Ok(EnergyDistribution::new(sec.energy_mean_ev, sec.energy_sigma_ev, shape)?)
}

fn histogram_series(name: &str, h: &Histogram, scale: f64, x_col: &str) -> Series {
    let mut s = Series::new(name, &[x_col, "counts"]);
    for (c, n) in h.bin_centers.iter().zip(&h.counts) {
        s.push(vec![json!(c * scale), json!(n)]);
    }
    s
}

fn capture_protocol(cfg: &ScenarioConfig, sec: &config::BeamlineSection, sp: &IonSpecies) -> Result<CaptureProtocol> {
    let switch = match sec.switch_time_us {
        Some(t) => positive("beamline.switch_time_us", t)? * 1e-6,
        None => CALIBRATED_SWITCH_TIME,
    };
    match (&sec.injection_profile_path, &sec.trapping_profile_path) {
        (Some(a), Some(b)) => Ok(CaptureProtocol::new(
            PotentialProfile::from_file(&cfg.resolve(a))?,
            PotentialProfile::from_file(&cfg.resolve(b))?,
            switch,
        )?),
        (None, None) => Ok(TrapGeometry::calibrated(sp).protocol(switch)?),
        _ => bail!("give both injection_profile_path and trapping_profile_path, or neither"),
    }
}

fn run_beamline(cfg: &ScenarioConfig, seed: u64) -> Result<Report> {
    let sec = cfg.section(&cfg.beamline, "beamline")?;
    let sp = lookup(&sec.species)?;
    let dist = energy_distribution(sec)?;
    if sec.n_ions == 0 {
        bail!("beamline.n_ions must be >= 1");
    }
    let mut report = Report::new(Subcommand::Beamline);
    report.set("species", sp.name.clone());
    report.set("seed", seed);
    report.set("n_ions", sec.n_ions);
    match sec.mode {
        BeamlineMode::Tof => {
            let profile = match (&sec.profile_path, sec.drift_m) {
                (Some(p), None) => PotentialProfile::from_file(&cfg.resolve(p))?,
                (None, Some(l)) => PotentialProfile::flat(positive("beamline.drift_m", l)?, 0.0)?,
                _ => bail!("mode = \"tof\" needs exactly one of profile_path and drift_m"),
            };
            let z0 = sec.z_start_mm.map(|z| z * 1e-3).unwrap_or(profile.z_min());
            let z1 = sec.z_end_mm.map(|z| z * 1e-3).unwrap_or(profile.z_max());
            let ens = transport_ensemble(&profile, &dist, sec.n_ions, &sp, z0, z1, seed)?;
            report.set("mode", "tof");
            report.set("mean_tof_us", ens.mean * 1e6);
            report.set("fwhm_us", ens.fwhm * 1e6);
            report.set("transmitted", ens.tofs.len());
            report.set("loss_fraction", ens.loss_fraction);
            report.set("tof_at_mean_energy_us", time_of_flight(&profile, dist.mean, &sp, z0, z1).ok().map(|t| t * 1e6));
            report.series.push(histogram_series("tof_histogram", &ens.histogram, 1e6, "bin_center_us"));
        }
        BeamlineMode::Capture | BeamlineMode::Scan => {
            let protocol = capture_protocol(cfg, sec, &sp)?;
            let stats = capture_ensemble(&protocol, &dist, sec.n_ions, &sp, seed)?;
            report.set("switch_time_us", protocol.switch_time * 1e6);
            report.set("trapped", stats.trapped);
            report.set("capture_fraction", stats.fraction);
            report.set("mean_e_trap_ev", stats.mean_e_trap);
            report.set("sd_e_trap_ev", stats.sd_e_trap);
            if sec.mode == BeamlineMode::Capture {
                report.set("mode", "capture");
                report.series.push(histogram_series(
                    "e_trap_histogram",
                    &Histogram::from_samples(&stats.e_trap, 40),
                    1.0,
                    "e_trap_ev",
                ));
            } else {
                report.set("mode", "scan");
                if stats.e_trap.is_empty() {
                    bail!("no ions were trapped; nothing to scan");
                }
                let hi = stats.e_trap.iter().cloned().fold(0.0, f64::max);
                let lo = sec.barrier_min_ev.unwrap_or(0.0);
                let hi = sec.barrier_max_ev.unwrap_or(hi.ceil() + 1.0);
                let step = positive("beamline.barrier_step_ev", sec.barrier_step_ev.unwrap_or(0.25))?;
                if !(hi > lo) {
                    bail!("barrier_max_ev must exceed barrier_min_ev");
                }
                let n = ((hi - lo) / step).round() as usize;
                let barriers: Vec<f64> = (0..=n).map(|k| lo + k as f64 * step).collect();
                let scan = extraction_scan(&stats.e_trap, &barriers)?;
                let pts: Vec<(f64, f64)> = scan.iter().map(|&(b, c)| (b, c as f64)).collect();
                let deriv = differentiate_counts(&pts)?;
                let mut s = Series::new("scan", &["barrier_ev", "counts", "minus_dn_de"]);
                for ((b, c), (_, d)) in scan.iter().zip(&deriv) {
                    s.push(vec![json!(b), json!(c), json!(-d)]);
                }
                report.series.push(s);
                let neg: Vec<(f64, f64)> = deriv.iter().map(|&(x, d)| (x, -d)).collect();
                match fit_emg(&neg, None) {
                    Ok(f) => {
                        report.set("fit_mean_ev", f.mean());
                        report.set("fit_sd_ev", f.sd());
                    }
                    Err(e) => report.set("fit_error", e.to_string()),
                }
            }
        }
    }
    Ok(report)
}

fn run_plasma(cfg: &ScenarioConfig) -> Result<Report> {
    let sec = cfg.section(&cfg.plasma, "plasma")?;
    let sp = lookup(&sec.species)?;
    let wc = 2.0 * PI * positive("plasma.f_c_mhz", sec.f_c_mhz)? * 1e6;
    let wz = 2.0 * PI * positive("plasma.f_z_khz", sec.f_z_khz)? * 1e3;
    let (alpha, mut props) = match (sec.aspect_ratio, sec.f_p_khz) {
        (Some(a), None) => (a, solve_plasma(a, wz, wc, &sp)?),
        (None, Some(fp)) => {
            let wp = 2.0 * PI * positive("plasma.f_p_khz", fp)? * 1e3;
            (invert_aspect_ratio((wz / wp).powi(2))?, plasma_from_frequency(wp, wc, &sp)?)
        }
        _ => bail!("[plasma] needs exactly one of aspect_ratio and f_p_khz"),
    };
    match (sec.z0_um, sec.r0_um) {
        (Some(z0), Some(r0)) => props = props.with_ion_count(&PlasmaSpheroid::new(z0 * 1e-6, r0 * 1e-6)?),
        (None, None) => {}
        _ => bail!("give both z0_um and r0_um, or neither"),
    }
    if let Some(a0) = sec.a0_um {
        props = props.with_temperature_bound(positive("plasma.a0_um", a0)? * 1e-6, positive("plasma.gamma", sec.gamma)?)?;
    }
    let mut report = Report::new(Subcommand::Plasma);
    report.set("species", sp.name.clone());
    report.set("aspect_ratio", alpha);
    report.set("f_p_khz", angular_to_hz(props.omega_p) / 1e3);
    report.set("f_r_khz", angular_to_hz(props.omega_r) / 1e3);
    report.set("n0_per_cm3", props.n0 * 1e-6);
    report.set("n_ions", props.n_ions);
    report.set("a0_um", props.a0.map(|a| a * 1e6));
    report.set("gamma", props.gamma);
    report.set("t_bound_mk", props.t_bound.map(|t| t * 1e3));
    Ok(report)
}

fn gaussian_json(g: &GaussianFitResult) -> Value {
    json!({
        "center": g.center,
        "sigma": g.sigma,
        "amplitude": g.amplitude,
        "offset": g.offset,
        "fwhm": g.fwhm,
        "residual_norm": g.residual_norm,
    })
}

fn gaussian_at(g: &GaussianFitResult, x: f64) -> f64 {
    g.offset + g.amplitude * (-(x - g.center).powi(2) / (2.0 * g.sigma * g.sigma)).exp()
}

fn run_fit(cfg: &ScenarioConfig) -> Result<Report> {
    let sec = cfg.section(&cfg.fit, "fit")?;
    let path = cfg.resolve(&sec.data_path);
    let file = fs::File::open(&path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut data = read_two_column(BufReader::new(file)).with_context(|| format!("in {}", path.display()))?;
    if sec.differentiate {
        data = differentiate_counts(&data)?.into_iter().map(|(x, d)| (x, -d)).collect();
    }
    let mut report = Report::new(Subcommand::Fit);
    report.set("points", data.len());
    let mut curve = Series::new("curve", &["x", "y", "model"]);
    match sec.model {
        FitModel::Emg => {
            let f = fit_emg(&data, None)?;
            report.set("model", "emg");
            report.set("mu", f.params.mu);
            report.set("sigma", f.params.sigma);
            report.set("tau", f.params.tau);
            report.set("amplitude", f.params.amplitude);
            report.set("mean", f.mean());
            report.set("sd", f.sd());
            report.set("residual_norm", f.residual_norm);
            report.set("iterations", f.iterations);
            report.set(
                "stderr",
                f.covariance.map(|c| (0..4).map(|i| c[i][i].max(0.0).sqrt()).collect::<Vec<_>>()),
            );
            for &(x, y) in &data {
                curve.push(vec![json!(x), json!(y), json!(f.params.value(x))]);
            }
        }
        FitModel::Gaussian => {
            let g = fit_gaussian(&data)?;
            report.set("model", "gaussian");
            report.set("fit", gaussian_json(&g));
            for &(x, y) in &data {
                curve.push(vec![json!(x), json!(y), json!(gaussian_at(&g, x))]);
            }
        }
        FitModel::TwoGaussian => {
            let (a, b) = fit_two_peaks(&data)?;
            report.set("model", "two_gaussian");
            report.set("first", gaussian_json(&a));
            report.set("second", gaussian_json(&b));
            report.set("separation", (b.center - a.center).abs());
            for &(x, y) in &data {
                let m = gaussian_at(&a, x) + gaussian_at(&b, x) - a.offset.min(b.offset);
                curve.push(vec![json!(x), json!(y), json!(m)]);
            }
        }
    }
    report.series.push(curve);
    Ok(report)
}
