//! TOML scenario files. Every physical quantity carries its unit in the key
//! name (`f_z_khz`, `dt_ns`, `energy_mean_ev`, ...); unknown keys are errors.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Used when no `--seed` is given.
    pub seed: Option<u64>,
    pub trap: Option<TrapSection>,
    pub modes: Option<ModesSection>,
    pub table1: Option<Table1Section>,
    pub phonons: Option<PhononsSection>,
    pub cool: Option<CoolSection>,
    pub trajectory: Option<TrajectorySection>,
    pub beamline: Option<BeamlineSection>,
    pub plasma: Option<PlasmaSection>,
    pub fit: Option<FitSection>,
    /// Directory relative paths are resolved against (the config's folder).
    #[serde(skip)]
    pub base_dir: PathBuf,
}

/// Exactly one of `f_c_mhz` (cyclotron frequency of the reference species)
/// and `b_field_t` must be given.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapSection {
    #[serde(default = "default_species")]
    pub species: String,
    pub f_c_mhz: Option<f64>,
    pub b_field_t: Option<f64>,
    pub f_z_khz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModesKind {
    Single,
    Balanced,
    General,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModesSection {
    pub kind: ModesKind,
    /// single/balanced: the ion species (defaults to the trap reference)
    pub species: Option<String>,
    /// general: one species label per ion
    #[serde(default)]
    pub ions: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Table1Section {
    pub f_c_mhz: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhononsSection {
    pub r_c_cool_per_s: f64,
    pub r_c_heat_per_s: f64,
    pub r_m_cool_per_s: f64,
    pub r_m_heat_per_s: f64,
    /// Exchange rate g directly; alternatively `a_ax_j_per_m2` together with
    /// a `[trap]` section.
    pub g_per_s: Option<f64>,
    pub a_ax_j_per_m2: Option<f64>,
    #[serde(default)]
    pub n_c_initial: f64,
    #[serde(default)]
    pub n_m_initial: f64,
    pub t_final_s: f64,
    pub dt_s: Option<f64>,
    #[serde(default = "one")]
    pub record_every: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoolSection {
    #[serde(default = "default_species")]
    pub species: String,
    pub saturation: f64,
    /// Natural linewidth Γ/2π; defaults to the species' registered line.
    pub linewidth_mhz: Option<f64>,
    pub wavelength_nm: Option<f64>,
    /// Forward direction: cooling time of each initial energy.
    #[serde(default)]
    pub energy_ev: Vec<f64>,
    /// Inverse direction: initial energy for each cooling time.
    #[serde(default)]
    pub time_s: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisName {
    X,
    Y,
    Z,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectorySection {
    pub ions: Vec<String>,
    pub dt_ns: f64,
    pub duration_ms: f64,
    #[serde(default = "one")]
    pub record_every: usize,
    /// Offset from the axial equilibrium, one [x, y, z] triple per ion.
    #[serde(default)]
    pub displacement_um: Vec<[f64; 3]>,
    #[serde(default)]
    pub velocity_m_per_s: Vec<[f64; 3]>,
    pub drive_a_ax_j_per_m2: Option<f64>,
    /// Defaults to the cyclotron frequency of the first ion.
    pub drive_f_mhz: Option<f64>,
    /// Doppler beam along `beam_direction` acting on ions with a cooling line.
    pub beam_saturation: Option<f64>,
    pub beam_detuning_mhz: Option<f64>,
    pub beam_direction: Option<[f64; 3]>,
    #[serde(default = "default_axis")]
    pub axis: AxisName,
    /// "ion0", "ion1", "common" or "stretch"
    #[serde(default = "default_signal")]
    pub signal: String,
    /// Skip writing the full phase-space series.
    #[serde(default)]
    pub spectrum_only: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BeamlineMode {
    Tof,
    Capture,
    Scan,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamlineSection {
    pub mode: BeamlineMode,
    #[serde(default = "default_species")]
    pub species: String,
    pub energy_mean_ev: f64,
    #[serde(default)]
    pub energy_sigma_ev: f64,
    /// Exponential tail of an EMG source distribution.
    pub energy_tau_ev: Option<f64>,
    pub n_ions: usize,
    /// tof: potential file (z_mm, V); without one a grounded drift of
    /// `drift_m` is used.
    pub profile_path: Option<PathBuf>,
    pub drift_m: Option<f64>,
    pub z_start_mm: Option<f64>,
    pub z_end_mm: Option<f64>,
    /// capture/scan: both profiles, or neither for the calibrated trap
    pub injection_profile_path: Option<PathBuf>,
    pub trapping_profile_path: Option<PathBuf>,
    pub switch_time_us: Option<f64>,
    /// scan
    pub barrier_min_ev: Option<f64>,
    pub barrier_max_ev: Option<f64>,
    pub barrier_step_ev: Option<f64>,
}

/// Give either `aspect_ratio` or `f_p_khz`. Ion number needs `z0_um`/`r0_um`
/// and the temperature bound needs `a0_um`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlasmaSection {
    #[serde(default = "default_species")]
    pub species: String,
    pub f_c_mhz: f64,
    pub f_z_khz: f64,
    pub aspect_ratio: Option<f64>,
    pub f_p_khz: Option<f64>,
    pub z0_um: Option<f64>,
    pub r0_um: Option<f64>,
    pub a0_um: Option<f64>,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    Emg,
    Gaussian,
    TwoGaussian,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    pub model: FitModel,
    /// Two-column CSV (x, y).
    pub data_path: PathBuf,
    /// Treat the data as cumulative extraction counts and fit −dN/dE.
    #[serde(default)]
    pub differentiate: bool,
}

fn default_species() -> String {
    "Ca-40+".into()
}

fn default_axis() -> AxisName {
    AxisName::X
}

fn default_signal() -> String {
    "ion0".into()
}

fn default_gamma() -> f64 {
    crate::plasma::GAMMA_CRYSTALLIZATION
}

fn one() -> usize {
    1
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| anyhow::anyhow!("config: {e}"))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        let mut cfg = Self::parse(&text).with_context(|| format!("in {}", path.display()))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn section<'a, T>(&self, s: &'a Option<T>, name: &str) -> Result<&'a T> {
        match s {
            Some(v) => Ok(v),
            None => bail!("config has no [{name}] section"),
        }
    }
}

/// Rejects non-finite or non-positive values with the offending key named.
pub fn positive(key: &str, v: f64) -> Result<f64> {
    if !(v > 0.0) || !v.is_finite() {
        bail!("{key} must be positive and finite, got {v}");
    }
    Ok(v)
}

pub fn non_negative(key: &str, v: f64) -> Result<f64> {
    if !(v >= 0.0) || !v.is_finite() {
        bail!("{key} must be non-negative and finite, got {v}");
    }
    Ok(v)
}
