//! Peak-shape fitting and count-curve differentiation.
//!
//! Both fits separate the linear parameters (amplitude, offset) from the
//! nonlinear ones: for a trial shape the linear ones are solved by least
//! squares and only the shape is searched with Nelder–Mead.

use std::f64::consts::{PI, SQRT_2};
use std::io::{BufRead, Write};

use nalgebra::{Matrix2, Matrix4, Vector2};
use serde::Serialize;
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::numeric::nelder_mead;

/// Iteration cap for every simplex fit.
pub const MAX_ITERATIONS: usize = 10_000;

const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949_4; // 2√(2 ln 2)

/// exp(z²)·erfc(z), evaluated without overflow for large z.
fn erfcx(z: f64) -> f64 {
    if z < 5.0 {
        return (z * z).exp() * erfc(z);
    }
    // asymptotic series, truncated at its smallest term
    let inv = 1.0 / (2.0 * z * z);
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        let next = -term * (2.0 * k - 1.0) * inv;
        if next.abs() >= term.abs() || next.abs() < 1e-17 {
            break;
        }
        sum += next;
        term = next;
        k += 1.0;
    }
    sum / (z * PI.sqrt())
}

/// Exponentially modified Gaussian: a normal(mu, sigma) convolved with an
/// exponential of scale tau. `amplitude` multiplies the unit-area density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EMGParams {
    pub mu: f64,
    pub sigma: f64,
    pub tau: f64,
    pub amplitude: f64,
}

impl EMGParams {
    pub fn new(mu: f64, sigma: f64, tau: f64, amplitude: f64) -> Result<Self> {
        if !(sigma > 0.0) || !(tau > 0.0) || !mu.is_finite() || !amplitude.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "EMG needs sigma > 0 and tau > 0, got sigma = {sigma}, tau = {tau}"
            )));
        }
        Ok(EMGParams { mu, sigma, tau, amplitude })
    }

    /// Parameters with the given mean and standard deviation and a chosen tau.
    pub fn from_moments(mean: f64, sd: f64, tau: f64, amplitude: f64) -> Result<Self> {
        let var = sd * sd - tau * tau;
        if !(var > 0.0) {
            return Err(Error::InvalidParameter(format!("tau = {tau} must be below sd = {sd}")));
        }
        Self::new(mean - tau, var.sqrt(), tau, amplitude)
    }

    /// Unit-area density.
    pub fn pdf(&self, x: f64) -> f64 {
        let (m, s, t) = (self.mu, self.sigma, self.tau);
        let z = (m + s * s / t - x) / (SQRT_2 * s);
        let expo = (m - x) / t + s * s / (2.0 * t * t);
        if z < 5.0 {
            0.5 / t * expo.exp() * erfc(z)
        } else {
            0.5 / t * (expo - z * z).exp() * erfcx(z)
        }
    }

    /// amplitude · pdf
    pub fn value(&self, x: f64) -> f64 {
        self.amplitude * self.pdf(x)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let (m, s, t) = (self.mu, self.sigma, self.tau);
        let u = (x - m) / s;
        let phi = 0.5 * erfc(-u / SQRT_2);
        let z = (m + s * s / t - x) / (SQRT_2 * s);
        let expo = -(x - m) / t + s * s / (2.0 * t * t);
        let tail = if z < 5.0 { 0.5 * expo.exp() * erfc(z) } else { 0.5 * (expo - z * z).exp() * erfcx(z) };
        phi - tail
    }

    pub fn mean(&self) -> f64 {
        self.mu + self.tau
    }

    pub fn variance(&self) -> f64 {
        self.sigma * self.sigma + self.tau * self.tau
    }

    pub fn sd(&self) -> f64 {
        self.variance().sqrt()
    }
}

/// Central differences inside, one-sided at both ends. Handles non-uniform
/// spacing with the second-order three-point formula.
pub fn differentiate_counts(points: &[(f64, f64)]) -> Result<Vec<(f64, f64)>> {
    if points.len() < 3 {
        return Err(Error::Input(format!("need at least 3 points, got {}", points.len())));
    }
    for (k, w) in points.windows(2).enumerate() {
        if !(w[1].0 > w[0].0) {
            return Err(Error::Input(format!(
                "abscissae must be strictly increasing (points {} and {}: {} then {})",
                k,
                k + 1,
                w[0].0,
                w[1].0
            )));
        }
    }
    let n = points.len();
    let mut out = Vec::with_capacity(n);
    out.push((points[0].0, (points[1].1 - points[0].1) / (points[1].0 - points[0].0)));
    for i in 1..n - 1 {
        let (x0, f0) = points[i - 1];
        let (x1, f1) = points[i];
        let (x2, f2) = points[i + 1];
        let (hm, hp) = (x1 - x0, x2 - x1);
        let d = (hm * hm * f2 - hp * hp * f0 + (hp * hp - hm * hm) * f1) / (hm * hp * (hm + hp));
        out.push((x1, d));
    }
    out.push((points[n - 1].0, (points[n - 1].1 - points[n - 2].1) / (points[n - 1].0 - points[n - 2].0)));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmgFit {
    pub params: EMGParams,
    /// √Σ residual²
    pub residual_norm: f64,
    pub iterations: usize,
    /// s²(JᵀJ)⁻¹ over (mu, sigma, tau, amplitude); `None` when singular or
    /// when there are no spare degrees of freedom.
    pub covariance: Option<[[f64; 4]; 4]>,
    /// Best residual norm after each simplex iteration.
    pub history: Vec<f64>,
}

impl EmgFit {
    pub fn mean(&self) -> f64 {
        self.params.mean()
    }

    pub fn sd(&self) -> f64 {
        self.params.sd()
    }
}

/// Moment-based starting point: weighted mean, variance and skewness of the
/// (clipped non-negative) data, mapped through the EMG moment relations.
pub fn emg_initial_guess(data: &[(f64, f64)]) -> Result<EMGParams> {
    let w: Vec<f64> = data.iter().map(|p| p.1.max(0.0)).collect();
    let total: f64 = w.iter().sum();
    if !(total > 0.0) {
        return Err(Error::FitFailed { iterations: 0, reason: "no positive signal".into() });
    }
    let mean = data.iter().zip(&w).map(|(p, w)| p.0 * w).sum::<f64>() / total;
    let var = data.iter().zip(&w).map(|(p, w)| (p.0 - mean).powi(2) * w).sum::<f64>() / total;
    let m3 = data.iter().zip(&w).map(|(p, w)| (p.0 - mean).powi(3) * w).sum::<f64>() / total;
    if !(var > 0.0) {
        return Err(Error::FitFailed { iterations: 0, reason: "zero-width data".into() });
    }
    let sd = var.sqrt();
    let skew = (m3 / (sd * sd * sd)).clamp(0.1, 1.8);
    let tau = sd * (skew / 2.0).cbrt();
    let sigma = (var - tau * tau).max(0.01 * var).sqrt();
    // area under the data by the trapezoid rule
    let area: f64 = data.windows(2).map(|p| 0.5 * (p[0].1 + p[1].1) * (p[1].0 - p[0].0)).sum();
    EMGParams::new(mean - tau, sigma, tau, area.max(f64::MIN_POSITIVE))
}

fn best_amplitude<F: Fn(f64) -> f64>(data: &[(f64, f64)], shape: F) -> (f64, f64) {
    let (mut sy, mut ss) = (0.0, 0.0);
    for &(x, y) in data {
        let s = shape(x);
        sy += s * y;
        ss += s * s;
    }
    let a = if ss > 0.0 { sy / ss } else { 0.0 };
    let rss = data.iter().map(|&(x, y)| (y - a * shape(x)).powi(2)).sum();
    (a, rss)
}

/// Least-squares fit of amplitude·EMG(x; mu, sigma, tau).
pub fn fit_emg(data: &[(f64, f64)], init: Option<EMGParams>) -> Result<EmgFit> {
    if data.len() < 8 {
        return Err(Error::Input(format!("EMG fit needs at least 8 points, got {}", data.len())));
    }
    let init = match init {
        Some(p) => p,
        None => emg_initial_guess(data)?,
    };
    let shape_at = |v: &[f64]| EMGParams { mu: v[0], sigma: v[1].exp(), tau: v[2].exp(), amplitude: 1.0 };
    let objective = |v: &[f64]| {
        let p = shape_at(v);
        best_amplitude(data, |x| p.pdf(x)).1
    };
    let span = data.last().unwrap().0 - data[0].0;
    let x0 = [init.mu, init.sigma.ln(), init.tau.ln()];
    let r = nelder_mead(objective, &x0, &[0.05 * span, 0.2, 0.2], 1e-11, MAX_ITERATIONS);
    let shape = shape_at(&r.x);
    let (amplitude, rss) = best_amplitude(data, |x| shape.pdf(x));
    let params = EMGParams { amplitude, ..shape };
    if !r.converged {
        return Err(Error::FitFailed {
            iterations: r.iterations,
            reason: format!("simplex did not converge; best so far {params:?}, rss {rss:e}"),
        });
    }
    Ok(EmgFit {
        params,
        residual_norm: rss.sqrt(),
        iterations: r.iterations,
        covariance: emg_covariance(data, &params, rss),
        history: r.history.iter().map(|v| v.sqrt()).collect(),
    })
}

fn emg_covariance(data: &[(f64, f64)], p: &EMGParams, rss: f64) -> Option<[[f64; 4]; 4]> {
    let dof = data.len().checked_sub(4).filter(|&d| d > 0)?;
    let base = [p.mu, p.sigma, p.tau, p.amplitude];
    let model = |v: &[f64; 4], x: f64| EMGParams { mu: v[0], sigma: v[1], tau: v[2], amplitude: v[3] }.value(x);
    let mut jtj = Matrix4::<f64>::zeros();
    let steps: Vec<f64> = base.iter().map(|b| 1e-6 * b.abs().max(1e-6)).collect();
    for &(x, _) in data {
        let mut row = [0.0; 4];
        for k in 0..4 {
            let (mut hi, mut lo) = (base, base);
            hi[k] += steps[k];
            lo[k] -= steps[k];
            row[k] = (model(&hi, x) - model(&lo, x)) / (2.0 * steps[k]);
        }
        for a in 0..4 {
            for b in 0..4 {
                jtj[(a, b)] += row[a] * row[b];
            }
        }
    }
    let inv = jtj.try_inverse()?;
    let s2 = rss / dof as f64;
    let mut out = [[0.0; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            out[a][b] = s2 * inv[(a, b)];
        }
    }
    Some(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianFitResult {
    pub center: f64,
    pub sigma: f64,
    pub amplitude: f64,
    pub offset: f64,
    pub fwhm: f64,
    pub residual_norm: f64,
}

/// Least-squares fit of offset + amplitude·exp(−(x − center)²/(2σ²)).
pub fn fit_gaussian(profile: &[(f64, f64)]) -> Result<GaussianFitResult> {
    if profile.len() < 5 {
        return Err(Error::Input(format!("Gaussian fit needs at least 5 points, got {}", profile.len())));
    }
    let lo = profile.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let hi = profile.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let span = profile.last().unwrap().0 - profile[0].0;
    if !(hi - lo > 1e-12 * hi.abs().max(lo.abs()).max(f64::MIN_POSITIVE)) {
        return Err(Error::FitFailed { iterations: 0, reason: "flat profile".into() });
    }
    let w: Vec<f64> = profile.iter().map(|p| p.1 - lo).collect();
    let total: f64 = w.iter().sum();
    let c0 = profile.iter().zip(&w).map(|(p, w)| p.0 * w).sum::<f64>() / total;
    let s0 = (profile.iter().zip(&w).map(|(p, w)| (p.0 - c0).powi(2) * w).sum::<f64>() / total).sqrt();

    // for fixed (center, σ) the amplitude and offset solve a 2×2 system
    let linear = |c: f64, s: f64| -> Option<(f64, f64, f64)> {
        let (mut gg, mut g1, mut n, mut gy, mut y1) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for &(x, y) in profile {
            let g = (-(x - c).powi(2) / (2.0 * s * s)).exp();
            gg += g * g;
            g1 += g;
            n += 1.0;
            gy += g * y;
            y1 += y;
        }
        let sol = Matrix2::new(gg, g1, g1, n).lu().solve(&Vector2::new(gy, y1))?;
        let (a, b) = (sol[0], sol[1]);
        let rss = profile
            .iter()
            .map(|&(x, y)| (y - b - a * (-(x - c).powi(2) / (2.0 * s * s)).exp()).powi(2))
            .sum();
        Some((a, b, rss))
    };
    let objective = |v: &[f64]| linear(v[0], v[1].exp()).map(|r| r.2).unwrap_or(f64::INFINITY);
    let r = nelder_mead(objective, &[c0, s0.max(1e-3 * span).ln()], &[0.05 * span, 0.2], 1e-12, MAX_ITERATIONS);
    let (center, sigma) = (r.x[0], r.x[1].exp());
    if !r.converged {
        return Err(Error::FitFailed { iterations: r.iterations, reason: "simplex did not converge".into() });
    }
    if sigma > 10.0 * span {
        return Err(Error::FitFailed {
            iterations: r.iterations,
            reason: format!("width diverged (sigma = {sigma:e} vs data span {span:e})"),
        });
    }
    let (amplitude, offset, rss) = linear(center, sigma)
        .ok_or(Error::FitFailed { iterations: r.iterations, reason: "singular linear system".into() })?;
    Ok(GaussianFitResult { center, sigma, amplitude, offset, fwhm: FWHM_PER_SIGMA * sigma, residual_norm: rss.sqrt() })
}

/// Splits a two-ion projection at the lowest point between its two highest
/// local maxima and fits each half separately.
pub fn fit_two_peaks(profile: &[(f64, f64)]) -> Result<(GaussianFitResult, GaussianFitResult)> {
    let mut maxima: Vec<usize> = (1..profile.len().saturating_sub(1))
        .filter(|&i| profile[i].1 > profile[i - 1].1 && profile[i].1 >= profile[i + 1].1)
        .collect();
    if maxima.len() < 2 {
        return Err(Error::FitFailed { iterations: 0, reason: "fewer than two peaks".into() });
    }
    maxima.sort_by(|&a, &b| profile[b].1.total_cmp(&profile[a].1));
    let (a, b) = (maxima[0].min(maxima[1]), maxima[0].max(maxima[1]));
    let split = (a..=b).min_by(|&i, &j| profile[i].1.total_cmp(&profile[j].1)).unwrap();
    Ok((fit_gaussian(&profile[..=split])?, fit_gaussian(&profile[split..])?))
}

/// Reads two numeric columns separated by commas or whitespace. Blank lines,
/// '#' comments and a single non-numeric header before the data are skipped.
pub fn read_two_column<R: BufRead>(reader: R) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    let mut header_seen = false;
    for (k, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::Input(format!("line {}: {e}", k + 1)))?;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let cols: Vec<&str> = body.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
        let parsed: std::result::Result<Vec<f64>, _> = cols.iter().map(|c| c.parse::<f64>()).collect();
        match parsed {
            Ok(v) if v.len() == 2 => out.push((v[0], v[1])),
            Ok(v) => {
                return Err(Error::Input(format!("line {}: expected 2 columns, found {}", k + 1, v.len())));
            }
            Err(_) if out.is_empty() && !header_seen => header_seen = true,
            Err(e) => return Err(Error::Input(format!("line {}: {e}", k + 1))),
        }
    }
    Ok(out)
}

pub fn write_two_column<W: Write>(mut w: W, header: (&str, &str), data: &[(f64, f64)]) -> std::io::Result<()> {
    writeln!(w, "{},{}", header.0, header.1)?;
    for (x, y) in data {
        writeln!(w, "{x:e},{y:e}")?;
    }
    Ok(())
}
