//! Small numerical helpers shared across modules.

use crate::error::{Error, Result};

/// Finds a root of `f` in `[lo, hi]` by bisection. `f(lo)` and `f(hi)` must
/// have opposite signs (or one of them be zero).
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, xtol: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() || !flo.is_finite() || !fhi.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "root not bracketed in [{lo}, {hi}]: f = ({flo}, {fhi})"
        )));
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= xtol * (1.0 + mid.abs()) {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Adaptive Simpson quadrature with Richardson correction.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64) -> f64 {
    fn step<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        // the last clause stops refinement once round-off dominates
        if depth == 0 || delta.abs() <= 15.0 * tol || delta.abs() <= 1e-15 * (left + right).abs() {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    // a 32-panel composite estimate sets the absolute tolerance, so narrow
    // peaks missed by the first three samples still get refined
    const PANELS: usize = 32;
    let h = (b - a) / PANELS as f64;
    let panels: Vec<(f64, f64, f64, f64, f64, f64)> = (0..PANELS)
        .map(|k| {
            let (x0, x1) = (a + k as f64 * h, a + (k + 1) as f64 * h);
            let (f0, fm, f1) = (f(x0), f(0.5 * (x0 + x1)), f(x1));
            (x0, x1, f0, fm, f1, h / 6.0 * (f0 + 4.0 * fm + f1))
        })
        .collect();
    let scale: f64 = panels.iter().map(|p| p.5.abs()).sum();
    let tol = rel_tol * scale.max(f64::MIN_POSITIVE) / PANELS as f64;
    panels.iter().map(|&(x0, x1, f0, fm, f1, whole)| step(f, x0, x1, f0, fm, f1, whole, tol, 40)).sum()
}

/// One classical fourth-order Runge–Kutta step for an autonomous system of
/// fixed dimension.
pub fn rk4_step<const N: usize, F>(f: &F, y: &[f64; N], dt: f64) -> [f64; N]
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    let add = |a: &[f64; N], b: &[f64; N], h: f64| {
        let mut out = *a;
        for i in 0..N {
            out[i] += h * b[i];
        }
        out
    };
    let k1 = f(y);
    let k2 = f(&add(y, &k1, 0.5 * dt));
    let k3 = f(&add(y, &k2, 0.5 * dt));
    let k4 = f(&add(y, &k3, dt));
    let mut out = *y;
    for i in 0..N {
        out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Outcome of [`nelder_mead`].
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub fx: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Best objective value after each iteration; never increases.
    pub history: Vec<f64>,
}

/// Nelder–Mead minimisation with standard coefficients. `step` sets the
/// initial simplex edge along each coordinate. The simplex is rebuilt around
/// the best point whenever it collapses, and the search stops once a restart
/// no longer improves the minimum or `max_iter` is reached.
pub fn nelder_mead<F: Fn(&[f64]) -> f64>(f: F, x0: &[f64], step: &[f64], xtol: f64, max_iter: usize) -> SimplexResult {
    let n = x0.len();
    let eval = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() { f64::INFINITY } else { v }
    };
    let build = |center: &[f64], scale: f64| {
        let mut pts = vec![center.to_vec()];
        for i in 0..n {
            let mut p = center.to_vec();
            p[i] += scale * step[i];
            pts.push(p);
        }
        pts
    };
    let mut pts = build(x0, 1.0);
    let mut vals: Vec<f64> = pts.iter().map(|p| eval(p)).collect();
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut last_restart_best = f64::INFINITY;
    let mut restart_scale = 1.0;
    loop {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = order.iter().map(|&i| pts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();

        let size = pts[1..]
            .iter()
            .map(|p| p.iter().zip(&pts[0]).map(|(a, b)| (a - b).abs() / (b.abs() + xtol)).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if size <= xtol {
            // restart until the minimum stops moving
            if vals[0] >= last_restart_best || restart_scale < 1e-6 {
                return SimplexResult { x: pts[0].clone(), fx: vals[0], iterations, converged: true, history };
            }
            last_restart_best = vals[0];
            restart_scale *= 0.1;
            let best = pts[0].clone();
            pts = build(&best, restart_scale);
            vals = std::iter::once(vals[0]).chain(pts[1..].iter().map(|p| eval(p))).collect();
            continue;
        }
        if iterations >= max_iter {
            return SimplexResult { x: pts[0].clone(), fx: vals[0], iterations, converged: false, history };
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for p in &pts[..n] {
            for (c, v) in centroid.iter_mut().zip(p) {
                *c += v / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&pts[n]).map(|(c, w)| c + t * (w - c)).collect() };
        let xr = along(-1.0);
        let fr = eval(&xr);
        if fr < vals[0] {
            let xe = along(-2.0);
            let fe = eval(&xe);
            if fe < fr {
                pts[n] = xe;
                vals[n] = fe;
            } else {
                pts[n] = xr;
                vals[n] = fr;
            }
        } else if fr < vals[n - 1] {
            pts[n] = xr;
            vals[n] = fr;
        } else {
            let (xc, fc) = if fr < vals[n] {
                let x = along(-0.5);
                let v = eval(&x);
                (x, v)
            } else {
                let x = along(0.5);
                let v = eval(&x);
                (x, v)
            };
            if fc < vals[n].min(fr) {
                pts[n] = xc;
                vals[n] = fc;
            } else {
                for i in 1..=n {
                    pts[i] = pts[i].iter().zip(&pts[0]).map(|(p, b)| b + 0.5 * (p - b)).collect();
                    vals[i] = eval(&pts[i]);
                }
            }
        }
        history.push(vals.iter().cloned().fold(f64::INFINITY, f64::min));
    }
}
