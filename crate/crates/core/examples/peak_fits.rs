//! Peak fitting: an exponentially modified Gaussian on a noisy energy
//! spectrum, and Gaussian fits to a two-ion projection profile.
//!
//! cargo run --example peak_fits

use std::f64::consts::TAU;

use penning::analysis::{fit_emg, fit_two_peaks, EMGParams};
use penning::modes::ion_ion_distance;
use penning::IonSpecies;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn main() -> penning::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let noise = Normal::new(0.0, 0.03).unwrap();

    let truth = EMGParams::from_moments(17.0, 1.5, 1.0, 2000.0)?;
    let data: Vec<(f64, f64)> = (0..90)
        .map(|k| 8.0 + 0.25 * k as f64)
        .map(|e| (e, truth.value(e) * (1.0 + noise.sample(&mut rng))))
        .collect();
    let fit = fit_emg(&data, None)?;
    let p = fit.params;
    println!("EMG fit: mu = {:.3}, sigma = {:.3}, tau = {:.3} eV after {} iterations", p.mu, p.sigma, p.tau, fit.iterations);
    println!("  mean = {:.3} eV, sd = {:.3} eV (true 17.000, 1.500)", fit.mean(), fit.sd());
    if let Some(c) = fit.covariance {
        println!("  std errors mu {:.3}, sigma {:.3}, tau {:.3}", c[0][0].sqrt(), c[1][1].sqrt(), c[2][2].sqrt());
    }

    // two ions imaged along the axis, each blurred to 2.25 µm FWHM
    let d = ion_ion_distance(&IonSpecies::ca40(), TAU * 333e3) * 1e6;
    let s = 2.25 / 2.354_820_045;
    let profile: Vec<(f64, f64)> = (0..200)
        .map(|k| -15.0 + 0.15 * k as f64)
        .map(|x| {
            let g = |c: f64| (-(x - c) * (x - c) / (2.0 * s * s)).exp();
            (x, 10.0 + 500.0 * (g(-d / 2.0) + g(d / 2.0)) * (1.0 + noise.sample(&mut rng)))
        })
        .collect();
    let (a, b) = fit_two_peaks(&profile)?;
    println!("\ntwo-ion profile: separation {:.2} um (expected {d:.2}), FWHM {:.2} / {:.2} um", b.center - a.center, a.fwhm, b.fwhm);
    Ok(())
}
