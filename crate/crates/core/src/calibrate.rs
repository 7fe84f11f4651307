//! Deterministic calibration of the spectral-diffusion parameters against
//! target linewidths.
//!
//! A single scan sees the homogeneous excitation line convolved with the
//! stationary distribution of the fast jitter. The slow walk adds, on
//! average, a variance of about `D T / 6` to a time average over a session of
//! length `T`: the mean squared distance of a Brownian path from its own time
//! average.

use crate::analysis::{fit_gaussian, Spectrum};
use crate::error::{Error, Result};
use crate::physics::{excitation_probability_unchecked, gaussian_fwhm};

/// Expected excitation probability versus laser-ion detuning with Gaussian
/// jitter of standard deviation `sigma` (Hz), normalized to `p_max = 1`.
pub fn expected_scan_profile(detunings: &[f64], gamma_h: f64, sigma: f64) -> Vec<f64> {
    if sigma <= 0.0 {
        return detunings
            .iter()
            .map(|&d| excitation_probability_unchecked(d, gamma_h, 1.0))
            .collect();
    }
    let step = sigma.min(gamma_h) / 8.0;
    let half = (8.0 * sigma / step).ceil() as i64;
    let norm = 1.0 / (sigma * (2.0 * std::f64::consts::PI).sqrt());
    detunings
        .iter()
        .map(|&d| {
            (-half..=half)
                .map(|i| {
                    let x = i as f64 * step;
                    let w = if i.abs() == half { 0.5 } else { 1.0 };
                    w * norm * (-0.5 * (x / sigma).powi(2)).exp()
                        * excitation_probability_unchecked(d - x, gamma_h, 1.0)
                })
                .sum::<f64>()
                * step
        })
        .collect()
}

/// FWHM of a Gaussian fitted to the expected single-scan profile.
pub fn single_scan_fwhm(detunings: &[f64], gamma_h: f64, sigma: f64) -> Result<f64> {
    let profile = expected_scan_profile(detunings, gamma_h, sigma);
    let spec = Spectrum::new(
        detunings.iter().copied().zip(profile).collect(),
        0.0,
        "expected profile",
    )?;
    let fit = fit_gaussian(&spec)?;
    if !fit.converged() {
        return Err(Error::NotConverged("expected-profile Gaussian fit".into()));
    }
    Ok(fit.value("fwhm"))
}

/// Fast-jitter standard deviation for which a Gaussian fit to a single scan
/// over `detunings` returns `target_fwhm`. Bisection on the expected profile.
pub fn fast_sigma_for_scan_fwhm(detunings: &[f64], gamma_h: f64, target_fwhm: f64) -> Result<f64> {
    let floor = single_scan_fwhm(detunings, gamma_h, 0.0)?;
    if target_fwhm <= floor {
        return Err(Error::param(
            "target_fwhm",
            format!("{target_fwhm} Hz is below the homogeneous-line fit width {floor} Hz"),
        ));
    }
    let (mut lo, mut hi) = (0.0, target_fwhm / gaussian_fwhm(1.0));
    while single_scan_fwhm(detunings, gamma_h, hi)? < target_fwhm {
        hi *= 1.5;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if single_scan_fwhm(detunings, gamma_h, mid)? < target_fwhm {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-9 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Random-walk diffusivity (Hz²/s) that broadens a Gaussian line of
/// `single_fwhm` to `averaged_fwhm` when `n_scans` scans taken `spacing`
/// seconds apart are averaged.
///
/// For a walk sampled at `N` equally spaced times the expected variance of
/// the samples about their own mean is `D Δ (N² - 1) / (6 N)`.
pub fn slow_rate_for_averaged_fwhm(
    single_fwhm: f64,
    averaged_fwhm: f64,
    n_scans: usize,
    spacing: f64,
) -> Result<f64> {
    if !(averaged_fwhm > single_fwhm && single_fwhm > 0.0) {
        return Err(Error::param("averaged_fwhm", "must exceed the single-scan FWHM"));
    }
    if n_scans < 2 {
        return Err(Error::param("n_scans", "must be >= 2"));
    }
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(Error::param("spacing", "must be > 0"));
    }
    let s1 = single_fwhm / gaussian_fwhm(1.0);
    let s2 = averaged_fwhm / gaussian_fwhm(1.0);
    let n = n_scans as f64;
    Ok((s2 * s2 - s1 * s1) * 6.0 * n / (spacing * (n * n - 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Vec<f64> {
        (0..101).map(|i| -1e9 + 20e6 * i as f64).collect()
    }

    #[test]
    fn narrow_homogeneous_line_gives_gaussian_width() {
        // with γ_h ≪ σ the profile is essentially the jitter Gaussian
        let w = single_scan_fwhm(&grid(), 0.5e6, 60e6).unwrap();
        assert!((w / gaussian_fwhm(60e6) - 1.0).abs() < 0.02, "{w}");
    }

    #[test]
    fn calibration_hits_target() {
        let g = grid();
        let sigma = fast_sigma_for_scan_fwhm(&g, 20e6, 173.6e6).unwrap();
        let w = single_scan_fwhm(&g, 20e6, sigma).unwrap();
        assert!((w / 173.6e6 - 1.0).abs() < 1e-6);
        assert!(sigma < 173.6e6 / gaussian_fwhm(1.0));
        assert!(fast_sigma_for_scan_fwhm(&g, 200e6, 100e6).is_err());
    }

    #[test]
    fn slow_rate_formula() {
        let d = slow_rate_for_averaged_fwhm(173.6e6, 209.4e6, 30, 420.0).unwrap();
        let s1 = 173.6e6 / gaussian_fwhm(1.0);
        let s2 = 209.4e6 / gaussian_fwhm(1.0);
        let spread = d * 420.0 * (900.0 - 1.0) / 180.0;
        assert!((spread / (s2 * s2 - s1 * s1) - 1.0).abs() < 1e-12);
        // many scans approach the continuous-time D T / 6
        let d_inf = slow_rate_for_averaged_fwhm(173.6e6, 209.4e6, 100_000, 0.126).unwrap();
        assert!((d_inf * 12_600.0 / 6.0 / (s2 * s2 - s1 * s1) - 1.0).abs() < 1e-3);
        assert!(slow_rate_for_averaged_fwhm(2.0, 1.0, 3, 1.0).is_err());
        assert!(slow_rate_for_averaged_fwhm(1.0, 2.0, 1, 1.0).is_err());
    }
}
