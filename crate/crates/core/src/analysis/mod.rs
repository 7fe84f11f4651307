//! Reduction of click streams and spectra to lifetimes, Purcell factors,
//! correlation functions and linewidths.

pub mod fit;
mod g2;
mod histogram;

pub use fit::{
    fit_exponential, fit_exponential_from, fit_gaussian, fit_gaussian_from, fit_lorentzian,
    fit_lorentzian_from, FitModel, FitParameter, FitResult, FitStatus,
};
pub use g2::{
    background_corrected_g2, dark_count_floor, pulsed_g2, pulsed_g2_with, CoincidenceFloor,
    CorrelationHistogram,
};
pub use histogram::{histogram_arrivals, DecayHistogram};

use crate::error::{Error, Result};
use crate::physics::purcell_from_lifetimes;

/// Counts (or any non-negative signal) on a strictly increasing frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    points: Vec<(f64, f64)>,
    pub acquisition_time: f64,
    pub label: String,
}

impl Spectrum {
    pub fn new(points: Vec<(f64, f64)>, acquisition_time: f64, label: impl Into<String>) -> Result<Self> {
        if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::param("frequency", "spectrum frequencies must be strictly increasing"));
        }
        if points.iter().any(|&(f, c)| !f.is_finite() || !(c.is_finite() && c >= 0.0)) {
            return Err(Error::param("counts", "spectrum values must be finite and >= 0"));
        }
        Ok(Self {
            points,
            acquisition_time,
            label: label.into(),
        })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.0).collect()
    }

    pub fn counts(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.1).collect()
    }
}

/// Repeated scans stacked into a (scan × frequency) map with per-scan and
/// time-averaged Gaussian fits.
#[derive(Debug)]
pub struct SpectralDiffusionMap {
    pub frequencies: Vec<f64>,
    /// `counts[scan][point]`
    pub counts: Vec<Vec<f64>>,
    pub scan_fits: Vec<Result<FitResult>>,
    pub averaged: Spectrum,
    pub averaged_fit: FitResult,
}

impl SpectralDiffusionMap {
    /// FWHM of every scan whose fit converged.
    pub fn scan_fwhms(&self) -> Vec<f64> {
        self.scan_fits
            .iter()
            .filter_map(|f| f.as_ref().ok())
            .filter(|f| f.converged())
            .map(|f| f.value("fwhm"))
            .collect()
    }

    pub fn mean_scan_fwhm(&self) -> f64 {
        let w = self.scan_fwhms();
        w.iter().sum::<f64>() / w.len() as f64
    }

    pub fn averaged_fwhm(&self) -> f64 {
        self.averaged_fit.value("fwhm")
    }
}

pub fn spectral_diffusion_map(scans: &[Spectrum]) -> Result<SpectralDiffusionMap> {
    if scans.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "a spectral diffusion map needs at least 2 scans, got {}",
            scans.len()
        )));
    }
    let frequencies = scans[0].frequencies();
    for (i, s) in scans.iter().enumerate().skip(1) {
        if s.frequencies() != frequencies {
            return Err(Error::MismatchedGrid(format!(
                "scan {i} does not share the frequency grid of scan 0"
            )));
        }
    }
    let counts: Vec<Vec<f64>> = scans.iter().map(Spectrum::counts).collect();
    let n = scans.len() as f64;
    let mean: Vec<(f64, f64)> = frequencies
        .iter()
        .enumerate()
        .map(|(j, &f)| (f, counts.iter().map(|row| row[j]).sum::<f64>() / n))
        .collect();
    let acquisition = scans.iter().map(|s| s.acquisition_time).sum();
    let averaged = Spectrum::new(mean, acquisition, "time-averaged")?;
    let averaged_fit = fit_gaussian(&averaged)?;
    let scan_fits = scans.iter().map(fit_gaussian).collect();
    Ok(SpectralDiffusionMap {
        frequencies,
        counts,
        scan_fits,
        averaged,
        averaged_fit,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PurcellReport {
    pub purcell_factor: f64,
    /// First-order propagated 1σ uncertainty.
    pub sigma: f64,
}

/// Purcell factor from an enhanced and a reference lifetime fit.
///
/// `P + 1 = T1₀ / T1`, so the relative error of `P + 1` is the quadrature sum
/// of the relative lifetime errors.
pub fn purcell_report(t1_fit: &FitResult, t1_0_fit: &FitResult) -> Result<PurcellReport> {
    for (label, f) in [("enhanced", t1_fit), ("reference", t1_0_fit)] {
        if !f.converged() {
            return Err(Error::NotConverged(format!("{label} lifetime fit ({})", f.status.name())));
        }
    }
    let t1 = t1_fit.value("t1");
    let t1_0 = t1_0_fit.value("t1");
    let p = purcell_from_lifetimes(t1, t1_0)?;
    let rel = |f: &FitResult, t: f64| f.sigma("t1").unwrap_or(0.0) / t;
    let sigma = (p + 1.0) * rel(t1_fit, t1).hypot(rel(t1_0_fit, t1_0));
    Ok(PurcellReport {
        purcell_factor: p,
        sigma,
    })
}

/// A converged lifetime-only fit result, e.g. for quoting measured values.
pub fn lifetime_result(t1: f64, sigma: f64) -> FitResult {
    FitResult {
        model: FitModel::Exponential,
        parameters: vec![FitParameter {
            name: "t1".into(),
            value: t1,
            sigma: Some(sigma),
            unit: "s".into(),
        }],
        rss: 0.0,
        iterations: 0,
        status: FitStatus::Converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian_scan(center: f64, fwhm: f64) -> Spectrum {
        let pts = (0..81)
            .map(|i| {
                let f = -400e6 + 10e6 * i as f64;
                let d = f - center;
                (f, 5.0 + 100.0 * (-4.0 * std::f64::consts::LN_2 * d * d / (fwhm * fwhm)).exp())
            })
            .collect();
        Spectrum::new(pts, 1.0, "g").unwrap()
    }

    #[test]
    fn spectrum_invariants() {
        assert!(Spectrum::new(vec![(1.0, 1.0), (1.0, 2.0)], 0.0, "").is_err());
        assert!(Spectrum::new(vec![(1.0, -1.0)], 0.0, "").is_err());
    }

    #[test]
    fn identical_scans_average_to_the_same_width() {
        let s = gaussian_scan(0.0, 173.6e6);
        let map = spectral_diffusion_map(&[s.clone(), s.clone(), s]).unwrap();
        assert!((map.averaged_fwhm() / map.mean_scan_fwhm() - 1.0).abs() < 1e-9);
        assert_eq!(map.counts.len(), 3);
    }

    #[test]
    fn drifting_scans_broaden_the_average() {
        let scans: Vec<Spectrum> = [-60e6, -10e6, 30e6, 80e6]
            .iter()
            .map(|&c| gaussian_scan(c, 173.6e6))
            .collect();
        let map = spectral_diffusion_map(&scans).unwrap();
        assert!(map.averaged_fwhm() > map.mean_scan_fwhm());
    }

    #[test]
    fn map_rejects_bad_input() {
        let s = gaussian_scan(0.0, 100e6);
        assert!(spectral_diffusion_map(&[s.clone()]).is_err());
        let other = Spectrum::new(
            s.points().iter().map(|&(f, c)| (f + 1.0, c)).collect(),
            1.0,
            "shifted",
        )
        .unwrap();
        assert!(matches!(
            spectral_diffusion_map(&[s, other]),
            Err(Error::MismatchedGrid(_))
        ));
    }

    #[test]
    fn purcell_from_quoted_lifetimes() {
        let r = purcell_report(&lifetime_result(2.43e-6, 0.13e-6), &lifetime_result(1.12e-3, 0.18e-3)).unwrap();
        assert!((r.purcell_factor - 460.0).abs() < 1.0);
        let expect = (1.12e-3 / 2.43e-6) * ((0.13f64 / 2.43).powi(2) + (0.18f64 / 1.12).powi(2)).sqrt();
        assert!((r.sigma - expect).abs() < 1e-9 * expect);
        assert!((r.sigma - 77.0).abs() < 2.0, "{}", r.sigma);

        let same = purcell_report(&lifetime_result(1e-3, 1e-5), &lifetime_result(1e-3, 1e-5)).unwrap();
        assert_eq!(same.purcell_factor, 0.0);

        let mut bad = lifetime_result(1e-3, 1e-5);
        bad.status = FitStatus::MaxIterations;
        assert!(purcell_report(&bad, &lifetime_result(1e-3, 1e-5)).is_err());
    }
}
