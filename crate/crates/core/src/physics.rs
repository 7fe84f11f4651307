//! Closed-form emitter and cavity physics.
//!
//! Everything here is a pure function of its arguments. Frequencies are in Hz,
//! times in seconds, rates in 1/s.

use std::f64::consts::PI;

use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Vacuum wavelength (m) to optical frequency (Hz).
pub fn wavelength_to_frequency(lambda: f64) -> f64 {
    SPEED_OF_LIGHT / lambda
}

/// Optical frequency (Hz) to vacuum wavelength (m).
pub fn frequency_to_wavelength(nu: f64) -> f64 {
    SPEED_OF_LIGHT / nu
}

/// Parameters of the two-process spectral diffusion model.
///
/// The fast component is an Ornstein-Uhlenbeck process with stationary
/// standard deviation `sigma_fast` (Hz) and correlation time `tau_fast` (s).
/// The slow component is an unbounded random walk whose variance grows as
/// `sigma_slow_rate * t` (Hz²/s).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SpectralDiffusionParams {
    pub sigma_fast: f64,
    pub tau_fast: f64,
    pub sigma_slow_rate: f64,
}

impl SpectralDiffusionParams {
    pub fn is_static(&self) -> bool {
        self.sigma_fast == 0.0 && self.sigma_slow_rate == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("sigma_fast", self.sigma_fast),
            ("tau_fast", self.tau_fast),
            ("sigma_slow_rate", self.sigma_slow_rate),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::param(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// A single two-level ion.
#[derive(Debug, Clone, PartialEq)]
pub struct EmitterModel {
    /// Transition frequency (Hz).
    pub nu_ion_0: f64,
    /// Cavity-free decay rate (1/s).
    pub gamma_0: f64,
    /// Homogeneous excitation FWHM (Hz), laser linewidth included.
    pub gamma_h: f64,
    /// On-resonance excitation probability per pulse.
    pub p_max: f64,
    pub diffusion: SpectralDiffusionParams,
}

impl EmitterModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.nu_ion_0.is_finite() && self.nu_ion_0 > 0.0) {
            return Err(Error::param("nu_ion_0", "must be > 0"));
        }
        if !(self.gamma_0.is_finite() && self.gamma_0 > 0.0) {
            return Err(Error::param("gamma_0", "must be > 0"));
        }
        if !(self.gamma_h.is_finite() && self.gamma_h > 0.0) {
            return Err(Error::param("gamma_h", "must be > 0"));
        }
        // p_max = 0 is allowed so that a configured but dark emitter can be simulated.
        if !(0.0..=1.0).contains(&self.p_max) {
            return Err(Error::param("p_max", format!("must lie in [0, 1], got {}", self.p_max)));
        }
        self.diffusion.validate()
    }
}

/// Single Lorentzian cavity mode.
#[derive(Debug, Clone, PartialEq)]
pub struct CavityModel {
    pub nu_cav: f64,
    pub q_factor: f64,
    /// Purcell factor for an ion exactly on resonance.
    pub p_peak: f64,
    /// Free-form note, e.g. the design mode volume. Not used in any computation.
    pub mode_volume_note: String,
}

impl CavityModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.nu_cav.is_finite() && self.nu_cav > 0.0) {
            return Err(Error::param("nu_cav", "must be > 0"));
        }
        if !(self.q_factor.is_finite() && self.q_factor > 0.0) {
            return Err(Error::param("q_factor", "must be > 0"));
        }
        if !(self.p_peak.is_finite() && self.p_peak >= 0.0) {
            return Err(Error::param("p_peak", "must be >= 0"));
        }
        Ok(())
    }

    /// Cavity FWHM κ (Hz).
    pub fn fwhm(&self) -> f64 {
        self.nu_cav / self.q_factor
    }

    /// Purcell factor seen by an ion at `nu_ion`.
    pub fn purcell_at(&self, nu_ion: f64) -> f64 {
        let kappa = self.fwhm();
        let x = 2.0 * (nu_ion - self.nu_cav) / kappa;
        self.p_peak / (1.0 + x * x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorModel {
    /// Detection probability per photon that reaches the detector channel.
    pub efficiency: f64,
    /// Dark-count rate (1/s).
    pub dark_rate: f64,
    /// Non-paralyzable dead time (s).
    pub dead_time: f64,
    /// Fixed fraction of emitted photons routed to the detector. When unset the
    /// cavity branching ratio P/(P+1) is used.
    pub collection_fraction: Option<f64>,
}

impl Default for DetectorModel {
    fn default() -> Self {
        Self {
            efficiency: 1.0,
            dark_rate: 0.0,
            dead_time: 0.0,
            collection_fraction: None,
        }
    }
}

impl DetectorModel {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.efficiency) {
            return Err(Error::param("efficiency", "must lie in [0, 1]"));
        }
        if !(self.dark_rate.is_finite() && self.dark_rate >= 0.0) {
            return Err(Error::param("dark_rate", "must be >= 0"));
        }
        if !(self.dead_time.is_finite() && self.dead_time >= 0.0) {
            return Err(Error::param("dead_time", "must be >= 0"));
        }
        if let Some(f) = self.collection_fraction {
            if !(0.0..=1.0).contains(&f) {
                return Err(Error::param("collection_fraction", "must lie in [0, 1]"));
            }
        }
        Ok(())
    }

    /// Probability that a photon emitted with Purcell factor `p` produces a click.
    pub fn click_probability(&self, p: f64) -> f64 {
        let routed = self
            .collection_fraction
            .unwrap_or_else(|| cavity_branching_ratio(p));
        routed * self.efficiency
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TuningKind {
    /// Nitrogen adsorption; redshifts the mode.
    AdsorbN2,
    /// Local heating; blueshifts the mode.
    HeatBlueshift,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuningStep {
    kind: TuningKind,
    magnitude: f64,
}

impl TuningStep {
    pub fn new(kind: TuningKind, magnitude: f64) -> Result<Self> {
        if !(magnitude.is_finite() && magnitude > 0.0) {
            return Err(Error::param(
                "magnitude",
                format!("tuning step must be > 0 Hz, got {magnitude}"),
            ));
        }
        Ok(Self { kind, magnitude })
    }

    pub fn adsorb_n2(magnitude: f64) -> Result<Self> {
        Self::new(TuningKind::AdsorbN2, magnitude)
    }

    pub fn heat_blueshift(magnitude: f64) -> Result<Self> {
        Self::new(TuningKind::HeatBlueshift, magnitude)
    }

    pub fn kind(&self) -> TuningKind {
        self.kind
    }

    pub fn magnitude(&self) -> f64 {
        self.magnitude
    }
}

/// `baseline + amplitude * (fwhm/2)^2 / ((nu - center)^2 + (fwhm/2)^2)`
pub fn lorentzian(nu: f64, center: f64, fwhm: f64, amplitude: f64, baseline: f64) -> Result<f64> {
    if !(fwhm > 0.0) {
        return Err(Error::param("fwhm", format!("must be > 0, got {fwhm}")));
    }
    let hw2 = 0.25 * fwhm * fwhm;
    let d = nu - center;
    Ok(baseline + amplitude * hw2 / (d * d + hw2))
}

pub fn cavity_fwhm_from_q(nu_cav: f64, q_factor: f64) -> Result<f64> {
    if !(q_factor > 0.0) {
        return Err(Error::param("q_factor", format!("must be > 0, got {q_factor}")));
    }
    Ok(nu_cav / q_factor)
}

/// Purcell factor at ion-cavity detuning `delta` for a mode of FWHM `kappa`.
pub fn purcell_profile(delta: f64, p_peak: f64, kappa: f64) -> Result<f64> {
    if !(kappa > 0.0) {
        return Err(Error::param("kappa", format!("must be > 0, got {kappa}")));
    }
    if !(p_peak >= 0.0) {
        return Err(Error::param("p_peak", "must be >= 0"));
    }
    let x = 2.0 * delta / kappa;
    Ok(p_peak / (1.0 + x * x))
}

/// Total decay rate Γ = Γ₀(1 + P).
pub fn enhanced_decay_rate(gamma_0: f64, p: f64) -> Result<f64> {
    if !(gamma_0 > 0.0) {
        return Err(Error::param("gamma_0", "must be > 0"));
    }
    if !(p >= 0.0) {
        return Err(Error::param("p", "must be >= 0"));
    }
    Ok(gamma_0 * (1.0 + p))
}

/// P = T1₀/T1 − 1.
pub fn purcell_from_lifetimes(t1: f64, t1_0: f64) -> Result<f64> {
    if !(t1 > 0.0) {
        return Err(Error::param("t1", format!("lifetime must be > 0, got {t1}")));
    }
    if !(t1_0 > 0.0) {
        return Err(Error::param("t1_0", format!("lifetime must be > 0, got {t1_0}")));
    }
    Ok(t1_0 / t1 - 1.0)
}

/// Lifetime-limited linewidth 1/(2π T1).
pub fn radiative_linewidth(t1: f64) -> Result<f64> {
    if !(t1 > 0.0) {
        return Err(Error::param("t1", format!("lifetime must be > 0, got {t1}")));
    }
    Ok(1.0 / (2.0 * PI * t1))
}

/// Per-pulse excitation probability for an incoherently driven Lorentzian line.
pub fn excitation_probability(delta_laser_ion: f64, gamma_h: f64, p_max: f64) -> Result<f64> {
    if !(gamma_h > 0.0) {
        return Err(Error::param("gamma_h", "must be > 0"));
    }
    if !(p_max > 0.0 && p_max <= 1.0) {
        return Err(Error::param("p_max", format!("must lie in (0, 1], got {p_max}")));
    }
    Ok(excitation_probability_unchecked(delta_laser_ion, gamma_h, p_max))
}

#[inline]
pub(crate) fn excitation_probability_unchecked(delta: f64, gamma_h: f64, p_max: f64) -> f64 {
    let hw2 = 0.25 * gamma_h * gamma_h;
    p_max * hw2 / (hw2 + delta * delta)
}

/// Fraction of decays that emit into the cavity mode.
pub fn cavity_branching_ratio(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        p / (p + 1.0)
    }
}

pub fn apply_tuning_step(cavity: &CavityModel, step: TuningStep) -> CavityModel {
    let nu_cav = match step.kind {
        TuningKind::AdsorbN2 => cavity.nu_cav - step.magnitude,
        TuningKind::HeatBlueshift => cavity.nu_cav + step.magnitude,
    };
    CavityModel {
        nu_cav,
        ..cavity.clone()
    }
}

/// Gaussian FWHM for standard deviation `sigma`.
pub fn gaussian_fwhm(sigma: f64) -> f64 {
    2.0 * (2.0 * std::f64::consts::LN_2).sqrt() * sigma
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn design_cavity() -> CavityModel {
        CavityModel {
            nu_cav: 195.59e12,
            q_factor: 4.14e4,
            p_peak: 460.0,
            mode_volume_note: String::new(),
        }
    }

    #[test]
    fn lorentzian_peak_and_half_max() {
        assert_eq!(lorentzian(5.0, 5.0, 2.0, 1.0, 0.0).unwrap(), 1.0);
        assert_relative_eq!(lorentzian(6.0, 5.0, 2.0, 1.0, 0.0).unwrap(), 0.5);
        assert_relative_eq!(lorentzian(4.0, 5.0, 2.0, 1.0, 0.0).unwrap(), 0.5);
        assert!(lorentzian(0.0, 0.0, 0.0, 1.0, 0.0).is_err());
        assert!(lorentzian(0.0, 0.0, -1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn cavity_linewidth_from_q() {
        let nu = wavelength_to_frequency(1532.8e-9);
        let kappa = cavity_fwhm_from_q(nu, 4.14e4).unwrap();
        assert!((kappa - 4.724e9).abs() / 4.724e9 < 1e-3, "{kappa}");
        assert!((kappa - 4.7e9).abs() / 4.7e9 < 0.01);
        assert_eq!(cavity_fwhm_from_q(1.0, 1.0).unwrap(), 1.0);
        assert_eq!(
            cavity_fwhm_from_q(nu, 2.0 * 4.14e4).unwrap(),
            0.5 * cavity_fwhm_from_q(nu, 4.14e4).unwrap()
        );
        assert!(cavity_fwhm_from_q(nu, 0.0).is_err());
    }

    #[test]
    fn purcell_profile_values() {
        assert_eq!(purcell_profile(0.0, 460.0, 4.7e9).unwrap(), 460.0);
        assert_relative_eq!(purcell_profile(2.35e9, 460.0, 4.7e9).unwrap(), 230.0);
        assert_relative_eq!(purcell_profile(4.7e9, 460.0, 4.7e9).unwrap(), 92.0);
        assert!(purcell_profile(0.0, 460.0, 0.0).is_err());
    }

    #[test]
    fn decay_rate_and_lifetimes() {
        let g0 = 1.0 / 1.12e-3;
        let t1 = 1.0 / enhanced_decay_rate(g0, 460.0).unwrap();
        assert!((t1 - 2.43e-6).abs() < 0.005e-6, "{t1}");
        assert_eq!(enhanced_decay_rate(g0, 0.0).unwrap(), g0);
        assert_eq!(enhanced_decay_rate(1.0, 1.0).unwrap(), 2.0);

        let p = purcell_from_lifetimes(2.43e-6, 1.12e-3).unwrap();
        assert!((p - 459.9).abs() < 0.01, "{p}");
        assert_eq!(purcell_from_lifetimes(3.0, 3.0).unwrap(), 0.0);
        assert_eq!(purcell_from_lifetimes(1.0, 2.0).unwrap(), 1.0);
        assert!(purcell_from_lifetimes(0.0, 1.0).is_err());
        assert!(purcell_from_lifetimes(1.0, -1.0).is_err());
    }

    #[test]
    fn radiative_limit() {
        // 1 / (2π · 2.43 µs) = 65 495.86 Hz
        assert_relative_eq!(radiative_linewidth(2.43e-6).unwrap(), 65_495.86, max_relative = 1e-5);
        assert_relative_eq!(radiative_linewidth(1.0 / (2.0 * PI)).unwrap(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(radiative_linewidth(1.12e-3).unwrap(), 142.1, max_relative = 1e-3);
        assert!(radiative_linewidth(0.0).is_err());
    }

    #[test]
    fn excitation_line() {
        assert_eq!(excitation_probability(0.0, 50e6, 0.7).unwrap(), 0.7);
        assert_relative_eq!(excitation_probability(25e6, 50e6, 0.7).unwrap(), 0.35);
        assert!(excitation_probability(1e15, 50e6, 0.7).unwrap() < 1e-12);
        assert!(excitation_probability(0.0, 0.0, 0.7).is_err());
        assert!(excitation_probability(0.0, 1.0, 0.0).is_err());
        assert!(excitation_probability(0.0, 1.0, 1.5).is_err());
    }

    #[test]
    fn tuning_steps() {
        let cav = design_cavity();
        let red = apply_tuning_step(&cav, TuningStep::adsorb_n2(1e9).unwrap());
        assert_relative_eq!(red.nu_cav, 195.589e12);
        assert_eq!(red.q_factor, cav.q_factor);
        assert_eq!(red.p_peak, cav.p_peak);
        let back = apply_tuning_step(&red, TuningStep::heat_blueshift(1e9).unwrap());
        assert_eq!(back.nu_cav, cav.nu_cav);
        assert!(TuningStep::adsorb_n2(0.0).is_err());
        assert!(TuningStep::heat_blueshift(-5.0).is_err());
    }

    #[test]
    fn gaussian_width_conversion() {
        assert_relative_eq!(gaussian_fwhm(100e6), 235.482e6, max_relative = 1e-5);
    }

    proptest! {
        #[test]
        fn lorentzian_symmetric(x in -1e10f64..1e10, fwhm in 1e3f64..1e10, amp in -5.0f64..5.0) {
            let c = 195.59e12;
            let a = lorentzian(c + x, c, fwhm, amp, 0.3).unwrap();
            let b = lorentzian(c - x, c, fwhm, amp, 0.3).unwrap();
            // c ± x is itself rounded, so allow a few ulps of the detuning
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
            let a0 = lorentzian(x, 0.0, fwhm, amp, 0.3).unwrap();
            let b0 = lorentzian(-x, 0.0, fwhm, amp, 0.3).unwrap();
            prop_assert_eq!(a0, b0);
        }

        #[test]
        fn purcell_round_trip(p in 0.0f64..1e4, t1_0 in 1e-6f64..1e-1) {
            let g0 = 1.0 / t1_0;
            let t1 = 1.0 / enhanced_decay_rate(g0, p).unwrap();
            let back = purcell_from_lifetimes(t1, 1.0 / g0).unwrap();
            prop_assert!((back - p).abs() <= 1e-12 * p.max(1.0) * 10.0);
        }

        #[test]
        fn radiative_identity(t1 in 1e-9f64..1.0) {
            let dn = radiative_linewidth(t1).unwrap();
            prop_assert!((dn * 2.0 * PI * t1 - 1.0).abs() < 4.0 * f64::EPSILON);
        }

        #[test]
        fn purcell_profile_even_and_monotone(d1 in 0.0f64..2e10, d2 in 0.0f64..2e10) {
            let k = 4.7e9;
            prop_assert_eq!(purcell_profile(d1, 460.0, k).unwrap(), purcell_profile(-d1, 460.0, k).unwrap());
            let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
            prop_assert!(purcell_profile(lo, 460.0, k).unwrap() >= purcell_profile(hi, 460.0, k).unwrap());
        }

        #[test]
        fn adsorption_is_monotone(steps in proptest::collection::vec(1u32..1_000_000_000, 1..20)) {
            // whole-Hz shifts on a whole-Hz mode frequency are exact in f64
            let mut cav = design_cavity();
            for m in steps {
                let m = f64::from(m);
                let next = apply_tuning_step(&cav, TuningStep::adsorb_n2(m).unwrap());
                prop_assert!(next.nu_cav <= cav.nu_cav);
                let restored = apply_tuning_step(&next, TuningStep::heat_blueshift(m).unwrap());
                prop_assert_eq!(restored.nu_cav, cav.nu_cav);
                cav = next;
            }
        }
    }
}
