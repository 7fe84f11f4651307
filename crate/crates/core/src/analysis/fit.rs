//! Damped Gauss-Newton (Levenberg-Marquardt) fitting of single-peak and
//! exponential-decay models with analytic Jacobians.

use std::f64::consts::LN_2;

use nalgebra::{DMatrix, DVector};

use super::histogram::DecayHistogram;
use super::Spectrum;
use crate::error::{Error, Result};

/// A model `f(x; p)` with an analytic gradient in `p`.
pub trait Model {
    fn n_params(&self) -> usize;
    fn eval(&self, x: f64, p: &[f64]) -> f64;
    fn gradient(&self, x: f64, p: &[f64], grad: &mut [f64]);
}

/// `baseline + amplitude * (w/2)^2 / ((x - center)^2 + (w/2)^2)`;
/// parameters `[center, fwhm, amplitude, baseline]`.
#[derive(Debug, Clone, Copy, Default)]
pub struct LorentzianModel;

impl Model for LorentzianModel {
    fn n_params(&self) -> usize {
        4
    }

    fn eval(&self, x: f64, p: &[f64]) -> f64 {
        let h2 = 0.25 * p[1] * p[1];
        let d = x - p[0];
        p[3] + p[2] * h2 / (d * d + h2)
    }

    fn gradient(&self, x: f64, p: &[f64], g: &mut [f64]) {
        let (c, w, a) = (p[0], p[1], p[2]);
        let h2 = 0.25 * w * w;
        let d = x - c;
        let den = d * d + h2;
        let den2 = den * den;
        g[0] = a * h2 * 2.0 * d / den2;
        g[1] = a * 0.5 * w * d * d / den2;
        g[2] = h2 / den;
        g[3] = 1.0;
    }
}

/// `baseline + amplitude * exp(-4 ln2 (x - center)^2 / fwhm^2)`;
/// parameters `[center, fwhm, amplitude, baseline]`.
#[derive(Debug, Clone, Copy, Default)]
pub struct GaussianModel;

const FOUR_LN2: f64 = 4.0 * LN_2;

impl Model for GaussianModel {
    fn n_params(&self) -> usize {
        4
    }

    fn eval(&self, x: f64, p: &[f64]) -> f64 {
        let d = x - p[0];
        p[3] + p[2] * (-FOUR_LN2 * d * d / (p[1] * p[1])).exp()
    }

    fn gradient(&self, x: f64, p: &[f64], g: &mut [f64]) {
        let (c, w, a) = (p[0], p[1], p[2]);
        let d = x - c;
        let w2 = w * w;
        let e = (-FOUR_LN2 * d * d / w2).exp();
        g[0] = a * e * 2.0 * FOUR_LN2 * d / w2;
        g[1] = a * e * 2.0 * FOUR_LN2 * d * d / (w2 * w);
        g[2] = e;
        g[3] = 1.0;
    }
}

/// `amplitude * exp(-x / T1) + baseline` with `T1 = exp(log_t1)`;
/// parameters `[amplitude, log_t1, baseline]`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExponentialModel;

impl Model for ExponentialModel {
    fn n_params(&self) -> usize {
        3
    }

    fn eval(&self, x: f64, p: &[f64]) -> f64 {
        p[0] * (-x * (-p[1]).exp()).exp() + p[2]
    }

    fn gradient(&self, x: f64, p: &[f64], g: &mut [f64]) {
        let rate = (-p[1]).exp();
        let e = (-x * rate).exp();
        g[0] = e;
        g[1] = p[0] * e * x * rate;
        g[2] = 1.0;
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Relative parameter step below which the fit is converged.
    pub xtol: f64,
    /// Relative reduction of the residual below which the fit is converged.
    pub ftol: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            xtol: 1e-10,
            ftol: 1e-15,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LmOutcome {
    pub params: Vec<f64>,
    /// Parameter covariance scaled by the reduced chi-square; `None` if the
    /// normal matrix is singular.
    pub covariance: Option<DMatrix<f64>>,
    pub rss: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn weighted_rss<M: Model>(model: &M, xs: &[f64], ys: &[f64], w: &[f64], p: &[f64]) -> f64 {
    xs.iter()
        .zip(ys)
        .zip(w)
        .map(|((&x, &y), &wi)| {
            let r = y - model.eval(x, p);
            wi * r * r
        })
        .sum()
}

/// Minimizes `sum w_i (y_i - f(x_i; p))^2` starting from `p0`.
pub fn levenberg_marquardt<M: Model>(
    model: &M,
    xs: &[f64],
    ys: &[f64],
    weights: Option<&[f64]>,
    p0: &[f64],
    opts: LmOptions,
) -> LmOutcome {
    let n = xs.len();
    let np = model.n_params();
    let ones;
    let w = match weights {
        Some(w) => w,
        None => {
            ones = vec![1.0; n];
            &ones[..]
        }
    };

    let mut p = p0.to_vec();
    let mut rss = weighted_rss(model, xs, ys, w, &p);
    let mut lambda = 1e-3;
    let mut grad = vec![0.0; np];
    let mut converged = rss == 0.0;
    let mut iterations = 0;

    let normal_equations = |p: &[f64], grad: &mut [f64]| {
        let mut jtj = DMatrix::<f64>::zeros(np, np);
        let mut jtr = DVector::<f64>::zeros(np);
        for ((&x, &y), &wi) in xs.iter().zip(ys).zip(w) {
            model.gradient(x, p, grad);
            let r = y - model.eval(x, p);
            for a in 0..np {
                jtr[a] += wi * grad[a] * r;
                for b in 0..=a {
                    jtj[(a, b)] += wi * grad[a] * grad[b];
                }
            }
        }
        for a in 0..np {
            for b in 0..a {
                jtj[(b, a)] = jtj[(a, b)];
            }
        }
        (jtj, jtr)
    };

    while !converged && iterations < opts.max_iterations {
        iterations += 1;
        let (jtj, jtr) = normal_equations(&p, &mut grad);
        let mut improved = false;
        while lambda < 1e20 {
            let mut damped = jtj.clone();
            for a in 0..np {
                damped[(a, a)] += lambda * jtj[(a, a)].max(1e-300);
            }
            let Some(step) = damped.cholesky().map(|c| c.solve(&jtr)) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let trial_rss = weighted_rss(model, xs, ys, w, &trial);
            if trial_rss.is_finite() && trial_rss <= rss {
                let small_step = step
                    .iter()
                    .zip(&trial)
                    .all(|(s, v)| s.abs() <= opts.xtol * (v.abs() + opts.xtol));
                let small_gain = rss - trial_rss <= opts.ftol * rss;
                p = trial;
                rss = trial_rss;
                lambda = (lambda * 0.1).max(1e-12);
                improved = true;
                if small_step || small_gain || rss == 0.0 {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            // No downhill step at any damping: p is a stationary point up to
            // round-off.
            converged = true;
        }
    }

    let (jtj, _) = normal_equations(&p, &mut grad);
    let dof = n.saturating_sub(np);
    let covariance = if dof > 0 {
        jtj.try_inverse().map(|inv| inv * (rss / dof as f64))
    } else {
        None
    };
    LmOutcome {
        params: p,
        covariance,
        rss,
        iterations,
        converged,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitModel {
    Lorentzian,
    Gaussian,
    Exponential,
}

impl FitModel {
    pub fn name(&self) -> &'static str {
        match self {
            FitModel::Lorentzian => "lorentzian",
            FitModel::Gaussian => "gaussian",
            FitModel::Exponential => "exponential",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "lorentzian" => Some(FitModel::Lorentzian),
            "gaussian" => Some(FitModel::Gaussian),
            "exponential" => Some(FitModel::Exponential),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitStatus {
    Converged,
    MaxIterations,
    /// The data carry no resolvable feature; parameters are a fallback.
    Degenerate,
}

impl FitStatus {
    pub fn name(&self) -> &'static str {
        match self {
            FitStatus::Converged => "converged",
            FitStatus::MaxIterations => "max_iterations",
            FitStatus::Degenerate => "degenerate",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "converged" => Some(FitStatus::Converged),
            "max_iterations" => Some(FitStatus::MaxIterations),
            "degenerate" => Some(FitStatus::Degenerate),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitParameter {
    pub name: String,
    pub value: f64,
    /// 1σ uncertainty. Only present for converged fits.
    pub sigma: Option<f64>,
    pub unit: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub model: FitModel,
    pub parameters: Vec<FitParameter>,
    pub rss: f64,
    pub iterations: usize,
    pub status: FitStatus,
}

impl FitResult {
    pub fn converged(&self) -> bool {
        self.status == FitStatus::Converged
    }

    pub fn get(&self, name: &str) -> Option<&FitParameter> {
        self.parameters.iter().find(|p| p.name == name)
    }

    /// Value of a named parameter, NaN if absent.
    pub fn value(&self, name: &str) -> f64 {
        self.get(name).map_or(f64::NAN, |p| p.value)
    }

    pub fn sigma(&self, name: &str) -> Option<f64> {
        self.get(name).and_then(|p| p.sigma)
    }
}

fn param(name: &str, value: f64, sigma: Option<f64>, unit: &str) -> FitParameter {
    FitParameter {
        name: name.to_string(),
        value,
        sigma,
        unit: unit.to_string(),
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Starting point `[center, fwhm, amplitude, baseline]` for a single peak or
/// dip, estimated from the data. `None` if the data are flat.
pub fn initial_peak_guess(xs: &[f64], ys: &[f64]) -> Option<[f64; 4]> {
    let n = xs.len();
    let k = (n / 10).max(2).min(n / 2).max(1);
    let edges: Vec<f64> = ys[..k].iter().chain(&ys[n - k..]).copied().collect();
    let baseline = median(edges);
    let (ipk, amp) = ys
        .iter()
        .map(|y| y - baseline)
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))?;
    let scale = ys.iter().fold(0.0f64, |m, y| m.max(y.abs()));
    if !(amp.abs() > 1e-12 * scale.max(f64::MIN_POSITIVE)) {
        return None;
    }
    let half = 0.5 * amp.abs();
    let dev = |i: usize| (ys[i] - baseline) * amp.signum();
    let crossing = |i_in: usize, i_out: usize| {
        let (a, b) = (dev(i_in), dev(i_out));
        let t = if a != b { (a - half) / (a - b) } else { 0.5 };
        xs[i_in] + t * (xs[i_out] - xs[i_in])
    };
    let left = (0..ipk).rev().find(|&i| dev(i) < half).map(|i| crossing(i + 1, i));
    let right = (ipk + 1..n).find(|&i| dev(i) < half).map(|i| crossing(i - 1, i));
    let span = xs[n - 1] - xs[0];
    let fwhm = match (left, right) {
        (Some(l), Some(r)) => r - l,
        (Some(l), None) => 2.0 * (xs[ipk] - l),
        (None, Some(r)) => 2.0 * (r - xs[ipk]),
        (None, None) => 0.25 * span,
    };
    let fwhm = if fwhm > 0.0 { fwhm } else { span / n as f64 };
    Some([xs[ipk], fwhm, amp, baseline])
}

struct Scaling {
    x_ref: f64,
    x_scale: f64,
    y_scale: f64,
}

impl Scaling {
    fn for_peak(xs: &[f64], ys: &[f64]) -> Self {
        let lo = xs[0];
        let hi = xs[xs.len() - 1];
        let y_scale = ys.iter().fold(0.0f64, |m, y| m.max(y.abs()));
        Self {
            x_ref: 0.5 * (lo + hi),
            x_scale: if hi > lo { 0.5 * (hi - lo) } else { 1.0 },
            y_scale: if y_scale > 0.0 { y_scale } else { 1.0 },
        }
    }
}

fn check_spectrum(spec: &Spectrum) -> Result<()> {
    if spec.len() < 5 {
        return Err(Error::InsufficientData(format!(
            "peak fit needs at least 5 points, got {}",
            spec.len()
        )));
    }
    Ok(())
}

fn fit_peak<M: Model>(model: &M, kind: FitModel, spec: &Spectrum, guess: [f64; 4]) -> Result<FitResult> {
    check_spectrum(spec)?;
    let xs = spec.frequencies();
    let ys = spec.counts();
    let s = Scaling::for_peak(&xs, &ys);
    let xn: Vec<f64> = xs.iter().map(|x| (x - s.x_ref) / s.x_scale).collect();
    let yn: Vec<f64> = ys.iter().map(|y| y / s.y_scale).collect();
    let p0 = [
        (guess[0] - s.x_ref) / s.x_scale,
        guess[1] / s.x_scale,
        guess[2] / s.y_scale,
        guess[3] / s.y_scale,
    ];
    let out = levenberg_marquardt(model, &xn, &yn, None, &p0, LmOptions::default());
    let p = &out.params;
    let status = if out.converged {
        FitStatus::Converged
    } else {
        FitStatus::MaxIterations
    };
    let unscale = [s.x_scale, s.x_scale, s.y_scale, s.y_scale];
    let sig = |i: usize| -> Option<f64> {
        if status != FitStatus::Converged {
            return None;
        }
        out.covariance
            .as_ref()
            .map(|c| c[(i, i)].max(0.0).sqrt() * unscale[i])
    };
    let center = s.x_ref + p[0] * s.x_scale;
    let fwhm = p[1].abs() * s.x_scale;
    let amplitude = p[2] * s.y_scale;
    let baseline = p[3] * s.y_scale;
    let mut parameters = vec![
        param("center", center, sig(0), "hz"),
        param("fwhm", fwhm, sig(1), "hz"),
        param("amplitude", amplitude, sig(2), "counts"),
        param("baseline", baseline, sig(3), "counts"),
    ];
    if kind == FitModel::Lorentzian {
        let q = center / fwhm;
        let q_sigma = match (&out.covariance, status) {
            (Some(c), FitStatus::Converged) => {
                // Q = c / w in physical units; propagate with the full covariance
                let dc = 1.0 / fwhm * s.x_scale;
                let dw = -center / (fwhm * fwhm) * s.x_scale * p[1].signum();
                let var = dc * dc * c[(0, 0)] + dw * dw * c[(1, 1)] + 2.0 * dc * dw * c[(0, 1)];
                Some(var.max(0.0).sqrt())
            }
            _ => None,
        };
        parameters.push(param("q_factor", q, q_sigma, "1"));
    }
    Ok(FitResult {
        model: kind,
        parameters,
        rss: out.rss * s.y_scale * s.y_scale,
        iterations: out.iterations,
        status,
    })
}

fn auto_guess(spec: &Spectrum) -> Result<[f64; 4]> {
    check_spectrum(spec)?;
    initial_peak_guess(&spec.frequencies(), &spec.counts())
        .ok_or_else(|| Error::Degenerate(format!("spectrum `{}` has no peak above its baseline", spec.label)))
}

/// Least-squares Lorentzian fit. Also reports `q_factor = center / fwhm`.
pub fn fit_lorentzian(spec: &Spectrum) -> Result<FitResult> {
    let guess = auto_guess(spec)?;
    fit_peak(&LorentzianModel, FitModel::Lorentzian, spec, guess)
}

/// Lorentzian fit from an explicit `[center, fwhm, amplitude, baseline]` guess.
pub fn fit_lorentzian_from(spec: &Spectrum, guess: [f64; 4]) -> Result<FitResult> {
    fit_peak(&LorentzianModel, FitModel::Lorentzian, spec, guess)
}

pub fn fit_gaussian(spec: &Spectrum) -> Result<FitResult> {
    let guess = auto_guess(spec)?;
    fit_peak(&GaussianModel, FitModel::Gaussian, spec, guess)
}

pub fn fit_gaussian_from(spec: &Spectrum, guess: [f64; 4]) -> Result<FitResult> {
    fit_peak(&GaussianModel, FitModel::Gaussian, spec, guess)
}

/// Starting point `[amplitude, t1, baseline]` for a decay histogram, or
/// `None` if it does not decay.
pub fn initial_decay_guess(ts: &[f64], counts: &[f64]) -> Option<[f64; 3]> {
    let n = ts.len();
    let tail = (n / 10).max(1);
    let baseline = counts[n - tail..].iter().sum::<f64>() / tail as f64;
    let head = (n / 50).max(1);
    let start = counts[..head].iter().sum::<f64>() / head as f64;
    let amp = start - baseline;
    if !(amp > 0.0) {
        return None;
    }
    let target = amp / std::f64::consts::E;
    let t1 = counts
        .iter()
        .position(|c| c - baseline < target)
        .map(|i| ts[i] - ts[0])
        .filter(|&t| t > 0.0)
        .unwrap_or((ts[n - 1] - ts[0]) / 3.0);
    let t1 = if t1 > 0.0 { t1 } else { ts[n - 1].max(1e-12) };
    // back-extrapolate the amplitude to t = 0
    Some([amp * (ts[0] / t1).exp(), t1, baseline])
}

fn degenerate_decay(hist: &DecayHistogram, weights: &[f64]) -> FitResult {
    let wsum: f64 = weights.iter().sum();
    let mean = hist.counts.iter().zip(weights).map(|(c, w)| c * w).sum::<f64>() / wsum;
    let rss = hist
        .counts
        .iter()
        .zip(weights)
        .map(|(c, w)| w * (c - mean) * (c - mean))
        .sum();
    FitResult {
        model: FitModel::Exponential,
        parameters: vec![
            param("amplitude", 0.0, None, "counts"),
            param("t1", f64::INFINITY, None, "s"),
            param("baseline", mean, None, "counts"),
        ],
        rss,
        iterations: 0,
        status: FitStatus::Degenerate,
    }
}

/// Poisson maximum-likelihood fit of `A exp(-t/T1) + B` to a decay
/// histogram, by iteratively reweighted least squares with bins evaluated at
/// their centers.
pub fn fit_exponential(hist: &DecayHistogram) -> Result<FitResult> {
    let ts = hist.bin_centers();
    let guess = initial_decay_guess_checked(hist, &ts)?;
    match guess {
        Some(g) => fit_exponential_inner(hist, &ts, g),
        None => {
            let w = poisson_weights(&hist.counts);
            Ok(degenerate_decay(hist, &w))
        }
    }
}

/// Exponential fit from an explicit `[amplitude, t1, baseline]` guess.
pub fn fit_exponential_from(hist: &DecayHistogram, guess: [f64; 3]) -> Result<FitResult> {
    let ts = hist.bin_centers();
    initial_decay_guess_checked(hist, &ts)?;
    if !(guess[1] > 0.0) {
        return Err(Error::param("t1", "initial lifetime must be > 0"));
    }
    fit_exponential_inner(hist, &ts, guess)
}

fn initial_decay_guess_checked(hist: &DecayHistogram, ts: &[f64]) -> Result<Option<[f64; 3]>> {
    let nonempty = hist.counts.iter().filter(|&&c| c > 0.0).count();
    if nonempty < 4 {
        return Err(Error::InsufficientData(format!(
            "exponential fit needs at least 4 nonempty bins, got {nonempty}"
        )));
    }
    Ok(initial_decay_guess(ts, &hist.counts))
}

const MAX_REWEIGHTS: usize = 20;
/// Floor on the expected bin count used as a variance.
const MIN_EXPECTED: f64 = 0.1;

fn poisson_weights(counts: &[f64]) -> Vec<f64> {
    counts.iter().map(|&c| 1.0 / c.max(1.0)).collect()
}

fn fit_exponential_inner(hist: &DecayHistogram, ts: &[f64], guess: [f64; 3]) -> Result<FitResult> {
    let w = poisson_weights(&hist.counts);
    let t_scale = hist.bin_width() * hist.counts.len() as f64;
    let y_scale = hist.counts.iter().fold(1.0f64, |m, &c| m.max(c));
    let tn: Vec<f64> = ts.iter().map(|t| t / t_scale).collect();
    let yn: Vec<f64> = hist.counts.iter().map(|c| c / y_scale).collect();
    let normalize = |w: &[f64]| -> Vec<f64> { w.iter().map(|wi| wi * y_scale * y_scale).collect() };
    let p0 = [guess[0] / y_scale, (guess[1] / t_scale).ln(), guess[2] / y_scale];
    let mut out = levenberg_marquardt(&ExponentialModel, &tn, &yn, Some(&normalize(&w)), &p0, LmOptions::default());
    // Reweight with the fitted mean instead of the observed counts. The
    // fixed point solves the Poisson likelihood equations, which 1/counts
    // weighting does not (it biases sparse tails low).
    for _ in 0..MAX_REWEIGHTS {
        if !out.params.iter().all(|v| v.is_finite()) {
            break;
        }
        let mu: Vec<f64> = tn
            .iter()
            .map(|&t| 1.0 / (ExponentialModel.eval(t, &out.params) * y_scale).max(MIN_EXPECTED))
            .collect();
        let next = levenberg_marquardt(&ExponentialModel, &tn, &yn, Some(&normalize(&mu)), &out.params, LmOptions::default());
        let shift = (next.params[1] - out.params[1]).abs();
        out = next;
        if shift < 1e-9 {
            break;
        }
    }
    let p = &out.params;
    let amplitude = p[0] * y_scale;
    if !(amplitude > 0.0) || !p[1].is_finite() {
        return Ok(degenerate_decay(hist, &w));
    }
    let status = if out.converged {
        FitStatus::Converged
    } else {
        FitStatus::MaxIterations
    };
    let t1 = p[1].exp() * t_scale;
    let sig = |i: usize| -> Option<f64> {
        if status != FitStatus::Converged {
            return None;
        }
        out.covariance.as_ref().map(|c| c[(i, i)].max(0.0).sqrt())
    };
    Ok(FitResult {
        model: FitModel::Exponential,
        parameters: vec![
            param("amplitude", amplitude, sig(0).map(|s| s * y_scale), "counts"),
            // d T1 / d log T1 = T1
            param("t1", t1, sig(1).map(|s| s * t1), "s"),
            param("baseline", p[2] * y_scale, sig(2).map(|s| s * y_scale), "counts"),
        ],
        rss: out.rss,
        iterations: out.iterations,
        status,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn finite_difference<M: Model>(m: &M, x: f64, p: &[f64]) -> Vec<f64> {
        (0..p.len())
            .map(|i| {
                let h = 1e-6 * p[i].abs().max(1e-3);
                let mut hi = p.to_vec();
                let mut lo = p.to_vec();
                hi[i] += h;
                lo[i] -= h;
                (m.eval(x, &hi) - m.eval(x, &lo)) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn gradients_match_central_differences_at_fixed_points() {
        let mut g = [0.0; 4];
        let p = [0.1, 0.7, 2.0, 0.3];
        for x in [-1.0, -0.2, 0.1, 0.45, 1.3] {
            LorentzianModel.gradient(x, &p, &mut g);
            let fd = finite_difference(&LorentzianModel, x, &p);
            for (a, b) in g.iter().zip(&fd) {
                assert!((a - b).abs() <= 1e-6 * a.abs().max(1e-3), "{a} {b}");
            }
            GaussianModel.gradient(x, &p, &mut g);
            let fd = finite_difference(&GaussianModel, x, &p);
            for (a, b) in g.iter().zip(&fd) {
                assert!((a - b).abs() <= 1e-6 * a.abs().max(1e-3), "{a} {b}");
            }
        }
    }

    #[test]
    fn guess_finds_dip() {
        let xs: Vec<f64> = (0..101).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs
            .iter()
            .map(|&x| LorentzianModel.eval(x, &[40.0, 10.0, -0.8, 1.0]))
            .collect();
        let g = initial_peak_guess(&xs, &ys).unwrap();
        assert_eq!(g[0], 40.0);
        assert!(g[2] < -0.7);
        assert!((g[1] - 10.0).abs() < 1.0, "{g:?}");
    }

    #[test]
    fn flat_data_has_no_guess() {
        let xs: Vec<f64> = (0..10).map(f64::from).collect();
        assert!(initial_peak_guess(&xs, &[3.0; 10]).is_none());
    }
}
