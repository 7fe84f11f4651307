use rand::Rng;
use rand_distr::{Distribution, Poisson};

use super::diffusion::DiffusionState;
use super::stream::ClickRecord;
use super::ExperimentConfig;
use crate::physics::{excitation_probability_unchecked, EmitterModel};

/// Emission delay after the end of the pulse for total decay rate `gamma`.
pub fn sample_emission_delay<R: Rng + ?Sized>(gamma: f64, rng: &mut R) -> f64 {
    // 1 - u lies in (0, 1], so the log is finite
    let u: f64 = rng.random();
    -(1.0 - u).ln() / gamma
}

struct EmitterKernel {
    nu_ion_0: f64,
    gamma_0: f64,
    gamma_h: f64,
    p_max: f64,
}

/// Per-run constants of the shot sampler.
pub(crate) struct ShotKernel {
    emitters: Vec<EmitterKernel>,
    nu_cav: f64,
    kappa: f64,
    p_peak: f64,
    detector: crate::physics::DetectorModel,
    t_pulse_ns: u64,
    t_coll_ns: u64,
    dead_ns: u64,
    dark_mean: f64,
    poisson_mean: f64,
}

impl ShotKernel {
    pub(crate) fn new(config: &ExperimentConfig) -> Self {
        let seq = &config.sequence;
        let emitters = config
            .active_emitters()
            .iter()
            .map(|e: &EmitterModel| EmitterKernel {
                nu_ion_0: e.nu_ion_0,
                gamma_0: e.gamma_0,
                gamma_h: e.gamma_h,
                p_max: e.p_max,
            })
            .collect();
        let poisson_mean = match config.source {
            super::SourceKind::Poissonian { rate } => rate * seq.t_coll(),
            _ => 0.0,
        };
        Self {
            emitters,
            nu_cav: config.cavity.nu_cav,
            kappa: config.cavity.fwhm(),
            p_peak: config.cavity.p_peak,
            detector: config.detector,
            t_pulse_ns: seq.t_pulse_ns(),
            t_coll_ns: seq.t_coll_ns(),
            dead_ns: config.dead_time_ns(),
            dark_mean: config.detector.dark_rate * seq.t_coll(),
            poisson_mean,
        }
    }

    pub(crate) fn lanes(&self) -> usize {
        self.emitters.len()
    }

    /// Samples one shot and appends its clicks, sorted and dead-time filtered,
    /// to `out`. `offsets` holds one diffusion offset per emitter or is empty
    /// for a static run.
    pub(crate) fn sample<R: Rng + ?Sized>(
        &self,
        laser: f64,
        offsets: &[f64],
        shot: u64,
        rng: &mut R,
        out: &mut Vec<ClickRecord>,
    ) {
        let start = out.len();
        for (k, e) in self.emitters.iter().enumerate() {
            let nu_ion = e.nu_ion_0 + offsets.get(k).copied().unwrap_or(0.0);
            let p_exc = if e.p_max > 0.0 {
                excitation_probability_unchecked(laser - nu_ion, e.gamma_h, e.p_max)
            } else {
                0.0
            };
            let u: f64 = rng.random();
            if u >= p_exc {
                continue;
            }
            let x = 2.0 * (nu_ion - self.nu_cav) / self.kappa;
            let purcell = self.p_peak / (1.0 + x * x);
            let gamma = e.gamma_0 * (1.0 + purcell);
            let delay = sample_emission_delay(gamma, rng);
            let detected = rng.random::<f64>() < self.detector.click_probability(purcell);
            if !detected {
                continue;
            }
            let delay_ns = (delay * 1e9).floor();
            if delay_ns < self.t_coll_ns as f64 {
                out.push(ClickRecord {
                    shot,
                    t_ns: self.t_pulse_ns + delay_ns as u64,
                });
            }
        }
        self.uniform_clicks(self.poisson_mean, shot, rng, out);
        self.uniform_clicks(self.dark_mean, shot, rng, out);

        let clicks = &mut out[start..];
        if clicks.len() > 1 {
            clicks.sort_unstable();
            if self.dead_ns > 0 {
                let mut kept = start;
                let mut last: Option<u64> = None;
                for i in start..out.len() {
                    let t = out[i].t_ns;
                    if last.is_none_or(|l| t - l >= self.dead_ns) {
                        out[kept] = out[i];
                        kept += 1;
                        last = Some(t);
                    }
                }
                out.truncate(kept);
            }
        }
    }

    fn uniform_clicks<R: Rng + ?Sized>(
        &self,
        mean: f64,
        shot: u64,
        rng: &mut R,
        out: &mut Vec<ClickRecord>,
    ) {
        if mean <= 0.0 {
            return;
        }
        let n = Poisson::new(mean).map(|p| p.sample(rng)).unwrap_or(0.0) as u64;
        for _ in 0..n {
            let t = rng.random_range(0..self.t_coll_ns);
            out.push(ClickRecord {
                shot,
                t_ns: self.t_pulse_ns + t,
            });
        }
    }
}

/// Samples a single shot at laser frequency `laser_frequency` with the
/// emitters' diffusion states given in `diffusion` (one per active emitter;
/// missing entries count as zero offset).
pub fn sample_shot<R: Rng + ?Sized>(
    config: &ExperimentConfig,
    laser_frequency: f64,
    shot_index: u64,
    diffusion: &[DiffusionState],
    rng: &mut R,
) -> Vec<ClickRecord> {
    let kernel = ShotKernel::new(config);
    let offsets: Vec<f64> = diffusion.iter().map(DiffusionState::offset).collect();
    let mut out = Vec::new();
    kernel.sample(laser_frequency, &offsets, shot_index, rng, &mut out);
    out
}
