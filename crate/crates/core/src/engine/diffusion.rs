//! Spectral diffusion of the ion transition frequency.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::physics::SpectralDiffusionParams;
use crate::rng::{substream, Domain};

/// Instantaneous frequency offsets of one emitter.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DiffusionState {
    pub nu_offset_fast: f64,
    pub nu_offset_slow: f64,
    pub wall_time: f64,
}

impl DiffusionState {
    pub fn offset(&self) -> f64 {
        self.nu_offset_fast + self.nu_offset_slow
    }

    /// Draws the fast component from its stationary law; the slow walk starts at 0.
    pub fn stationary<R: Rng + ?Sized>(params: &SpectralDiffusionParams, rng: &mut R) -> Self {
        let fast = if params.sigma_fast > 0.0 {
            params.sigma_fast * rng.sample::<f64, _>(StandardNormal)
        } else {
            0.0
        };
        Self {
            nu_offset_fast: fast,
            nu_offset_slow: 0.0,
            wall_time: 0.0,
        }
    }
}

/// Advances the state by `dt` seconds.
///
/// The fast offset uses the exact Ornstein-Uhlenbeck transition, so any `dt`
/// is valid. With `tau_fast == 0` consecutive fast offsets are independent.
pub fn evolve_diffusion<R: Rng + ?Sized>(
    state: DiffusionState,
    dt: f64,
    params: &SpectralDiffusionParams,
    rng: &mut R,
) -> Result<DiffusionState> {
    if !(dt.is_finite() && dt >= 0.0) {
        return Err(Error::param("dt", format!("must be >= 0, got {dt}")));
    }
    Ok(evolve_unchecked(state, dt, params, rng))
}

pub(crate) fn evolve_unchecked<R: Rng + ?Sized>(
    state: DiffusionState,
    dt: f64,
    params: &SpectralDiffusionParams,
    rng: &mut R,
) -> DiffusionState {
    let mut next = state;
    next.wall_time += dt;
    if params.sigma_fast > 0.0 {
        let z: f64 = rng.sample(StandardNormal);
        next.nu_offset_fast = if params.tau_fast > 0.0 {
            let decay = (-dt / params.tau_fast).exp();
            let spread = params.sigma_fast * (-(-2.0 * dt / params.tau_fast).exp_m1()).sqrt();
            state.nu_offset_fast * decay + spread * z
        } else {
            params.sigma_fast * z
        };
    }
    if params.sigma_slow_rate > 0.0 {
        let z: f64 = rng.sample(StandardNormal);
        next.nu_offset_slow += (params.sigma_slow_rate * dt).sqrt() * z;
    }
    next
}

/// Serially generated diffusion offsets for a contiguous block of shots.
///
/// Shots are sampled against this frozen trajectory, which is what lets the
/// shot loop run in parallel without changing any result.
pub(crate) struct Trajectory {
    /// `offsets[shot * lanes + lane]`, total offset in Hz.
    offsets: Vec<f64>,
    lanes: usize,
}

impl Trajectory {
    pub(crate) fn offsets(&self, local_shot: u64) -> &[f64] {
        let i = local_shot as usize * self.lanes;
        &self.offsets[i..i + self.lanes]
    }
}

/// Tracks one diffusion state per emitter lane across a whole run.
pub(crate) struct DiffusionTracker {
    seed: u64,
    params: Vec<SpectralDiffusionParams>,
    states: Vec<DiffusionState>,
    dwell_count: u64,
}

impl DiffusionTracker {
    pub(crate) fn new(seed: u64, params: Vec<SpectralDiffusionParams>) -> Self {
        let states = params
            .iter()
            .enumerate()
            .map(|(lane, p)| {
                let mut rng = substream(seed, Domain::DiffusionInit, lane as u64, 0);
                DiffusionState::stationary(p, &mut rng)
            })
            .collect();
        Self {
            seed,
            params,
            states,
            dwell_count: 0,
        }
    }

    pub(crate) fn is_static(&self) -> bool {
        self.params.iter().all(|p| p.is_static())
    }

    pub(crate) fn wall_time(&self) -> f64 {
        self.states.first().map_or(0.0, |s| s.wall_time)
    }

    pub(crate) fn states(&self) -> &[DiffusionState] {
        &self.states
    }

    /// Idle gap between scan repetitions.
    pub(crate) fn dwell(&mut self, dt: f64) {
        let index = self.dwell_count;
        self.dwell_count += 1;
        for (lane, (state, p)) in self.states.iter_mut().zip(&self.params).enumerate() {
            let mut rng = substream(self.seed, Domain::DiffusionDwell, lane as u64, index);
            *state = evolve_unchecked(*state, dt, p, &mut rng);
        }
    }

    /// Produces offsets for shots `first_shot .. first_shot + n` (global shot
    /// indices). The state used for a shot is the one reached after stepping
    /// by `t_rep` from the previous shot; the very first shot of a run uses the
    /// initial state.
    pub(crate) fn block(&mut self, first_shot: u64, n: u64, t_rep: f64) -> Option<Trajectory> {
        if self.is_static() {
            let steps = if first_shot == 0 { n.saturating_sub(1) } else { n };
            for s in &mut self.states {
                s.wall_time += t_rep * steps as f64;
            }
            return None;
        }
        let lanes = self.states.len();
        let mut offsets = Vec::with_capacity(n as usize * lanes);
        for g in first_shot..first_shot + n {
            for (lane, (state, p)) in self.states.iter_mut().zip(&self.params).enumerate() {
                if g > 0 {
                    let mut rng = substream(self.seed, Domain::DiffusionStep, lane as u64, g);
                    *state = evolve_unchecked(*state, t_rep, p, &mut rng);
                }
                offsets.push(state.offset());
            }
        }
        Some(Trajectory { offsets, lanes })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_params_leave_offsets_untouched() {
        let mut rng = substream(1, Domain::Aux, 0, 0);
        let s0 = DiffusionState {
            nu_offset_fast: 3.0,
            nu_offset_slow: -2.0,
            wall_time: 1.0,
        };
        let s1 = evolve_diffusion(s0, 0.5, &SpectralDiffusionParams::default(), &mut rng).unwrap();
        assert_eq!(s1.nu_offset_fast, 3.0);
        assert_eq!(s1.nu_offset_slow, -2.0);
        assert_eq!(s1.wall_time, 1.5);
        assert!(evolve_diffusion(s0, -1.0, &SpectralDiffusionParams::default(), &mut rng).is_err());
    }

    #[test]
    fn ou_stationary_std() {
        let params = SpectralDiffusionParams {
            sigma_fast: 50e6,
            tau_fast: 1e-3,
            sigma_slow_rate: 0.0,
        };
        let mut rng = substream(11, Domain::Aux, 0, 0);
        let mut s = DiffusionState::stationary(&params, &mut rng);
        let n = 1_000_000;
        let (mut sum, mut sum2) = (0.0, 0.0);
        for _ in 0..n {
            s = evolve_diffusion(s, 1e-3, &params, &mut rng).unwrap();
            sum += s.nu_offset_fast;
            sum2 += s.nu_offset_fast * s.nu_offset_fast;
        }
        let mean = sum / n as f64;
        let std = (sum2 / n as f64 - mean * mean).sqrt();
        assert!((std / 50e6 - 1.0).abs() < 0.03, "std = {std}");
        assert!(s.wall_time > 999.0);
    }

    #[test]
    fn random_walk_variance_grows_linearly() {
        let params = SpectralDiffusionParams {
            sigma_fast: 0.0,
            tau_fast: 0.0,
            sigma_slow_rate: 1e12,
        };
        let total = 100.0;
        let steps = 20;
        let n = 10_000;
        let mut sum2 = 0.0;
        for k in 0..n {
            let mut rng = substream(5, Domain::Aux, 1, k);
            let mut s = DiffusionState::default();
            for _ in 0..steps {
                s = evolve_diffusion(s, total / steps as f64, &params, &mut rng).unwrap();
            }
            sum2 += s.nu_offset_slow * s.nu_offset_slow;
        }
        let var = sum2 / n as f64;
        let expected = 1e12 * total;
        assert!((var / expected - 1.0).abs() < 0.05, "var ratio {}", var / expected);
    }

    #[test]
    fn tracker_blocks_are_continuous() {
        let p = SpectralDiffusionParams {
            sigma_fast: 1e6,
            tau_fast: 1e-4,
            sigma_slow_rate: 1e9,
        };
        let mut whole = DiffusionTracker::new(3, vec![p, p]);
        let t_all = whole.block(0, 100, 1e-5).unwrap();
        let mut split = DiffusionTracker::new(3, vec![p, p]);
        let a = split.block(0, 40, 1e-5).unwrap();
        let b = split.block(40, 60, 1e-5).unwrap();
        for g in 0..100u64 {
            let expect = t_all.offsets(g);
            let got = if g < 40 { a.offsets(g) } else { b.offsets(g - 40) };
            assert_eq!(expect, got);
        }
        assert!((whole.wall_time() - 99e-5).abs() < 1e-12);
    }
}
