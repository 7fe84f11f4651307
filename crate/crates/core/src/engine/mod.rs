//! Shot-by-shot Monte Carlo of the pulsed excitation experiment.

mod diffusion;
mod run;
mod shot;
mod stream;

pub use diffusion::{evolve_diffusion, DiffusionState};
pub use run::{run_g2, run_lifetime, run_ple_scan, Engine, PlePoint, PleScan, PleScanRepetition};
pub use shot::{sample_emission_delay, sample_shot};
pub use stream::{ClickRecord, ClickStream, PulseSequence};

pub(crate) use stream::secs_to_ns;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::physics::{CavityModel, DetectorModel, EmitterModel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SourceKind {
    SingleEmitter,
    /// `k` independent emitters. Emitters are taken from the configured list
    /// cyclically, each with its own excitation and diffusion draws.
    NEmitters(usize),
    /// Uncorrelated light: detected photons arrive as a Poisson process of
    /// `rate` (1/s) inside the collection window.
    Poissonian { rate: f64 },
}

/// Laser frequencies for a PLE scan, repeated `repetitions` times with an
/// idle gap of `dwell` seconds between repetitions.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanPlan {
    pub frequencies: Vec<f64>,
    pub repetitions: usize,
    pub dwell: f64,
}

impl ScanPlan {
    pub fn validate(&self) -> Result<()> {
        if self.frequencies.is_empty() {
            return Err(Error::param("scan", "frequency grid is empty"));
        }
        if self.frequencies.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::param("scan", "frequency grid must be strictly increasing"));
        }
        if self.repetitions == 0 {
            return Err(Error::param("repetitions", "must be >= 1"));
        }
        if !(self.dwell.is_finite() && self.dwell >= 0.0) {
            return Err(Error::param("dwell", "must be >= 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub emitters: Vec<EmitterModel>,
    pub cavity: CavityModel,
    pub detector: DetectorModel,
    pub sequence: PulseSequence,
    /// Laser frequency for lifetime and correlation runs (Hz).
    pub laser_frequency: f64,
    pub scan: Option<ScanPlan>,
    pub master_seed: u64,
    pub source: SourceKind,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        match self.source {
            SourceKind::Poissonian { rate } => {
                if !(rate.is_finite() && rate >= 0.0) {
                    return Err(Error::param("rate", "Poissonian rate must be >= 0"));
                }
            }
            SourceKind::NEmitters(0) => return Err(Error::param("count", "NEmitters needs k >= 1")),
            _ => {
                if self.emitters.is_empty() {
                    return Err(Error::param("emitter", "at least one emitter is required"));
                }
            }
        }
        for e in &self.emitters {
            e.validate()?;
        }
        self.cavity.validate()?;
        self.detector.validate()?;
        if !(self.laser_frequency.is_finite() && self.laser_frequency > 0.0) {
            return Err(Error::param("laser_frequency", "must be > 0"));
        }
        if let Some(scan) = &self.scan {
            scan.validate()?;
        }
        Ok(())
    }

    /// Emitters actually simulated for the configured source.
    pub fn active_emitters(&self) -> Vec<EmitterModel> {
        match self.source {
            SourceKind::SingleEmitter => self.emitters.iter().take(1).cloned().collect(),
            SourceKind::NEmitters(k) => self.emitters.iter().cycle().take(k).cloned().collect(),
            SourceKind::Poissonian { .. } => Vec::new(),
        }
    }

    pub fn dead_time_ns(&self) -> u64 {
        secs_to_ns("dead_time", self.detector.dead_time).unwrap_or(0)
    }

    /// SHA-256 over the full configuration, seed included.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(format!("{self:?}").as_bytes());
        hex::encode(h.finalize())
    }
}
