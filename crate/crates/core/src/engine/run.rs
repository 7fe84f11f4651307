use super::diffusion::DiffusionTracker;
use super::shot::ShotKernel;
use super::stream::{ClickRecord, ClickStream};
use super::ExperimentConfig;
use crate::analysis::Spectrum;
use crate::error::{Error, Result};
use crate::par::{map_chunks, Execution};
use crate::rng::{substream, Domain};

/// Simulation driver. The execution mode only affects scheduling; streams are
/// bit-identical either way.
#[derive(Debug, Clone, Copy, Default)]
pub struct Engine {
    pub execution: Execution,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlePoint {
    pub laser_frequency: f64,
    pub counts: u64,
    pub stream: ClickStream,
}

/// One pass over the frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PleScanRepetition {
    /// Simulated wall-clock time at the first shot of the pass (s).
    pub start_time: f64,
    pub points: Vec<PlePoint>,
}

impl PleScanRepetition {
    pub fn to_spectrum(&self, label: impl Into<String>) -> Result<Spectrum> {
        let acquisition = self
            .points
            .iter()
            .map(|p| p.stream.sequence.duration())
            .sum();
        Spectrum::new(
            self.points
                .iter()
                .map(|p| (p.laser_frequency, p.counts as f64))
                .collect(),
            acquisition,
            label,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PleScan {
    pub repetitions: Vec<PleScanRepetition>,
}

impl PleScan {
    pub fn spectra(&self) -> Result<Vec<Spectrum>> {
        self.repetitions
            .iter()
            .enumerate()
            .map(|(i, r)| r.to_spectrum(format!("scan {i}")))
            .collect()
    }
}

impl Engine {
    pub fn new(execution: Execution) -> Self {
        Self { execution }
    }

    /// Samples shots with global indices `first .. first + n` at one laser
    /// frequency; shot indices in the returned records are global.
    fn block(
        &self,
        config: &ExperimentConfig,
        kernel: &ShotKernel,
        tracker: &mut DiffusionTracker,
        laser_at: &(dyn Fn(u64) -> f64 + Sync),
        first: u64,
        n: u64,
    ) -> Vec<ClickRecord> {
        let trajectory = tracker.block(first, n, config.sequence.t_rep());
        let seed = config.master_seed;
        map_chunks(first..first + n, self.execution, |range, out| {
            for g in range {
                let offsets = trajectory.as_ref().map_or(&[][..], |t| t.offsets(g - first));
                let mut rng = substream(seed, Domain::Shot, 0, g);
                kernel.sample(laser_at(g), offsets, g, &mut rng, out);
            }
        })
    }

    fn fixed_frequency(&self, config: &ExperimentConfig) -> Result<ClickStream> {
        config.validate()?;
        let kernel = ShotKernel::new(config);
        let mut tracker = DiffusionTracker::new(
            config.master_seed,
            config.active_emitters().iter().map(|e| e.diffusion).collect(),
        );
        debug_assert_eq!(kernel.lanes(), tracker.states().len());
        let laser = config.laser_frequency;
        let records = self.block(
            config,
            &kernel,
            &mut tracker,
            &|_| laser,
            0,
            config.sequence.n_shots(),
        );
        Ok(ClickStream::new(records, config.sequence, config.digest()))
    }

    /// `n_shots` shots at the configured laser frequency with the diffusion
    /// state carried from shot to shot.
    pub fn run_lifetime(&self, config: &ExperimentConfig) -> Result<ClickStream> {
        self.fixed_frequency(config)
    }

    /// Same shot process as [`Engine::run_lifetime`]; the source kind selects
    /// the emitter count or the Poissonian reference.
    pub fn run_g2(&self, config: &ExperimentConfig) -> Result<ClickStream> {
        self.fixed_frequency(config)
    }

    /// Scans the laser over the configured grid, `n_shots` shots per point,
    /// repeating the whole grid `repetitions` times. Diffusion evolves
    /// continuously through the scan and across the dwell between passes.
    pub fn run_ple_scan(&self, config: &ExperimentConfig) -> Result<PleScan> {
        config.validate()?;
        let plan = config
            .scan
            .as_ref()
            .ok_or_else(|| Error::param("scan", "PLE scan requires a frequency grid"))?;
        let kernel = ShotKernel::new(config);
        let mut tracker = DiffusionTracker::new(
            config.master_seed,
            config.active_emitters().iter().map(|e| e.diffusion).collect(),
        );
        let n = config.sequence.n_shots();
        let points = plan.frequencies.len() as u64;
        let per_rep = points * n;
        let digest = config.digest();

        let mut repetitions = Vec::with_capacity(plan.repetitions);
        for rep in 0..plan.repetitions as u64 {
            if rep > 0 {
                tracker.dwell(plan.dwell);
            }
            let first = rep * per_rep;
            let start_time = tracker.wall_time() + if first > 0 { config.sequence.t_rep() } else { 0.0 };
            let grid = &plan.frequencies;
            let laser_at = |g: u64| grid[((g - first) / n) as usize];
            let records = self.block(config, &kernel, &mut tracker, &laser_at, first, per_rep);

            let mut per_point: Vec<Vec<ClickRecord>> = vec![Vec::new(); grid.len()];
            for r in records {
                let local = r.shot - first;
                per_point[(local / n) as usize].push(ClickRecord {
                    shot: local % n,
                    t_ns: r.t_ns,
                });
            }
            let points = grid
                .iter()
                .zip(per_point)
                .map(|(&f, recs)| PlePoint {
                    laser_frequency: f,
                    counts: recs.len() as u64,
                    stream: ClickStream::new(recs, config.sequence, digest.clone()),
                })
                .collect();
            repetitions.push(PleScanRepetition { start_time, points });
        }
        Ok(PleScan { repetitions })
    }
}

pub fn run_lifetime(config: &ExperimentConfig) -> Result<ClickStream> {
    Engine::default().run_lifetime(config)
}

pub fn run_g2(config: &ExperimentConfig) -> Result<ClickStream> {
    Engine::default().run_g2(config)
}

pub fn run_ple_scan(config: &ExperimentConfig) -> Result<PleScan> {
    Engine::default().run_ple_scan(config)
}
