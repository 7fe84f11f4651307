#![allow(dead_code)]

use ersim::engine::{ExperimentConfig, PulseSequence, ScanPlan, SourceKind};
use ersim::physics::{CavityModel, DetectorModel, EmitterModel, SpectralDiffusionParams};

pub const NU: f64 = 195.585e12;
pub const T1_0: f64 = 1.12e-3;

pub fn emitter(p_max: f64) -> EmitterModel {
    EmitterModel {
        nu_ion_0: NU,
        gamma_0: 1.0 / T1_0,
        gamma_h: 20e6,
        p_max,
        diffusion: SpectralDiffusionParams::default(),
    }
}

pub fn cavity(p_peak: f64) -> CavityModel {
    CavityModel {
        nu_cav: NU,
        q_factor: 4.14e4,
        p_peak,
        mode_volume_note: String::new(),
    }
}

/// Single static emitter on resonance with a P = 460 cavity, no dark counts.
pub fn base_config(n_shots: u64) -> ExperimentConfig {
    ExperimentConfig {
        emitters: vec![emitter(0.5)],
        cavity: cavity(460.0),
        detector: DetectorModel {
            efficiency: 0.6,
            ..DetectorModel::default()
        },
        sequence: PulseSequence::new(1e-6, 20e-6, 60e-6, n_shots).unwrap(),
        laser_frequency: NU,
        scan: None,
        master_seed: 11,
        source: SourceKind::SingleEmitter,
    }
}

pub fn diffusing(mut config: ExperimentConfig) -> ExperimentConfig {
    for e in &mut config.emitters {
        e.diffusion = SpectralDiffusionParams {
            sigma_fast: 60e6,
            tau_fast: 50e-6,
            sigma_slow_rate: 5e12,
        };
    }
    config
}

pub fn scan_grid(points: usize, half_span: f64) -> Vec<f64> {
    (0..points)
        .map(|i| NU - half_span + 2.0 * half_span * i as f64 / (points - 1) as f64)
        .collect()
}

pub fn with_scan(mut config: ExperimentConfig, points: usize, half_span: f64, repetitions: usize, dwell: f64) -> ExperimentConfig {
    config.scan = Some(ScanPlan {
        frequencies: scan_grid(points, half_span),
        repetitions,
        dwell,
    });
    config
}
