//! TOML experiment configuration.
//!
//! Every physical quantity carries its unit in the key name. Laser and scan
//! frequencies are given as detunings from the first emitter's transition
//! (or from the cavity when no emitter is configured).

use serde::{Deserialize, Serialize};

use crate::engine::{ExperimentConfig, PulseSequence, ScanPlan, SourceKind};
use crate::error::{Error, Result};
use crate::physics::{CavityModel, DetectorModel, EmitterModel, SpectralDiffusionParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    #[serde(default)]
    pub seed: SeedSection,
    #[serde(default)]
    pub source: SourceSection,
    #[serde(default)]
    pub laser: LaserSection,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub emitter: Vec<EmitterSection>,
    pub cavity: CavitySection,
    #[serde(default)]
    pub detector: DetectorSection,
    pub sequence: SequenceSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanSection>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedSection {
    #[serde(default)]
    pub master_seed: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceName {
    #[default]
    SingleEmitter,
    NEmitters,
    Poissonian,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSection {
    #[serde(default)]
    pub kind: SourceName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_hz: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaserSection {
    #[serde(default)]
    pub detuning_mhz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmitterSection {
    pub nu_ion_thz: f64,
    /// Cavity-free excited-state lifetime.
    pub t1_0_us: f64,
    pub gamma_h_mhz: f64,
    #[serde(default = "one")]
    pub p_max: f64,
    #[serde(default)]
    pub sigma_fast_mhz: f64,
    #[serde(default)]
    pub tau_fast_us: f64,
    #[serde(default)]
    pub sigma_slow_rate_mhz2_per_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavitySection {
    pub nu_cav_thz: f64,
    pub q_factor: f64,
    pub p_peak: f64,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub mode_volume_note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorSection {
    #[serde(default = "one")]
    pub efficiency: f64,
    #[serde(default)]
    pub dark_rate_hz: f64,
    #[serde(default)]
    pub dead_time_ns: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub collection_fraction: Option<f64>,
}

impl Default for DetectorSection {
    fn default() -> Self {
        Self {
            efficiency: 1.0,
            dark_rate_hz: 0.0,
            dead_time_ns: 0.0,
            collection_fraction: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceSection {
    pub t_pulse_us: f64,
    pub t_coll_us: f64,
    pub t_rep_us: f64,
    #[serde(default = "default_shots")]
    pub n_shots: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    pub start_offset_mhz: f64,
    pub stop_offset_mhz: f64,
    pub points: usize,
    #[serde(default = "one_usize")]
    pub repetitions: usize,
    #[serde(default)]
    pub dwell_s: f64,
}

fn one() -> f64 {
    1.0
}
fn one_usize() -> usize {
    1
}
fn default_shots() -> u64 {
    100_000
}

/// Keys accepted in each section, used for unit-suffix diagnostics.
const KEYS: &[(&str, &[&str])] = &[
    ("seed", &["master_seed"]),
    ("source", &["kind", "count", "rate_hz"]),
    ("laser", &["detuning_mhz"]),
    (
        "emitter",
        &[
            "nu_ion_thz",
            "t1_0_us",
            "gamma_h_mhz",
            "p_max",
            "sigma_fast_mhz",
            "tau_fast_us",
            "sigma_slow_rate_mhz2_per_s",
        ],
    ),
    ("cavity", &["nu_cav_thz", "q_factor", "p_peak", "mode_volume_note"]),
    ("detector", &["efficiency", "dark_rate_hz", "dead_time_ns", "collection_fraction"]),
    ("sequence", &["t_pulse_us", "t_coll_us", "t_rep_us", "n_shots"]),
    ("scan", &["start_offset_mhz", "stop_offset_mhz", "points", "repetitions", "dwell_s"]),
];

const UNIT_SUFFIXES: &[&str] = &[
    "mhz2_per_s", "hz2_per_s", "ghz2_per_s", "per_ms", "per_us", "per_s", "thz", "ghz", "mhz",
    "khz", "hz", "nm", "um", "ns", "us", "ms", "s", "min", "h",
];

fn strip_unit(key: &str) -> Option<&str> {
    UNIT_SUFFIXES
        .iter()
        .find_map(|u| key.strip_suffix(u).and_then(|k| k.strip_suffix('_')))
}

/// An error found while converting a document, located by section and key.
struct Located {
    section: &'static str,
    /// Index for repeated `[[emitter]]` tables.
    index: Option<usize>,
    key: Option<&'static str>,
    message: String,
}

fn bad(section: &'static str, key: &'static str, message: impl Into<String>) -> Located {
    Located {
        section,
        index: None,
        key: Some(key),
        message: message.into(),
    }
}

fn check(ok: bool, section: &'static str, key: &'static str, message: &str) -> Result<(), Located> {
    if ok {
        Ok(())
    } else {
        Err(bad(section, key, format!("`{key}` {message}")))
    }
}

impl ConfigDocument {
    /// Deserializes without semantic validation.
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| syntax_error(text, &e))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config {
            line: None,
            section: None,
            message: e.to_string(),
        })
    }

    /// Converts to a fully validated configuration.
    pub fn to_config(&self) -> Result<ExperimentConfig> {
        self.convert().map_err(|l| Error::Config {
            line: None,
            section: Some(section_label(&l)),
            message: l.message,
        })
    }

    fn reference_frequency(&self) -> f64 {
        self.emitter
            .first()
            .map(|e| e.nu_ion_thz)
            .unwrap_or(self.cavity.nu_cav_thz)
            * 1e12
    }

    fn convert(&self) -> Result<ExperimentConfig, Located> {
        let mut emitters = Vec::with_capacity(self.emitter.len());
        for (i, e) in self.emitter.iter().enumerate() {
            let at = |mut l: Located| {
                l.index = Some(i);
                l
            };
            check(e.t1_0_us > 0.0 && e.t1_0_us.is_finite(), "emitter", "t1_0_us", "must be > 0").map_err(at)?;
            let model = EmitterModel {
                nu_ion_0: e.nu_ion_thz * 1e12,
                gamma_0: 1.0 / (e.t1_0_us * 1e-6),
                gamma_h: e.gamma_h_mhz * 1e6,
                p_max: e.p_max,
                diffusion: SpectralDiffusionParams {
                    sigma_fast: e.sigma_fast_mhz * 1e6,
                    tau_fast: e.tau_fast_us * 1e-6,
                    sigma_slow_rate: e.sigma_slow_rate_mhz2_per_s * 1e12,
                },
            };
            model.validate().map_err(|err| at(from_param("emitter", err)))?;
            emitters.push(model);
        }

        let cavity = CavityModel {
            nu_cav: self.cavity.nu_cav_thz * 1e12,
            q_factor: self.cavity.q_factor,
            p_peak: self.cavity.p_peak,
            mode_volume_note: self.cavity.mode_volume_note.clone(),
        };
        cavity.validate().map_err(|e| from_param("cavity", e))?;

        let d = &self.detector;
        let detector = DetectorModel {
            efficiency: d.efficiency,
            dark_rate: d.dark_rate_hz,
            dead_time: d.dead_time_ns * 1e-9,
            collection_fraction: d.collection_fraction,
        };
        detector.validate().map_err(|e| from_param("detector", e))?;

        let s = &self.sequence;
        let sequence = PulseSequence::new(s.t_pulse_us * 1e-6, s.t_coll_us * 1e-6, s.t_rep_us * 1e-6, s.n_shots)
            .map_err(|e| from_param("sequence", e))?;

        let source = match self.source.kind {
            SourceName::SingleEmitter => SourceKind::SingleEmitter,
            SourceName::NEmitters => match self.source.count {
                Some(k) if k >= 1 => SourceKind::NEmitters(k),
                Some(_) => return Err(bad("source", "count", "`count` must be >= 1")),
                None => return Err(bad("source", "count", "kind = \"n_emitters\" requires `count`")),
            },
            SourceName::Poissonian => match self.source.rate_hz {
                Some(r) if r.is_finite() && r >= 0.0 => SourceKind::Poissonian { rate: r },
                Some(_) => return Err(bad("source", "rate_hz", "`rate_hz` must be >= 0")),
                None => return Err(bad("source", "rate_hz", "kind = \"poissonian\" requires `rate_hz`")),
            },
        };
        if !matches!(source, SourceKind::Poissonian { .. }) && emitters.is_empty() {
            return Err(Located {
                section: "emitter",
                index: None,
                key: None,
                message: "at least one [[emitter]] table is required for this source".into(),
            });
        }

        let reference = self.reference_frequency();
        check(self.laser.detuning_mhz.is_finite(), "laser", "detuning_mhz", "must be finite")?;
        let laser_frequency = reference + self.laser.detuning_mhz * 1e6;

        let scan = match &self.scan {
            None => None,
            Some(sc) => {
                check(sc.points >= 1, "scan", "points", "must be >= 1")?;
                check(
                    sc.start_offset_mhz.is_finite() && sc.stop_offset_mhz.is_finite(),
                    "scan",
                    "stop_offset_mhz",
                    "must be finite",
                )?;
                check(
                    sc.points == 1 || sc.stop_offset_mhz > sc.start_offset_mhz,
                    "scan",
                    "stop_offset_mhz",
                    "must exceed `start_offset_mhz`",
                )?;
                check(sc.repetitions >= 1, "scan", "repetitions", "must be >= 1")?;
                check(sc.dwell_s.is_finite() && sc.dwell_s >= 0.0, "scan", "dwell_s", "must be >= 0")?;
                let n = sc.points;
                let step = if n > 1 {
                    (sc.stop_offset_mhz - sc.start_offset_mhz) / (n - 1) as f64
                } else {
                    0.0
                };
                let frequencies = (0..n)
                    .map(|i| reference + (sc.start_offset_mhz + step * i as f64) * 1e6)
                    .collect();
                let plan = ScanPlan {
                    frequencies,
                    repetitions: sc.repetitions,
                    dwell: sc.dwell_s,
                };
                plan.validate().map_err(|e| from_param("scan", e))?;
                Some(plan)
            }
        };

        let config = ExperimentConfig {
            emitters,
            cavity,
            detector,
            sequence,
            laser_frequency,
            scan,
            master_seed: self.seed.master_seed,
            source,
        };
        config.validate().map_err(|e| from_param("source", e))?;
        Ok(config)
    }
}

/// Maps a model-level parameter name to the document key that sets it.
fn key_for(section: &'static str, param: &str) -> Option<&'static str> {
    let key = match (section, param) {
        ("emitter", "nu_ion_0") => "nu_ion_thz",
        ("emitter", "gamma_0") => "t1_0_us",
        ("emitter", "gamma_h") => "gamma_h_mhz",
        ("emitter", "p_max") => "p_max",
        ("emitter", "sigma_fast") => "sigma_fast_mhz",
        ("emitter", "tau_fast") => "tau_fast_us",
        ("emitter", "sigma_slow_rate") => "sigma_slow_rate_mhz2_per_s",
        ("cavity", "nu_cav") => "nu_cav_thz",
        ("cavity", "q_factor") => "q_factor",
        ("cavity", "p_peak") => "p_peak",
        ("detector", "efficiency") => "efficiency",
        ("detector", "dark_rate") => "dark_rate_hz",
        ("detector", "dead_time") => "dead_time_ns",
        ("detector", "collection_fraction") => "collection_fraction",
        ("sequence", "t_pulse") => "t_pulse_us",
        ("sequence", "t_coll") => "t_coll_us",
        ("sequence", "t_rep") => "t_rep_us",
        ("sequence", "n_shots") => "n_shots",
        ("scan", "repetitions") => "repetitions",
        ("scan", "dwell") => "dwell_s",
        ("scan", "scan") => "points",
        _ => return None,
    };
    Some(key)
}

fn from_param(section: &'static str, err: Error) -> Located {
    match err {
        Error::InvalidParameter { name, reason } => {
            let key = key_for(section, name);
            let shown = key.unwrap_or(name);
            Located {
                section,
                index: None,
                key,
                message: format!("`{shown}`: {reason}"),
            }
        }
        other => Located {
            section,
            index: None,
            key: None,
            message: other.to_string(),
        },
    }
}

fn section_label(l: &Located) -> String {
    match l.index {
        Some(i) => format!("{}#{}", l.section, i + 1),
        None => l.section.to_string(),
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let doc = ConfigDocument::from_toml(text)?;
    doc.convert().map_err(|l| Error::Config {
        line: locate(text, l.section, l.index, l.key),
        section: Some(section_label(&l)),
        message: l.message,
    })
}

pub fn serialize_config_document(doc: &ConfigDocument) -> Result<String> {
    doc.to_toml()
}

/// Section header on a line, if any: `[name]` or `[[name]]`.
fn header(line: &str) -> Option<&str> {
    let t = line.trim();
    let t = t.split('#').next()?.trim();
    let inner = t.strip_prefix("[[").and_then(|r| r.strip_suffix("]]"))
        .or_else(|| t.strip_prefix('[').and_then(|r| r.strip_suffix(']')))?;
    Some(inner.trim())
}

fn line_key(line: &str) -> Option<&str> {
    let (k, _) = line.split_once('=')?;
    Some(k.trim().trim_matches('"'))
}

/// 1-based line of `key` within a section (or of the section header when
/// the key is absent from the text).
fn locate(text: &str, section: &str, index: Option<usize>, key: Option<&str>) -> Option<usize> {
    let mut seen = 0usize;
    let mut inside = false;
    let mut header_line = None;
    for (n, line) in text.lines().enumerate() {
        if let Some(h) = header(line) {
            inside = false;
            if h == section {
                if index.is_none_or(|i| i == seen) {
                    inside = true;
                    header_line.get_or_insert(n + 1);
                }
                seen += 1;
            }
            continue;
        }
        if inside && key.is_some() && line_key(line) == key {
            return Some(n + 1);
        }
    }
    header_line
}

/// Section that encloses a 1-based line.
fn section_at(text: &str, line: usize) -> Option<String> {
    text.lines()
        .take(line)
        .filter_map(header)
        .last()
        .map(str::to_string)
}

fn syntax_error(text: &str, e: &toml::de::Error) -> Error {
    let line = e
        .span()
        .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
    let section = line.and_then(|l| section_at(text, l));
    let raw = e.message().trim().to_string();
    let message = if let Some(key) = between(&raw, "unknown field `", "`") {
        let known = section
            .as_deref()
            .and_then(|s| KEYS.iter().find(|(n, _)| *n == s))
            .map(|(_, k)| *k)
            .unwrap_or(&[]);
        let sibling = strip_unit(key).and_then(|stem| {
            known
                .iter()
                .find(|k| **k != key && strip_unit(k) == Some(stem))
        });
        match sibling {
            Some(expected) => format!("unit-suffix mismatch: `{key}` given, expected `{expected}`"),
            None => format!("unknown key `{key}`"),
        }
    } else if let Some(key) = between(&raw, "missing field `", "`") {
        format!("missing required key `{key}`")
    } else {
        raw
    };
    Error::Config {
        line,
        section,
        message,
    }
}

fn between<'a>(s: &'a str, open: &str, close: &str) -> Option<&'a str> {
    let start = s.find(open)? + open.len();
    let len = s[start..].find(close)?;
    Some(&s[start..start + len])
}
