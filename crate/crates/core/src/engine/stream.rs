use crate::error::{Error, Result};

/// Pulse timing. Durations are held in whole nanoseconds so that streams
/// survive the binary file boundary unchanged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PulseSequence {
    t_pulse_ns: u64,
    t_coll_ns: u64,
    t_rep_ns: u64,
    n_shots: u64,
}

pub(crate) fn secs_to_ns(name: &'static str, t: f64) -> Result<u64> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::param(name, format!("must be a finite non-negative duration, got {t}")));
    }
    let ns = (t * 1e9).round();
    if ns > u64::MAX as f64 / 2.0 {
        return Err(Error::param(name, "duration too large"));
    }
    Ok(ns as u64)
}

impl PulseSequence {
    /// Builds a sequence from durations in seconds, rounded to the nearest ns.
    pub fn new(t_pulse: f64, t_coll: f64, t_rep: f64, n_shots: u64) -> Result<Self> {
        Self::from_ns(
            secs_to_ns("t_pulse", t_pulse)?,
            secs_to_ns("t_coll", t_coll)?,
            secs_to_ns("t_rep", t_rep)?,
            n_shots,
        )
    }

    pub fn from_ns(t_pulse_ns: u64, t_coll_ns: u64, t_rep_ns: u64, n_shots: u64) -> Result<Self> {
        if t_pulse_ns == 0 {
            return Err(Error::param("t_pulse", "must be > 0"));
        }
        if t_coll_ns == 0 {
            return Err(Error::param("t_coll", "must be > 0"));
        }
        match t_pulse_ns.checked_add(t_coll_ns) {
            Some(end) if end <= t_rep_ns => {}
            _ => {
                return Err(Error::param(
                    "t_rep",
                    format!(
                        "pulse ({t_pulse_ns} ns) plus collection window ({t_coll_ns} ns) exceeds repetition period ({t_rep_ns} ns)"
                    ),
                ))
            }
        }
        if n_shots == 0 {
            return Err(Error::param("n_shots", "must be >= 1"));
        }
        Ok(Self {
            t_pulse_ns,
            t_coll_ns,
            t_rep_ns,
            n_shots,
        })
    }

    pub fn with_shots(self, n_shots: u64) -> Result<Self> {
        Self::from_ns(self.t_pulse_ns, self.t_coll_ns, self.t_rep_ns, n_shots)
    }

    pub fn t_pulse_ns(&self) -> u64 {
        self.t_pulse_ns
    }
    pub fn t_coll_ns(&self) -> u64 {
        self.t_coll_ns
    }
    pub fn t_rep_ns(&self) -> u64 {
        self.t_rep_ns
    }
    pub fn n_shots(&self) -> u64 {
        self.n_shots
    }

    pub fn t_pulse(&self) -> f64 {
        self.t_pulse_ns as f64 * 1e-9
    }
    pub fn t_coll(&self) -> f64 {
        self.t_coll_ns as f64 * 1e-9
    }
    pub fn t_rep(&self) -> f64 {
        self.t_rep_ns as f64 * 1e-9
    }

    /// Wall-clock duration of all shots.
    pub fn duration(&self) -> f64 {
        self.t_rep() * self.n_shots as f64
    }
}

/// One detector click: the shot it belongs to and its time since the start
/// of that shot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClickRecord {
    pub shot: u64,
    pub t_ns: u64,
}

impl ClickRecord {
    pub fn t_within_shot(&self) -> f64 {
        self.t_ns as f64 * 1e-9
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClickStream {
    pub records: Vec<ClickRecord>,
    pub sequence: PulseSequence,
    /// Hex digest of the configuration that produced the stream.
    pub digest: String,
}

impl ClickStream {
    pub fn new(records: Vec<ClickRecord>, sequence: PulseSequence, digest: String) -> Self {
        Self {
            records,
            sequence,
            digest,
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Delay of every click after the end of the excitation pulse (s).
    pub fn delays(&self) -> impl Iterator<Item = f64> + '_ {
        let t0 = self.sequence.t_pulse_ns;
        self.records
            .iter()
            .map(move |r| r.t_ns.saturating_sub(t0) as f64 * 1e-9)
    }

    /// Checks ordering, gating, shot range and dead time.
    pub fn validate(&self, dead_time_ns: u64) -> Result<()> {
        let seq = &self.sequence;
        let open = seq.t_pulse_ns;
        let close = seq.t_pulse_ns + seq.t_coll_ns;
        let mut prev: Option<ClickRecord> = None;
        for (i, r) in self.records.iter().enumerate() {
            if r.t_ns >= seq.t_rep_ns {
                return Err(Error::InvalidStream(format!(
                    "record {i}: time {} ns is not below the repetition period {} ns",
                    r.t_ns, seq.t_rep_ns
                )));
            }
            if r.t_ns < open {
                return Err(Error::InvalidStream(format!(
                    "record {i}: click at {} ns falls inside the gated pulse [0, {open}) ns",
                    r.t_ns
                )));
            }
            if r.t_ns >= close {
                return Err(Error::InvalidStream(format!(
                    "record {i}: click at {} ns is after the collection window closes at {close} ns",
                    r.t_ns
                )));
            }
            if r.shot >= seq.n_shots {
                return Err(Error::InvalidStream(format!(
                    "record {i}: shot index {} out of range for {} shots",
                    r.shot, seq.n_shots
                )));
            }
            if let Some(p) = prev {
                if *r < p {
                    return Err(Error::InvalidStream(format!("record {i} is out of order")));
                }
                if r.shot == p.shot && r.t_ns - p.t_ns < dead_time_ns {
                    return Err(Error::InvalidStream(format!(
                        "record {i}: clicks {} ns apart violate the {dead_time_ns} ns dead time",
                        r.t_ns - p.t_ns
                    )));
                }
            }
            prev = Some(*r);
        }
        Ok(())
    }
}
