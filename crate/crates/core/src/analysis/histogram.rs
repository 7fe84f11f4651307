use crate::engine::ClickStream;
use crate::error::{Error, Result};

/// Arrival-time histogram measured from the end of the excitation pulse.
///
/// Bins are uniform and right-closed, `(k w, (k+1) w]`, except the first
/// which also contains delay 0.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayHistogram {
    bin_width: f64,
    pub counts: Vec<f64>,
    pub total_shots: u64,
}

impl DecayHistogram {
    pub fn new(bin_width: f64, counts: Vec<f64>, total_shots: u64) -> Result<Self> {
        if !(bin_width.is_finite() && bin_width > 0.0) {
            return Err(Error::param("bin_width", "must be > 0"));
        }
        if counts.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(Error::param("counts", "histogram counts must be finite and >= 0"));
        }
        Ok(Self {
            bin_width,
            counts,
            total_shots,
        })
    }

    pub fn bin_width(&self) -> f64 {
        self.bin_width
    }

    pub fn bin_edges(&self) -> Vec<f64> {
        (0..=self.counts.len())
            .map(|k| k as f64 * self.bin_width)
            .collect()
    }

    pub fn bin_centers(&self) -> Vec<f64> {
        (0..self.counts.len())
            .map(|k| (k as f64 + 0.5) * self.bin_width)
            .collect()
    }

    pub fn total(&self) -> f64 {
        self.counts.iter().sum()
    }
}

/// Histograms click delays `t_within_shot - t_pulse` over the collection window.
pub fn histogram_arrivals(stream: &ClickStream, bin_width: f64) -> Result<DecayHistogram> {
    if !(bin_width.is_finite() && bin_width > 0.0) {
        return Err(Error::param("bin_width", "must be > 0"));
    }
    let width_ns = bin_width * 1e9;
    let window_ns = stream.sequence.t_coll_ns() as f64;
    let n_bins = ((window_ns / width_ns).ceil() as usize).max(1);
    let mut counts = vec![0.0; n_bins];
    let t0 = stream.sequence.t_pulse_ns();
    for r in &stream.records {
        let d = r.t_ns.saturating_sub(t0) as f64;
        let k = ((d / width_ns).ceil() as usize).saturating_sub(1).min(n_bins - 1);
        counts[k] += 1.0;
    }
    DecayHistogram::new(bin_width, counts, stream.sequence.n_shots())
}
