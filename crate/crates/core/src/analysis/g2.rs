//! Pulsed single-detector autocorrelation.
//!
//! Coincidences are binned by shot offset. A pair of clicks `Δ` shots apart is
//! counted once at `+Δ` and once at `-Δ`; a pair inside one shot is counted
//! twice at offset 0. With `n_s` clicks in shot `s` this gives
//! `C(Δ) = Σ_s n_s n_{s+Δ}` for `Δ ≠ 0` and `C(0) = Σ_s n_s (n_s - 1)`,
//! so an uncorrelated source yields equal rates at every offset.

use crate::engine::ClickStream;
use crate::error::{Error, Result};
use crate::par::{sum_chunks, Execution};

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationHistogram {
    max_offset: usize,
    /// Coincidences for offsets `-K..=K`, index `Δ + K`.
    coincidences: Vec<u64>,
    n_shots: u64,
    t_rep: f64,
    normalization: f64,
}

impl CorrelationHistogram {
    pub fn max_offset(&self) -> usize {
        self.max_offset
    }

    pub fn n_shots(&self) -> u64 {
        self.n_shots
    }

    pub fn t_rep(&self) -> f64 {
        self.t_rep
    }

    pub fn offsets(&self) -> impl Iterator<Item = i64> {
        let k = self.max_offset as i64;
        -k..=k
    }

    fn index(&self, offset: i64) -> usize {
        assert!(
            offset.unsigned_abs() as usize <= self.max_offset,
            "offset {offset} outside ±{}",
            self.max_offset
        );
        (offset + self.max_offset as i64) as usize
    }

    pub fn coincidences(&self, offset: i64) -> u64 {
        self.coincidences[self.index(offset)]
    }

    /// Shot pairs that can contribute at this offset in a finite trace.
    pub fn pairs_available(&self, offset: i64) -> u64 {
        self.n_shots - offset.unsigned_abs()
    }

    /// Coincidences per available shot pair.
    pub fn rate(&self, offset: i64) -> f64 {
        self.coincidences(offset) as f64 / self.pairs_available(offset) as f64
    }

    /// Mean side-peak rate over `1 <= |Δ| <= K`; zero when there is no data.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// True if the stream had too few clicks to normalize.
    pub fn is_empty(&self) -> bool {
        self.normalization <= 0.0
    }

    /// Normalized correlation at a shot offset; NaN for an empty histogram.
    pub fn g2(&self, offset: i64) -> f64 {
        if self.is_empty() {
            return f64::NAN;
        }
        self.rate(offset) / self.normalization
    }

    /// Poisson counting error of `g2(offset)`, including the error of the
    /// side-peak normalization.
    pub fn g2_sigma(&self, offset: i64) -> f64 {
        if self.is_empty() {
            return f64::NAN;
        }
        let k = self.max_offset as i64;
        // ±Δ hold the same count, so the K distinct offsets are the
        // independent terms of the normalization.
        let var_norm: f64 = (1..=k)
            .map(|d| self.coincidences(d) as f64 / (self.pairs_available(d) as f64).powi(2))
            .sum::<f64>()
            / (k * k) as f64;
        let c = self.coincidences(offset) as f64;
        let rel_n = var_norm / (self.normalization * self.normalization);
        if c == 0.0 {
            // no counts: quote the one-count level
            return 1.0 / self.pairs_available(offset) as f64 / self.normalization;
        }
        self.g2(offset) * (1.0 / c + rel_n).sqrt()
    }

    /// Delay corresponding to a shot offset (s).
    pub fn delay(&self, offset: i64) -> f64 {
        offset as f64 * self.t_rep
    }

    pub fn g2_values(&self) -> Vec<(i64, f64)> {
        self.offsets().map(|d| (d, self.g2(d))).collect()
    }
}

/// Pulsed autocorrelation of a click stream out to `max_offset` shots.
pub fn pulsed_g2(stream: &ClickStream, max_offset: usize) -> Result<CorrelationHistogram> {
    pulsed_g2_with(stream, max_offset, Execution::default())
}

pub fn pulsed_g2_with(
    stream: &ClickStream,
    max_offset: usize,
    execution: Execution,
) -> Result<CorrelationHistogram> {
    if max_offset == 0 {
        return Err(Error::param("max_offset", "must be >= 1"));
    }
    let n_shots = stream.sequence.n_shots();
    if max_offset as u64 >= n_shots {
        return Err(Error::param(
            "max_offset",
            format!("must be smaller than the number of shots ({n_shots})"),
        ));
    }
    // (shot, clicks in shot) for every occupied shot, in shot order
    let mut occupied: Vec<(u64, u64)> = Vec::new();
    for r in &stream.records {
        match occupied.last_mut() {
            Some((s, n)) if *s == r.shot => *n += 1,
            Some((s, _)) if *s > r.shot => {
                return Err(Error::InvalidStream("records are not sorted by shot".into()))
            }
            _ => occupied.push((r.shot, 1)),
        }
    }

    let k = max_offset;
    let width = 2 * k + 1;
    let occ = &occupied;
    let counts = sum_chunks(0..occ.len() as u64, execution, width, |range, acc| {
        for i in range {
            let (s, n) = occ[i as usize];
            acc[k] += n * (n - 1);
            for &(s2, n2) in occ[i as usize + 1..].iter() {
                let d = (s2 - s) as usize;
                if d > k {
                    break;
                }
                acc[k + d] += n * n2;
                acc[k - d] += n * n2;
            }
        }
    });

    let mut hist = CorrelationHistogram {
        max_offset: k,
        coincidences: counts,
        n_shots,
        t_rep: stream.sequence.t_rep(),
        normalization: 0.0,
    };
    if stream.len() >= 2 {
        let side: f64 = (1..=k as i64).map(|d| hist.rate(d)).sum::<f64>() / k as f64;
        hist.normalization = side;
    }
    Ok(hist)
}

/// Expected coincidences involving at least one dark click, for a source
/// emitting at most one signal click per shot on top of Poisson dark counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoincidenceFloor {
    signal_per_shot: f64,
    dark_per_shot: f64,
    n_shots: u64,
}

impl CoincidenceFloor {
    /// Expected dark-involving coincidences per shot pair, `2SB + B²`. The
    /// same at every offset, including zero.
    pub fn per_shot_pair(&self) -> f64 {
        let (s, b) = (self.signal_per_shot, self.dark_per_shot);
        2.0 * s * b + b * b
    }

    /// Expected dark-involving coincidences at an offset of a finite trace.
    pub fn coincidences(&self, offset: i64) -> f64 {
        self.per_shot_pair() * (self.n_shots - offset.unsigned_abs()) as f64
    }

    /// The floor in units of the normalized correlation, `1 - ρ²`.
    pub fn normalized(&self) -> f64 {
        let total = self.signal_per_shot + self.dark_per_shot;
        if total > 0.0 {
            self.per_shot_pair() / (total * total)
        } else {
            0.0
        }
    }

    /// Signal fraction `ρ = S / (S + B)`.
    pub fn signal_fraction(&self) -> f64 {
        let total = self.signal_per_shot + self.dark_per_shot;
        if total > 0.0 {
            self.signal_per_shot / total
        } else {
            f64::NAN
        }
    }
}

/// Dark-count contribution to the coincidence histogram.
pub fn dark_count_floor(
    signal_rate_per_shot: f64,
    dark_rate: f64,
    t_coll: f64,
    n_shots: u64,
) -> Result<CoincidenceFloor> {
    for (name, v) in [
        ("signal_rate_per_shot", signal_rate_per_shot),
        ("dark_rate", dark_rate),
        ("t_coll", t_coll),
    ] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::param(name, "must be >= 0"));
        }
    }
    Ok(CoincidenceFloor {
        signal_per_shot: signal_rate_per_shot,
        dark_per_shot: dark_rate * t_coll,
        n_shots,
    })
}

/// Removes an uncorrelated background from a measured `g2(0)` given the
/// signal fraction `rho`: `(g - (1 - ρ²)) / ρ²`, floored at 0.
pub fn background_corrected_g2(g2_raw: f64, rho: f64) -> Result<f64> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::param("rho", format!("signal fraction must lie in (0, 1], got {rho}")));
    }
    if !(g2_raw >= 0.0) {
        return Err(Error::param("g2_raw", "must be >= 0"));
    }
    let r2 = rho * rho;
    Ok(((g2_raw - (1.0 - r2)) / r2).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{ClickRecord, PulseSequence};

    fn stream(shots: &[u64], n_shots: u64) -> ClickStream {
        let seq = PulseSequence::new(1e-6, 20e-6, 60e-6, n_shots).unwrap();
        let records = shots
            .iter()
            .map(|&s| ClickRecord { shot: s, t_ns: 2000 })
            .collect();
        ClickStream::new(records, seq, String::new())
    }

    #[test]
    fn one_click_every_shot() {
        let shots: Vec<u64> = (0..200).collect();
        let h = pulsed_g2(&stream(&shots, 200), 30).unwrap();
        assert_eq!(h.g2(0), 0.0);
        for d in 1..=30 {
            assert_eq!(h.g2(d), 1.0);
            assert_eq!(h.g2(-d), 1.0);
        }
        assert!((h.delay(30) - 1.8e-3).abs() < 1e-15);
    }

    #[test]
    fn pair_counting_by_hand() {
        // shot 0: 2 clicks, shot 1: 1 click, shot 3: 1 click
        let h = pulsed_g2(&stream(&[0, 0, 1, 3], 10), 3).unwrap();
        assert_eq!(h.coincidences(0), 2);
        assert_eq!(h.coincidences(1), 2);
        assert_eq!(h.coincidences(-1), 2);
        assert_eq!(h.coincidences(2), 1);
        assert_eq!(h.coincidences(3), 2);
        assert_eq!(h.pairs_available(3), 7);
    }

    #[test]
    fn too_few_clicks_flags_empty() {
        let h = pulsed_g2(&stream(&[4], 10), 3).unwrap();
        assert!(h.is_empty());
        assert!(h.g2(0).is_nan());
        assert!(pulsed_g2(&stream(&[], 10), 0).is_err());
        assert!(pulsed_g2(&stream(&[], 10), 10).is_err());
    }

    #[test]
    fn correction_values() {
        let g = background_corrected_g2(0.29, 0.861).unwrap();
        assert!((g - 0.0422).abs() < 5e-4, "{g}");
        assert_eq!(background_corrected_g2(0.37, 1.0).unwrap(), 0.37);
        for rho in [0.2, 0.5, 0.861, 0.99] {
            let g = background_corrected_g2(1.0 - rho * rho, rho).unwrap();
            assert!(g.abs() < 1e-12);
        }
        assert!(background_corrected_g2(0.3, 0.0).is_err());
        assert!(background_corrected_g2(0.3, 1.2).is_err());
    }

    #[test]
    fn floor_values() {
        let f = dark_count_floor(0.1, 0.0, 20e-6, 100).unwrap();
        assert_eq!(f.per_shot_pair(), 0.0);
        assert_eq!(f.coincidences(5), 0.0);
        let f = dark_count_floor(0.1, 1000.0, 20e-6, 100).unwrap();
        let b = 0.02;
        assert!((f.per_shot_pair() - (2.0 * 0.1 * b + b * b)).abs() < 1e-15);
        assert!((f.normalized() - (1.0 - f.signal_fraction().powi(2))).abs() < 1e-12);
    }
}
