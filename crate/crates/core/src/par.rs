//! Parallel/serial execution switch.
//!
//! With the `parallel` feature disabled every path runs serially; the
//! `Execution` choice is still accepted so callers do not need cfg guards.

use std::ops::Range;

/// How shot loops and pair enumeration are scheduled. Results are identical
/// for both variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

pub(crate) const CHUNK: u64 = 4096;

fn chunks(range: Range<u64>) -> Vec<Range<u64>> {
    let mut out = Vec::new();
    let mut start = range.start;
    while start < range.end {
        let end = (start + CHUNK).min(range.end);
        out.push(start..end);
        start = end;
    }
    out
}

/// Runs `f` over fixed-size chunks of `range` and concatenates the outputs in
/// chunk order.
pub(crate) fn map_chunks<T, F>(range: Range<u64>, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(Range<u64>, &mut Vec<T>) + Sync + Send,
{
    let parts = chunks(range);
    let run = |r: &Range<u64>| {
        let mut v = Vec::new();
        f(r.clone(), &mut v);
        v
    };
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        let pieces: Vec<Vec<T>> = parts.par_iter().map(run).collect();
        return pieces.into_iter().flatten().collect();
    }
    let _ = exec;
    parts.iter().flat_map(run).collect()
}

/// Sums `f` over chunks of `range`. Only for integer-valued accumulators so
/// the result does not depend on summation order.
pub(crate) fn sum_chunks<F>(range: Range<u64>, exec: Execution, width: usize, f: F) -> Vec<u64>
where
    F: Fn(Range<u64>, &mut [u64]) + Sync + Send,
{
    let parts = chunks(range);
    let run = |r: &Range<u64>| {
        let mut acc = vec![0u64; width];
        f(r.clone(), &mut acc);
        acc
    };
    let add = |mut a: Vec<u64>, b: Vec<u64>| {
        for (x, y) in a.iter_mut().zip(b) {
            *x += y;
        }
        a
    };
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return parts
            .par_iter()
            .map(run)
            .reduce(|| vec![0u64; width], add);
    }
    let _ = exec;
    parts.iter().map(run).fold(vec![0u64; width], add)
}
