//! `ERTT` binary click-stream files.
//!
//! Layout, all little-endian:
//!
//! ```text
//! offset  size  field
//!      0     4  magic "ERTT"
//!      4     2  format version (1)
//!      6     8  t_rep_ns
//!     14     8  t_pulse_ns
//!     22     8  t_coll_ns
//!     30     8  record count
//!     38  16·n  records: shot index (u64), time within shot in ns (u64)
//! ```
//!
//! The file carries no shot count; on reading it is taken as one past the
//! last recorded shot.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::engine::{ClickRecord, ClickStream, PulseSequence};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"ERTT";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 38;
pub const RECORD_LEN: usize = 16;

pub fn encode(stream: &ClickStream) -> Vec<u8> {
    let seq = &stream.sequence;
    let mut out = Vec::with_capacity(HEADER_LEN + RECORD_LEN * stream.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    for v in [seq.t_rep_ns(), seq.t_pulse_ns(), seq.t_coll_ns(), stream.len() as u64] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for r in &stream.records {
        out.extend_from_slice(&r.shot.to_le_bytes());
        out.extend_from_slice(&r.t_ns.to_le_bytes());
    }
    out
}

fn u64_at(bytes: &[u8], at: usize) -> u64 {
    u64::from_le_bytes(bytes[at..at + 8].try_into().expect("8-byte slice"))
}

pub fn decode(bytes: &[u8]) -> Result<ClickStream> {
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        let got = &bytes[..bytes.len().min(4)];
        return Err(Error::Format(format!("bad magic {:?}, expected \"ERTT\"", String::from_utf8_lossy(got))));
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format(format!(
            "truncated header: {} bytes, need {HEADER_LEN}",
            bytes.len()
        )));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let t_rep = u64_at(bytes, 6);
    let t_pulse = u64_at(bytes, 14);
    let t_coll = u64_at(bytes, 22);
    let count = u64_at(bytes, 30);

    let body = bytes.len() - HEADER_LEN;
    let expected = usize::try_from(count)
        .ok()
        .and_then(|c| c.checked_mul(RECORD_LEN))
        .ok_or_else(|| Error::Format(format!("record count {count} overflows")))?;
    if body < expected {
        return Err(Error::Format(format!(
            "truncated record section: header declares {count} records ({expected} bytes), found {body} bytes"
        )));
    }
    if body > expected {
        return Err(Error::Format(format!(
            "{} trailing bytes after {count} records",
            body - expected
        )));
    }

    let records: Vec<ClickRecord> = bytes[HEADER_LEN..]
        .chunks_exact(RECORD_LEN)
        .map(|c| ClickRecord {
            shot: u64_at(c, 0),
            t_ns: u64_at(c, 8),
        })
        .collect();
    let n_shots = match records.last() {
        Some(r) => r
            .shot
            .checked_add(1)
            .ok_or_else(|| Error::Format("shot index overflows".into()))?,
        None => 1,
    };
    let sequence = PulseSequence::from_ns(t_pulse, t_coll, t_rep, n_shots)
        .map_err(|e| Error::Format(format!("invalid header timing: {e}")))?;
    let stream = ClickStream::new(records, sequence, String::new());
    stream
        .validate(0)
        .map_err(|e| Error::Format(e.to_string()))?;
    Ok(stream)
}

pub fn write_clickstream(stream: &ClickStream, path: impl AsRef<Path>) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(&encode(stream))?;
    f.sync_all()?;
    Ok(())
}

pub fn read_clickstream(path: impl AsRef<Path>) -> Result<ClickStream> {
    decode(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ClickStream {
        let seq = PulseSequence::from_ns(1_000, 20_000, 60_000, 5).unwrap();
        let records = vec![
            ClickRecord { shot: 0, t_ns: 1_500 },
            ClickRecord { shot: 0, t_ns: 7_000 },
            ClickRecord { shot: 4, t_ns: 20_999 },
        ];
        ClickStream::new(records, seq, String::new())
    }

    #[test]
    fn round_trip() {
        let s = sample();
        let bytes = encode(&s);
        assert_eq!(bytes.len(), HEADER_LEN + 3 * RECORD_LEN);
        let back = decode(&bytes).unwrap();
        assert_eq!(back.records, s.records);
        assert_eq!(back.sequence, s.sequence);
        assert_eq!(encode(&back), bytes);
    }

    #[test]
    fn empty_stream() {
        let seq = PulseSequence::from_ns(1_000, 20_000, 60_000, 1).unwrap();
        let s = ClickStream::new(vec![], seq, String::new());
        let back = decode(&encode(&s)).unwrap();
        assert!(back.is_empty());
        assert_eq!(back.sequence, seq);
    }

    #[test]
    fn corrupt_files_are_rejected() {
        let bytes = encode(&sample());
        let mut bad = bytes.clone();
        bad[..4].copy_from_slice(b"XXXX");
        assert!(decode(&bad).unwrap_err().to_string().contains("bad magic"));

        let mut bad = bytes.clone();
        bad[4] = 2;
        assert!(decode(&bad).unwrap_err().to_string().contains("version"));

        assert!(decode(&bytes[..bytes.len() - 1]).unwrap_err().to_string().contains("truncated"));
        assert!(decode(&bytes[..20]).unwrap_err().to_string().contains("truncated"));

        let mut longer = bytes.clone();
        longer.push(0);
        assert!(decode(&longer).is_err());

        // swap the last two records
        let mut bad = bytes.clone();
        let (a, b) = (HEADER_LEN + RECORD_LEN, HEADER_LEN + 2 * RECORD_LEN);
        let first = bad[a..b].to_vec();
        bad.copy_within(b..b + RECORD_LEN, a);
        bad[b..b + RECORD_LEN].copy_from_slice(&first);
        assert!(decode(&bad).is_err());

        let mut bad = bytes;
        bad[30..38].copy_from_slice(&u64::MAX.to_le_bytes());
        assert!(decode(&bad).is_err());
    }
}
