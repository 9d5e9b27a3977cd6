//! Binary container for synthetic policy tables.
//!
//! Layout, all little-endian:
//!
//! ```text
//! magic "SPT1"
//! u32  domain id length, then that many UTF-8 bytes
//! u32  action count |A|
//! u64  state count
//! u64  seed
//! f64  target accuracy
//! f64  measured accuracy
//! then per state, sorted ascending by key:
//!   u64 state key, |A| x f32 scores
//! ```
//!
//! The loader re-validates row sums against the stochastic-policy contract.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::domain::StateKey;
use crate::policy::SyntheticPolicyTable;

const MAGIC: &[u8; 4] = b"SPT1";
const ROW_SUM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum PolicyFileError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad magic: expected \"SPT1\"")]
    BadMagic,
    #[error("file truncated at byte offset {offset}")]
    Truncated { offset: u64 },
    #[error("header field {field} is invalid: {detail}")]
    BadHeader { field: &'static str, detail: String },
    #[error("state keys are not strictly ascending near row {row}")]
    UnsortedKeys { row: usize },
    #[error("row for state {state:#018x} sums to {sum}, violating the stochastic contract")]
    RowSum { state: StateKey, sum: f64 },
    #[error("row for state {state:#018x} contains a negative or non-finite score")]
    BadScore { state: StateKey },
    #[error("trailing bytes after the declared {rows} rows")]
    TrailingBytes { rows: usize },
}

struct CountingReader<R> {
    inner: R,
    offset: u64,
}

impl<R: Read> CountingReader<R> {
    fn exact(&mut self, buf: &mut [u8]) -> Result<(), PolicyFileError> {
        match self.inner.read_exact(buf) {
            Ok(()) => {
                self.offset += buf.len() as u64;
                Ok(())
            }
            Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => {
                Err(PolicyFileError::Truncated { offset: self.offset })
            }
            Err(e) => Err(e.into()),
        }
    }

    fn u32(&mut self) -> Result<u32, PolicyFileError> {
        let mut b = [0u8; 4];
        self.exact(&mut b)?;
        Ok(u32::from_le_bytes(b))
    }

    fn u64(&mut self) -> Result<u64, PolicyFileError> {
        let mut b = [0u8; 8];
        self.exact(&mut b)?;
        Ok(u64::from_le_bytes(b))
    }

    fn f64(&mut self) -> Result<f64, PolicyFileError> {
        Ok(f64::from_bits(self.u64()?))
    }

    fn f32(&mut self) -> Result<f32, PolicyFileError> {
        let mut b = [0u8; 4];
        self.exact(&mut b)?;
        Ok(f32::from_le_bytes(b))
    }
}

impl SyntheticPolicyTable {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), PolicyFileError> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(MAGIC)?;
        let id = self.domain_id().as_bytes();
        w.write_all(&(id.len() as u32).to_le_bytes())?;
        w.write_all(id)?;
        w.write_all(&(self.action_count_raw() as u32).to_le_bytes())?;
        w.write_all(&(self.state_count() as u64).to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        w.write_all(&self.target_acc.to_bits().to_le_bytes())?;
        w.write_all(&self.measured_acc.to_bits().to_le_bytes())?;
        let a = self.action_count_raw();
        for (i, &key) in self.keys().iter().enumerate() {
            w.write_all(&key.to_le_bytes())?;
            for &score in &self.raw_rows()[i * a..(i + 1) * a] {
                w.write_all(&score.to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, PolicyFileError> {
        let file = File::open(path)?;
        let mut r = CountingReader {
            inner: BufReader::new(file),
            offset: 0,
        };
        let mut magic = [0u8; 4];
        r.exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(PolicyFileError::BadMagic);
        }
        let id_len = r.u32()? as usize;
        if id_len > 4096 {
            return Err(PolicyFileError::BadHeader {
                field: "domain id",
                detail: format!("{id_len} bytes is implausibly long"),
            });
        }
        let mut id_bytes = vec![0u8; id_len];
        r.exact(&mut id_bytes)?;
        let domain_id = String::from_utf8(id_bytes).map_err(|e| PolicyFileError::BadHeader {
            field: "domain id",
            detail: e.to_string(),
        })?;
        let action_count = r.u32()? as usize;
        if action_count < 2 {
            return Err(PolicyFileError::BadHeader {
                field: "action count",
                detail: format!("{action_count} < 2"),
            });
        }
        let state_count = r.u64()? as usize;
        let seed = r.u64()?;
        let target_acc = r.f64()?;
        let measured_acc = r.f64()?;
        for (field, value) in [("target accuracy", target_acc), ("measured accuracy", measured_acc)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(PolicyFileError::BadHeader {
                    field,
                    detail: format!("{value} outside [0, 1]"),
                });
            }
        }
        let mut keys = Vec::with_capacity(state_count);
        let mut rows = vec![0f32; state_count * action_count];
        for row in 0..state_count {
            let key = r.u64()?;
            if let Some(&prev) = keys.last() {
                if key <= prev {
                    return Err(PolicyFileError::UnsortedKeys { row });
                }
            }
            let mut sum = 0f64;
            for slot in &mut rows[row * action_count..(row + 1) * action_count] {
                let v = r.f32()?;
                if !v.is_finite() || v < 0.0 {
                    return Err(PolicyFileError::BadScore { state: key });
                }
                sum += v as f64;
                *slot = v;
            }
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(PolicyFileError::RowSum { state: key, sum });
            }
            keys.push(key);
        }
        let mut trailing = [0u8; 1];
        if r.inner.read(&mut trailing)? != 0 {
            return Err(PolicyFileError::TrailingBytes { rows: state_count });
        }
        Ok(SyntheticPolicyTable::from_parts(
            domain_id,
            action_count,
            keys,
            rows,
            seed,
            target_acc,
            measured_acc,
        ))
    }

    fn action_count_raw(&self) -> usize {
        use crate::policy::StochasticPolicy;
        self.action_count()
    }
}
