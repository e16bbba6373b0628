//! Binary feature-set format, little-endian throughout:
//!
//! ```text
//! magic   4 bytes  "FSET"
//! version u32      1
//! flags   u32      bit0 = scores present
//! n       u64      row count
//! d       u64      feature dimension
//! ids     n ×      (u32 byte length, UTF-8 bytes)
//! rows    n·d f64  row-major
//! scores  n f64    only if flagged
//! crc32   u32      over everything between `d` and here (ids + rows + scores)
//! ```
//!
//! Writing then reading reproduces every field bit-exactly; payload numbers
//! are stored with their full f64 bit patterns.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::store::FeatureSet;

const MAGIC: [u8; 4] = *b"FSET";
const VERSION: u32 = 1;
const FLAG_SCORES: u32 = 1;

pub fn write_binary<P: AsRef<Path>>(set: &FeatureSet, path: P) -> Result<()> {
    let mut out = BufWriter::new(File::create(path.as_ref())?);
    let flags = if set.scores().is_some() { FLAG_SCORES } else { 0 };

    out.write_all(&MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&flags.to_le_bytes())?;
    out.write_all(&(set.len() as u64).to_le_bytes())?;
    out.write_all(&(set.dim() as u64).to_le_bytes())?;

    let mut crc = crc32fast::Hasher::new();
    let mut emit = |out: &mut BufWriter<File>, bytes: &[u8]| -> Result<()> {
        crc.update(bytes);
        out.write_all(bytes)?;
        Ok(())
    };

    for id in set.ids() {
        emit(&mut out, &(id.len() as u32).to_le_bytes())?;
        emit(&mut out, id.as_bytes())?;
    }
    for row in set.rows() {
        for v in row {
            emit(&mut out, &v.to_le_bytes())?;
        }
    }
    if let Some(scores) = set.scores() {
        for v in scores {
            emit(&mut out, &v.to_le_bytes())?;
        }
    }
    let checksum = crc.finalize();
    out.write_all(&checksum.to_le_bytes())?;
    out.flush()?;
    Ok(())
}

pub fn read_binary<P: AsRef<Path>>(path: P) -> Result<FeatureSet> {
    let mut bytes = Vec::new();
    File::open(path.as_ref())?.read_to_end(&mut bytes)?;
    let mut cur = Cursor::new(&bytes);

    let magic = cur.take_array::<4>("magic")?;
    if magic != MAGIC {
        return Err(Error::BadMagic { found: magic });
    }
    let version = u32::from_le_bytes(cur.take_array("version")?);
    if version != VERSION {
        return Err(Error::UnsupportedVersion { found: version });
    }
    let flags = u32::from_le_bytes(cur.take_array("flags")?);
    let n = u64::from_le_bytes(cur.take_array("row count")?) as usize;
    let d = u64::from_le_bytes(cur.take_array("dimension")?) as usize;
    let has_scores = flags & FLAG_SCORES != 0;

    let payload_start = cur.pos;

    let mut ids = Vec::with_capacity(n.min(4096));
    for _ in 0..n {
        let len = u32::from_le_bytes(cur.take_array("id length")?) as usize;
        let raw = cur.take("id bytes", len)?;
        let id = std::str::from_utf8(raw)
            .map_err(|_| Error::Csv {
                row: ids.len() + 1,
                msg: "id is not valid UTF-8".into(),
            })?
            .to_string();
        ids.push(id);
    }

    let row_values = n.checked_mul(d).ok_or(Error::Truncated {
        what: "rows",
        expected: u64::MAX,
        got: cur.remaining() as u64,
    })?;
    let mut data = Vec::with_capacity(row_values.min(65536));
    for _ in 0..row_values {
        data.push(f64::from_le_bytes(cur.take_array("row payload")?));
    }
    let scores = if has_scores {
        let mut s = Vec::with_capacity(n.min(65536));
        for _ in 0..n {
            s.push(f64::from_le_bytes(cur.take_array("score payload")?));
        }
        Some(s)
    } else {
        None
    };

    let payload_end = cur.pos;
    let stored = u32::from_le_bytes(cur.take_array("checksum")?);
    let computed = crc32fast::hash(&bytes[payload_start..payload_end]);
    if stored != computed {
        return Err(Error::ChecksumMismatch { stored, computed });
    }

    FeatureSet::new(ids, d, data, scores)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Cursor { bytes, pos: 0 }
    }

    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    fn take(&mut self, what: &'static str, len: usize) -> Result<&'a [u8]> {
        if self.remaining() < len {
            return Err(Error::Truncated {
                what,
                expected: len as u64,
                got: self.remaining() as u64,
            });
        }
        let out = &self.bytes[self.pos..self.pos + len];
        self.pos += len;
        Ok(out)
    }

    fn take_array<const N: usize>(&mut self, what: &'static str) -> Result<[u8; N]> {
        let slice = self.take(what, N)?;
        let mut out = [0u8; N];
        out.copy_from_slice(slice);
        Ok(out)
    }
}
