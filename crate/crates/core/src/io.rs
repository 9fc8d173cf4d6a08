//! Little-endian binary encoding for model files.
//!
//! Model files must round-trip exactly (bit-equal counts, value-equal reals)
//! and identical inputs must produce identical bytes, so the format is a
//! plain length-prefixed encoding with no map types: callers serialize
//! collections in a canonical (sorted) order.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"PYLM";
pub const FORMAT_VERSION: u32 = 1;

pub struct BinWriter<W: Write> {
    inner: W,
}

impl<W: Write> BinWriter<W> {
    pub fn new(inner: W) -> Self {
        BinWriter { inner }
    }

    pub fn put_bytes(&mut self, bytes: &[u8]) -> std::io::Result<()> {
        self.inner.write_all(bytes)
    }

    pub fn put_u8(&mut self, v: u8) -> std::io::Result<()> {
        self.inner.write_all(&[v])
    }

    pub fn put_u32(&mut self, v: u32) -> std::io::Result<()> {
        self.inner.write_all(&v.to_le_bytes())
    }

    pub fn put_u64(&mut self, v: u64) -> std::io::Result<()> {
        self.inner.write_all(&v.to_le_bytes())
    }

    pub fn put_usize(&mut self, v: usize) -> std::io::Result<()> {
        self.put_u64(v as u64)
    }

    /// f64 stored as raw bits for exact round-trips.
    pub fn put_f64(&mut self, v: f64) -> std::io::Result<()> {
        self.put_u64(v.to_bits())
    }

    pub fn put_str(&mut self, s: &str) -> std::io::Result<()> {
        self.put_usize(s.len())?;
        self.inner.write_all(s.as_bytes())
    }

    pub fn finish(mut self) -> std::io::Result<W> {
        self.inner.flush()?;
        Ok(self.inner)
    }
}

pub struct BinReader<R: Read> {
    inner: R,
    path: std::path::PathBuf,
}

impl<R: Read> BinReader<R> {
    pub fn new(inner: R, path: &Path) -> Self {
        BinReader {
            inner,
            path: path.to_path_buf(),
        }
    }

    fn corrupt(&self, message: impl Into<String>) -> Error {
        Error::CorruptModel {
            path: self.path.clone(),
            message: message.into(),
        }
    }

    fn fill(&mut self, buf: &mut [u8]) -> Result<()> {
        self.inner
            .read_exact(buf)
            .map_err(|_| self.corrupt("unexpected end of file"))
    }

    pub fn get_u8(&mut self) -> Result<u8> {
        let mut b = [0u8; 1];
        self.fill(&mut b)?;
        Ok(b[0])
    }

    pub fn get_u32(&mut self) -> Result<u32> {
        let mut b = [0u8; 4];
        self.fill(&mut b)?;
        Ok(u32::from_le_bytes(b))
    }

    pub fn get_u64(&mut self) -> Result<u64> {
        let mut b = [0u8; 8];
        self.fill(&mut b)?;
        Ok(u64::from_le_bytes(b))
    }

    pub fn get_usize(&mut self) -> Result<usize> {
        let v = self.get_u64()?;
        usize::try_from(v).map_err(|_| self.corrupt("length out of range"))
    }

    pub fn get_f64(&mut self) -> Result<f64> {
        Ok(f64::from_bits(self.get_u64()?))
    }

    pub fn get_str(&mut self) -> Result<String> {
        let len = self.get_usize()?;
        if len > (1 << 32) {
            return Err(self.corrupt("string length out of range"));
        }
        let mut buf = vec![0u8; len];
        self.fill(&mut buf)?;
        String::from_utf8(buf).map_err(|_| self.corrupt("invalid utf-8 in string"))
    }

    /// Reads and validates the container header, returning the model kind tag.
    pub fn read_header(&mut self) -> Result<u8> {
        let mut magic = [0u8; 4];
        self.fill(&mut magic)?;
        if &magic != MAGIC {
            return Err(self.corrupt("bad magic, not a model file"));
        }
        let version = self.get_u32()?;
        if version > FORMAT_VERSION {
            return Err(Error::UnsupportedVersion {
                path: self.path.clone(),
                found: version,
                supported: FORMAT_VERSION,
            });
        }
        self.get_u8()
    }
}

pub fn write_header<W: Write>(w: &mut BinWriter<W>, kind: u8) -> std::io::Result<()> {
    w.put_bytes(MAGIC)?;
    w.put_u32(FORMAT_VERSION)?;
    w.put_u8(kind)
}
