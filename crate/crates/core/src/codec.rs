//! Canonical binary encoding.
//!
//! Every on-chain and off-chain structure is a concatenation of fixed-width fields and
//! length-prefixed variable fields. Lengths and integers are big-endian; group elements
//! and scalars are always 32 bytes. File formats start with a 4-byte magic and a
//! big-endian `u16` version.

use std::{fs, io, path::Path};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecodeError {
    #[error("unexpected end of input (needed {needed} more bytes)")]
    UnexpectedEnd { needed: usize },
    #[error("{0} trailing bytes after value")]
    TrailingBytes(usize),
    #[error("invalid group element encoding")]
    InvalidElement,
    #[error("non-canonical scalar encoding")]
    InvalidScalar,
    #[error("bad magic: expected {expected:?}")]
    BadMagic { expected: [u8; 4] },
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u16),
    #[error("invalid tag {0:#04x}")]
    InvalidTag(u8),
    #[error("invalid value: {0}")]
    Invalid(&'static str),
}

/// Types with a canonical byte encoding.
pub trait Encode {
    fn encode(&self, out: &mut Writer);

    fn to_bytes(&self) -> Vec<u8> {
        let mut out = Writer::new();
        self.encode(&mut out);
        out.into_bytes()
    }
}

pub trait Decode: Sized {
    fn decode(input: &mut Reader<'_>) -> Result<Self, DecodeError>;

    /// Decodes a value that must span the whole input.
    fn from_bytes(bytes: &[u8]) -> Result<Self, DecodeError> {
        let mut input = Reader::new(bytes);
        let value = Self::decode(&mut input)?;
        input.finish()?;
        Ok(value)
    }
}

#[derive(Debug, Default)]
pub struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn u8(&mut self, value: u8) -> &mut Self {
        self.buf.push(value);
        self
    }

    pub fn u16(&mut self, value: u16) -> &mut Self {
        self.buf.extend_from_slice(&value.to_be_bytes());
        self
    }

    pub fn u32(&mut self, value: u32) -> &mut Self {
        self.buf.extend_from_slice(&value.to_be_bytes());
        self
    }

    pub fn u64(&mut self, value: u64) -> &mut Self {
        self.buf.extend_from_slice(&value.to_be_bytes());
        self
    }

    /// Writes a collection length. Panics past `u32::MAX`, which no structure here reaches.
    pub fn len(&mut self, len: usize) -> &mut Self {
        let len = u32::try_from(len).expect("length exceeds u32 range");
        self.u32(len)
    }

    pub fn fixed(&mut self, bytes: &[u8]) -> &mut Self {
        self.buf.extend_from_slice(bytes);
        self
    }

    /// `u32` length followed by the bytes.
    pub fn var(&mut self, bytes: &[u8]) -> &mut Self {
        self.len(bytes.len());
        self.fixed(bytes)
    }

    pub fn header(&mut self, magic: [u8; 4], version: u16) -> &mut Self {
        self.fixed(&magic);
        self.u16(version)
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.buf
    }
}

#[derive(Debug)]
pub struct Reader<'a> {
    rest: &'a [u8],
}

impl<'a> Reader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Self { rest: bytes }
    }

    pub fn remaining(&self) -> usize {
        self.rest.len()
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8], DecodeError> {
        if self.rest.len() < n {
            return Err(DecodeError::UnexpectedEnd {
                needed: n - self.rest.len(),
            });
        }
        let (head, tail) = self.rest.split_at(n);
        self.rest = tail;
        Ok(head)
    }

    pub fn array<const N: usize>(&mut self) -> Result<[u8; N], DecodeError> {
        let mut out = [0; N];
        out.copy_from_slice(self.take(N)?);
        Ok(out)
    }

    pub fn u8(&mut self) -> Result<u8, DecodeError> {
        Ok(self.array::<1>()?[0])
    }

    pub fn u16(&mut self) -> Result<u16, DecodeError> {
        self.array().map(u16::from_be_bytes)
    }

    pub fn u32(&mut self) -> Result<u32, DecodeError> {
        self.array().map(u32::from_be_bytes)
    }

    pub fn u64(&mut self) -> Result<u64, DecodeError> {
        self.array().map(u64::from_be_bytes)
    }

    /// Reads a collection length, rejecting counts that cannot fit in the remaining input
    /// given the minimum encoded size of one item.
    pub fn len(&mut self, min_item_size: usize) -> Result<usize, DecodeError> {
        let len = self.u32()? as usize;
        let needed = len.saturating_mul(min_item_size.max(1));
        if min_item_size > 0 && needed > self.rest.len() {
            return Err(DecodeError::UnexpectedEnd {
                needed: needed - self.rest.len(),
            });
        }
        Ok(len)
    }

    pub fn var(&mut self) -> Result<&'a [u8], DecodeError> {
        let len = self.u32()? as usize;
        self.take(len)
    }

    pub fn header(&mut self, magic: [u8; 4], version: u16) -> Result<(), DecodeError> {
        if self.array::<4>()? != magic {
            return Err(DecodeError::BadMagic { expected: magic });
        }
        match self.u16()? {
            v if v == version => Ok(()),
            v => Err(DecodeError::UnsupportedVersion(v)),
        }
    }

    pub fn finish(self) -> Result<(), DecodeError> {
        match self.rest.len() {
            0 => Ok(()),
            n => Err(DecodeError::TrailingBytes(n)),
        }
    }
}

#[derive(Debug, Error)]
pub enum FileError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("malformed file: {0}")]
    Decode(#[from] DecodeError),
}

pub fn write_file<T: Encode>(path: impl AsRef<Path>, value: &T) -> Result<(), FileError> {
    fs::write(path, value.to_bytes())?;
    Ok(())
}

pub fn read_file<T: Decode>(path: impl AsRef<Path>) -> Result<T, FileError> {
    let bytes = fs::read(path)?;
    Ok(T::from_bytes(&bytes)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lengths_are_big_endian() {
        let mut w = Writer::new();
        w.var(b"abc").u16(0x0102);
        assert_eq!(w.into_bytes(), [0, 0, 0, 3, b'a', b'b', b'c', 1, 2]);
    }

    #[test]
    fn reader_reports_truncation_and_trailing_bytes() {
        let mut r = Reader::new(&[0, 0, 0, 5, 1, 2]);
        assert_eq!(r.var(), Err(DecodeError::UnexpectedEnd { needed: 3 }));

        let mut r = Reader::new(&[7, 8]);
        assert_eq!(r.u8(), Ok(7));
        assert_eq!(r.finish(), Err(DecodeError::TrailingBytes(1)));
    }

    #[test]
    fn oversized_counts_fail_before_allocation() {
        let mut r = Reader::new(&[0xff, 0xff, 0xff, 0xff, 0]);
        assert!(matches!(r.len(32), Err(DecodeError::UnexpectedEnd { .. })));
    }

    #[test]
    fn header_checks_magic_then_version() {
        let mut w = Writer::new();
        w.header(*b"TEST", 3);
        let bytes = w.into_bytes();
        assert_eq!(Reader::new(&bytes).header(*b"TEST", 3), Ok(()));
        assert_eq!(
            Reader::new(&bytes).header(*b"TEST", 1),
            Err(DecodeError::UnsupportedVersion(3))
        );
        assert!(matches!(
            Reader::new(&bytes).header(*b"NOPE", 3),
            Err(DecodeError::BadMagic { .. })
        ));
    }
}
