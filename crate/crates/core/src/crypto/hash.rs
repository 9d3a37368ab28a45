//! The canonical hash (SHA-256) and domain-separated hashing.

use std::fmt;

use sha2::{Digest as _, Sha256};

use crate::codec::{Decode, DecodeError, Encode, Reader, Writer};

/// Domain-separation tags. Each hash use gets its own tag so that a value produced for
/// one purpose can never be replayed as a transcript for another.
pub mod tags {
    pub const FS_SCHNORR: &[u8] = b"FS-SCHNORR";
    pub const FS_OR: &[u8] = b"FS-OR";
    pub const FS_AND: &[u8] = b"FS-AND";
    pub const SIG: &[u8] = b"SIG";
    pub const CHAIN: &[u8] = b"CHAIN";
    pub const CHAIN_COMMIT: &[u8] = b"CHAIN-COMMIT";
}

/// A 32-byte SHA-256 output.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Digest([u8; 32]);

impl Digest {
    pub const LEN: usize = 32;

    /// All-zero digest, used as the predecessor of a patient's first block.
    pub const ZERO: Self = Self([0; 32]);

    pub const fn from_bytes(bytes: [u8; 32]) -> Self {
        Self(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl fmt::Debug for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Digest({})", self.to_hex())
    }
}

impl fmt::Display for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl AsRef<[u8]> for Digest {
    fn as_ref(&self) -> &[u8] {
        &self.0
    }
}

impl Encode for Digest {
    fn encode(&self, out: &mut Writer) {
        out.fixed(&self.0);
    }
}

impl Decode for Digest {
    fn decode(input: &mut Reader<'_>) -> Result<Self, DecodeError> {
        input.array().map(Self)
    }
}

/// Plain SHA-256 of `data`.
pub fn hash(data: &[u8]) -> Digest {
    Digest(Sha256::digest(data).into())
}

/// Incremental SHA-256 prefixed by a length-tagged domain label.
///
/// The label is written as a single length byte followed by the label bytes, so no
/// label can be a prefix-collision of another.
#[derive(Clone)]
pub struct DomainHasher {
    inner: Sha256,
}

impl DomainHasher {
    pub fn new(tag: &[u8]) -> Self {
        let tag_len = u8::try_from(tag.len()).expect("domain tag longer than 255 bytes");
        let mut inner = Sha256::new();
        inner.update([tag_len]);
        inner.update(tag);
        Self { inner }
    }

    /// Appends fixed-width bytes.
    pub fn fixed(mut self, bytes: &[u8]) -> Self {
        self.inner.update(bytes);
        self
    }

    /// Appends a big-endian `u32` length followed by the bytes.
    pub fn var(mut self, bytes: &[u8]) -> Self {
        let len = u32::try_from(bytes.len()).expect("hashed field exceeds u32 range");
        self.inner.update(len.to_be_bytes());
        self.inner.update(bytes);
        self
    }

    pub fn update(&mut self, bytes: &[u8]) {
        self.inner.update(bytes);
    }

    pub fn finish(self) -> Digest {
        Digest(self.inner.finalize().into())
    }
}
