use std::{collections::HashMap, fmt};

use rand::{CryptoRng, RngCore};

use super::LedgerError;
use crate::{
    codec::{Decode, DecodeError, Encode, Reader, Writer},
    crypto::{hash, sym_decrypt, sym_encrypt, Ciphertext, CryptoError, Digest, SymmetricKey},
};

/// Random 32-byte locator of an off-chain record. Carries no storage locality.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DataPtr(pub [u8; 32]);

impl DataPtr {
    pub fn random<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        let mut bytes = [0; 32];
        rng.fill_bytes(&mut bytes);
        Self(bytes)
    }
}

impl fmt::Debug for DataPtr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "DataPtr({})",
            Digest::from_bytes(self.0).to_hex().get(..12).unwrap_or("")
        )
    }
}

impl Encode for DataPtr {
    fn encode(&self, out: &mut Writer) {
        out.fixed(&self.0);
    }
}

impl Decode for DataPtr {
    fn decode(input: &mut Reader<'_>) -> Result<Self, DecodeError> {
        input.array().map(Self)
    }
}

/// Off-chain database of encrypted records. Never holds plaintext.
#[derive(Debug, Clone, Default)]
pub struct OffChainStore {
    records: HashMap<DataPtr, Ciphertext>,
}

impl OffChainStore {
    const MAGIC: [u8; 4] = *b"AEGS";
    const VERSION: u16 = 1;
    const MAX_POINTER_ATTEMPTS: usize = 8;

    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Encrypts `data` under `key` at a fresh random pointer; returns the pointer and
    /// `hash(data)`.
    pub fn store<R: RngCore + CryptoRng>(
        &mut self,
        rng: &mut R,
        data: &[u8],
        key: &SymmetricKey,
    ) -> Result<(DataPtr, Digest), LedgerError> {
        let ptr = (0..Self::MAX_POINTER_ATTEMPTS)
            .map(|_| DataPtr::random(rng))
            .find(|ptr| !self.records.contains_key(ptr))
            .ok_or(LedgerError::PointerCollision)?;
        self.records.insert(ptr, sym_encrypt(rng, key, data));
        Ok((ptr, hash(data)))
    }

    pub fn get(&self, ptr: &DataPtr) -> Option<&Ciphertext> {
        self.records.get(ptr)
    }

    /// Mutable access for fault-injection in tests and tooling.
    pub fn get_mut(&mut self, ptr: &DataPtr) -> Option<&mut Ciphertext> {
        self.records.get_mut(ptr)
    }

    pub fn fetch(&self, ptr: &DataPtr, key: &SymmetricKey) -> Result<Vec<u8>, LedgerError> {
        let ct = self.get(ptr).ok_or(LedgerError::MissingRecord(*ptr))?;
        sym_decrypt(key, ct).map_err(|e: CryptoError| LedgerError::Crypto(e))
    }
}

/// Shorthand for [`OffChainStore::store`].
pub fn store_offchain<R: RngCore + CryptoRng>(
    rng: &mut R,
    store: &mut OffChainStore,
    data: &[u8],
    key: &SymmetricKey,
) -> Result<(DataPtr, Digest), LedgerError> {
    store.store(rng, data, key)
}

/// Records sorted by pointer so the file is deterministic.
impl Encode for OffChainStore {
    fn encode(&self, out: &mut Writer) {
        out.header(Self::MAGIC, Self::VERSION)
            .len(self.records.len());
        let mut ptrs: Vec<_> = self.records.keys().collect();
        ptrs.sort();
        for ptr in ptrs {
            ptr.encode(out);
            out.var(self.records[ptr].as_bytes());
        }
    }
}

impl Decode for OffChainStore {
    fn decode(input: &mut Reader<'_>) -> Result<Self, DecodeError> {
        input.header(Self::MAGIC, Self::VERSION)?;
        let len = input.len(36)?;
        let mut records = HashMap::with_capacity(len);
        for _ in 0..len {
            let ptr = DataPtr::decode(input)?;
            let ct = Ciphertext::from_bytes(input.var()?.to_vec());
            if records.insert(ptr, ct).is_some() {
                return Err(DecodeError::Invalid("duplicate data pointer"));
            }
        }
        Ok(Self { records })
    }
}
