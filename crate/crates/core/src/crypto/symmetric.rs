//! Authenticated symmetric encryption (ChaCha20-Poly1305) for off-chain records.

use std::fmt;

use chacha20poly1305::{
    aead::{Aead, KeyInit},
    ChaCha20Poly1305, Key, Nonce,
};
use rand::{CryptoRng, RngCore};

use super::CryptoError;
use crate::codec::{Decode, DecodeError, Encode, Reader, Writer};

pub const NONCE_LEN: usize = 12;
pub const TAG_LEN: usize = 16;

/// 256-bit symmetric key.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct SymmetricKey([u8; 32]);

impl SymmetricKey {
    pub fn generate<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        let mut key = [0; 32];
        rng.fill_bytes(&mut key);
        Self(key)
    }

    pub const fn from_bytes(bytes: [u8; 32]) -> Self {
        Self(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }
}

impl fmt::Debug for SymmetricKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SymmetricKey(..)")
    }
}

impl Encode for SymmetricKey {
    fn encode(&self, out: &mut Writer) {
        out.fixed(&self.0);
    }
}

impl Decode for SymmetricKey {
    fn decode(input: &mut Reader<'_>) -> Result<Self, DecodeError> {
        input.array().map(Self)
    }
}

/// `nonce (12 bytes) || ciphertext || tag (16 bytes)`.
#[derive(Clone, PartialEq, Eq)]
pub struct Ciphertext(Vec<u8>);

impl Ciphertext {
    pub fn from_bytes(bytes: Vec<u8>) -> Self {
        Self(bytes)
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn as_mut_bytes(&mut self) -> &mut [u8] {
        &mut self.0
    }
}

impl fmt::Debug for Ciphertext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ciphertext({} bytes)", self.0.len())
    }
}

pub fn sym_encrypt<R: RngCore + CryptoRng>(
    rng: &mut R,
    key: &SymmetricKey,
    plaintext: &[u8],
) -> Ciphertext {
    let mut nonce = [0u8; NONCE_LEN];
    rng.fill_bytes(&mut nonce);
    let body = ChaCha20Poly1305::new(Key::from_slice(&key.0))
        .encrypt(Nonce::from_slice(&nonce), plaintext)
        .expect("plaintext within ChaCha20-Poly1305 limits");
    let mut out = Vec::with_capacity(NONCE_LEN + body.len());
    out.extend_from_slice(&nonce);
    out.extend_from_slice(&body);
    Ciphertext(out)
}

pub fn sym_decrypt(key: &SymmetricKey, ciphertext: &Ciphertext) -> Result<Vec<u8>, CryptoError> {
    if ciphertext.0.len() < NONCE_LEN + TAG_LEN {
        return Err(CryptoError::Decryption);
    }
    let (nonce, body) = ciphertext.0.split_at(NONCE_LEN);
    ChaCha20Poly1305::new(Key::from_slice(&key.0))
        .decrypt(Nonce::from_slice(nonce), body)
        .map_err(|_| CryptoError::Decryption)
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    use super::*;

    #[test]
    fn round_trip_and_fresh_nonces() {
        let mut rng = ChaCha20Rng::seed_from_u64(41);
        let key = SymmetricKey::generate(&mut rng);
        let a = sym_encrypt(&mut rng, &key, b"visit notes");
        let b = sym_encrypt(&mut rng, &key, b"visit notes");
        assert_ne!(a, b);
        assert_eq!(sym_decrypt(&key, &a).unwrap(), b"visit notes");
        assert_eq!(a.as_bytes().len(), NONCE_LEN + 11 + TAG_LEN);
    }

    #[test]
    fn tampering_at_any_position_fails() {
        let mut rng = ChaCha20Rng::seed_from_u64(42);
        let key = SymmetricKey::generate(&mut rng);
        let ct = sym_encrypt(&mut rng, &key, b"blood panel 2024-03");
        for pos in 0..ct.as_bytes().len() {
            let mut bad = ct.clone();
            bad.as_mut_bytes()[pos] ^= 0x01;
            assert_eq!(
                sym_decrypt(&key, &bad),
                Err(CryptoError::Decryption),
                "position {pos}"
            );
        }
        let short = Ciphertext::from_bytes(ct.as_bytes()[..NONCE_LEN + TAG_LEN - 1].to_vec());
        assert_eq!(sym_decrypt(&key, &short), Err(CryptoError::Decryption));
    }

    #[test]
    fn wrong_key_fails() {
        let mut rng = ChaCha20Rng::seed_from_u64(43);
        let key = SymmetricKey::generate(&mut rng);
        let ct = sym_encrypt(&mut rng, &key, b"x");
        let other = SymmetricKey::generate(&mut rng);
        assert_eq!(sym_decrypt(&other, &ct), Err(CryptoError::Decryption));
    }
}
