//! Group primitives, sigma protocols, signatures, symmetric encryption and hashing.

mod and_proof;
pub mod group;
mod hash;
mod keys;
mod or_proof;
mod schnorr;
mod symmetric;

use thiserror::Error;

pub use self::{
    and_proof::{joint_context, zk_and_prove, zk_and_verify, AndProof},
    group::{Group, GroupParams, Ristretto},
    hash::{hash, tags, Digest, DomainHasher},
    keys::{keygen, KeyPair},
    or_proof::{keys_digest, zk_or_prove, zk_or_verify, OrBranch, OrProof},
    schnorr::{schnorr_prove, schnorr_verify, sign, verify_sig, SchnorrProof, Signature},
    symmetric::{sym_decrypt, sym_encrypt, Ciphertext, SymmetricKey},
};

pub(crate) use self::keys::{get_element, put_element};

/// Group element of the reference group.
pub type Point = <Ristretto as Group>::Element;
/// Scalar of the reference group.
pub type Scalar = <Ristretto as Group>::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CryptoError {
    #[error("witness index {index} out of range for ring of {len} keys")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("secret does not match the public key at the witness index")]
    WitnessMismatch,
    #[error("authenticated decryption failed")]
    Decryption,
}
