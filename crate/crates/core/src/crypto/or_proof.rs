//! One-out-of-many (ring membership) proofs by sigma OR-composition.
//!
//! The prover simulates every branch except its own: for a simulated branch it picks the
//! challenge and response first and solves for the commitment. Its real branch gets the
//! Fiat-Shamir binding challenge minus the sum of the simulated ones, so the challenges
//! always add up and only one branch could have been answered honestly. The transcript
//! holds one `(commitment, challenge, response)` record per ring key in ring order, so
//! all transcripts over the same ring have the same layout whatever the witness index.

use rand::{CryptoRng, RngCore};

use super::{
    group::{Group, Ristretto, ENCODED_LEN},
    hash::{hash, tags, Digest, DomainHasher},
    keys::{get_element, get_scalar, put_element, put_scalar},
    CryptoError,
};
use crate::codec::{Decode, DecodeError, Encode, Reader, Writer};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrBranch<G: Group = Ristretto> {
    pub commitment: G::Element,
    pub challenge: G::Scalar,
    pub response: G::Scalar,
}

impl<G: Group> OrBranch<G> {
    pub const ENCODED_LEN: usize = 3 * ENCODED_LEN;

    fn holds_for(&self, public: &G::Element) -> bool {
        G::vartime_double_mul(&-self.challenge, public, &self.response) == self.commitment
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrProof<G: Group = Ristretto> {
    pub branches: Vec<OrBranch<G>>,
    pub binding_challenge: G::Scalar,
}

impl<G: Group> OrProof<G> {
    /// Encoded size for a ring of `ring_len` keys: `96 * ring_len + 36`.
    pub const fn encoded_len(ring_len: usize) -> usize {
        4 + 3 * ENCODED_LEN * ring_len + ENCODED_LEN
    }

    /// Branch equations plus the additive challenge split against `binding`.
    pub(crate) fn holds_for(&self, keys: &[G::Element], binding: &G::Scalar) -> bool {
        if self.branches.is_empty() || self.branches.len() != keys.len() {
            return false;
        }
        let sum: G::Scalar = self.branches.iter().map(|b| b.challenge).sum();
        sum == *binding
            && self.binding_challenge == *binding
            && self
                .branches
                .iter()
                .zip(keys)
                .all(|(branch, key)| branch.holds_for(key))
    }

    pub(crate) fn commitments(&self) -> impl Iterator<Item = &G::Element> {
        self.branches.iter().map(|b| &b.commitment)
    }
}

/// Digest of the canonical key-list encoding (`u32` count, then 32 bytes per key).
pub fn keys_digest<G: Group>(keys: &[G::Element]) -> Digest {
    let mut out = Writer::new();
    out.len(keys.len());
    for key in keys {
        put_element::<G>(&mut out, key);
    }
    hash(&out.into_bytes())
}

/// Prover state after the commitment move.
pub(crate) struct OrCommitment<G: Group> {
    branches: Vec<OrBranch<G>>,
    index: usize,
    nonce: G::Scalar,
}

impl<G: Group> OrCommitment<G> {
    /// Validates the witness and produces commitments for every branch.
    pub(crate) fn new<R: RngCore + CryptoRng>(
        rng: &mut R,
        keys: &[G::Element],
        index: usize,
        secret: &G::Scalar,
    ) -> Result<Self, CryptoError> {
        let Some(own_key) = keys.get(index) else {
            return Err(CryptoError::IndexOutOfRange {
                index,
                len: keys.len(),
            });
        };
        if G::mul_generator(secret) != *own_key {
            return Err(CryptoError::WitnessMismatch);
        }

        let nonce = G::random_scalar(rng);
        let branches = keys
            .iter()
            .enumerate()
            .map(|(i, key)| {
                if i == index {
                    OrBranch {
                        commitment: G::mul_generator(&nonce),
                        challenge: G::scalar_zero(),
                        response: G::scalar_zero(),
                    }
                } else {
                    let challenge = G::random_scalar(rng);
                    let response = G::random_scalar(rng);
                    OrBranch {
                        commitment: G::vartime_double_mul(&-challenge, key, &response),
                        challenge,
                        response,
                    }
                }
            })
            .collect();
        Ok(Self {
            branches,
            index,
            nonce,
        })
    }

    pub(crate) fn commitments(&self) -> impl Iterator<Item = &G::Element> {
        self.branches.iter().map(|b| &b.commitment)
    }

    pub(crate) fn respond(mut self, secret: &G::Scalar, binding: G::Scalar) -> OrProof<G> {
        let simulated: G::Scalar = self
            .branches
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != self.index)
            .map(|(_, b)| b.challenge)
            .sum();
        let challenge = binding - simulated;
        let own = &mut self.branches[self.index];
        own.challenge = challenge;
        own.response = self.nonce + challenge * *secret;
        OrProof {
            branches: self.branches,
            binding_challenge: binding,
        }
    }
}

fn or_challenge<'a, G: Group>(
    context: &[u8],
    keys: &[G::Element],
    commitments: impl Iterator<Item = &'a G::Element>,
) -> G::Scalar {
    let mut hasher = DomainHasher::new(tags::FS_OR)
        .var(context)
        .fixed(keys_digest::<G>(keys).as_bytes());
    for commitment in commitments {
        hasher.update(&G::element_to_bytes(commitment));
    }
    G::scalar_from_digest(&hasher.finish())
}

/// Proves knowledge of the secret key for `keys[my_index]` without revealing the index.
pub fn zk_or_prove<G: Group, R: RngCore + CryptoRng>(
    rng: &mut R,
    keys: &[G::Element],
    my_index: usize,
    my_secret: &G::Scalar,
    context: &[u8],
) -> Result<OrProof<G>, CryptoError> {
    let commit = OrCommitment::<G>::new(rng, keys, my_index, my_secret)?;
    let binding = or_challenge::<G>(context, keys, commit.commitments());
    Ok(commit.respond(my_secret, binding))
}

pub fn zk_or_verify<G: Group>(keys: &[G::Element], proof: &OrProof<G>, context: &[u8]) -> bool {
    if proof.branches.len() != keys.len() {
        return false;
    }
    let binding = or_challenge::<G>(context, keys, proof.commitments());
    proof.holds_for(keys, &binding)
}

impl<G: Group> Encode for OrProof<G> {
    fn encode(&self, out: &mut Writer) {
        out.len(self.branches.len());
        for branch in &self.branches {
            put_element::<G>(out, &branch.commitment);
            put_scalar::<G>(out, &branch.challenge);
            put_scalar::<G>(out, &branch.response);
        }
        put_scalar::<G>(out, &self.binding_challenge);
    }
}

impl<G: Group> Decode for OrProof<G> {
    fn decode(input: &mut Reader<'_>) -> Result<Self, DecodeError> {
        let len = input.len(OrBranch::<G>::ENCODED_LEN)?;
        let branches = (0..len)
            .map(|_| {
                Ok(OrBranch {
                    commitment: get_element::<G>(input)?,
                    challenge: get_scalar::<G>(input)?,
                    response: get_scalar::<G>(input)?,
                })
            })
            .collect::<Result<_, DecodeError>>()?;
        Ok(Self {
            branches,
            binding_challenge: get_scalar::<G>(input)?,
        })
    }
}
