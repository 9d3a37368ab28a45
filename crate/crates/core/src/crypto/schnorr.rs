//! Schnorr proofs of knowledge and Schnorr signatures.

use rand::{CryptoRng, RngCore};

use super::{
    group::{Group, Ristretto},
    hash::{hash, tags, DomainHasher},
    keys::{get_element, get_scalar, put_element, put_scalar, KeyPair},
};
use crate::codec::{Decode, DecodeError, Encode, Reader, Writer};

/// Non-interactive proof of knowledge of the discrete log of a public key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SchnorrProof<G: Group = Ristretto> {
    pub commitment: G::Element,
    pub challenge: G::Scalar,
    pub response: G::Scalar,
}

/// First move of a Schnorr proof, kept by the prover until the challenge is known.
pub(crate) struct SchnorrCommitment<G: Group> {
    nonce: G::Scalar,
    pub(crate) commitment: G::Element,
}

impl<G: Group> SchnorrCommitment<G> {
    pub(crate) fn new<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        let nonce = G::random_scalar(rng);
        Self {
            nonce,
            commitment: G::mul_generator(&nonce),
        }
    }

    pub(crate) fn respond(self, secret: &G::Scalar, challenge: G::Scalar) -> SchnorrProof<G> {
        SchnorrProof {
            commitment: self.commitment,
            challenge,
            response: self.nonce + challenge * *secret,
        }
    }
}

impl<G: Group> SchnorrProof<G> {
    pub const ENCODED_LEN: usize = 96;

    /// Checks `generator^response == commitment * public^challenge` only; the caller is
    /// responsible for the challenge derivation.
    pub(crate) fn equation_holds(&self, public: &G::Element) -> bool {
        G::vartime_double_mul(&-self.challenge, public, &self.response) == self.commitment
    }
}

fn schnorr_challenge<G: Group>(
    context: &[u8],
    public: &G::Element,
    commitment: &G::Element,
) -> G::Scalar {
    let digest = DomainHasher::new(tags::FS_SCHNORR)
        .var(context)
        .fixed(&G::element_to_bytes(public))
        .fixed(&G::element_to_bytes(commitment))
        .finish();
    G::scalar_from_digest(&digest)
}

/// Proves knowledge of `kp.secret()` bound to `context`.
pub fn schnorr_prove<G: Group, R: RngCore + CryptoRng>(
    rng: &mut R,
    kp: &KeyPair<G>,
    context: &[u8],
) -> SchnorrProof<G> {
    let commit = SchnorrCommitment::<G>::new(rng);
    let challenge = schnorr_challenge::<G>(context, kp.public(), &commit.commitment);
    commit.respond(kp.secret(), challenge)
}

pub fn schnorr_verify<G: Group>(
    public: &G::Element,
    proof: &SchnorrProof<G>,
    context: &[u8],
) -> bool {
    proof.challenge == schnorr_challenge::<G>(context, public, &proof.commitment)
        && proof.equation_holds(public)
}

impl<G: Group> Encode for SchnorrProof<G> {
    fn encode(&self, out: &mut Writer) {
        put_element::<G>(out, &self.commitment);
        put_scalar::<G>(out, &self.challenge);
        put_scalar::<G>(out, &self.response);
    }
}

impl<G: Group> Decode for SchnorrProof<G> {
    fn decode(input: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(Self {
            commitment: get_element::<G>(input)?,
            challenge: get_scalar::<G>(input)?,
            response: get_scalar::<G>(input)?,
        })
    }
}

/// Schnorr signature `(R, s)` over `hash(message)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Signature<G: Group = Ristretto> {
    pub commitment: G::Element,
    pub response: G::Scalar,
}

impl<G: Group> Signature<G> {
    pub const ENCODED_LEN: usize = 64;
}

fn signature_challenge<G: Group>(
    commitment: &G::Element,
    public: &G::Element,
    message: &[u8],
) -> G::Scalar {
    let digest = DomainHasher::new(tags::SIG)
        .fixed(&G::element_to_bytes(commitment))
        .fixed(&G::element_to_bytes(public))
        .fixed(hash(message).as_bytes())
        .finish();
    G::scalar_from_digest(&digest)
}

pub fn sign<G: Group, R: RngCore + CryptoRng>(
    rng: &mut R,
    kp: &KeyPair<G>,
    message: &[u8],
) -> Signature<G> {
    let nonce = G::random_scalar(rng);
    let commitment = G::mul_generator(&nonce);
    let challenge = signature_challenge::<G>(&commitment, kp.public(), message);
    Signature {
        commitment,
        response: nonce + challenge * *kp.secret(),
    }
}

pub fn verify_sig<G: Group>(public: &G::Element, message: &[u8], sig: &Signature<G>) -> bool {
    let challenge = signature_challenge::<G>(&sig.commitment, public, message);
    G::vartime_double_mul(&-challenge, public, &sig.response) == sig.commitment
}

impl<G: Group> Encode for Signature<G> {
    fn encode(&self, out: &mut Writer) {
        put_element::<G>(out, &self.commitment);
        put_scalar::<G>(out, &self.response);
    }
}

impl<G: Group> Decode for Signature<G> {
    fn decode(input: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(Self {
            commitment: get_element::<G>(input)?,
            response: get_scalar::<G>(input)?,
        })
    }
}
