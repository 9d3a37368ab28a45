//! Conjunction of registry membership and possession of a fresh block key.
//!
//! Both sub-proofs answer one joint Fiat-Shamir challenge derived from the joint context
//! (registry digest and block public key) and every commitment of both sub-proofs. A
//! proof therefore cannot be moved to another block key or another registry.

use rand::{CryptoRng, RngCore};

use super::{
    group::{Group, Ristretto, ENCODED_LEN},
    hash::{tags, DomainHasher},
    or_proof::{keys_digest, OrCommitment, OrProof},
    schnorr::{SchnorrCommitment, SchnorrProof},
    CryptoError, KeyPair,
};
use crate::codec::{Decode, DecodeError, Encode, Reader, Writer};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AndProof<G: Group = Ristretto> {
    pub membership: OrProof<G>,
    pub possession: SchnorrProof<G>,
    /// `keys_digest(registry) || block_pk`.
    pub joint_context: Vec<u8>,
}

impl<G: Group> AndProof<G> {
    /// Encoded size for a registry of `ring_len` keys: `96 * ring_len + 200`.
    pub const fn encoded_len(ring_len: usize) -> usize {
        OrProof::<Ristretto>::encoded_len(ring_len) + 3 * ENCODED_LEN + 4 + 2 * ENCODED_LEN
    }
}

pub fn joint_context<G: Group>(keys: &[G::Element], block_pk: &G::Element) -> Vec<u8> {
    let mut ctx = Vec::with_capacity(2 * ENCODED_LEN);
    ctx.extend_from_slice(keys_digest::<G>(keys).as_bytes());
    ctx.extend_from_slice(&G::element_to_bytes(block_pk));
    ctx
}

fn joint_challenge<'a, G: Group>(
    joint_context: &[u8],
    membership: impl Iterator<Item = &'a G::Element>,
    possession: &G::Element,
) -> G::Scalar {
    let mut hasher = DomainHasher::new(tags::FS_AND).var(joint_context);
    for commitment in membership {
        hasher.update(&G::element_to_bytes(commitment));
    }
    hasher.update(&G::element_to_bytes(possession));
    G::scalar_from_digest(&hasher.finish())
}

pub fn zk_and_prove<G: Group, R: RngCore + CryptoRng>(
    rng: &mut R,
    registry_keys: &[G::Element],
    my_index: usize,
    identity_secret: &G::Scalar,
    block_kp: &KeyPair<G>,
) -> Result<AndProof<G>, CryptoError> {
    let membership = OrCommitment::<G>::new(rng, registry_keys, my_index, identity_secret)?;
    let possession = SchnorrCommitment::<G>::new(rng);
    let joint_context = joint_context::<G>(registry_keys, block_kp.public());
    let challenge = joint_challenge::<G>(
        &joint_context,
        membership.commitments(),
        &possession.commitment,
    );
    Ok(AndProof {
        membership: membership.respond(identity_secret, challenge),
        possession: possession.respond(block_kp.secret(), challenge),
        joint_context,
    })
}

pub fn zk_and_verify<G: Group>(
    registry_keys: &[G::Element],
    block_pk: &G::Element,
    proof: &AndProof<G>,
) -> bool {
    if proof.membership.branches.len() != registry_keys.len()
        || proof.joint_context != joint_context::<G>(registry_keys, block_pk)
    {
        return false;
    }
    let challenge = joint_challenge::<G>(
        &proof.joint_context,
        proof.membership.commitments(),
        &proof.possession.commitment,
    );
    proof.possession.challenge == challenge
        && proof.possession.equation_holds(block_pk)
        && proof.membership.holds_for(registry_keys, &challenge)
}

impl<G: Group> Encode for AndProof<G> {
    fn encode(&self, out: &mut Writer) {
        self.membership.encode(out);
        self.possession.encode(out);
        out.var(&self.joint_context);
    }
}

impl<G: Group> Decode for AndProof<G> {
    fn decode(input: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(Self {
            membership: OrProof::decode(input)?,
            possession: SchnorrProof::decode(input)?,
            joint_context: input.var()?.to_vec(),
        })
    }
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    use super::*;

    type Kp = KeyPair<Ristretto>;

    fn registry(
        rng: &mut ChaCha20Rng,
        len: usize,
    ) -> (Vec<Kp>, Vec<<Ristretto as Group>::Element>) {
        let kps: Vec<Kp> = (0..len).map(|_| Kp::generate(rng)).collect();
        let keys = kps.iter().map(|kp| *kp.public()).collect();
        (kps, keys)
    }

    #[test]
    fn honest_proof_verifies_and_has_documented_size() {
        let mut rng = ChaCha20Rng::seed_from_u64(31);
        let (ids, keys) = registry(&mut rng, 8);
        let block = Kp::generate(&mut rng);
        let proof = zk_and_prove(&mut rng, &keys, 3, ids[3].secret(), &block).unwrap();
        assert!(zk_and_verify(&keys, block.public(), &proof));

        let bytes = proof.to_bytes();
        assert_eq!(bytes.len(), 96 * 8 + 200);
        assert_eq!(bytes.len(), AndProof::<Ristretto>::encoded_len(8));
        assert_eq!(AndProof::<Ristretto>::from_bytes(&bytes).unwrap(), proof);
    }

    #[test]
    fn substituted_block_key_is_rejected() {
        let mut rng = ChaCha20Rng::seed_from_u64(32);
        let (ids, keys) = registry(&mut rng, 4);
        for _ in 0..100 {
            let block = Kp::generate(&mut rng);
            let idx = rng.gen_range(0..4);
            let proof = zk_and_prove(&mut rng, &keys, idx, ids[idx].secret(), &block).unwrap();
            let swapped = Kp::generate(&mut rng);
            assert!(!zk_and_verify(&keys, swapped.public(), &proof));

            // Rewriting the stored context to the new key breaks the joint challenge.
            let mut rebound = proof.clone();
            rebound.joint_context = joint_context::<Ristretto>(&keys, swapped.public());
            assert!(!zk_and_verify(&keys, swapped.public(), &rebound));
        }
    }

    #[test]
    fn proof_is_bound_to_its_registry() {
        let mut rng = ChaCha20Rng::seed_from_u64(33);
        let (patients, patient_keys) = registry(&mut rng, 5);
        let (_, hospital_keys) = registry(&mut rng, 5);
        let block = Kp::generate(&mut rng);
        let proof = zk_and_prove(&mut rng, &patient_keys, 1, patients[1].secret(), &block).unwrap();
        assert!(!zk_and_verify(&hospital_keys, block.public(), &proof));
    }

    #[test]
    fn wrong_block_secret_cannot_be_proven() {
        let mut rng = ChaCha20Rng::seed_from_u64(34);
        let (ids, keys) = registry(&mut rng, 3);
        let block = Kp::generate(&mut rng);
        let mut proof = zk_and_prove(&mut rng, &keys, 0, ids[0].secret(), &block).unwrap();
        proof.possession.response = proof.possession.response + Ristretto::scalar_one();
        assert!(!zk_and_verify(&keys, block.public(), &proof));
    }
}
