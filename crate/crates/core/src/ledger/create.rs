//! Patient block creation: the two-party construction of a new block.

use rand::{CryptoRng, RngCore};

use super::{
    BlockBody, BlockHeader, DataPtr, LedgerError, OffChainStore, OwnedBlock, PatientBlock,
    PatientSecrets, VisitTime,
};
use crate::{
    codec::Encode,
    crypto::{sign, tags, zk_and_prove, Digest, DomainHasher, KeyPair, SymmetricKey},
    registry::{ConditionBits, Registries, Registry, Role},
};

/// `H(b̂) = H(s^b_p || Ptr(D_b) || H(D_b) || H(b̂ - 1))`.
pub fn compute_bhat(
    sym_key: &SymmetricKey,
    ptr: &DataPtr,
    data_digest: &Digest,
    prev_bhat: &Digest,
) -> Digest {
    DomainHasher::new(tags::CHAIN)
        .fixed(sym_key.as_bytes())
        .fixed(&ptr.0)
        .fixed(data_digest.as_bytes())
        .fixed(prev_bhat.as_bytes())
        .finish()
}

/// `H(H(b̂) || n^b)`, the value published in the block body.
pub fn compute_commitment(bhat: &Digest, nonce: &[u8; 32]) -> Digest {
    DomainHasher::new(tags::CHAIN_COMMIT)
        .fixed(bhat.as_bytes())
        .fixed(nonce)
        .finish()
}

/// An enrolled participant: identity key pair plus its registry index.
#[derive(Debug, Clone, Copy)]
pub struct Party {
    pub identity: KeyPair,
    pub index: usize,
}

impl Party {
    fn check_enrolled(&self, registry: &Registry) -> Result<(), LedgerError> {
        match registry.keys().get(self.index) {
            Some(key) if key == self.identity.public() => Ok(()),
            _ => Err(LedgerError::NotEnrolled(registry.role())),
        }
    }
}

/// Data recorded at one visit.
#[derive(Debug, Clone)]
pub struct VisitRecord<'a> {
    pub data: &'a [u8],
    pub conditions: ConditionBits,
    pub visit_time: VisitTime,
}

/// Builds a new patient block ready for consensus.
///
/// Returns the block and the patient's secret record for it. The record should be pushed
/// into [`PatientSecrets`] only once the block is approved, otherwise the private hash
/// chain would skip over a block that never reached the ledger.
pub fn create_patient_block<R: RngCore + CryptoRng>(
    rng: &mut R,
    patient: &Party,
    secrets: &PatientSecrets,
    hospital: &Party,
    registries: &Registries,
    store: &mut OffChainStore,
    record: &VisitRecord<'_>,
) -> Result<(PatientBlock, OwnedBlock), LedgerError> {
    patient.check_enrolled(&registries.patients)?;
    hospital.check_enrolled(&registries.hospitals)?;
    if let Some(last) = secrets.last_visit() {
        if record.visit_time <= last {
            return Err(LedgerError::OutOfOrder {
                last,
                got: record.visit_time,
            });
        }
    }

    let patient_block_key = KeyPair::generate(rng);
    let hospital_block_key = KeyPair::generate(rng);

    let patient_proof = zk_and_prove(
        rng,
        registries.patients.keys(),
        patient.index,
        patient.identity.secret(),
        &patient_block_key,
    )?;
    let hospital_proof = zk_and_prove(
        rng,
        registries.hospitals.keys(),
        hospital.index,
        hospital.identity.secret(),
        &hospital_block_key,
    )?;

    let sym_key = SymmetricKey::generate(rng);
    let (ptr, data_digest) = store.store(rng, record.data, &sym_key)?;
    let bhat = compute_bhat(&sym_key, &ptr, &data_digest, &secrets.head());
    let mut nonce = [0u8; 32];
    rng.fill_bytes(&mut nonce);

    let body = BlockBody {
        conditions: record.conditions.clone(),
        commitment: compute_commitment(&bhat, &nonce),
        patient_block_key: *patient_block_key.public(),
        hospital_block_key: *hospital_block_key.public(),
    };
    let body_bytes = body.to_bytes();
    let header = BlockHeader {
        patient_proof,
        hospital_proof,
        patient_sig: sign(rng, &patient_block_key, &body_bytes),
        hospital_sig: sign(rng, &hospital_block_key, &body_bytes),
    };
    let block = PatientBlock { header, body };

    let owned = OwnedBlock {
        block_id: block.id(),
        block_key: patient_block_key,
        sym_key,
        nonce,
        ptr,
        data_digest,
        bhat,
        visit_time: record.visit_time,
    };
    Ok((block, owned))
}

/// Role-checked lookup used by callers that hold a registry and a key.
pub fn party_for(registries: &Registries, role: Role, identity: KeyPair) -> Option<Party> {
    registries
        .get(role)
        .position(identity.public())
        .map(|index| Party { identity, index })
}
