use rand::{CryptoRng, RngCore};

use super::{select_range, AccessError, TimeRange};
use crate::{
    codec::{Decode, DecodeError, Encode, Reader, Writer},
    crypto::{get_element, put_element, sign, verify_sig, KeyPair, Point, Ristretto, Signature},
    ledger::{Block, BlockId, Chain, PatientBlock, PatientSecrets},
    registry::Registries,
};

/// A researcher's fork of a patient block asking for a time window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequestBlock {
    /// `Ptr(b)`: id of the forked patient block.
    pub parent_ptr: BlockId,
    pub requested_range: TimeRange,
    pub researcher_pk: Point,
    /// `Sig_{y_r}` over the parent block bytes and the requested range.
    pub signature: Signature,
}

/// The patient's answer to a request, signed under the forked block's key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApprovalBlock {
    /// Id of the request block being approved.
    pub parent_ptr: BlockId,
    pub granted_range: TimeRange,
    /// `Sig_{y^b_p}` over the request block bytes and the granted range.
    pub signature: Signature,
}

fn signed_message(parent_bytes: &[u8], range: &TimeRange) -> Vec<u8> {
    let mut out = Writer::new();
    out.var(parent_bytes);
    range.encode(&mut out);
    out.into_bytes()
}

impl RequestBlock {
    pub fn id(&self) -> BlockId {
        BlockId::of(&self.to_bytes())
    }
}

impl ApprovalBlock {
    pub fn id(&self) -> BlockId {
        BlockId::of(&self.to_bytes())
    }
}

pub fn create_request_block<R: RngCore + CryptoRng>(
    rng: &mut R,
    researcher: &KeyPair,
    parent: &PatientBlock,
    requested_range: TimeRange,
) -> RequestBlock {
    let signature = sign(
        rng,
        researcher,
        &signed_message(&parent.to_bytes(), &requested_range),
    );
    RequestBlock {
        parent_ptr: parent.id(),
        requested_range,
        researcher_pk: *researcher.public(),
        signature,
    }
}

/// Miner check for requests: enrolled researcher, parent is a patient block on the
/// chain, and the signature covers that parent and the requested range.
pub fn verify_request(request: &RequestBlock, registries: &Registries, chain: &Chain) -> bool {
    if !registries.researchers.contains(&request.researcher_pk) {
        return false;
    }
    let Some(parent) = chain.patient_block(&request.parent_ptr) else {
        return false;
    };
    verify_sig(
        &request.researcher_pk,
        &signed_message(&parent.to_bytes(), &request.requested_range),
        &request.signature,
    )
}

/// Signs an approval for `request`. Refuses a grant wider than the request, a request
/// forking a block the patient does not own, and a grant that selects none of the
/// patient's blocks.
pub fn create_approval_block<R: RngCore + CryptoRng>(
    rng: &mut R,
    secrets: &PatientSecrets,
    request: &RequestBlock,
    granted_range: TimeRange,
) -> Result<ApprovalBlock, AccessError> {
    let owned = secrets
        .find(&request.parent_ptr)
        .ok_or(AccessError::NotOwner(request.parent_ptr))?;
    if !request.requested_range.contains_range(&granted_range) {
        return Err(AccessError::RangeWidening {
            requested: request.requested_range,
            granted: granted_range,
        });
    }
    if select_range(secrets, &granted_range).is_empty() {
        return Err(AccessError::EmptySelection);
    }
    let signature = sign(
        rng,
        &owned.block_key,
        &signed_message(&request.to_bytes(), &granted_range),
    );
    Ok(ApprovalBlock {
        parent_ptr: request.id(),
        granted_range,
        signature,
    })
}

/// Miner check for approvals: the parent request and its forked patient block are on
/// the chain, the grant stays inside the request, and the signature verifies under the
/// forked block's published patient key.
pub fn verify_approval(approval: &ApprovalBlock, chain: &Chain) -> bool {
    let Some(request) = chain.get(&approval.parent_ptr).and_then(Block::as_request) else {
        return false;
    };
    let Some(forked) = chain.patient_block(&request.parent_ptr) else {
        return false;
    };
    request
        .requested_range
        .contains_range(&approval.granted_range)
        && verify_sig(
            &forked.body.patient_block_key,
            &signed_message(&request.to_bytes(), &approval.granted_range),
            &approval.signature,
        )
}

impl Encode for RequestBlock {
    fn encode(&self, out: &mut Writer) {
        self.parent_ptr.encode(out);
        self.requested_range.encode(out);
        put_element::<Ristretto>(out, &self.researcher_pk);
        self.signature.encode(out);
    }
}

impl Decode for RequestBlock {
    fn decode(input: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(Self {
            parent_ptr: BlockId::decode(input)?,
            requested_range: TimeRange::decode(input)?,
            researcher_pk: get_element::<Ristretto>(input)?,
            signature: Signature::decode(input)?,
        })
    }
}

impl Encode for ApprovalBlock {
    fn encode(&self, out: &mut Writer) {
        self.parent_ptr.encode(out);
        self.granted_range.encode(out);
        self.signature.encode(out);
    }
}

impl Decode for ApprovalBlock {
    fn decode(input: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(Self {
            parent_ptr: BlockId::decode(input)?,
            granted_range: TimeRange::decode(input)?,
            signature: Signature::decode(input)?,
        })
    }
}
