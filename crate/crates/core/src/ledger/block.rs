use std::fmt;

use crate::{
    access::{ApprovalBlock, RequestBlock},
    codec::{Decode, DecodeError, Encode, Reader, Writer},
    crypto::{get_element, hash, put_element, AndProof, Digest, Point, Ristretto, Signature},
    registry::ConditionBits,
};

/// Content address of a block: the hash of its canonical encoding.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockId(pub Digest);

impl BlockId {
    pub fn of(bytes: &[u8]) -> Self {
        Self(hash(bytes))
    }

    pub fn as_bytes(&self) -> &[u8; 32] {
        self.0.as_bytes()
    }

    pub fn short(&self) -> String {
        self.0.to_hex()[..12].to_owned()
    }
}

impl fmt::Debug for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BlockId({})", self.short())
    }
}

impl fmt::Display for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl Encode for BlockId {
    fn encode(&self, out: &mut Writer) {
        self.0.encode(out);
    }
}

impl Decode for BlockId {
    fn decode(input: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Digest::decode(input).map(Self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockHeader {
    pub patient_proof: AndProof,
    pub hospital_proof: AndProof,
    pub patient_sig: Signature,
    pub hospital_sig: Signature,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockBody {
    pub conditions: ConditionBits,
    /// `H(H(b̂) || n^b)` over the patient's private hash chain.
    pub commitment: Digest,
    pub patient_block_key: Point,
    pub hospital_block_key: Point,
}

/// A patient health-record block. Holds no identity key and no timestamp.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatientBlock {
    pub header: BlockHeader,
    pub body: BlockBody,
}

impl PatientBlock {
    pub fn id(&self) -> BlockId {
        BlockId::of(&self.to_bytes())
    }
}

impl Encode for BlockHeader {
    fn encode(&self, out: &mut Writer) {
        self.patient_proof.encode(out);
        self.hospital_proof.encode(out);
        self.patient_sig.encode(out);
        self.hospital_sig.encode(out);
    }
}

impl Decode for BlockHeader {
    fn decode(input: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(Self {
            patient_proof: AndProof::decode(input)?,
            hospital_proof: AndProof::decode(input)?,
            patient_sig: Signature::decode(input)?,
            hospital_sig: Signature::decode(input)?,
        })
    }
}

impl Encode for BlockBody {
    fn encode(&self, out: &mut Writer) {
        self.conditions.encode(out);
        self.commitment.encode(out);
        put_element::<Ristretto>(out, &self.patient_block_key);
        put_element::<Ristretto>(out, &self.hospital_block_key);
    }
}

impl Decode for BlockBody {
    fn decode(input: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(Self {
            conditions: ConditionBits::decode(input)?,
            commitment: Digest::decode(input)?,
            patient_block_key: get_element::<Ristretto>(input)?,
            hospital_block_key: get_element::<Ristretto>(input)?,
        })
    }
}

impl Encode for PatientBlock {
    fn encode(&self, out: &mut Writer) {
        self.header.encode(out);
        self.body.encode(out);
    }
}

impl Decode for PatientBlock {
    fn decode(input: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(Self {
            header: BlockHeader::decode(input)?,
            body: BlockBody::decode(input)?,
        })
    }
}

/// Any record kind that can sit on the chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Block {
    Patient(PatientBlock),
    Request(RequestBlock),
    Approval(ApprovalBlock),
}

impl Block {
    const PATIENT: u8 = 0;
    const REQUEST: u8 = 1;
    const APPROVAL: u8 = 2;

    pub fn id(&self) -> BlockId {
        match self {
            Self::Patient(b) => b.id(),
            Self::Request(b) => b.id(),
            Self::Approval(b) => b.id(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Patient(_) => "patient",
            Self::Request(_) => "request",
            Self::Approval(_) => "approval",
        }
    }

    pub fn as_patient(&self) -> Option<&PatientBlock> {
        match self {
            Self::Patient(b) => Some(b),
            _ => None,
        }
    }

    pub fn as_request(&self) -> Option<&RequestBlock> {
        match self {
            Self::Request(b) => Some(b),
            _ => None,
        }
    }

    pub fn as_approval(&self) -> Option<&ApprovalBlock> {
        match self {
            Self::Approval(b) => Some(b),
            _ => None,
        }
    }
}

impl From<PatientBlock> for Block {
    fn from(b: PatientBlock) -> Self {
        Self::Patient(b)
    }
}

impl From<RequestBlock> for Block {
    fn from(b: RequestBlock) -> Self {
        Self::Request(b)
    }
}

impl From<ApprovalBlock> for Block {
    fn from(b: ApprovalBlock) -> Self {
        Self::Approval(b)
    }
}

/// Tag byte, then the inner block's canonical bytes.
impl Encode for Block {
    fn encode(&self, out: &mut Writer) {
        match self {
            Self::Patient(b) => {
                out.u8(Self::PATIENT);
                b.encode(out);
            }
            Self::Request(b) => {
                out.u8(Self::REQUEST);
                b.encode(out);
            }
            Self::Approval(b) => {
                out.u8(Self::APPROVAL);
                b.encode(out);
            }
        }
    }
}

impl Decode for Block {
    fn decode(input: &mut Reader<'_>) -> Result<Self, DecodeError> {
        match input.u8()? {
            Self::PATIENT => PatientBlock::decode(input).map(Self::Patient),
            Self::REQUEST => RequestBlock::decode(input).map(Self::Request),
            Self::APPROVAL => ApprovalBlock::decode(input).map(Self::Approval),
            other => Err(DecodeError::InvalidTag(other)),
        }
    }
}
