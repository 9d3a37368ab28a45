use super::{BlockId, DataPtr, LedgerError};
use crate::crypto::{Digest, KeyPair, SymmetricKey};

/// Seconds since the Unix epoch. Lives only in patient secrets and encrypted records.
pub type VisitTime = u64;

/// Everything the patient keeps off-chain about one of their blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OwnedBlock {
    pub block_id: BlockId,
    /// `(x^b_p, y^b_p)`; the secret half signs approvals for requests forking this block.
    pub block_key: KeyPair,
    pub sym_key: SymmetricKey,
    pub nonce: [u8; 32],
    pub ptr: DataPtr,
    pub data_digest: Digest,
    /// `H(b̂)` for this block.
    pub bhat: Digest,
    pub visit_time: VisitTime,
}

/// The patient's private, strictly time-ordered sequence of their own blocks.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PatientSecrets {
    blocks: Vec<OwnedBlock>,
}

impl PatientSecrets {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn blocks(&self) -> &[OwnedBlock] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// `H(b̂)` of the latest block, or the all-zero genesis value.
    pub fn head(&self) -> Digest {
        self.blocks.last().map_or(Digest::ZERO, |b| b.bhat)
    }

    pub fn last_visit(&self) -> Option<VisitTime> {
        self.blocks.last().map(|b| b.visit_time)
    }

    pub fn position(&self, id: &BlockId) -> Option<usize> {
        self.blocks.iter().position(|b| b.block_id == *id)
    }

    pub fn find(&self, id: &BlockId) -> Option<&OwnedBlock> {
        self.position(id).map(|i| &self.blocks[i])
    }

    /// `H(b̂ - 1)` for the block at `position`.
    pub fn predecessor_bhat(&self, position: usize) -> Digest {
        match position {
            0 => Digest::ZERO,
            i => self.blocks[i - 1].bhat,
        }
    }

    /// Records a block once consensus has accepted it. The block must extend the current
    /// head and be strictly later than the previous visit.
    pub fn push(&mut self, block: OwnedBlock) -> Result<(), LedgerError> {
        if let Some(last) = self.last_visit() {
            if block.visit_time <= last {
                return Err(LedgerError::OutOfOrder {
                    last,
                    got: block.visit_time,
                });
            }
        }
        if super::compute_bhat(&block.sym_key, &block.ptr, &block.data_digest, &self.head())
            != block.bhat
        {
            return Err(LedgerError::ChainMismatch);
        }
        self.blocks.push(block);
        Ok(())
    }
}
