//! Researcher access: condition scans, request and approval blocks, and disclosure
//! packages.
//!
//! A researcher scans public condition codes, forks a matching patient block with a
//! signed [`RequestBlock`] naming a time window, and waits for consensus. The patient
//! finds requests forking their blocks, answers with an [`ApprovalBlock`] signed by that
//! block's key (possibly narrowing the window), and hands the researcher a
//! [`DisclosurePackage`] off-chain. The researcher replays the patient's hash chain over
//! the package and compares the result to the single on-chain commitment it names.

mod blocks;
mod disclosure;

use std::fmt;

use thiserror::Error;

pub use self::{
    blocks::{
        create_approval_block, create_request_block, verify_approval, verify_request,
        ApprovalBlock, RequestBlock,
    },
    disclosure::{
        build_disclosure_package, verify_disclosure, DisclosedBlock, DisclosurePackage,
        PackageItem, VerificationReport,
    },
};
use crate::{
    codec::{Decode, DecodeError, Encode, Reader, Writer},
    ledger::{Block, BlockId, Chain, PatientSecrets, VisitTime},
    registry::{codes_match, ConditionBits},
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AccessError {
    #[error("time range start {start} is after end {end}")]
    InvalidRange { start: VisitTime, end: VisitTime },
    #[error("granted range {granted} is not inside requested range {requested}")]
    RangeWidening {
        requested: TimeRange,
        granted: TimeRange,
    },
    #[error("the forked block {0:?} is not one of the patient's blocks")]
    NotOwner(BlockId),
    #[error("block {0:?} is not in the patient's sequence")]
    UnknownBlock(BlockId),
    #[error("selected blocks are not contiguous in the patient's sequence")]
    NonContiguous,
    #[error("selection contains no blocks")]
    EmptySelection,
}

/// Inclusive window of visit times.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TimeRange {
    pub start: VisitTime,
    pub end: VisitTime,
}

impl TimeRange {
    pub fn new(start: VisitTime, end: VisitTime) -> Result<Self, AccessError> {
        if start > end {
            return Err(AccessError::InvalidRange { start, end });
        }
        Ok(Self { start, end })
    }

    pub fn contains(&self, t: VisitTime) -> bool {
        (self.start..=self.end).contains(&t)
    }

    pub fn contains_range(&self, other: &TimeRange) -> bool {
        self.start <= other.start && other.end <= self.end
    }
}

impl fmt::Display for TimeRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.start, self.end)
    }
}

impl Encode for TimeRange {
    fn encode(&self, out: &mut Writer) {
        out.u64(self.start).u64(self.end);
    }
}

impl Decode for TimeRange {
    fn decode(input: &mut Reader<'_>) -> Result<Self, DecodeError> {
        let (start, end) = (input.u64()?, input.u64()?);
        Self::new(start, end).map_err(|_| DecodeError::Invalid("time range start after end"))
    }
}

/// Ids of the patient blocks whose condition bits contain every bit of `query_mask`.
pub fn scan_blocks(chain: &Chain, query_mask: &ConditionBits) -> Vec<BlockId> {
    chain
        .patient_blocks()
        .filter(|b| codes_match(&b.body.conditions, query_mask))
        .map(|b| b.id())
        .collect()
}

/// Requests on the chain that fork one of the patient's blocks and have no approval yet.
pub fn pending_requests(chain: &Chain, secrets: &PatientSecrets) -> Vec<BlockId> {
    let answered: Vec<BlockId> = chain
        .blocks()
        .filter_map(Block::as_approval)
        .map(|a| a.parent_ptr)
        .collect();
    chain
        .blocks()
        .filter_map(Block::as_request)
        .filter(|r| secrets.find(&r.parent_ptr).is_some())
        .map(|r| r.id())
        .filter(|id| !answered.contains(id))
        .collect()
}

/// The patient's own blocks whose visit times fall in `range`, in sequence order.
pub fn select_range(secrets: &PatientSecrets, range: &TimeRange) -> Vec<BlockId> {
    secrets
        .blocks()
        .iter()
        .filter(|b| range.contains(b.visit_time))
        .map(|b| b.block_id)
        .collect()
}
