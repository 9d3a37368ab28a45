//! Block structures, the append-only chain, the off-chain store, and block creation.

mod block;
mod chain;
mod create;
mod secrets;
mod store;

use thiserror::Error;

pub use self::{
    block::{Block, BlockBody, BlockHeader, BlockId, PatientBlock},
    chain::{Chain, ChainEntry},
    create::{
        compute_bhat, compute_commitment, create_patient_block, party_for, Party, VisitRecord,
    },
    secrets::{OwnedBlock, PatientSecrets, VisitTime},
    store::{store_offchain, DataPtr, OffChainStore},
};
use crate::{crypto::CryptoError, registry::Role};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LedgerError {
    #[error("{0} key is not enrolled at the claimed registry index")]
    NotEnrolled(Role),
    #[error(transparent)]
    Crypto(#[from] CryptoError),
    #[error("visit time {got} is not after the previous visit {last}")]
    OutOfOrder { last: VisitTime, got: VisitTime },
    #[error("block record does not extend the patient's hash chain")]
    ChainMismatch,
    #[error("consensus did not approve the block")]
    Unapproved,
    #[error("block {0:?} is already on the chain")]
    DuplicateBlock(BlockId),
    #[error("could not allocate a fresh data pointer")]
    PointerCollision,
    #[error("no off-chain record at {0:?}")]
    MissingRecord(DataPtr),
}
