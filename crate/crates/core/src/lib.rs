//! Anonymous, patient-controlled sharing of encrypted health-record references on a
//! permissioned ledger.
//!
//! Patients and hospitals jointly create blocks whose headers carry ring-membership
//! proofs against public registries, so miners can check that a block comes from *some*
//! enrolled patient and *some* enrolled hospital without learning which. Block bodies
//! carry public condition codes and a chained-hash commitment over the patient's
//! off-chain encrypted records. Researchers fork blocks to request a time range; the
//! patient approves on-chain and hands over a disclosure package that lets the
//! researcher decrypt and verify exactly the granted range.
//!
//! Modules:
//!
//! - [`crypto`]: prime-order group, Schnorr proofs and signatures, OR / AND proof
//!   composition, authenticated encryption, domain-separated hashing.
//! - [`registry`]: enrollment registries and the condition-code codebook.
//! - [`ledger`]: block structures, the chain, the off-chain store and block creation.
//! - [`consensus`]: block verification and the miner-pool voting simulation.
//! - [`access`]: researcher requests, patient approvals and disclosure packages.
//! - [`sim`]: seeded in-process participants driving the full protocol.
//! - [`codec`]: the canonical length-prefixed binary encoding shared by all of the above.

pub mod access;
pub mod codec;
pub mod consensus;
pub mod crypto;
pub mod ledger;
pub mod registry;
pub mod sim;

pub use crate::{
    access::{
        build_disclosure_package, create_approval_block, create_request_block, pending_requests,
        scan_blocks, verify_disclosure, AccessError, ApprovalBlock, DisclosurePackage,
        RequestBlock, TimeRange, VerificationReport,
    },
    codec::{Decode, DecodeError, Encode},
    consensus::{run_consensus, verify_block, ConsensusResult, MinerPool, TimingModel},
    crypto::{Digest, KeyPair},
    ledger::{
        create_patient_block, Block, BlockId, Chain, LedgerError, OffChainStore, Party,
        PatientBlock, PatientSecrets, VisitRecord,
    },
    registry::{ConditionBits, ConditionCodebook, Registries, Registry, Role},
};
