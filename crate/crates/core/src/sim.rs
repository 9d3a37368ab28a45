//! In-process participants for demos, benchmarks and tests.
//!
//! [`World`] owns enrolled patients, hospitals and researchers, a chain, an off-chain
//! store and a miner pool, and drives blocks through consensus the way the real parties
//! would. Everything is seeded, so a world replays identically.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use crate::{
    access::{
        create_approval_block, create_request_block, AccessError, ApprovalBlock, RequestBlock,
        TimeRange,
    },
    consensus::{run_consensus, ConsensusResult, MinerPool, TimingModel},
    crypto::KeyPair,
    ledger::{
        create_patient_block, Block, BlockId, Chain, LedgerError, OffChainStore, Party,
        PatientSecrets, VisitRecord, VisitTime,
    },
    registry::{ConditionBits, ConditionCodebook, Registries},
};

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error(transparent)]
    Access(#[from] AccessError),
    #[error("consensus rejected block {id:?} ({approvals}/{miners} approvals)")]
    Rejected {
        id: BlockId,
        approvals: usize,
        miners: usize,
    },
    #[error("block {0:?} is not on the chain or has the wrong kind")]
    MissingBlock(BlockId),
}

pub struct World {
    pub rng: ChaCha20Rng,
    pub registries: Registries,
    pub codebook: ConditionCodebook,
    pub patients: Vec<Party>,
    pub hospitals: Vec<Party>,
    pub researchers: Vec<KeyPair>,
    pub secrets: Vec<PatientSecrets>,
    pub chain: Chain,
    pub store: OffChainStore,
    pub pool: MinerPool,
    rounds: u64,
}

impl World {
    /// Enrolls the requested number of participants and uses an honest miner pool made
    /// of every hospital with the default timing model.
    pub fn new(seed: u64, n_patients: usize, n_hospitals: usize, n_researchers: usize) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut registries = Registries::new();

        let mut enroll = |reg: &mut crate::registry::Registry, n: usize| -> Vec<Party> {
            let identities: Vec<KeyPair> = (0..n).map(|_| KeyPair::generate(&mut rng)).collect();
            let start = reg.len();
            reg.enroll_all(identities.iter().map(|kp| *kp.public()))
                .expect("fresh random keys are unique");
            identities
                .into_iter()
                .enumerate()
                .map(|(i, identity)| Party {
                    identity,
                    index: start + i,
                })
                .collect()
        };
        let patients = enroll(&mut registries.patients, n_patients);
        let hospitals = enroll(&mut registries.hospitals, n_hospitals);
        let researchers = enroll(&mut registries.researchers, n_researchers)
            .into_iter()
            .map(|p| p.identity)
            .collect();

        let pool = MinerPool::from_registry(&registries.hospitals, 0.0, TimingModel::default())
            .expect("zero malicious fraction is valid");
        Self {
            rng,
            registries,
            codebook: ConditionCodebook::default(),
            secrets: vec![PatientSecrets::new(); n_patients],
            patients,
            hospitals,
            researchers,
            chain: Chain::new(),
            store: OffChainStore::new(),
            pool,
            rounds: 0,
        }
    }

    /// Runs consensus on `block` and appends it if approved.
    pub fn submit(&mut self, block: Block) -> ConsensusResult {
        self.rounds += 1;
        let seed = self.rounds;
        let result = run_consensus(&block, &self.pool, &self.registries, &self.chain, seed);
        if result.approved {
            self.chain
                .append(block, result.clone())
                .expect("approved block with fresh id");
        }
        result
    }

    fn submit_or_fail(&mut self, block: Block) -> Result<BlockId, SimError> {
        let id = block.id();
        let result = self.submit(block);
        if !result.approved {
            return Err(SimError::Rejected {
                id,
                approvals: result.approvals,
                miners: result.n_miners(),
            });
        }
        Ok(id)
    }

    /// Patient `patient` and hospital `hospital` record a visit; the block goes through
    /// consensus and, once appended, the patient's secrets advance.
    pub fn record_visit(
        &mut self,
        patient: usize,
        hospital: usize,
        data: &[u8],
        conditions: ConditionBits,
        visit_time: VisitTime,
    ) -> Result<BlockId, SimError> {
        let record = VisitRecord {
            data,
            conditions,
            visit_time,
        };
        let (block, owned) = create_patient_block(
            &mut self.rng,
            &self.patients[patient],
            &self.secrets[patient],
            &self.hospitals[hospital],
            &self.registries,
            &mut self.store,
            &record,
        )?;
        let id = self.submit_or_fail(block.into())?;
        self.secrets[patient].push(owned)?;
        Ok(id)
    }

    /// Condition bits with the given positions set, sized to the codebook.
    pub fn conditions(&self, positions: &[usize]) -> ConditionBits {
        ConditionBits::from_indices(self.codebook.bit_len(), positions.iter().copied())
    }

    pub fn request(
        &mut self,
        researcher: usize,
        parent: BlockId,
        range: TimeRange,
    ) -> Result<RequestBlock, SimError> {
        let parent_block = self
            .chain
            .patient_block(&parent)
            .ok_or(SimError::MissingBlock(parent))?
            .clone();
        let request = create_request_block(
            &mut self.rng,
            &self.researchers[researcher],
            &parent_block,
            range,
        );
        self.submit_or_fail(request.clone().into())?;
        Ok(request)
    }

    pub fn approve(
        &mut self,
        patient: usize,
        request: BlockId,
        granted: TimeRange,
    ) -> Result<ApprovalBlock, SimError> {
        let request = self
            .chain
            .get(&request)
            .and_then(Block::as_request)
            .ok_or(SimError::MissingBlock(request))?
            .clone();
        let approval =
            create_approval_block(&mut self.rng, &self.secrets[patient], &request, granted)?;
        self.submit_or_fail(approval.clone().into())?;
        Ok(approval)
    }
}
