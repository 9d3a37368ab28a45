//! Block verification and the miner-pool voting simulation.
//!
//! Miners are the enrolled hospitals. Honest miners verify the block and vote with the
//! verdict; malicious miners reject immediately without verifying. A block is approved
//! once at least half of the pool (`ceil(n / 2)`) approves. Time runs on a virtual
//! clock: the slowest miner's verification plus an all-to-all signature exchange costing
//! `message_cost` per ordered miner pair.

use std::time::Instant;

use rand::{seq::index::sample, Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use crate::{
    access::{verify_approval, verify_request},
    codec::{Decode, DecodeError, Encode, Reader, Writer},
    crypto::{verify_sig, zk_and_verify},
    ledger::{Block, Chain, PatientBlock},
    registry::{Registries, Registry},
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConsensusError {
    #[error("malicious fraction {0} outside [0, 1]")]
    InvalidFraction(f64),
    #[error("{malicious} malicious miners exceed pool of {miners}")]
    TooManyMalicious { miners: usize, malicious: usize },
    #[error("invalid timing model: {0}")]
    InvalidTiming(&'static str),
}

/// Checks the header proofs and body signatures of a patient block.
pub fn verify_patient_block(block: &PatientBlock, registries: &Registries) -> bool {
    let body = &block.body;
    let header = &block.header;
    if !zk_and_verify(
        registries.patients.keys(),
        &body.patient_block_key,
        &header.patient_proof,
    ) || !zk_and_verify(
        registries.hospitals.keys(),
        &body.hospital_block_key,
        &header.hospital_proof,
    ) {
        return false;
    }
    let body_bytes = body.to_bytes();
    verify_sig(&body.patient_block_key, &body_bytes, &header.patient_sig)
        && verify_sig(&body.hospital_block_key, &body_bytes, &header.hospital_sig)
}

/// The check every honest miner runs before voting.
pub fn verify_block(block: &Block, registries: &Registries, chain: &Chain) -> bool {
    match block {
        Block::Patient(b) => verify_patient_block(b, registries),
        Block::Request(b) => verify_request(b, registries, chain),
        Block::Approval(b) => verify_approval(b, chain),
    }
}

/// Minimum approvals for a pool of `n` miners.
pub fn approval_threshold(n: usize) -> usize {
    n.div_ceil(2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VerifyCost {
    /// Fixed virtual seconds per verification.
    Constant(f64),
    /// Wall-clock time of one real `verify_block` call.
    Measured,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingModel {
    pub verify_cost: VerifyCost,
    /// Each honest miner's cost is scaled by a uniform factor in `[1 - jitter, 1 + jitter]`.
    pub jitter: f64,
    /// Virtual seconds per ordered miner pair in the signature exchange.
    pub message_cost: f64,
}

impl TimingModel {
    pub fn noiseless(verify_seconds: f64, message_cost: f64) -> Self {
        Self {
            verify_cost: VerifyCost::Constant(verify_seconds),
            jitter: 0.0,
            message_cost,
        }
    }

    fn validate(&self) -> Result<(), ConsensusError> {
        if let VerifyCost::Constant(c) = self.verify_cost {
            if !(c.is_finite() && c >= 0.0) {
                return Err(ConsensusError::InvalidTiming(
                    "verification cost must be >= 0",
                ));
            }
        }
        if !(0.0..=1.0).contains(&self.jitter) {
            return Err(ConsensusError::InvalidTiming("jitter must lie in [0, 1]"));
        }
        if !(self.message_cost.is_finite() && self.message_cost >= 0.0) {
            return Err(ConsensusError::InvalidTiming("message cost must be >= 0"));
        }
        Ok(())
    }
}

impl Default for TimingModel {
    fn default() -> Self {
        Self {
            verify_cost: VerifyCost::Constant(0.005),
            jitter: 0.1,
            message_cost: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinerPool {
    n_miners: usize,
    n_malicious: usize,
    pub timing: TimingModel,
}

impl MinerPool {
    /// Pool with `floor(malicious_fraction * n_miners)` malicious miners.
    pub fn new(
        n_miners: usize,
        malicious_fraction: f64,
        timing: TimingModel,
    ) -> Result<Self, ConsensusError> {
        if !(0.0..=1.0).contains(&malicious_fraction) {
            return Err(ConsensusError::InvalidFraction(malicious_fraction));
        }
        // Guard against products like 0.29 * 100 = 28.999999999999996.
        let n_malicious = (malicious_fraction * n_miners as f64 + 1e-9).floor() as usize;
        Self::with_malicious_count(n_miners, n_malicious.min(n_miners), timing)
    }

    pub fn with_malicious_count(
        n_miners: usize,
        n_malicious: usize,
        timing: TimingModel,
    ) -> Result<Self, ConsensusError> {
        if n_malicious > n_miners {
            return Err(ConsensusError::TooManyMalicious {
                miners: n_miners,
                malicious: n_malicious,
            });
        }
        timing.validate()?;
        Ok(Self {
            n_miners,
            n_malicious,
            timing,
        })
    }

    /// Pool whose miners are the enrolled hospitals.
    pub fn from_registry(
        hospitals: &Registry,
        malicious_fraction: f64,
        timing: TimingModel,
    ) -> Result<Self, ConsensusError> {
        Self::new(hospitals.len(), malicious_fraction, timing)
    }

    pub fn n_miners(&self) -> usize {
        self.n_miners
    }

    pub fn n_malicious(&self) -> usize {
        self.n_malicious
    }

    pub fn malicious_fraction(&self) -> f64 {
        match self.n_miners {
            0 => 0.0,
            n => self.n_malicious as f64 / n as f64,
        }
    }

    /// Which miners are malicious under `seed`.
    pub fn assignment(&self, seed: u64) -> Vec<bool> {
        self.assign(&mut ChaCha20Rng::seed_from_u64(seed))
    }

    fn assign(&self, rng: &mut ChaCha20Rng) -> Vec<bool> {
        let mut malicious = vec![false; self.n_miners];
        for i in sample(rng, self.n_miners, self.n_malicious) {
            malicious[i] = true;
        }
        malicious
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vote {
    pub miner: u32,
    pub approve: bool,
    pub malicious: bool,
    /// Virtual seconds this miner spent verifying.
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusResult {
    pub approved: bool,
    pub approvals: usize,
    pub rejections: usize,
    /// Virtual seconds until every vote has propagated.
    pub simulated_time: f64,
    pub votes: Vec<Vote>,
}

impl ConsensusResult {
    pub fn n_miners(&self) -> usize {
        self.approvals + self.rejections
    }
}

/// Runs one voting round on `block`.
///
/// `verify_block` is a pure function of the block, registries and chain, so its verdict
/// is computed once and shared by every honest miner.
pub fn run_consensus(
    block: &Block,
    pool: &MinerPool,
    registries: &Registries,
    chain: &Chain,
    seed: u64,
) -> ConsensusResult {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let malicious = pool.assign(&mut rng);

    let started = Instant::now();
    let valid = verify_block(block, registries, chain);
    let base_cost = match pool.timing.verify_cost {
        VerifyCost::Constant(c) => c,
        VerifyCost::Measured => started.elapsed().as_secs_f64(),
    };

    let jitter = pool.timing.jitter;
    let votes: Vec<Vote> = malicious
        .iter()
        .enumerate()
        .map(|(i, &is_malicious)| {
            let scale = 1.0 + jitter * (2.0 * rng.gen::<f64>() - 1.0);
            Vote {
                miner: i as u32,
                approve: !is_malicious && valid,
                malicious: is_malicious,
                seconds: if is_malicious { 0.0 } else { base_cost * scale },
            }
        })
        .collect();

    let approvals = votes.iter().filter(|v| v.approve).count();
    let n = pool.n_miners;
    let slowest = votes.iter().map(|v| v.seconds).fold(0.0, f64::max);
    let propagation = pool.timing.message_cost * (n * n.saturating_sub(1)) as f64;
    ConsensusResult {
        approved: n > 0 && approvals >= approval_threshold(n),
        approvals,
        rejections: n - approvals,
        simulated_time: slowest + propagation,
        votes,
    }
}

impl Encode for ConsensusResult {
    fn encode(&self, out: &mut Writer) {
        out.u8(self.approved as u8)
            .len(self.approvals)
            .len(self.rejections)
            .u64(self.simulated_time.to_bits())
            .len(self.votes.len());
        for vote in &self.votes {
            out.u32(vote.miner)
                .u8(vote.approve as u8 | (vote.malicious as u8) << 1)
                .u64(vote.seconds.to_bits());
        }
    }
}

impl Decode for ConsensusResult {
    fn decode(input: &mut Reader<'_>) -> Result<Self, DecodeError> {
        let approved = match input.u8()? {
            0 => false,
            1 => true,
            other => return Err(DecodeError::InvalidTag(other)),
        };
        let approvals = input.u32()? as usize;
        let rejections = input.u32()? as usize;
        let simulated_time = f64::from_bits(input.u64()?);
        let len = input.len(13)?;
        let votes = (0..len)
            .map(|_| {
                let miner = input.u32()?;
                let flags = input.u8()?;
                if flags > 0b11 {
                    return Err(DecodeError::InvalidTag(flags));
                }
                Ok(Vote {
                    miner,
                    approve: flags & 1 != 0,
                    malicious: flags & 2 != 0,
                    seconds: f64::from_bits(input.u64()?),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let n = approvals + rejections;
        if votes.len() != n || votes.iter().filter(|v| v.approve).count() != approvals {
            return Err(DecodeError::Invalid("vote log disagrees with tally"));
        }
        if approved != (n > 0 && approvals >= approval_threshold(n)) {
            return Err(DecodeError::Invalid(
                "approval flag disagrees with threshold",
            ));
        }
        Ok(Self {
            approved,
            approvals,
            rejections,
            simulated_time,
            votes,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_is_half_rounded_up() {
        assert_eq!(approval_threshold(1), 1);
        assert_eq!(approval_threshold(2), 1);
        assert_eq!(approval_threshold(3), 2);
        assert_eq!(approval_threshold(4), 2);
        assert_eq!(approval_threshold(5), 3);
    }

    #[test]
    fn malicious_count_floors_the_fraction() {
        let t = TimingModel::default();
        assert_eq!(MinerPool::new(10, 0.29, t).unwrap().n_malicious(), 2);
        assert_eq!(MinerPool::new(100, 0.29, t).unwrap().n_malicious(), 29);
        assert_eq!(MinerPool::new(3, 0.5, t).unwrap().n_malicious(), 1);
        assert_eq!(MinerPool::new(7, 0.0, t).unwrap().n_malicious(), 0);
        assert!(MinerPool::new(7, 1.2, t).is_err());
        assert!(MinerPool::with_malicious_count(3, 4, t).is_err());
    }

    #[test]
    fn assignment_is_seeded_and_exact() {
        let pool = MinerPool::new(50, 0.3, TimingModel::default()).unwrap();
        let a = pool.assignment(7);
        assert_eq!(a, pool.assignment(7));
        assert_eq!(a.iter().filter(|&&m| m).count(), 15);
        assert_ne!(a, pool.assignment(8));
    }

    #[test]
    fn invalid_timing_is_rejected() {
        let t = TimingModel {
            jitter: 2.0,
            ..TimingModel::default()
        };
        assert!(MinerPool::new(4, 0.0, t).is_err());
        assert!(MinerPool::new(4, 0.0, TimingModel::noiseless(-1.0, 0.0)).is_err());
    }
}
