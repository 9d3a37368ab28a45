//! Desk-scale experiments over the aegisblock protocol.
//!
//! Three benchmarks, each returning typed rows that serialize to CSV with a fixed header:
//! block creation against registry size, consensus time against miner count, and the
//! researcher request/approval round against the malicious fraction. Every measured
//! block is also verified, and a failed verification is an error.
//!
//! Per-point values are the arithmetic mean over `folds` repetitions, which the header
//! records with a `_mean` suffix.

use std::{
    io::{self, Write},
    path::PathBuf,
    time::Instant,
};

use aegisblock::{
    access::{
        create_approval_block, create_request_block, verify_approval, verify_request, TimeRange,
    },
    codec::Encode,
    consensus::{
        approval_threshold, run_consensus, verify_patient_block, ConsensusError, MinerPool,
        TimingModel,
    },
    ledger::{create_patient_block, Block, VisitRecord},
    sim::{SimError, World},
};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Consensus(#[from] ConsensusError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub patients: Vec<usize>,
    pub hospitals: Vec<usize>,
    pub miners: Vec<usize>,
    pub malicious_fractions: Vec<f64>,
    /// Miner pool size for the researcher-access sweep.
    pub access_miners: usize,
    pub folds: usize,
    pub seed: u64,
    pub timing: TimingModel,
    /// `None` writes to standard output.
    pub output: Option<PathBuf>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            patients: vec![1000],
            hospitals: vec![1000, 2000, 4000],
            miners: vec![100, 200, 400, 800],
            malicious_fractions: vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5],
            access_miners: 100,
            folds: 4,
            seed: 7,
            timing: TimingModel::default(),
            output: None,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        if self.folds == 0 {
            return Err(BenchError::Config("folds must be at least 1".into()));
        }
        if let Some(f) = self
            .malicious_fractions
            .iter()
            .find(|f| !(0.0..=0.5).contains(*f))
        {
            return Err(BenchError::Config(format!(
                "malicious fraction {f} outside [0, 0.5]"
            )));
        }
        if self.patients.iter().chain(&self.hospitals).any(|&n| n == 0) {
            return Err(BenchError::Config("registry sizes must be positive".into()));
        }
        if self.miners.contains(&0) || self.access_miners == 0 {
            return Err(BenchError::Config("miner counts must be positive".into()));
        }
        MinerPool::new(1, 0.0, self.timing)?;
        Ok(())
    }
}

pub trait CsvRow {
    const HEADER: &'static [&'static str];
    fn fields(&self) -> Vec<String>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct CreationRow {
    pub patients: usize,
    pub hospitals: usize,
    pub creation_seconds: f64,
    /// Serialized size of both membership proofs in the header.
    pub transcript_bytes: usize,
}

impl CsvRow for CreationRow {
    const HEADER: &'static [&'static str] = &[
        "patients",
        "hospitals",
        "creation_seconds_mean",
        "transcript_bytes",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            self.patients.to_string(),
            self.hospitals.to_string(),
            format!("{:.9}", self.creation_seconds),
            self.transcript_bytes.to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusRow {
    pub miners: usize,
    pub malicious_pct: f64,
    pub simulated_seconds: f64,
}

impl CsvRow for ConsensusRow {
    const HEADER: &'static [&'static str] = &["miners", "malicious_pct", "simulated_seconds_mean"];

    fn fields(&self) -> Vec<String> {
        vec![
            self.miners.to_string(),
            format!("{:.1}", self.malicious_pct),
            format!("{:.9}", self.simulated_seconds),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    CreateRequest,
    VerifyRequest,
    CreateApproval,
    VerifyApproval,
}

impl Phase {
    pub const ALL: [Phase; 4] = [
        Phase::CreateRequest,
        Phase::VerifyRequest,
        Phase::CreateApproval,
        Phase::VerifyApproval,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Phase::CreateRequest => "create_request",
            Phase::VerifyRequest => "verify_request",
            Phase::CreateApproval => "create_approval",
            Phase::VerifyApproval => "verify_approval",
        }
    }

    /// Creation phases are wall-clock; verification phases are simulated consensus time.
    pub fn is_creation(self) -> bool {
        matches!(self, Phase::CreateRequest | Phase::CreateApproval)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccessRow {
    pub malicious_pct: f64,
    pub phase: Phase,
    pub seconds: f64,
}

impl CsvRow for AccessRow {
    const HEADER: &'static [&'static str] = &["malicious_pct", "phase", "seconds_mean"];

    fn fields(&self) -> Vec<String> {
        vec![
            format!("{:.1}", self.malicious_pct),
            self.phase.name().to_string(),
            format!("{:.9}", self.seconds),
        ]
    }
}

pub fn write_csv<R: CsvRow, W: Write>(rows: &[R], out: W) -> Result<(), BenchError> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(R::HEADER)?;
    for row in rows {
        writer.write_record(row.fields())?;
    }
    writer.flush()?;
    Ok(())
}

/// Writes to `config.output`, or standard output when unset.
pub fn emit<R: CsvRow>(rows: &[R], config: &BenchConfig) -> Result<(), BenchError> {
    match &config.output {
        Some(path) => write_csv(rows, std::fs::File::create(path)?),
        None => write_csv(rows, io::stdout().lock()),
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn point_seed(seed: u64, a: usize, b: usize) -> u64 {
    seed ^ (a as u64).rotate_left(20) ^ (b as u64).rotate_left(40)
}

/// Mean `create_patient_block` time for one registry size, after one untimed warm-up.
pub fn measure_block_creation(
    patients: usize,
    hospitals: usize,
    folds: usize,
    seed: u64,
) -> Result<CreationRow, BenchError> {
    let mut world = World::new(seed, patients, hospitals, 0);
    let patient = patients / 2;
    let hospital = hospitals / 2;
    let conditions = world.conditions(&[0, 130]);

    let mut seconds = Vec::with_capacity(folds);
    let mut transcript_bytes = 0;
    for fold in 0..=folds {
        let data = format!("visit {fold}");
        let record = VisitRecord {
            data: data.as_bytes(),
            conditions: conditions.clone(),
            visit_time: 1,
        };
        let started = Instant::now();
        let (block, _) = create_patient_block(
            &mut world.rng,
            &world.patients[patient],
            &world.secrets[patient],
            &world.hospitals[hospital],
            &world.registries,
            &mut world.store,
            &record,
        )
        .map_err(SimError::from)?;
        let elapsed = started.elapsed().as_secs_f64();

        if !verify_patient_block(&block, &world.registries) {
            return Err(BenchError::Verification(format!(
                "patient block at p={patients}, m={hospitals}"
            )));
        }
        transcript_bytes = block.header.patient_proof.to_bytes().len()
            + block.header.hospital_proof.to_bytes().len();
        if fold > 0 {
            seconds.push(elapsed);
        }
    }
    Ok(CreationRow {
        patients,
        hospitals,
        creation_seconds: mean(&seconds),
        transcript_bytes,
    })
}

/// Every (patients, hospitals) pair of the configured grid.
pub fn bench_block_creation(config: &BenchConfig) -> Result<Vec<CreationRow>, BenchError> {
    config.validate()?;
    let mut rows = Vec::new();
    for &p in &config.patients {
        for &m in &config.hospitals {
            rows.push(measure_block_creation(
                p,
                m,
                config.folds,
                point_seed(config.seed, p, m),
            )?);
        }
    }
    Ok(rows)
}

/// Mean simulated consensus time over the miner × fraction grid.
///
/// Each miner count gets its own world whose hospital registry is the miner pool. A
/// valid block must be approved at every fraction up to one half.
pub fn bench_consensus(config: &BenchConfig) -> Result<Vec<ConsensusRow>, BenchError> {
    config.validate()?;
    let mut rows = Vec::new();
    for &n in &config.miners {
        let mut world = World::new(point_seed(config.seed, n, 0), 1, n, 0);
        let record = VisitRecord {
            data: b"consensus benchmark",
            conditions: world.conditions(&[1]),
            visit_time: 1,
        };
        let (block, _) = create_patient_block(
            &mut world.rng,
            &world.patients[0],
            &world.secrets[0],
            &world.hospitals[0],
            &world.registries,
            &mut world.store,
            &record,
        )
        .map_err(SimError::from)?;
        let block = Block::from(block);

        for &fraction in &config.malicious_fractions {
            let pool = MinerPool::new(n, fraction, config.timing)?;
            let mut times = Vec::with_capacity(config.folds);
            for fold in 0..config.folds {
                let seed = point_seed(config.seed, n, fold) ^ fraction.to_bits();
                let result = run_consensus(&block, &pool, &world.registries, &world.chain, seed);
                if !result.approved {
                    return Err(BenchError::Verification(format!(
                        "valid block rejected with {}/{} approvals (threshold {})",
                        result.approvals,
                        n,
                        approval_threshold(n)
                    )));
                }
                times.push(result.simulated_time);
            }
            rows.push(ConsensusRow {
                miners: n,
                malicious_pct: 100.0 * fraction,
                simulated_seconds: mean(&times),
            });
        }
    }
    Ok(rows)
}

/// Request and approval round trips against a pool of `access_miners` at each fraction.
pub fn bench_researcher_access(config: &BenchConfig) -> Result<Vec<AccessRow>, BenchError> {
    config.validate()?;
    let mut rows = Vec::new();
    for &fraction in &config.malicious_fractions {
        let seed = config.seed ^ fraction.to_bits();
        let mut world = World::new(seed, 1, config.access_miners, 1);
        for t in 1..=4 {
            world.record_visit(
                0,
                t as usize % config.access_miners,
                b"history",
                world.conditions(&[2]),
                t,
            )?;
        }
        world.pool = MinerPool::new(config.access_miners, fraction, config.timing)?;
        let parent_id = world.secrets[0].blocks()[3].block_id;
        let parent = world
            .chain
            .patient_block(&parent_id)
            .expect("recorded visit is on the chain")
            .clone();
        let requested = TimeRange::new(1, 4).expect("ordered bounds");
        let granted = TimeRange::new(2, 4).expect("ordered bounds");

        let mut samples = [const { Vec::new() }; 4];
        for _ in 0..config.folds {
            let started = Instant::now();
            let request =
                create_request_block(&mut world.rng, &world.researchers[0], &parent, requested);
            samples[0].push(started.elapsed().as_secs_f64());
            if !verify_request(&request, &world.registries, &world.chain) {
                return Err(BenchError::Verification("request block".into()));
            }
            let result = world.submit(request.clone().into());
            if !result.approved {
                return Err(BenchError::Verification(
                    "request rejected by consensus".into(),
                ));
            }
            samples[1].push(result.simulated_time);

            let started = Instant::now();
            let approval =
                create_approval_block(&mut world.rng, &world.secrets[0], &request, granted)
                    .map_err(SimError::from)?;
            samples[2].push(started.elapsed().as_secs_f64());
            let result = world.submit(approval.clone().into());
            if !result.approved || !verify_approval(&approval, &world.chain) {
                return Err(BenchError::Verification("approval block".into()));
            }
            samples[3].push(result.simulated_time);
        }
        for (phase, values) in Phase::ALL.into_iter().zip(&samples) {
            rows.push(AccessRow {
                malicious_pct: 100.0 * fraction,
                phase,
                seconds: mean(values),
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> BenchConfig {
        BenchConfig {
            patients: vec![8],
            hospitals: vec![4, 8],
            miners: vec![4, 10],
            malicious_fractions: vec![0.0, 0.5],
            access_miners: 6,
            folds: 2,
            ..BenchConfig::default()
        }
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = [
            BenchConfig {
                folds: 0,
                ..small()
            },
            BenchConfig {
                malicious_fractions: vec![0.6],
                ..small()
            },
            BenchConfig {
                malicious_fractions: vec![-0.1],
                ..small()
            },
            BenchConfig {
                hospitals: vec![0],
                ..small()
            },
            BenchConfig {
                access_miners: 0,
                ..small()
            },
        ];
        for config in bad {
            assert!(
                matches!(config.validate(), Err(BenchError::Config(_))),
                "{config:?}"
            );
        }
        let mut jittery = small();
        jittery.timing.jitter = 2.0;
        assert!(matches!(jittery.validate(), Err(BenchError::Consensus(_))));
    }

    #[test]
    fn transcript_grows_by_one_branch_per_hospital() {
        let rows = bench_block_creation(&small()).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[1].transcript_bytes - rows[0].transcript_bytes, 4 * 96);
    }

    #[test]
    fn simulated_columns_replay_under_one_seed() {
        let config = small();
        let a = bench_consensus(&config).unwrap();
        let b = bench_consensus(&config).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 4);

        let x = bench_researcher_access(&config).unwrap();
        let y = bench_researcher_access(&config).unwrap();
        assert_eq!(x.len(), 8);
        for (x, y) in x.iter().zip(&y) {
            assert_eq!(x.phase, y.phase);
            if !x.phase.is_creation() {
                assert_eq!(x.seconds, y.seconds);
            }
        }
    }

    #[test]
    fn csv_has_stable_header() {
        let rows = [ConsensusRow {
            miners: 4,
            malicious_pct: 25.0,
            simulated_seconds: 0.5,
        }];
        let mut out = Vec::new();
        write_csv(&rows, &mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "miners,malicious_pct,simulated_seconds_mean\n4,25.0,0.500000000\n"
        );
    }
}
