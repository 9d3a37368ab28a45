use std::{path::PathBuf, process::ExitCode};

use aegisblock::{
    access::{
        build_disclosure_package, pending_requests, scan_blocks, select_range, verify_disclosure,
        TimeRange,
    },
    codec::{read_file, write_file},
    consensus::{TimingModel, VerifyCost},
    ledger::Chain,
    sim::World,
};
use aegisblock_bench::{
    bench_block_creation, bench_consensus, bench_researcher_access, emit, BenchConfig,
};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "aegisblock",
    version,
    about = "Patient-controlled health-record ledger: benchmarks and demos"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a benchmark and write CSV.
    #[command(subcommand)]
    Bench(BenchCommand),
    #[command(subcommand)]
    Demo(DemoCommand),
    #[command(subcommand)]
    Chain(ChainCommand),
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Block creation time and proof size against registry sizes.
    BlockCreation(BenchArgs),
    /// Simulated consensus time against miner count and malicious fraction.
    Consensus(BenchArgs),
    /// Request and approval phases against malicious fraction.
    Researcher(BenchArgs),
}

#[derive(Subcommand)]
enum DemoCommand {
    /// Record visits, request access, approve a narrower range and verify the disclosure.
    RoundTrip {
        /// Directory for the chain, store and registry files.
        #[arg(long, default_value = "aegis-demo")]
        out: PathBuf,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        visits: u64,
    },
}

#[derive(Subcommand)]
enum ChainCommand {
    /// Print every block of a saved chain.
    Inspect {
        #[arg(long)]
        chain: PathBuf,
    },
}

#[derive(Args)]
struct BenchArgs {
    /// Patient registry sizes.
    #[arg(long, value_delimiter = ',', default_value = "1000")]
    patients: Vec<usize>,
    /// Hospital registry sizes.
    #[arg(long, value_delimiter = ',', default_value = "1000,2000,4000")]
    hospitals: Vec<usize>,
    /// Miner counts for the consensus sweep.
    #[arg(long, value_delimiter = ',', default_value = "100,200,400,800")]
    miners: Vec<usize>,
    /// Malicious miner fractions, each in [0, 0.5].
    #[arg(long, value_delimiter = ',', default_value = "0,0.1,0.2,0.3,0.4,0.5")]
    malicious: Vec<f64>,
    /// Miner count for the researcher sweep.
    #[arg(long, default_value_t = 100)]
    access_miners: usize,
    /// Repetitions averaged per grid point.
    #[arg(long, default_value_t = 4)]
    folds: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Virtual seconds per verification, or "measured" for wall-clock.
    #[arg(long, default_value = "0.005")]
    verify_cost: String,
    /// Relative jitter on honest verification time.
    #[arg(long, default_value_t = 0.1)]
    jitter: f64,
    /// Virtual seconds per ordered miner pair.
    #[arg(long, default_value_t = 1e-6)]
    message_cost: f64,
    /// CSV destination; standard output when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

impl BenchArgs {
    fn into_config(self) -> Result<BenchConfig, String> {
        let verify_cost = match self.verify_cost.as_str() {
            "measured" => VerifyCost::Measured,
            s => VerifyCost::Constant(s.parse().map_err(|_| format!("bad --verify-cost {s:?}"))?),
        };
        Ok(BenchConfig {
            patients: self.patients,
            hospitals: self.hospitals,
            miners: self.miners,
            malicious_fractions: self.malicious,
            access_miners: self.access_miners,
            folds: self.folds,
            seed: self.seed,
            timing: TimingModel {
                verify_cost,
                jitter: self.jitter,
                message_cost: self.message_cost,
            },
            output: self.output,
        })
    }
}

fn run_bench(command: BenchCommand) -> Result<(), String> {
    let (args, which): (BenchArgs, u8) = match command {
        BenchCommand::BlockCreation(a) => (a, 0),
        BenchCommand::Consensus(a) => (a, 1),
        BenchCommand::Researcher(a) => (a, 2),
    };
    let config = args.into_config()?;
    let result = match which {
        0 => bench_block_creation(&config).and_then(|rows| emit(&rows, &config)),
        1 => bench_consensus(&config).and_then(|rows| emit(&rows, &config)),
        _ => bench_researcher_access(&config).and_then(|rows| emit(&rows, &config)),
    };
    result.map_err(|e| e.to_string())
}

fn round_trip(out: PathBuf, seed: u64, visits: u64) -> Result<(), Box<dyn std::error::Error>> {
    if visits < 3 {
        return Err("need at least 3 visits".into());
    }
    let mut world = World::new(seed, 3, 4, 1);
    for t in 1..=visits {
        let code = if t % 2 == 0 { 12 } else { 200 };
        let data = format!("visit {t}: blood panel, notes");
        world.record_visit(
            0,
            t as usize % 4,
            data.as_bytes(),
            world.conditions(&[5, code]),
            10 * t,
        )?;
        world.record_visit(1, 0, b"routine", world.conditions(&[7]), 10 * t)?;
    }
    println!("recorded {} patient blocks", world.chain.len());

    let wanted = world.conditions(&[5]);
    let hits = scan_blocks(&world.chain, &wanted);
    println!(
        "scan for {:?}: {} matching blocks",
        world.codebook.names_of(&wanted),
        hits.len()
    );
    let parent = *hits.last().ok_or("no matching block")?;
    let requested = TimeRange::new(10, 10 * visits)?;
    let request = world.request(0, parent, requested)?;
    println!("request {} for {requested} accepted", request.id().short());

    let pending = pending_requests(&world.chain, &world.secrets[0]);
    let granted = TimeRange::new(20, 10 * visits - 10)?;
    let approval = world.approve(0, pending[0], granted)?;
    println!("approval {} grants {granted}", approval.id().short());

    let selection = select_range(&world.secrets[0], &approval.granted_range);
    let package = build_disclosure_package(&world.secrets[0], &selection)?;
    let report = verify_disclosure(&package, &world.chain, &world.store);
    if !report.is_valid() {
        return Err(format!("disclosure failed verification: {report:?}").into());
    }
    for block in &package.blocks {
        let plain = world.store.fetch(&block.ptr, &block.sym_key)?;
        println!("  {}", String::from_utf8_lossy(&plain));
    }

    std::fs::create_dir_all(&out)?;
    write_file(out.join("chain.aegc"), &world.chain)?;
    write_file(out.join("store.aegs"), &world.store)?;
    write_file(out.join("patients.aegr"), &world.registries.patients)?;
    write_file(out.join("hospitals.aegr"), &world.registries.hospitals)?;
    write_file(out.join("researchers.aegr"), &world.registries.researchers)?;
    write_file(out.join("package.aegp"), &package)?;
    print!("{}", package.manifest());
    println!("wrote {}", out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Bench(b) => run_bench(b),
        Command::Demo(DemoCommand::RoundTrip { out, seed, visits }) => {
            round_trip(out, seed, visits).map_err(|e| e.to_string())
        }
        Command::Chain(ChainCommand::Inspect { chain }) => read_file::<Chain>(&chain)
            .map(|c| print!("{}", c.summary()))
            .map_err(|e| e.to_string()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
