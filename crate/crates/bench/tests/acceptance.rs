//! Acceptance criteria, run in order with one PASS/FAIL line each.

use std::{collections::HashSet, time::Instant};

use aegisblock::{
    access::{
        build_disclosure_package, select_range, verify_disclosure, DisclosurePackage, TimeRange,
    },
    codec::{Decode, Encode},
    consensus::{approval_threshold, run_consensus, MinerPool, TimingModel},
    crypto::{group::Ristretto, hash, zk_and_prove, zk_and_verify, AndProof, Digest, KeyPair},
    ledger::{compute_bhat, compute_commitment, Block, BlockId},
    sim::World,
};
use aegisblock_bench::{
    bench_consensus, bench_researcher_access, measure_block_creation, BenchConfig,
};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Least-squares line through `(x, y)`: returns `(slope, intercept)`.
fn fit(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

fn history(seed: u64, visits: u64) -> World {
    let mut world = World::new(seed, 1, 3, 1);
    for t in 1..=visits {
        let data = format!("visit {t}");
        world
            .record_visit(
                0,
                t as usize % 3,
                data.as_bytes(),
                world.conditions(&[9]),
                t,
            )
            .expect("honest visit is approved");
    }
    world
}

fn package_size_law() -> Outcome {
    let world = history(1, 64);
    let ids: Vec<BlockId> = world.secrets[0]
        .blocks()
        .iter()
        .map(|b| b.block_id)
        .collect();
    let mut sizes = Vec::new();
    for k in [1usize, 4, 16, 64] {
        let pkg = build_disclosure_package(&world.secrets[0], &ids[64 - k..])
            .map_err(|e| e.to_string())?;
        if !verify_disclosure(&pkg, &world.chain, &world.store).is_valid() {
            return Err(format!("k={k} package does not verify"));
        }
        sizes.push(pkg.items().len());
    }
    check(sizes == [5, 14, 50, 194], format!("items {sizes:?}"))
}

fn transcript_linearity() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let mut points = Vec::new();
    let ring: Vec<KeyPair> = (0..4000).map(|_| KeyPair::generate(&mut rng)).collect();
    let publics: Vec<_> = ring.iter().map(|k| *k.public()).collect();
    let block: KeyPair = KeyPair::generate(&mut rng);
    for m in [1000usize, 2000, 4000] {
        let idx = m / 3;
        let proof = zk_and_prove(&mut rng, &publics[..m], idx, ring[idx].secret(), &block)
            .map_err(|e| e.to_string())?;
        if !zk_and_verify(&publics[..m], block.public(), &proof) {
            return Err(format!("m={m} proof does not verify"));
        }
        points.push((m as f64, proof.to_bytes().len() as f64));
    }
    let (a, c) = fit(&points);
    let residual = points
        .iter()
        .map(|&(m, y)| ((a * m + c) - y).abs() / y)
        .fold(0.0, f64::max);
    check(
        residual < 0.01,
        format!("size = {a:.3}·m + {c:.1}, max relative residual {residual:.2e}"),
    )
}

fn block_creation_scaling() -> Outcome {
    let mut times = Vec::new();
    for half in [1000usize, 2000, 4000] {
        let row = measure_block_creation(half, half, 4, 3).map_err(|e| e.to_string())?;
        times.push(row.creation_seconds);
    }
    let ratios: Vec<f64> = times.windows(2).map(|w| w[1] / w[0]).collect();
    check(
        ratios.iter().all(|r| (1.6..=2.4).contains(r)),
        format!("seconds {times:.4?}, doubling ratios {ratios:.3?}"),
    )
}

fn consensus_quadratic() -> Outcome {
    let config = BenchConfig {
        miners: vec![100, 200, 400, 800],
        malicious_fractions: vec![0.0],
        folds: 1,
        timing: TimingModel::noiseless(1e-3, 1e-6),
        ..BenchConfig::default()
    };
    let rows = bench_consensus(&config).map_err(|e| e.to_string())?;
    let points: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| ((r.miners as f64).ln(), r.simulated_seconds.ln()))
        .collect();
    let (slope, _) = fit(&points);
    check(
        (1.9..=2.1).contains(&slope),
        format!("log-log slope {slope:.4}"),
    )
}

fn robustness_threshold() -> Outcome {
    let world = history(5, 1);
    let block = world.chain.entry(0).unwrap().block.clone();
    let mut checked = 0;
    for n in 2..=64usize {
        for bad in 0..=n {
            let pool = MinerPool::with_malicious_count(n, bad, TimingModel::default())
                .map_err(|e| e.to_string())?;
            let result = run_consensus(
                &block,
                &pool,
                &world.registries,
                &world.chain,
                (n * 100 + bad) as u64,
            );
            let honest = n - bad;
            if result.approved != (honest >= approval_threshold(n)) || result.approvals != honest {
                return Err(format!(
                    "n={n} malicious={bad}: approved={} approvals={}",
                    result.approved, result.approvals
                ));
            }
            if 2 * bad == n && !result.approved {
                return Err(format!("n={n} at exactly half malicious was rejected"));
            }
            checked += 1;
        }
    }
    check(true, format!("{checked} (n, malicious) pairs"))
}

fn researcher_constancy() -> Outcome {
    let fractions = vec![0.1, 0.2, 0.3, 0.4, 0.5];
    let config = BenchConfig {
        malicious_fractions: fractions.clone(),
        access_miners: 100,
        folds: 4,
        ..BenchConfig::default()
    };
    let rows = bench_researcher_access(&config).map_err(|e| e.to_string())?;
    let totals: Vec<f64> = fractions
        .iter()
        .map(|f| {
            rows.iter()
                .filter(|r| r.malicious_pct == 100.0 * f)
                .map(|r| r.seconds)
                .sum()
        })
        .collect();
    let mean = totals.iter().sum::<f64>() / totals.len() as f64;
    let sd = (totals.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / totals.len() as f64).sqrt();
    let cv = sd / mean;
    let slowest_creation = rows
        .iter()
        .filter(|r| r.phase.is_creation())
        .map(|r| r.seconds)
        .fold(0.0, f64::max);
    check(
        cv < 0.2 && slowest_creation < 0.01,
        format!("totals {totals:.5?}, CV {cv:.4}, slowest creation phase {slowest_creation:.5} s"),
    )
}

fn tamper_evidence() -> Outcome {
    let world = history(7, 9);
    let selection = select_range(&world.secrets[0], &TimeRange::new(3, 7).unwrap());
    let pkg = build_disclosure_package(&world.secrets[0], &selection).map_err(|e| e.to_string())?;
    if pkg.k() != 5 || !verify_disclosure(&pkg, &world.chain, &world.store).is_valid() {
        return Err("honest k=5 package rejected".into());
    }
    let accepts =
        |p: &DisclosurePackage| verify_disclosure(p, &world.chain, &world.store).is_valid();

    // Every item byte, at serialized offsets past the magic, version and count.
    let bytes = pkg.to_bytes();
    let body = 6 + 4;
    let mut flips = 0;
    for pos in body..bytes.len() {
        for mask in [0x01u8, 0x80, 0xff] {
            let mut tampered = bytes.clone();
            tampered[pos] ^= mask;
            let decoded = DisclosurePackage::from_bytes(&tampered).map_err(|e| e.to_string())?;
            if accepts(&decoded) {
                return Err(format!("flip at byte {pos} mask {mask:#04x} accepted"));
            }
            flips += 1;
        }
    }
    if (bytes.len() - body) != 32 * pkg.item_count() + 32 {
        return Err("serialized items do not cover the package".into());
    }

    let mut omissions = 0;
    for i in 0..pkg.k() {
        let mut p = pkg.clone();
        p.blocks.remove(i);
        if accepts(&p) {
            return Err(format!("omitting triple {i} accepted"));
        }
        omissions += 1;
    }

    let mut reorders = 0;
    let mut order: Vec<usize> = (0..pkg.k()).collect();
    while next_permutation(&mut order) {
        let mut p = pkg.clone();
        p.blocks = order.iter().map(|&i| pkg.blocks[i]).collect();
        if accepts(&p) {
            return Err(format!("order {order:?} accepted"));
        }
        reorders += 1;
    }
    check(
        true,
        format!("{flips} byte flips, {omissions} omissions, {reorders} reorderings all detected"),
    )
}

fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).unwrap();
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

fn proof_soundness() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(8);
    let m = 16;
    let ring: Vec<KeyPair> = (0..m).map(|_| KeyPair::generate(&mut rng)).collect();
    let publics: Vec<_> = ring.iter().map(|k| *k.public()).collect();

    let mut honest = 0;
    let mut sample = None;
    for i in 0..1000 {
        let block: KeyPair = KeyPair::generate(&mut rng);
        let proof = zk_and_prove(&mut rng, &publics, i % m, ring[i % m].secret(), &block)
            .map_err(|e| e.to_string())?;
        honest += zk_and_verify(&publics, block.public(), &proof) as usize;
        sample.get_or_insert((proof, block));
    }

    // An outsider proves membership in a ring where their own key replaces one member,
    // then presents the proof against the real registry.
    let mut forged_accepted = 0;
    for i in 0..1000 {
        let outsider: KeyPair = KeyPair::generate(&mut rng);
        let block: KeyPair = KeyPair::generate(&mut rng);
        let mut fake = publics.clone();
        fake[i % m] = *outsider.public();
        let proof = zk_and_prove(&mut rng, &fake, i % m, outsider.secret(), &block)
            .map_err(|e| e.to_string())?;
        forged_accepted += zk_and_verify(&publics, block.public(), &proof) as usize;
    }

    let (proof, block) = sample.unwrap();
    let bytes = proof.to_bytes();
    let mut mutated_accepted = 0;
    for pos in 0..bytes.len() {
        let mut b = bytes.clone();
        b[pos] ^= 0xff;
        if let Ok(p) = AndProof::<Ristretto>::from_bytes(&b) {
            mutated_accepted += zk_and_verify(&publics, block.public(), &p) as usize;
        }
    }
    check(
        honest == 1000 && forged_accepted == 0 && mutated_accepted == 0,
        format!(
            "honest {honest}/1000, forgeries accepted {forged_accepted}/1000, mutations accepted {mutated_accepted}/{}",
            bytes.len()
        ),
    )
}

fn contains(haystack: &[u8], needle: &[u8]) -> bool {
    haystack.windows(needle.len()).any(|w| w == needle)
}

fn unlinkability() -> Outcome {
    let world = history(9, 1000);
    let identity = world.patients[0].identity.public().compress().to_bytes();
    let identity_hash = *hash(&identity).as_bytes();

    let mut seen: HashSet<[u8; 32]> = HashSet::new();
    let mut values = 0;
    for entry in world.chain.entries() {
        let Block::Patient(block) = &entry.block else {
            return Err("unexpected block kind".into());
        };
        let bytes = entry.block.to_bytes();
        if contains(&bytes, &identity) || contains(&bytes, &identity_hash) {
            return Err(format!(
                "block {} carries the identity",
                entry.block.id().short()
            ));
        }
        for v in [
            block.body.patient_block_key.compress().to_bytes(),
            block.body.hospital_block_key.compress().to_bytes(),
            *block.body.commitment.as_bytes(),
        ] {
            values += 1;
            if !seen.insert(v) {
                return Err("repeated block key or commitment".into());
            }
        }
    }
    for owned in world.secrets[0].blocks() {
        for v in [owned.nonce, owned.ptr.0, *owned.sym_key.as_bytes()] {
            values += 1;
            if !seen.insert(v) {
                return Err("repeated nonce, pointer or key".into());
            }
        }
    }
    check(
        world.chain.len() == 1000,
        format!(
            "{} blocks, {values} per-block values all distinct, no identity bytes",
            world.chain.len()
        ),
    )
}

fn range_confinement() -> Outcome {
    let world = history(10, 50);
    let selection = select_range(&world.secrets[0], &TimeRange::new(20, 30).unwrap());
    let pkg = build_disclosure_package(&world.secrets[0], &selection).map_err(|e| e.to_string())?;
    if !verify_disclosure(&pkg, &world.chain, &world.store).is_valid() {
        return Err("honest package rejected".into());
    }

    // Everything a researcher can derive: the prefix, each chained b̂, and commitments of
    // those under the one revealed nonce.
    let mut derived: Vec<Digest> = vec![pkg.prefix_hash];
    let mut bhat = pkg.prefix_hash;
    for b in &pkg.blocks {
        bhat = compute_bhat(&b.sym_key, &b.ptr, &b.data_digest, &bhat);
        derived.push(bhat);
    }
    let candidates: Vec<Digest> = derived
        .iter()
        .flat_map(|d| [*d, compute_commitment(d, &pkg.last_nonce)])
        .collect();

    let matched: Vec<BlockId> = world
        .chain
        .patient_blocks()
        .filter(|b| candidates.contains(&b.body.commitment))
        .map(|b| b.id())
        .collect();
    check(
        matched == [pkg.last_block_id] && pkg.k() == 11,
        format!(
            "k={}, on-chain commitments matched: {}",
            pkg.k(),
            matched.len()
        ),
    )
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("package-size law", package_size_law),
        ("transcript linearity", transcript_linearity),
        ("block-creation scaling", block_creation_scaling),
        ("consensus quadratic scaling", consensus_quadratic),
        ("robustness threshold", robustness_threshold),
        ("researcher-access constancy", researcher_constancy),
        ("tamper evidence", tamper_evidence),
        ("proof soundness and completeness", proof_soundness),
        ("unlinkability", unlinkability),
        ("range confinement", range_confinement),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let outcome = run();
        let secs = started.elapsed().as_secs_f64();
        match &outcome {
            Ok(detail) => println!(
                "criterion {:>2} PASS  {name} ({secs:.1} s): {detail}",
                i + 1
            ),
            Err(detail) => {
                println!(
                    "criterion {:>2} FAIL  {name} ({secs:.1} s): {detail}",
                    i + 1
                );
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
