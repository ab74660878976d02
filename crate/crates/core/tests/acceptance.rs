//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary. Criterion 8 needs a real read set and only runs
//! when `PGIDX_ECOLI_READS` names a FASTA/FASTQ file.

mod common;

use std::collections::HashMap;
use std::panic::{self, AssertUnwindSafe};
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use common::{random_genome, random_query, random_reads, read_set, Shape, ACGT};
use pgidx::countcache::{CacheLookup, Counts, PARTIAL12_SENTINEL};
use pgidx::layout::{component_sizes, Dimensions};
use pgidx::oracle::{oracle_pattern, OracleIndex};
use pgidx::persist::{load_index, load_index_checked, load_index_from_path, save_index, save_index_to_path};
use pgidx::pgbuild::{build_pseudogenome, validate_pseudogenome};
use pgidx::{
    Alphabet, BuildOptions, CacheLevels, Error, LengthPolicy, PgsaIndex, QueryAnswer, QueryInput, QueryKind, ReadSet,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Options drawn for one random instance.
fn random_options(rng: &mut StdRng) -> BuildOptions {
    let s = rng.gen_range(1..=6);
    let mut opts = BuildOptions::with_sparsity(s);
    opts.repetitive_threshold = [0, 4, 8, 11][rng.gen_range(0..4)];
    opts = if rng.gen_bool(0.5) {
        let partial = rng.gen_bool(0.02);
        opts.cache_levels(CacheLevels { full_k: rng.gen_range(1..=6), partial12: partial, partial13: partial })
    } else {
        opts.without_cache()
    };
    opts
}

/// Checks all seven queries of `queries` on `index` against brute force;
/// returns the number of answers compared.
fn check_against_oracle(index: &PgsaIndex, reads: &ReadSet, queries: &[QueryInput]) -> Result<usize, String> {
    let mut oracles: HashMap<usize, OracleIndex> = HashMap::new();
    let mut session = index.session();
    let mut compared = 0;
    for input in queries {
        let codes = oracle_pattern(reads, input).map_err(|e| format!("oracle rejected {input:?}: {e}"))?;
        let oracle = oracles.entry(codes.len()).or_insert_with(|| OracleIndex::new(reads, codes.len()));
        for kind in QueryKind::ALL {
            let got = session.run(kind, input).map_err(|e| format!("{kind} {input:?}: {e}"))?.normalized();
            let want = oracle.answer(kind, &codes).normalized();
            ensure(got == want, || format!("{kind} {input:?}: got {got:?}, want {want:?}"))?;
            compared += 1;
        }
    }
    ensure(session.is_clean(), || "session flags left set".into())?;
    Ok(compared)
}

/// A random collection, its options and queries with `k` in `s..=m`.
fn random_case(seed: u64) -> (Vec<Vec<u8>>, BuildOptions, Vec<QueryInput>) {
    let mut rng = StdRng::seed_from_u64(seed);
    let shape = Shape::random(&mut rng, 500);
    let ascii = random_reads(&mut rng, &shape);
    let opts = random_options(&mut rng);
    let s = opts.sparsity as usize;
    let queries = (0..6)
        .map(|_| {
            let k = rng.gen_range(s..=shape.m);
            random_query(&mut rng, &ascii, k)
        })
        .collect();
    (ascii, opts, queries)
}

const INSTANCES: u64 = 2000;

fn criterion1() -> Outcome {
    let mut compared = 0;
    let mut by_form = [0usize; 2];
    let mut alphabets = [0usize; 2];
    for seed in 0..INSTANCES {
        let (ascii, opts, queries) = random_case(seed);
        let reads = read_set(&ascii);
        let index = PgsaIndex::build(&reads, &opts).map_err(|e| format!("seed {seed}: {e}"))?;
        compared += check_against_oracle(&index, &reads, &queries).map_err(|e| format!("seed {seed}: {e}"))?;
        for q in &queries {
            by_form[matches!(q, QueryInput::Positional { .. }) as usize] += 1;
        }
        alphabets[(reads.alphabet() == Alphabet::Dna5) as usize] += 1;
    }
    Ok(format!(
        "{INSTANCES} instances ({} with σ=4, {} with σ=5), {compared} answers equal to brute force ({} literal, {} positional queries)",
        alphabets[0], alphabets[1], by_form[0], by_form[1]
    ))
}

fn criterion2() -> Outcome {
    for seed in 0..INSTANCES {
        let mut rng = StdRng::seed_from_u64(seed);
        let shape = Shape::random(&mut rng, 500);
        let ascii = random_reads(&mut rng, &shape);
        let reads = read_set(&ascii);
        let pg = build_pseudogenome(&reads);
        validate_pseudogenome(&pg, &reads).map_err(|v| format!("seed {seed}: {v}"))?;
        ensure(pg.len() <= reads.len() * reads.m(), || format!("seed {seed}: p exceeds q·m"))?;
        let mut offset_of = vec![0u64; reads.len()];
        for (&orig, &off) in pg.order().iter().zip(pg.offsets()) {
            offset_of[orig as usize] = off;
        }
        let mut first: HashMap<&[u8], u64> = HashMap::new();
        for (i, read) in reads.iter().enumerate() {
            let off = *first.entry(read).or_insert(offset_of[i]);
            ensure(off == offset_of[i], || format!("seed {seed}: duplicate of read {i} placed apart"))?;
        }
    }

    let mut rng = StdRng::seed_from_u64(7);
    let genome = random_genome(&mut rng, 10_000, false, false);
    let m = 100;
    let q = 20 * genome.len() / m;
    let ascii: Vec<Vec<u8>> = (0..q)
        .map(|_| {
            let start = rng.gen_range(0..=genome.len() - m);
            genome[start..start + m].to_vec()
        })
        .collect();
    let reads = read_set(&ascii);
    let pg = build_pseudogenome(&reads);
    validate_pseudogenome(&pg, &reads).map_err(|v| v.to_string())?;
    let ratio = pg.len() as f64 / (q * m) as f64;
    ensure(ratio < 0.35, || format!("20x coverage compaction {ratio:.4} not below 0.35"))?;
    Ok(format!("{INSTANCES} pseudogenomes valid; 10 kb genome at 20x: p/(q·m) = {ratio:.4}"))
}

fn criterion3() -> Outcome {
    let mb = |bytes: u64| bytes as f64 / 1e6;
    let within = |got: f64, want: f64| (got - want).abs() <= 0.01 * want;
    let ecoli_pg = [551.0, 276.0, 184.0, 276.0, 221.0, 184.0];
    let ecoli_sa = [2205.0, 1378.0, 919.0, 689.0, 662.0, 551.0];
    let celegans_sa = [8016.0, 4809.0, 3206.0, 2405.0, 2244.0, 1870.0];
    let mut checked = 0;
    for s in 1..=6u8 {
        let i = s as usize - 1;
        let ecoli = Dimensions { alphabet: Alphabet::Dna5, q: 11_500_000, m: 151, p: 551_400_000, s };
        let sizes = component_sizes(&ecoli, CacheLevels::NONE).map_err(|e| e.to_string())?;
        ensure(within(mb(sizes.pg), ecoli_pg[i]), || format!("s={s}: PG {:.1} MB vs {}", mb(sizes.pg), ecoli_pg[i]))?;
        ensure(within(mb(sizes.sa), ecoli_sa[i]), || format!("s={s}: SA {:.1} MB vs {}", mb(sizes.sa), ecoli_sa[i]))?;
        let celegans = Dimensions { alphabet: Alphabet::Dna5, q: 67_600_000, m: 100, p: 1_603_100_000, s };
        let sizes = component_sizes(&celegans, CacheLevels::NONE).map_err(|e| e.to_string())?;
        ensure(within(mb(sizes.sa), celegans_sa[i]), || {
            format!("s={s}: large SA {:.1} MB vs {}", mb(sizes.sa), celegans_sa[i])
        })?;
        checked += 3;
    }
    Ok(format!("{checked} PG/SA sizes within 1% of the reference tables"))
}

fn criterion4() -> Outcome {
    let mut rng = StdRng::seed_from_u64(4);
    let shape = Shape { q: 3000, m: 50, with_n: true, low_complexity: false };
    let ascii = random_reads(&mut rng, &shape);
    let reads = read_set(&ascii);
    let levels = CacheLevels { full_k: 6, partial12: true, partial13: true };
    let index = PgsaIndex::build(&reads, &BuildOptions::default().cache_levels(levels)).map_err(|e| e.to_string())?;
    ensure(index.pg_len() < 1_000_000, || format!("corpus too long: {}", index.pg_len()))?;
    let cache = index.cache().ok_or("cache missing")?;
    let alphabet = reads.alphabet();
    let mut keys = 0;
    for k in 1..=6usize {
        let oracle = OracleIndex::new(&reads, k);
        for key in 0..1usize << (2 * k) {
            let kmer: Vec<u8> = (0..k).rev().map(|j| ACGT[(key >> (2 * j)) & 3]).collect();
            let codes = alphabet.encode(&kmer, 0).map_err(|e| e.to_string())?;
            let count = |kind| match oracle.answer(kind, &codes) {
                QueryAnswer::Count(c) => c,
                other => unreachable!("{other:?}"),
            };
            let want = Counts { q2: count(QueryKind::Q2), q4: count(QueryKind::Q4), q6: count(QueryKind::Q6) };
            let got = cache.lookup(&codes);
            ensure(got == CacheLookup::Hit(want), || {
                format!("{}: cached {got:?}, oracle {want:?}", String::from_utf8_lossy(&kmer))
            })?;
            keys += 1;
        }
    }

    let repeated = b"ACGTTGCAGTCAACGTTGCAGTCA".to_vec();
    let unique = b"TTGACCGATGCATGCCAGTTAGCA".to_vec();
    let reads =
        ReadSet::from_ascii(&[repeated.clone(), unique.clone()], LengthPolicy::Reject).map_err(|e| e.to_string())?;
    let levels = CacheLevels { full_k: 1, partial12: true, partial13: true };
    let index = PgsaIndex::build(&reads, &BuildOptions::default().cache_levels(levels)).map_err(|e| e.to_string())?;
    let cache = index.cache().ok_or("cache missing")?;
    let key = |kmer: &[u8]| kmer.iter().fold(0usize, |a, &c| a * 4 + ACGT.iter().position(|&x| x == c).unwrap());
    let entry = cache.partial_entry(12, key(&repeated[..12]));
    ensure(entry == Some(PARTIAL12_SENTINEL as u64), || format!("repeated 12-mer entry {entry:?}"))?;
    let entry = cache.partial_entry(12, key(&unique[..12]));
    ensure(entry == Some(1), || format!("unique 12-mer entry {entry:?}"))?;
    let codes = reads.alphabet().encode(&repeated[..12], 0).map_err(|e| e.to_string())?;
    ensure(cache.lookup(&codes) == CacheLookup::Miss, || "sentinel entry answered from cache".into())?;
    Ok(format!("{keys} cached k-mers (k ≤ 6) equal to brute force; k=12 sentinel and unique entries correct"))
}

fn criterion5() -> Outcome {
    let mut rng = StdRng::seed_from_u64(5);
    let mut answers_compared = 0;
    for with_n in [false, true] {
        let shape = Shape { q: 400, m: 30, with_n, low_complexity: false };
        let ascii = random_reads(&mut rng, &shape);
        let reads = read_set(&ascii);
        let queries: Vec<QueryInput> = (0..60)
            .map(|_| {
                let k = rng.gen_range(6..=16);
                random_query(&mut rng, &ascii, k)
            })
            .collect();
        let mut reference: Option<Vec<QueryAnswer>> = None;
        for s in 1..=6 {
            for cached in [false, true] {
                let opts = BuildOptions::with_sparsity(s);
                let opts = if cached {
                    opts.cache_levels(CacheLevels { full_k: 8, partial12: true, partial13: true })
                } else {
                    opts.without_cache()
                };
                let index = PgsaIndex::build(&reads, &opts).map_err(|e| e.to_string())?;
                let mut session = index.session();
                let mut got = Vec::new();
                for input in &queries {
                    for kind in QueryKind::ALL {
                        got.push(session.run(kind, input).map_err(|e| e.to_string())?.normalized());
                    }
                }
                match &reference {
                    None => reference = Some(got),
                    Some(want) => {
                        let bad = want.iter().zip(&got).position(|(a, b)| a != b);
                        ensure(bad.is_none(), || format!("σ5={with_n} s={s} cache={cached}: answer {bad:?} differs"))?;
                        answers_compared += got.len();
                    }
                }
            }
        }
    }
    Ok(format!("{answers_compared} answers identical across s = 1..6 with and without cache"))
}

fn criterion6() -> Outcome {
    let mut rng = StdRng::seed_from_u64(6);
    let shape = Shape { q: 1500, m: 24, with_n: true, low_complexity: false };
    let mut ascii = random_reads(&mut rng, &shape);
    // some reads that repeat short k-mers internally
    for read in ascii.iter_mut().take(100) {
        let half = read[..12].to_vec();
        read[12..].copy_from_slice(&half);
    }
    let reads = read_set(&ascii);
    let opts = BuildOptions { repetitive_threshold: 6, ..BuildOptions::with_sparsity(2) }.without_cache();
    let index = PgsaIndex::build(&reads, &opts).map_err(|e| e.to_string())?;
    let mut session = index.session();
    let mut errors = 0;
    for i in 0..10_000 {
        let kind = QueryKind::ALL[rng.gen_range(0..7)];
        let input = if rng.gen_bool(0.03) {
            QueryInput::at(rng.gen_range(0..2000), rng.gen_range(0..30), rng.gen_range(0..10))
        } else {
            let k = rng.gen_range(2..=24);
            random_query(&mut rng, &ascii, k)
        };
        let got = session.run(kind, &input);
        let fresh = index.session().run(kind, &input);
        match (&got, &fresh) {
            (Ok(a), Ok(b)) => ensure(a == b, || format!("query {i} {kind} {input:?}: reused {a:?}, fresh {b:?}"))?,
            (Err(a), Err(b)) => {
                ensure(a.kind() == b.kind(), || format!("query {i}: errors differ"))?;
                errors += 1;
            }
            _ => return Err(format!("query {i} {kind} {input:?}: {got:?} vs fresh {fresh:?}")),
        }
        if i % 1000 == 999 {
            ensure(session.is_clean(), || format!("flags set after query {i}"))?;
        }
    }
    ensure(session.is_clean(), || "flags set after the run".into())?;
    Ok(format!("10000 queries on one session ({errors} rejected inputs) match fresh sessions; flags all zero"))
}

fn criterion7() -> Outcome {
    let mut compared = 0;
    let instances = 400;
    for seed in 0..instances {
        let (ascii, opts, queries) = random_case(10_000 + seed);
        let reads = read_set(&ascii);
        let index = PgsaIndex::build(&reads, &opts).map_err(|e| format!("seed {seed}: {e}"))?;
        let mut bytes = Vec::new();
        save_index(&index, &mut bytes).map_err(|e| e.to_string())?;
        let loaded = load_index_checked(&bytes[..], Some(1)).map_err(|e| format!("seed {seed}: {e}"))?;
        ensure(loaded == index, || format!("seed {seed}: loaded index differs"))?;
        compared += check_against_oracle(&loaded, &reads, &queries).map_err(|e| format!("seed {seed}: {e}"))?;

        if seed % 50 == 0 {
            let cut = bytes.len() - 1 - (seed as usize % (bytes.len() - 1));
            let truncated = load_index(&bytes[..cut]);
            ensure(matches!(truncated, Err(Error::SectionLengthMismatch(_))), || {
                format!("truncated to {cut} bytes: {:?}", truncated.map(|_| ()))
            })?;
            let mut bad = bytes.clone();
            bad[..4].copy_from_slice(b"PGSB");
            ensure(matches!(load_index(&bad[..]), Err(Error::BadMagic)), || "bad magic accepted".into())?;
        }
    }

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("example.pgsa");
    let reads =
        ReadSet::from_ascii(&["ACGT", "CGTA", "ACGT", "TTTT"], LengthPolicy::Reject).map_err(|e| e.to_string())?;
    let index = PgsaIndex::build(&reads, &BuildOptions::with_sparsity(2)).map_err(|e| e.to_string())?;
    save_index_to_path(&index, &path).map_err(|e| e.to_string())?;
    let loaded = load_index_from_path(&path).map_err(|e| e.to_string())?;
    ensure(loaded == index, || "file roundtrip differs".into())?;

    Ok(format!("{instances} indexes reloaded byte-identical; {compared} answers equal to brute force; truncation and bad magic rejected"))
}

fn criterion8() -> Option<Outcome> {
    let path = std::env::var_os("PGIDX_ECOLI_READS")?;
    Some((|| {
        let reads =
            pgidx::load_read_files(&[path], pgidx::Format::Auto, LengthPolicy::Reject).map_err(|e| e.to_string())?;
        let index = PgsaIndex::build(&reads, &BuildOptions::default().without_cache()).map_err(|e| e.to_string())?;
        let p = index.pg_len() as f64;
        ensure((p - 551.4e6).abs() <= 0.02 * 551.4e6, || format!("pseudogenome length {p} outside 551.4M ± 2%"))?;
        Ok(format!("pseudogenome length {:.1}M", p / 1e6))
    })())
}

fn run(criterion: fn() -> Outcome) -> (Outcome, f64) {
    let clock = Instant::now();
    let outcome = match panic::catch_unwind(AssertUnwindSafe(criterion)) {
        Ok(outcome) => outcome,
        Err(payload) => Err(payload
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panicked".into())),
    };
    (outcome, clock.elapsed().as_secs_f64())
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("oracle equivalence", criterion1),
        ("pseudogenome validity", criterion2),
        ("space model", criterion3),
        ("count cache", criterion4),
        ("sparsity and cache transparency", criterion5),
        ("session reuse", criterion6),
        ("persistence", criterion7),
    ];
    let results: Vec<(Outcome, f64)> = std::thread::scope(|scope| {
        let handles: Vec<_> = criteria.iter().map(|&(_, f)| scope.spawn(move || run(f))).collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });

    let mut failed = 0;
    for (i, ((name, _), (outcome, secs))) in criteria.iter().zip(&results).enumerate() {
        match outcome {
            Ok(detail) => println!("criterion {} [{name}]: PASS ({secs:.1}s) {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} [{name}]: FAIL ({secs:.1}s) {why}", i + 1);
            }
        }
    }
    match criterion8() {
        None => println!("criterion 8 [large read set]: IGNORED (set PGIDX_ECOLI_READS or run scripts/ecoli_check.sh)"),
        Some(Ok(detail)) => println!("criterion 8 [large read set]: PASS {detail}"),
        Some(Err(why)) => {
            failed += 1;
            println!("criterion 8 [large read set]: FAIL {why}");
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
