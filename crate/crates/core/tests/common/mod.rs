//! Random read collections shared by the integration tests.
#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::Rng;

use pgidx::{LengthPolicy, QueryInput, ReadSet};

pub const ACGT: &[u8] = b"ACGT";

/// Shape of one random collection.
#[derive(Clone, Debug)]
pub struct Shape {
    pub q: usize,
    pub m: usize,
    pub with_n: bool,
    /// Short repeated motif instead of a uniform genome.
    pub low_complexity: bool,
}

impl Shape {
    pub fn random(rng: &mut StdRng, max_q: usize) -> Self {
        let q = if rng.gen_bool(0.15) { rng.gen_range(1..=max_q) } else { rng.gen_range(1..=max_q.min(80)) };
        Shape { q, m: rng.gen_range(8..=32), with_n: rng.gen_bool(0.5), low_complexity: rng.gen_bool(0.2) }
    }
}

pub fn random_genome(rng: &mut StdRng, len: usize, with_n: bool, low_complexity: bool) -> Vec<u8> {
    let mut g: Vec<u8> = if low_complexity {
        let motif: Vec<u8> = (0..rng.gen_range(1..=5)).map(|_| ACGT[rng.gen_range(0..4)]).collect();
        (0..len).map(|i| if rng.gen_bool(0.05) { ACGT[rng.gen_range(0..4)] } else { motif[i % motif.len()] }).collect()
    } else {
        (0..len).map(|_| ACGT[rng.gen_range(0..4)]).collect()
    };
    if with_n {
        for c in g.iter_mut() {
            if rng.gen_bool(0.02) {
                *c = b'N';
            }
        }
    }
    g
}

/// Reads sampled from a random genome with substitutions and exact
/// duplicates. With `with_n` the first read always carries an `N`.
pub fn random_reads(rng: &mut StdRng, shape: &Shape) -> Vec<Vec<u8>> {
    let Shape { q, m, with_n, low_complexity } = *shape;
    let glen = m + rng.gen_range(0..=(q * m / 3).max(1));
    let genome = random_genome(rng, glen, with_n, low_complexity);
    let mut reads: Vec<Vec<u8>> = Vec::with_capacity(q);
    for _ in 0..q {
        if !reads.is_empty() && rng.gen_bool(0.1) {
            let dup = reads[rng.gen_range(0..reads.len())].clone();
            reads.push(dup);
            continue;
        }
        let start = rng.gen_range(0..=glen - m);
        let mut read = genome[start..start + m].to_vec();
        for c in read.iter_mut() {
            if rng.gen_bool(0.01) {
                *c = ACGT[rng.gen_range(0..4)];
            }
        }
        reads.push(read);
    }
    if with_n {
        let at = rng.gen_range(0..m);
        reads[0][at] = b'N';
    }
    reads
}

pub fn read_set(ascii: &[Vec<u8>]) -> ReadSet {
    ReadSet::from_ascii(ascii, LengthPolicy::Reject).expect("generated reads are valid")
}

/// A query of length `k`: a slice of a read given by position or
/// literally, a genome-like string spanning reads, or random symbols.
pub fn random_query(rng: &mut StdRng, ascii: &[Vec<u8>], k: usize) -> QueryInput {
    let m = ascii[0].len();
    let r = rng.gen_range(0..ascii.len());
    let start = rng.gen_range(0..=m - k);
    match rng.gen_range(0..4) {
        0 => QueryInput::at(r as u32, start, k),
        1 => QueryInput::pattern(&ascii[r][start..start + k]),
        2 => {
            // tail of one read followed by the head of another
            let r2 = rng.gen_range(0..ascii.len());
            let mut p: Vec<u8> = ascii[r][m - k / 2..].to_vec();
            p.extend_from_slice(&ascii[r2][..k - k / 2]);
            QueryInput::Pattern(p)
        }
        _ => {
            let syms: &[u8] = if ascii.iter().any(|r| r.contains(&b'N')) { b"ACGNT" } else { ACGT };
            QueryInput::Pattern((0..k).map(|_| syms[rng.gen_range(0..syms.len())]).collect())
        }
    }
}
