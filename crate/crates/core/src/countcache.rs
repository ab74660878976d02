//! Precomputed Q2/Q4/Q6 answers for short `ACGT` k-mers.
//!
//! Full levels hold all three counts for every k-mer of length `1..=full_k`.
//! The partial levels for k = 12 and k = 13 hold a single value per k-mer,
//! stored only when Q2 = Q4 = Q6 (no read contains the k-mer twice) and the
//! value is below the field's all-ones sentinel.

use crate::alphabet::{Alphabet, PackedText};
use crate::error::{Error, Result};
use crate::layout::CacheLevels;
use crate::saindex::ReadArray;

/// Largest k with a full level.
pub const MAX_FULL_K: u8 = 11;
pub const PARTIAL12_SENTINEL: u16 = u16::MAX;
pub const PARTIAL13_SENTINEL: u8 = u8::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Counts {
    pub q2: u64,
    pub q4: u64,
    pub q6: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CacheLookup {
    Hit(Counts),
    /// Q2 = Q4 = Q6 = value.
    PartialHit(u64),
    Miss,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct FullLevel {
    q2: Vec<u32>,
    q4: Vec<u64>,
    q6: Vec<u32>,
}

impl FullLevel {
    fn zeroed(k: u8) -> Self {
        let n = 1usize << (2 * k);
        FullLevel { q2: vec![0; n], q4: vec![0; n], q6: vec![0; n] }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountCache {
    alphabet: Alphabet,
    levels: CacheLevels,
    full: Vec<FullLevel>,
    partial12: Vec<u16>,
    partial13: Vec<u8>,
}

/// Base-4 keys of all `k`-windows of `read` that contain no `N`.
fn window_keys(read: &[u8], k: usize, alphabet: Alphabet, out: &mut Vec<u32>) {
    out.clear();
    let mask = if k >= 16 { u32::MAX } else { (1u32 << (2 * k)) - 1 };
    let mut key = 0u32;
    let mut valid = 0usize;
    for &c in read {
        match alphabet.acgt_rank(c) {
            Some(r) => {
                key = ((key << 2) | r as u32) & mask;
                valid += 1;
            }
            None => valid = 0,
        }
        if valid >= k {
            out.push(key);
        }
    }
}

/// Runs of equal keys as (key, run length).
fn grouped(keys: &mut [u32]) -> impl Iterator<Item = (u32, u64)> + '_ {
    keys.sort_unstable();
    keys.chunk_by(|a, b| a == b).map(|g| (g[0], g.len() as u64))
}

impl CountCache {
    pub fn levels(&self) -> CacheLevels {
        self.levels
    }

    /// Enumerates the k-mers of every read once. Reads sharing a
    /// pseudogenome offset are identical and are counted together.
    pub fn build(text: &PackedText, reads: &ReadArray, m: usize, levels: CacheLevels) -> Result<Self> {
        if levels.full_k > MAX_FULL_K {
            return Err(Error::Config(format!("full cache levels go up to k={MAX_FULL_K}, got {}", levels.full_k)));
        }
        let alphabet = text.scheme().alphabet();
        let mut cache = CountCache {
            alphabet,
            levels,
            full: (1..=levels.full_k).map(FullLevel::zeroed).collect(),
            partial12: if levels.partial12 { vec![0; 1 << 24] } else { Vec::new() },
            partial13: if levels.partial13 { vec![0; 1 << 26] } else { Vec::new() },
        };
        if levels.is_empty() {
            return Ok(cache);
        }

        let offsets = reads.pg_offsets();
        let mut keys = Vec::with_capacity(m);
        let mut i = 0;
        while i < offsets.len() {
            let off = offsets[i];
            let run = offsets[i..].iter().take_while(|&&o| o == off).count();
            let weight = run as u64;
            let read = text.extract(off as usize, m);
            for (level, k) in cache.full.iter_mut().zip(1usize..) {
                window_keys(&read, k, alphabet, &mut keys);
                for (key, c) in grouped(&mut keys) {
                    let key = key as usize;
                    level.q4[key] += c * weight;
                    level.q2[key] += weight as u32;
                    if c == 1 {
                        level.q6[key] += weight as u32;
                    }
                }
            }
            if levels.partial12 {
                window_keys(&read, 12, alphabet, &mut keys);
                for (key, c) in grouped(&mut keys) {
                    let e = &mut cache.partial12[key as usize];
                    *e = bump(*e as u64, c, weight, PARTIAL12_SENTINEL as u64) as u16;
                }
            }
            if levels.partial13 {
                window_keys(&read, 13, alphabet, &mut keys);
                for (key, c) in grouped(&mut keys) {
                    let e = &mut cache.partial13[key as usize];
                    *e = bump(*e as u64, c, weight, PARTIAL13_SENTINEL as u64) as u8;
                }
            }
            i += run;
        }
        Ok(cache)
    }

    /// Looks up a k-mer given as codes of this cache's alphabet.
    pub fn lookup(&self, kmer: &[u8]) -> CacheLookup {
        let k = kmer.len();
        let in_full = k >= 1 && k <= self.levels.full_k as usize;
        let in_partial = (k == 12 && self.levels.partial12) || (k == 13 && self.levels.partial13);
        if !in_full && !in_partial {
            return CacheLookup::Miss;
        }
        let mut key = 0usize;
        for &c in kmer {
            match self.alphabet.acgt_rank(c) {
                Some(r) if c < self.alphabet.size() => key = (key << 2) | r as usize,
                _ => return CacheLookup::Miss,
            }
        }
        if in_full {
            let level = &self.full[k - 1];
            return CacheLookup::Hit(Counts { q2: level.q2[key] as u64, q4: level.q4[key], q6: level.q6[key] as u64 });
        }
        let (v, sentinel) = match k {
            12 => (self.partial12[key] as u64, PARTIAL12_SENTINEL as u64),
            _ => (self.partial13[key] as u64, PARTIAL13_SENTINEL as u64),
        };
        if v == sentinel {
            CacheLookup::Miss
        } else {
            CacheLookup::PartialHit(v)
        }
    }

    /// Raw partial entry, for inspection.
    pub fn partial_entry(&self, k: usize, key: usize) -> Option<u64> {
        match k {
            12 if self.levels.partial12 => Some(self.partial12[key] as u64),
            13 if self.levels.partial13 => Some(self.partial13[key] as u64),
            _ => None,
        }
    }

    pub fn byte_len(&self) -> u64 {
        self.levels.bytes()
    }

    /// Serialized form: for each full level its Q2 (u32), Q4 (u64) and Q6
    /// (u32) arrays, then the k=12 (u16) and k=13 (u8) arrays, little-endian.
    pub fn write_bytes(&self, out: &mut Vec<u8>) {
        out.reserve(self.byte_len() as usize);
        for level in &self.full {
            level.q2.iter().for_each(|v| out.extend_from_slice(&v.to_le_bytes()));
            level.q4.iter().for_each(|v| out.extend_from_slice(&v.to_le_bytes()));
            level.q6.iter().for_each(|v| out.extend_from_slice(&v.to_le_bytes()));
        }
        self.partial12.iter().for_each(|v| out.extend_from_slice(&v.to_le_bytes()));
        out.extend_from_slice(&self.partial13);
    }

    pub fn from_bytes(alphabet: Alphabet, levels: CacheLevels, bytes: &[u8]) -> Result<Self> {
        if levels.full_k > MAX_FULL_K {
            return Err(Error::Config(format!("full cache levels go up to k={MAX_FULL_K}, got {}", levels.full_k)));
        }
        if bytes.len() as u64 != levels.bytes() {
            return Err(Error::SectionLengthMismatch(format!(
                "count cache has {} bytes, expected {}",
                bytes.len(),
                levels.bytes()
            )));
        }
        let mut rest = bytes;
        let mut take = |n: usize| {
            let (head, tail) = rest.split_at(n);
            rest = tail;
            head
        };
        let mut full = Vec::new();
        for k in 1..=levels.full_k {
            let n = 1usize << (2 * k);
            let q2 = take(4 * n).chunks_exact(4).map(|c| u32::from_le_bytes(c.try_into().unwrap())).collect();
            let q4 = take(8 * n).chunks_exact(8).map(|c| u64::from_le_bytes(c.try_into().unwrap())).collect();
            let q6 = take(4 * n).chunks_exact(4).map(|c| u32::from_le_bytes(c.try_into().unwrap())).collect();
            full.push(FullLevel { q2, q4, q6 });
        }
        let partial12 = if levels.partial12 {
            take(2 << 24).chunks_exact(2).map(|c| u16::from_le_bytes([c[0], c[1]])).collect()
        } else {
            Vec::new()
        };
        let partial13 = if levels.partial13 { take(1 << 26).to_vec() } else { Vec::new() };
        Ok(CountCache { alphabet, levels, full, partial12, partial13 })
    }
}

/// Folds `weight` reads, each containing a k-mer `count` times, into a
/// partial entry.
fn bump(entry: u64, count: u64, weight: u64, sentinel: u64) -> u64 {
    if entry == sentinel || count > 1 {
        sentinel
    } else {
        (entry + weight).min(sentinel)
    }
}
