//! Field widths and the byte-size model of every index component.
//!
//! Widths are picked from the collection's dimensions: a read-array index
//! takes 3 bytes up to 2^24 reads, an in-read offset 1 byte up to length 256,
//! a pseudogenome offset 4 bytes up to 2^32 symbols, and the `s-1` symbols
//! preceding a sampled suffix 1 byte when σ^(s-1) fits in a byte.

use crate::alphabet::{Alphabet, PackingScheme};
use crate::countcache::MAX_FULL_K;
use crate::error::{Error, Result};

/// Bytes in a read-array record besides the pseudogenome offset: one flag
/// byte and a 4-byte original read index.
pub const RECORD_FIXED_BYTES: usize = 1 + 4;

/// Shape of an index: everything the sizes depend on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Dimensions {
    pub alphabet: Alphabet,
    /// Read count.
    pub q: u64,
    /// Read length.
    pub m: u64,
    /// Pseudogenome length.
    pub p: u64,
    /// Suffix-array sparsity.
    pub s: u8,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FieldWidths {
    pub read_idx: u8,
    pub in_read_offset: u8,
    pub pg_offset: u8,
    pub prev_symbols: u8,
}

impl FieldWidths {
    pub fn for_dimensions(d: &Dimensions) -> Self {
        let read_idx = if d.q <= 1 << 24 { 3 } else { 4 };
        let in_read_offset = if d.m <= 1 << 8 { 1 } else { 2 };
        let pg_offset = if d.p <= 1 << 32 { 4 } else { 8 };
        let prev_symbols = match d.s {
            0 | 1 => 0,
            s if (d.alphabet.size() as u32).pow(s as u32 - 1) <= 256 => 1,
            _ => 2,
        };
        FieldWidths { read_idx, in_read_offset, pg_offset, prev_symbols }
    }

    /// Bytes per suffix-array element.
    pub fn element_size(&self) -> usize {
        (self.read_idx + self.in_read_offset + self.prev_symbols) as usize
    }

    /// Bytes per read-array record.
    pub fn record_size(&self) -> usize {
        self.pg_offset as usize + RECORD_FIXED_BYTES
    }
}

/// Which count-cache levels exist.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CacheLevels {
    /// Full levels cover every k in `1..=full_k`.
    pub full_k: u8,
    pub partial12: bool,
    pub partial13: bool,
}

impl CacheLevels {
    pub const NONE: CacheLevels = CacheLevels { full_k: 0, partial12: false, partial13: false };

    /// Full levels up to 10 for pseudogenomes of at most 300 million
    /// symbols, up to 11 beyond that, plus both partial levels.
    pub fn default_for_length(p: u64) -> Self {
        CacheLevels { full_k: if p <= 300_000_000 { 10 } else { 11 }, partial12: true, partial13: true }
    }

    pub fn is_empty(&self) -> bool {
        *self == Self::NONE
    }

    /// Per k-mer: 4-byte Q2, 8-byte Q4, 4-byte Q6 in full levels; 2 bytes at
    /// k=12 and 1 byte at k=13.
    pub fn bytes(&self) -> u64 {
        let full: u64 = (1..=self.full_k as u32).map(|k| 4u64.pow(k) * 16).sum();
        let p12 = if self.partial12 { 4u64.pow(12) * 2 } else { 0 };
        let p13 = if self.partial13 { 4u64.pow(13) } else { 0 };
        full + p12 + p13
    }
}

/// Bytes taken by each component.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ComponentSizes {
    pub pg: u64,
    pub read_array: u64,
    pub sa: u64,
    pub lut: u64,
}

impl ComponentSizes {
    pub fn total(&self) -> u64 {
        self.pg + self.read_array + self.sa + self.lut
    }
}

/// Number of sampled suffixes: positions `t < p` with `t ≡ s-1 (mod s)`.
pub fn sample_count(p: u64, s: u8) -> u64 {
    p / s as u64
}

/// Sizes predicted for an index of the given shape.
pub fn component_sizes(d: &Dimensions, cache: CacheLevels) -> Result<ComponentSizes> {
    let scheme = PackingScheme::for_sparsity(d.alphabet, d.s)?;
    if cache.full_k > MAX_FULL_K {
        return Err(Error::Config(format!("full cache levels go up to k={MAX_FULL_K}, got {}", cache.full_k)));
    }
    let w = FieldWidths::for_dimensions(d);
    let overflow = || Error::Config(format!("index dimensions {d:?} overflow 64-bit sizes"));
    let sizes = ComponentSizes {
        pg: scheme.packed_bytes(d.p),
        read_array: d.q.checked_mul(w.record_size() as u64).ok_or_else(overflow)?,
        sa: sample_count(d.p, d.s).checked_mul(w.element_size() as u64).ok_or_else(overflow)?,
        lut: cache.bytes(),
    };
    [sizes.read_array, sizes.sa, sizes.lut]
        .iter()
        .try_fold(sizes.pg, |acc, &x| acc.checked_add(x))
        .ok_or_else(overflow)?;
    Ok(sizes)
}
