//! Read array and sparse suffix array over the pseudogenome.
//!
//! A suffix-array element does not store a text position. It stores the
//! read-array index of the furthest read covering the suffix start and the
//! start's offset inside that read, so the reads containing a match can be
//! enumerated by walking the read array backwards. With sparsity `s`, only
//! positions `t ≡ s-1 (mod s)` are sampled and each element additionally
//! carries the `s-1` symbols preceding `t`, packed base σ. A pattern of
//! length `k ≥ s` is found by searching each shifted tail `pattern[d..]`,
//! `d < s`, and checking the stored symbols against `pattern[..d]`.

use std::cmp::Ordering;
use std::collections::HashSet;

use crate::alphabet::{Alphabet, PackedText, PackingScheme};
use crate::error::{Error, Result};
use crate::layout::{sample_count, FieldWidths};
use crate::pgbuild::Pseudogenome;

/// Default length of the windows checked by the repetitive-read flag.
pub const DEFAULT_REPETITIVE_THRESHOLD: usize = 11;

/// Reads in pseudogenome order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReadArray {
    pg_offsets: Vec<u64>,
    orig: Vec<u32>,
    repetitive: Vec<bool>,
    // original index -> ordered index
    rank: Vec<u32>,
}

/// One read-array record.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReadArrayEntry {
    pub pg_offset: u64,
    pub orig_index: u32,
    pub repetitive: bool,
}

impl ReadArray {
    pub fn from_entries(entries: &[ReadArrayEntry]) -> Self {
        let mut rank = vec![u32::MAX; entries.len()];
        for (i, e) in entries.iter().enumerate() {
            if let Some(slot) = rank.get_mut(e.orig_index as usize) {
                *slot = i as u32;
            }
        }
        ReadArray {
            pg_offsets: entries.iter().map(|e| e.pg_offset).collect(),
            orig: entries.iter().map(|e| e.orig_index).collect(),
            repetitive: entries.iter().map(|e| e.repetitive).collect(),
            rank,
        }
    }

    pub fn len(&self) -> usize {
        self.orig.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orig.is_empty()
    }

    pub fn entry(&self, i: usize) -> ReadArrayEntry {
        ReadArrayEntry { pg_offset: self.pg_offsets[i], orig_index: self.orig[i], repetitive: self.repetitive[i] }
    }

    pub fn entries(&self) -> impl ExactSizeIterator<Item = ReadArrayEntry> + '_ {
        (0..self.len()).map(|i| self.entry(i))
    }

    #[inline]
    pub fn pg_offset(&self, i: usize) -> u64 {
        self.pg_offsets[i]
    }

    pub fn pg_offsets(&self) -> &[u64] {
        &self.pg_offsets
    }

    #[inline]
    pub fn orig_index(&self, i: usize) -> u32 {
        self.orig[i]
    }

    pub fn orig_indices(&self) -> &[u32] {
        &self.orig
    }

    #[inline]
    pub fn is_repetitive(&self, i: usize) -> bool {
        self.repetitive[i]
    }

    /// Ordered index of an original read, if it exists.
    pub fn ordered_index(&self, orig: u32) -> Option<usize> {
        self.rank.get(orig as usize).map(|&r| r as usize)
    }

    /// Largest ordered index whose read starts at or before `pos`.
    #[inline]
    pub fn furthest_read(&self, pos: u64) -> usize {
        self.pg_offsets.partition_point(|&o| o <= pos) - 1
    }
}

/// True iff some window of length `w` occurs at least twice in `read`.
pub fn is_repetitive(read: &[u8], w: usize) -> bool {
    if w == 0 || read.len() <= w {
        return false;
    }
    let mut seen = HashSet::with_capacity(read.len() - w + 1);
    read.windows(w).any(|win| !seen.insert(win))
}

/// One record per ordered read, with repetitive flags for windows of length
/// `threshold`.
pub fn build_read_array(pg: &Pseudogenome, threshold: usize) -> ReadArray {
    let m = pg.m();
    let mut entries = Vec::with_capacity(pg.read_count());
    let mut last: Option<(u64, bool)> = None;
    for (&orig_index, &pg_offset) in pg.order().iter().zip(pg.offsets()) {
        let repetitive = match last {
            Some((off, flag)) if off == pg_offset => flag,
            _ => is_repetitive(&pg.text()[pg_offset as usize..pg_offset as usize + m], threshold),
        };
        last = Some((pg_offset, repetitive));
        entries.push(ReadArrayEntry { pg_offset, orig_index, repetitive });
    }
    ReadArray::from_entries(&entries)
}

/// A sampled suffix decoded from its element.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SaElement {
    pub read_idx: u32,
    pub in_read_offset: u32,
    /// The `s-1` preceding symbols packed base σ, first symbol most
    /// significant; 0 when `s = 1`.
    pub prev_symbols: u16,
}

/// An occurrence in the pseudogenome, addressed through the furthest read
/// covering its start.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SaHit {
    pub read_idx: u32,
    pub offset: u32,
}

/// Sampled suffixes in lexicographic order, as fixed-width little-endian
/// elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseSuffixArray {
    s: u8,
    alphabet: Alphabet,
    widths: FieldWidths,
    bytes: Vec<u8>,
}

fn write_le(out: &mut Vec<u8>, value: u64, width: u8) {
    out.extend_from_slice(&value.to_le_bytes()[..width as usize]);
}

#[inline]
fn read_le(bytes: &[u8], width: u8) -> u64 {
    let mut buf = [0u8; 8];
    buf[..width as usize].copy_from_slice(&bytes[..width as usize]);
    u64::from_le_bytes(buf)
}

/// Packs codes base `sigma`, first code most significant.
#[inline]
fn pack_base(codes: &[u8], sigma: u8) -> u32 {
    codes.iter().fold(0u32, |acc, &c| acc * sigma as u32 + c as u32)
}

impl SparseSuffixArray {
    pub fn from_raw(alphabet: Alphabet, s: u8, widths: FieldWidths, bytes: Vec<u8>) -> Result<Self> {
        PackingScheme::for_sparsity(alphabet, s)?;
        if !bytes.len().is_multiple_of(widths.element_size()) {
            return Err(Error::SectionLengthMismatch(format!(
                "suffix array has {} bytes, not a multiple of element size {}",
                bytes.len(),
                widths.element_size()
            )));
        }
        Ok(SparseSuffixArray { s, alphabet, widths, bytes })
    }

    pub fn sparsity(&self) -> u8 {
        self.s
    }

    pub fn widths(&self) -> FieldWidths {
        self.widths
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn len(&self) -> usize {
        self.bytes.len() / self.widths.element_size()
    }

    pub fn is_empty(&self) -> bool {
        self.bytes.is_empty()
    }

    #[inline]
    pub fn element(&self, i: usize) -> SaElement {
        let w = self.widths;
        let base = i * w.element_size();
        let b = &self.bytes[base..base + w.element_size()];
        let read_idx = read_le(b, w.read_idx) as u32;
        let in_read_offset = read_le(&b[w.read_idx as usize..], w.in_read_offset) as u32;
        let prev_symbols = match w.prev_symbols {
            0 => 0,
            pw => read_le(&b[(w.read_idx + w.in_read_offset) as usize..], pw) as u16,
        };
        SaElement { read_idx, in_read_offset, prev_symbols }
    }

    #[inline]
    fn position(&self, i: usize, reads: &ReadArray) -> u64 {
        let e = self.element(i);
        reads.pg_offset(e.read_idx as usize) + e.in_read_offset as u64
    }

    /// Text positions of all elements, in suffix order.
    pub fn positions(&self, reads: &ReadArray) -> Vec<u64> {
        (0..self.len()).map(|i| self.position(i, reads)).collect()
    }

    /// Calls `visit` once per occurrence of `pattern` (codes) in the text.
    /// Occurrences are grouped by shift; within a group they follow suffix
    /// order.
    pub fn for_each_occurrence<F: FnMut(SaHit)>(
        &self,
        text: &PackedText,
        reads: &ReadArray,
        pattern: &[u8],
        mut visit: F,
    ) -> Result<()> {
        let s = self.s as usize;
        if pattern.len() < s || pattern.is_empty() {
            return Err(Error::PatternTooShort { k: pattern.len(), s });
        }
        if let Some(&c) = pattern.iter().find(|&&c| c >= self.alphabet.size()) {
            return Err(Error::InvalidCode(c));
        }
        let sigma = self.alphabet.size();
        for d in 0..s {
            let probe = Probe::new(&pattern[d..], text.scheme(), s);
            let lo = partition(0, self.len(), |i| probe.cmp(text, self.position(i, reads)) == Ordering::Less);
            let hi = partition(lo, self.len(), |i| probe.cmp(text, self.position(i, reads)) != Ordering::Greater);
            if lo == hi {
                continue;
            }
            let want = pack_base(&pattern[..d], sigma);
            let modulus = (sigma as u32).pow(d as u32);
            for i in lo..hi {
                let e = self.element(i);
                if e.prev_symbols as u32 % modulus != want {
                    continue;
                }
                let start = reads.pg_offset(e.read_idx as usize) + e.in_read_offset as u64 - d as u64;
                let mut r = e.read_idx as usize;
                while reads.pg_offset(r) > start {
                    r -= 1;
                }
                visit(SaHit { read_idx: r as u32, offset: (start - reads.pg_offset(r)) as u32 });
            }
        }
        Ok(())
    }

    /// Every occurrence of `pattern` as (furthest read, offset) pairs.
    pub fn locate_range(&self, text: &PackedText, reads: &ReadArray, pattern: &[u8]) -> Result<Vec<SaHit>> {
        let mut out = Vec::new();
        self.for_each_occurrence(text, reads, pattern, |h| out.push(h))?;
        Ok(out)
    }

    /// Checks element invariants: count, sampling residue, furthest-read
    /// addressing, stored preceding symbols, and strict suffix order between
    /// adjacent elements. With `stride > 1` only every `stride`-th element
    /// (and its successor) is examined.
    pub fn verify(&self, text: &PackedText, reads: &ReadArray, m: usize, stride: usize) -> Result<()> {
        let s = self.s as usize;
        let p = text.len() as u64;
        let bad = |msg: String| Err(Error::Invariant(msg));
        if self.len() as u64 != sample_count(p, self.s) {
            return bad(format!("{} suffix-array elements, expected {}", self.len(), sample_count(p, self.s)));
        }
        let check = |i: usize| -> Result<u64> {
            let e = self.element(i);
            let r = e.read_idx as usize;
            if r >= reads.len() || e.in_read_offset as usize >= m {
                return Err(Error::Invariant(format!("element {i} addresses read {r} offset {}", e.in_read_offset)));
            }
            let t = reads.pg_offset(r) + e.in_read_offset as u64;
            if t >= p || t % s as u64 != s as u64 - 1 {
                return Err(Error::Invariant(format!("element {i} points at unsampled position {t}")));
            }
            if r + 1 < reads.len() && reads.pg_offset(r + 1) <= t {
                return Err(Error::Invariant(format!("element {i} does not address the furthest read")));
            }
            let prev = text.extract(t as usize + 1 - s, s - 1);
            if pack_base(&prev, self.alphabet.size()) != e.prev_symbols as u32 {
                return Err(Error::Invariant(format!("element {i} stores wrong preceding symbols")));
            }
            Ok(t)
        };
        for i in (0..self.len()).step_by(stride.max(1)) {
            let t = check(i)?;
            if i + 1 < self.len() {
                let u = check(i + 1)?;
                if cmp_suffixes(text, t, u) != Ordering::Less {
                    return bad(format!("suffixes at elements {i} and {} are out of order", i + 1));
                }
            }
        }
        Ok(())
    }
}

fn partition<P: FnMut(usize) -> bool>(lo: usize, hi: usize, mut pred: P) -> usize {
    let (mut lo, mut hi) = (lo, hi);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}

fn cmp_suffixes(text: &PackedText, a: u64, b: u64) -> Ordering {
    let p = text.len() as u64;
    let (mut a, mut b) = (a, b);
    while a < p && b < p {
        match text.get(a as usize).cmp(&text.get(b as usize)) {
            Ordering::Equal => {
                a += 1;
                b += 1;
            }
            o => return o,
        }
    }
    // the shorter suffix ends in the terminator, which sorts first
    (p - a).cmp(&(p - b))
}

/// A pattern prepared for comparison against suffixes that start one symbol
/// before a unit boundary (or on it, when `s = 1`).
struct Probe<'a> {
    pattern: &'a [u8],
    head: usize,
    units: Vec<u16>,
    per_unit: usize,
}

impl<'a> Probe<'a> {
    fn new(pattern: &'a [u8], scheme: PackingScheme, s: usize) -> Self {
        let head = usize::from(s > 1).min(pattern.len());
        let units = pattern[head..].chunks_exact(s).map(|g| scheme.pack(g).expect("pattern codes validated")).collect();
        Probe { pattern, head, units, per_unit: s }
    }

    /// Compares the suffix at `t` against the pattern; `Equal` means the
    /// pattern is a prefix of the suffix.
    fn cmp(&self, text: &PackedText, t: u64) -> Ordering {
        let p = text.len();
        let mut pos = t as usize;
        let mut i = 0;
        while i < self.head {
            if pos >= p {
                return Ordering::Less;
            }
            match text.get(pos).cmp(&self.pattern[i]) {
                Ordering::Equal => {}
                o => return o,
            }
            pos += 1;
            i += 1;
        }
        debug_assert!(self.units.is_empty() || pos.is_multiple_of(self.per_unit));
        for &u in &self.units {
            if pos + self.per_unit > p {
                return cmp_symbols(text, pos, &self.pattern[i..]);
            }
            match text.unit(pos / self.per_unit).cmp(&u) {
                Ordering::Equal => {}
                o => return o,
            }
            pos += self.per_unit;
            i += self.per_unit;
        }
        cmp_symbols(text, pos, &self.pattern[i..])
    }
}

fn cmp_symbols(text: &PackedText, mut pos: usize, pattern: &[u8]) -> Ordering {
    for &c in pattern {
        if pos >= text.len() {
            return Ordering::Less;
        }
        match text.get(pos).cmp(&c) {
            Ordering::Equal => pos += 1,
            o => return o,
        }
    }
    Ordering::Equal
}

/// Sorts the sampled suffixes of the pseudogenome and encodes their
/// elements.
pub fn build_suffix_index(
    pg: &Pseudogenome,
    reads: &ReadArray,
    alphabet: Alphabet,
    s: u8,
) -> Result<SparseSuffixArray> {
    PackingScheme::for_sparsity(alphabet, s)?;
    let text = pg.text();
    if text.len() > suffix_array::MAX_LENGTH {
        return Err(Error::Config(format!("pseudogenome of {} symbols is too long to sort", text.len())));
    }
    let (_, sa) = suffix_array::SuffixArray::new(text).into_parts();
    let s_us = s as usize;
    let sampled = sa.into_iter().map(|t| t as usize).filter(|&t| t < text.len() && t % s_us == s_us - 1);
    encode_elements(pg, reads, alphabet, s, sampled)
}

/// Encodes elements for sampled positions already in suffix order.
pub fn encode_elements<I: IntoIterator<Item = usize>>(
    pg: &Pseudogenome,
    reads: &ReadArray,
    alphabet: Alphabet,
    s: u8,
    sampled: I,
) -> Result<SparseSuffixArray> {
    let text = pg.text();
    let widths = FieldWidths::for_dimensions(&crate::layout::Dimensions {
        alphabet,
        q: reads.len() as u64,
        m: pg.m() as u64,
        p: text.len() as u64,
        s,
    });
    let s = s as usize;
    let mut bytes = Vec::with_capacity(sample_count(text.len() as u64, s as u8) as usize * widths.element_size());
    for t in sampled {
        let r = reads.furthest_read(t as u64);
        write_le(&mut bytes, r as u64, widths.read_idx);
        write_le(&mut bytes, t as u64 - reads.pg_offset(r), widths.in_read_offset);
        if s > 1 {
            write_le(&mut bytes, pack_base(&text[t + 1 - s..t], alphabet.size()) as u64, widths.prev_symbols);
        }
    }
    SparseSuffixArray::from_raw(alphabet, s as u8, widths, bytes)
}
