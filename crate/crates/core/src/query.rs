//! The seven read-collection queries.
//!
//! Every query starts from the occurrences found in the suffix array. An
//! occurrence at pseudogenome position `t` is addressed through the
//! furthest read `r` covering `t`; the reads containing it in full are `r`,
//! `r-1`, ... for as long as `t - offset(r') + k <= m`. Offsets only shrink
//! going backwards, so the walk stops at the first read that fails.
//!
//! Per-read deduplication (Q1/Q2) and uniqueness filtering (Q5-Q7) use two
//! bitsets owned by the session, reset through a stack of touched reads.
//! Reads not flagged repetitive cannot contain a k-mer of length at least
//! the repetitive threshold twice, so they skip the bitsets entirely.

use std::fmt;
use std::str::FromStr;

use crate::countcache::CacheLookup;
use crate::error::{Error, Result};
use crate::index::PgsaIndex;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum QueryKind {
    Q1,
    Q2,
    Q3,
    Q4,
    Q5,
    Q6,
    Q7,
}

impl QueryKind {
    pub const ALL: [QueryKind; 7] =
        [QueryKind::Q1, QueryKind::Q2, QueryKind::Q3, QueryKind::Q4, QueryKind::Q5, QueryKind::Q6, QueryKind::Q7];
}

impl FromStr for QueryKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "q1" => Ok(QueryKind::Q1),
            "q2" => Ok(QueryKind::Q2),
            "q3" => Ok(QueryKind::Q3),
            "q4" => Ok(QueryKind::Q4),
            "q5" => Ok(QueryKind::Q5),
            "q6" => Ok(QueryKind::Q6),
            "q7" => Ok(QueryKind::Q7),
            _ => Err(Error::Config(format!("unknown query type {s:?}"))),
        }
    }
}

impl fmt::Display for QueryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = QueryKind::ALL.iter().position(|k| k == self).unwrap() + 1;
        write!(f, "q{n}")
    }
}

/// A query string, given either literally or as a slice of an indexed read.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum QueryInput {
    /// ASCII symbols.
    Pattern(Vec<u8>),
    /// `k` symbols of original read `read_id` (0-based) starting at `start`.
    Positional { read_id: u32, start: usize, k: usize },
}

impl QueryInput {
    pub fn pattern(s: impl AsRef<[u8]>) -> Self {
        QueryInput::Pattern(s.as_ref().to_vec())
    }

    pub fn at(read_id: u32, start: usize, k: usize) -> Self {
        QueryInput::Positional { read_id, start, k }
    }
}

/// `k`-mer found in original read `read_id` (0-based) at `pos`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Occurrence {
    pub read_id: u32,
    pub pos: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum QueryAnswer {
    Reads(Vec<u32>),
    Count(u64),
    Positions(Vec<Occurrence>),
}

impl QueryAnswer {
    /// Lists sorted, so answers can be compared as sets.
    pub fn normalized(mut self) -> Self {
        match &mut self {
            QueryAnswer::Reads(v) => v.sort_unstable(),
            QueryAnswer::Positions(v) => v.sort_unstable(),
            QueryAnswer::Count(_) => {}
        }
        self
    }
}

#[derive(Clone, Debug)]
struct Bitset(Vec<u64>);

impl Bitset {
    fn new(n: usize) -> Self {
        Bitset(vec![0; n.div_ceil(64)])
    }

    #[inline]
    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    #[inline]
    fn clear(&mut self, i: usize) {
        self.0[i / 64] &= !(1 << (i % 64));
    }

    fn is_zero(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }
}

#[derive(Clone, Copy, Debug)]
struct Visit {
    read: u32,
    pos: u32,
    // read counted without touching the flags
    direct: bool,
}

/// Per-caller scratch state over a shared index.
#[derive(Clone, Debug)]
pub struct QuerySession<'a> {
    index: &'a PgsaIndex,
    occurrence: Bitset,
    single: Bitset,
    visited: Vec<Visit>,
    use_cache: bool,
    use_repetitive: bool,
}

impl<'a> QuerySession<'a> {
    pub fn new(index: &'a PgsaIndex) -> Self {
        let q = index.read_count();
        QuerySession {
            index,
            occurrence: Bitset::new(q),
            single: Bitset::new(q),
            visited: Vec::new(),
            use_cache: true,
            use_repetitive: true,
        }
    }

    pub fn index(&self) -> &'a PgsaIndex {
        self.index
    }

    /// Answer counting queries from the count cache when possible.
    pub fn with_cache(mut self, on: bool) -> Self {
        self.use_cache = on;
        self
    }

    /// Let non-repetitive reads bypass the flag bookkeeping.
    pub fn with_repetitive_flags(mut self, on: bool) -> Self {
        self.use_repetitive = on;
        self
    }

    /// True when no scratch flag is set.
    pub fn is_clean(&self) -> bool {
        self.occurrence.is_zero() && self.single.is_zero() && self.visited.is_empty()
    }

    /// Codes of the query string, validated for this index.
    pub fn resolve(&self, input: &QueryInput) -> Result<Vec<u8>> {
        let index = self.index;
        let codes = match input {
            QueryInput::Pattern(ascii) => index.alphabet().encode(ascii, 0).map_err(|e| match e {
                Error::InvalidSymbol { symbol, offset, .. } => Error::InvalidSymbol { symbol, read: 0, offset },
                e => e,
            })?,
            &QueryInput::Positional { read_id, start, k } => resolve_positional(index, read_id, start, k)?,
        };
        let s = index.sparsity() as usize;
        if codes.is_empty() || codes.len() < s {
            return Err(Error::PatternTooShort { k: codes.len(), s });
        }
        Ok(codes)
    }

    pub fn run(&mut self, kind: QueryKind, input: &QueryInput) -> Result<QueryAnswer> {
        Ok(match kind {
            QueryKind::Q1 => QueryAnswer::Reads(self.q1_reads(input)?),
            QueryKind::Q2 => QueryAnswer::Count(self.q2_count(input)?),
            QueryKind::Q3 => QueryAnswer::Positions(self.q3_positions(input)?),
            QueryKind::Q4 => QueryAnswer::Count(self.q4_count(input)?),
            QueryKind::Q5 => QueryAnswer::Reads(self.q5_reads(input)?),
            QueryKind::Q6 => QueryAnswer::Count(self.q6_count(input)?),
            QueryKind::Q7 => QueryAnswer::Positions(self.q7_positions(input)?),
        })
    }

    /// Q1: reads containing the k-mer.
    pub fn q1_reads(&mut self, input: &QueryInput) -> Result<Vec<u32>> {
        let codes = self.resolve(input)?;
        let mut out = Vec::new();
        self.distinct_reads(&codes, |r, _| out.push(r))?;
        Ok(out)
    }

    /// Q2: number of reads containing the k-mer.
    pub fn q2_count(&mut self, input: &QueryInput) -> Result<u64> {
        let codes = self.resolve(input)?;
        if let Some(v) = self.cached(&codes, |c| c.q2) {
            return Ok(v);
        }
        let mut n = 0;
        self.distinct_reads(&codes, |_, _| n += 1)?;
        Ok(n)
    }

    /// Q3: every (read, position) occurrence.
    pub fn q3_positions(&mut self, input: &QueryInput) -> Result<Vec<Occurrence>> {
        let codes = self.resolve(input)?;
        let ra = self.index.read_array();
        let mut out = Vec::new();
        scan_with(self.index, &codes, |r, pos| out.push(Occurrence { read_id: ra.orig_index(r), pos }))?;
        Ok(out)
    }

    /// Q4: number of occurrences.
    pub fn q4_count(&mut self, input: &QueryInput) -> Result<u64> {
        let codes = self.resolve(input)?;
        if let Some(v) = self.cached(&codes, |c| c.q4) {
            return Ok(v);
        }
        let mut n = 0;
        scan_with(self.index, &codes, |_, _| n += 1)?;
        Ok(n)
    }

    /// Q5: reads containing the k-mer exactly once.
    pub fn q5_reads(&mut self, input: &QueryInput) -> Result<Vec<u32>> {
        let codes = self.resolve(input)?;
        let mut out = Vec::new();
        self.single_reads(&codes, |r, _| out.push(r))?;
        Ok(out)
    }

    /// Q6: number of reads containing the k-mer exactly once.
    pub fn q6_count(&mut self, input: &QueryInput) -> Result<u64> {
        let codes = self.resolve(input)?;
        if let Some(v) = self.cached(&codes, |c| c.q6) {
            return Ok(v);
        }
        let mut n = 0;
        self.single_reads(&codes, |_, _| n += 1)?;
        Ok(n)
    }

    /// Q7: the occurrences in reads that contain the k-mer exactly once.
    pub fn q7_positions(&mut self, input: &QueryInput) -> Result<Vec<Occurrence>> {
        let codes = self.resolve(input)?;
        let mut out = Vec::new();
        self.single_reads(&codes, |read_id, pos| out.push(Occurrence { read_id, pos }))?;
        Ok(out)
    }

    fn cached(&self, codes: &[u8], pick: impl Fn(crate::countcache::Counts) -> u64) -> Option<u64> {
        if !self.use_cache {
            return None;
        }
        match self.index.cache()?.lookup(codes) {
            CacheLookup::Hit(c) => Some(pick(c)),
            CacheLookup::PartialHit(v) => Some(v),
            CacheLookup::Miss => None,
        }
    }

    fn skips_flags(&self, codes: &[u8]) -> bool {
        let t = self.index.repetitive_threshold() as usize;
        self.use_repetitive && t > 0 && codes.len() >= t
    }

    /// Emits (original read, first position) once per read containing
    /// `codes`, in order of discovery.
    fn distinct_reads<F: FnMut(u32, u32)>(&mut self, codes: &[u8], mut emit: F) -> Result<()> {
        let skip = self.skips_flags(codes);
        let ra = self.index.read_array();
        let mut visited = std::mem::take(&mut self.visited);
        let occurrence = &mut self.occurrence;
        let result = scan_with(self.index, codes, |r, pos| {
            if skip && !ra.is_repetitive(r) {
                emit(ra.orig_index(r), pos);
            } else if !occurrence.get(r) {
                occurrence.set(r);
                visited.push(Visit { read: r as u32, pos, direct: false });
                emit(ra.orig_index(r), pos);
            }
        });
        for v in visited.drain(..) {
            occurrence.clear(v.read as usize);
        }
        self.visited = visited;
        result
    }

    /// Emits (original read, position) for reads containing `codes` exactly
    /// once, in order of discovery.
    fn single_reads<F: FnMut(u32, u32)>(&mut self, codes: &[u8], mut emit: F) -> Result<()> {
        let skip = self.skips_flags(codes);
        let ra = self.index.read_array();
        let mut visited = std::mem::take(&mut self.visited);
        let (occurrence, single) = (&mut self.occurrence, &mut self.single);
        let result = scan_with(self.index, codes, |r, pos| {
            if skip && !ra.is_repetitive(r) {
                visited.push(Visit { read: r as u32, pos, direct: true });
            } else if !occurrence.get(r) {
                occurrence.set(r);
                single.set(r);
                visited.push(Visit { read: r as u32, pos, direct: false });
            } else {
                single.clear(r);
            }
        });
        for v in visited.drain(..) {
            let r = v.read as usize;
            if result.is_ok() && (v.direct || single.get(r)) {
                emit(ra.orig_index(r), v.pos);
            }
            if !v.direct {
                occurrence.clear(r);
                single.clear(r);
            }
        }
        self.visited = visited;
        result
    }
}

/// Visits (ordered read, position) for every occurrence of `codes` fully
/// inside a read.
fn scan_with<F: FnMut(usize, u32)>(index: &PgsaIndex, codes: &[u8], mut visit: F) -> Result<()> {
    let ra = index.read_array();
    let (k, m) = (codes.len() as u64, index.m() as u64);
    index.suffix_array().for_each_occurrence(index.text(), ra, codes, |hit| {
        let start = ra.pg_offset(hit.read_idx as usize) + hit.offset as u64;
        let mut r = hit.read_idx as usize;
        loop {
            let o = start - ra.pg_offset(r);
            if o + k > m {
                break;
            }
            visit(r, o as u32);
            if r == 0 {
                break;
            }
            r -= 1;
        }
    })
}

/// Extracts `k` symbols of original read `read_id` starting at `start`.
pub fn resolve_positional(index: &PgsaIndex, read_id: u32, start: usize, k: usize) -> Result<Vec<u8>> {
    let ra = index.read_array();
    let r = ra.ordered_index(read_id).filter(|&r| r < ra.len()).ok_or(Error::UnknownReadId(read_id as u64))?;
    let m = index.m();
    if start.checked_add(k).is_none_or(|end| end > m) {
        return Err(Error::PositionOutOfRange { start, k, m });
    }
    Ok(index.text().extract(ra.pg_offset(r) as usize + start, k))
}
