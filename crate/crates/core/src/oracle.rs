//! Brute-force reference answers computed directly from the reads, with no
//! pseudogenome or suffix array involved.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::ingest::ReadSet;
use crate::query::{Occurrence, QueryAnswer, QueryInput, QueryKind};

/// Every length-`k` substring of every read, mapped to where it occurs.
pub struct OracleIndex<'a> {
    k: usize,
    map: HashMap<&'a [u8], Vec<Occurrence>>,
}

impl<'a> OracleIndex<'a> {
    pub fn new(reads: &'a ReadSet, k: usize) -> Self {
        let mut map: HashMap<&[u8], Vec<Occurrence>> = HashMap::new();
        if k >= 1 && k <= reads.m() {
            for (read_id, read) in reads.iter().enumerate() {
                for pos in 0..=read.len() - k {
                    map.entry(&read[pos..pos + k])
                        .or_default()
                        .push(Occurrence { read_id: read_id as u32, pos: pos as u32 });
                }
            }
        }
        OracleIndex { k, map }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Total number of indexed substrings, `q·(m-k+1)`.
    pub fn total(&self) -> usize {
        self.map.values().map(Vec::len).sum()
    }

    /// Occurrences of a code pattern, sorted by (read, pos).
    pub fn occurrences(&self, pattern: &[u8]) -> &[Occurrence] {
        debug_assert_eq!(pattern.len(), self.k);
        self.map.get(pattern).map_or(&[], Vec::as_slice)
    }

    pub fn answer(&self, kind: QueryKind, pattern: &[u8]) -> QueryAnswer {
        let occ = self.occurrences(pattern);
        let mut per_read: Vec<(u32, Vec<u32>)> = Vec::new();
        for o in occ {
            match per_read.last_mut() {
                Some((r, v)) if *r == o.read_id => v.push(o.pos),
                _ => per_read.push((o.read_id, vec![o.pos])),
            }
        }
        let reads = || per_read.iter().map(|(r, _)| *r).collect::<Vec<_>>();
        let unique = || per_read.iter().filter(|(_, v)| v.len() == 1);
        match kind {
            QueryKind::Q1 => QueryAnswer::Reads(reads()),
            QueryKind::Q2 => QueryAnswer::Count(per_read.len() as u64),
            QueryKind::Q3 => QueryAnswer::Positions(occ.to_vec()),
            QueryKind::Q4 => QueryAnswer::Count(occ.len() as u64),
            QueryKind::Q5 => QueryAnswer::Reads(unique().map(|(r, _)| *r).collect()),
            QueryKind::Q6 => QueryAnswer::Count(unique().count() as u64),
            QueryKind::Q7 => {
                QueryAnswer::Positions(unique().map(|(r, v)| Occurrence { read_id: *r, pos: v[0] }).collect())
            }
        }
    }
}

/// Codes of a query string, taken straight from the reads.
pub fn oracle_pattern(reads: &ReadSet, input: &QueryInput) -> Result<Vec<u8>> {
    let codes = match input {
        QueryInput::Pattern(ascii) => reads.alphabet().encode(ascii, 0)?,
        &QueryInput::Positional { read_id, start, k } => {
            if read_id as usize >= reads.len() {
                return Err(Error::UnknownReadId(read_id as u64));
            }
            if start.checked_add(k).is_none_or(|end| end > reads.m()) {
                return Err(Error::PositionOutOfRange { start, k, m: reads.m() });
            }
            reads.read(read_id as usize)[start..start + k].to_vec()
        }
    };
    if codes.is_empty() {
        return Err(Error::PatternTooShort { k: 0, s: 1 });
    }
    Ok(codes)
}

/// Answers one query by enumerating all read substrings of the query length.
pub fn oracle_query(reads: &ReadSet, kind: QueryKind, input: &QueryInput) -> Result<QueryAnswer> {
    let codes = oracle_pattern(reads, input)?;
    Ok(OracleIndex::new(reads, codes.len()).answer(kind, &codes))
}
