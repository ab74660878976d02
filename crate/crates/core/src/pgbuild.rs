//! Pseudogenome construction: a superstring of all reads obtained by greedily
//! chaining reads along their longest suffix/prefix overlaps.
//!
//! Overlap lengths are tried from `m` down to 1. In each pass, every read
//! still lacking a successor looks up the reads still lacking a predecessor
//! whose length-`ol` prefix equals its length-`ol` suffix, and links to the
//! one with the smallest original index. A union-find over chains rejects
//! links that would close a cycle (which also covers self-links). Finished
//! chains are emitted in order of their head's original index, each chain
//! starting a fresh `m`-symbol block.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::ingest::ReadSet;

const NONE: u32 = u32::MAX;

/// Overlap-merged superstring of a read set, plus where each read sits in it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pseudogenome {
    m: usize,
    text: Vec<u8>,
    order: Vec<u32>,
    offsets: Vec<u64>,
}

impl Pseudogenome {
    /// Assembles a pseudogenome from its parts without checking them; see
    /// [`validate_pseudogenome`].
    pub fn from_parts(m: usize, text: Vec<u8>, order: Vec<u32>, offsets: Vec<u64>) -> Self {
        Pseudogenome { m, text, order, offsets }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Codes of the superstring.
    pub fn text(&self) -> &[u8] {
        &self.text
    }

    pub fn len(&self) -> usize {
        self.text.len()
    }

    pub fn is_empty(&self) -> bool {
        self.text.is_empty()
    }

    /// Original (0-based) index of the i-th read in pseudogenome order.
    pub fn order(&self) -> &[u32] {
        &self.order
    }

    /// Start of the i-th ordered read in the text.
    pub fn offsets(&self) -> &[u64] {
        &self.offsets
    }

    pub fn read_count(&self) -> usize {
        self.order.len()
    }
}

struct Chains {
    parent: Vec<u32>,
}

impl Chains {
    fn new(n: usize) -> Self {
        Chains { parent: (0..n as u32).collect() }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grand = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grand;
            x = grand;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        self.parent[rb as usize] = ra;
    }
}

/// Greedy descending-overlap construction, forward orientation only.
pub fn build_pseudogenome(reads: &ReadSet) -> Pseudogenome {
    let q = reads.len();
    let m = reads.m();
    let mut succ = vec![NONE; q];
    let mut pred = vec![NONE; q];
    let mut overlap = vec![0usize; q];
    let mut chains = Chains::new(q);

    for ol in (1..=m).rev() {
        let mut heads: BTreeMap<&[u8], BTreeSet<u32>> = BTreeMap::new();
        for (b, _) in pred.iter().enumerate().filter(|(_, &p)| p == NONE) {
            heads.entry(&reads.read(b)[..ol]).or_default().insert(b as u32);
        }
        for a in 0..q as u32 {
            if succ[a as usize] != NONE {
                continue;
            }
            let Some(candidates) = heads.get_mut(&reads.read(a as usize)[m - ol..]) else {
                continue;
            };
            let root = chains.find(a);
            // only the head of a's own chain can be rejected, so this scans at most two
            let Some(b) = candidates.iter().copied().find(|&b| chains.find(b) != root) else {
                continue;
            };
            candidates.remove(&b);
            succ[a as usize] = b;
            pred[b as usize] = a;
            overlap[b as usize] = ol;
            chains.union(a, b);
        }
    }

    let mut text = Vec::with_capacity(q * m);
    let mut order = Vec::with_capacity(q);
    let mut offsets = Vec::with_capacity(q);
    for head in (0..q).filter(|&i| pred[i] == NONE) {
        let mut cur = head as u32;
        offsets.push(text.len() as u64);
        order.push(cur);
        text.extend_from_slice(reads.read(head));
        while succ[cur as usize] != NONE {
            let next = succ[cur as usize];
            let ol = overlap[next as usize];
            offsets.push((text.len() - ol) as u64);
            order.push(next);
            text.extend_from_slice(&reads.read(next as usize)[ol..]);
            cur = next;
        }
    }
    debug_assert_eq!(order.len(), q);
    Pseudogenome { m, text, order, offsets }
}

/// The first broken pseudogenome invariant found.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PgViolation {
    CountMismatch { order: usize, offsets: usize, reads: usize },
    FirstOffset(u64),
    DeltaOutOfRange { ordered: usize, delta: i128 },
    LastOffset { expected: u64, found: u64 },
    NotPermutation { ordered: usize, read: u32 },
    ReadMismatch { ordered: usize },
}

impl fmt::Display for PgViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PgViolation::CountMismatch { order, offsets, reads } => {
                write!(f, "count mismatch: {order} order entries, {offsets} offsets, {reads} reads")
            }
            PgViolation::FirstOffset(o) => write!(f, "first offset is {o}, expected 0"),
            PgViolation::DeltaOutOfRange { ordered, delta } => {
                write!(f, "delta out of range at ordered read {ordered}: {delta}")
            }
            PgViolation::LastOffset { expected, found } => {
                write!(f, "last offset is {found}, expected p - m = {expected}")
            }
            PgViolation::NotPermutation { ordered, read } => {
                write!(f, "order is not a permutation: read {read} repeated or out of range at ordered read {ordered}")
            }
            PgViolation::ReadMismatch { ordered } => write!(f, "read mismatch at ordered read {ordered}"),
        }
    }
}

impl std::error::Error for PgViolation {}

/// Checks offsets and order against `q`, `m` and the text length `p`.
pub fn check_layout(order: &[u32], offsets: &[u64], q: usize, m: usize, p: u64) -> Result<(), PgViolation> {
    if order.len() != q || offsets.len() != q || q == 0 {
        return Err(PgViolation::CountMismatch { order: order.len(), offsets: offsets.len(), reads: q });
    }
    if offsets[0] != 0 {
        return Err(PgViolation::FirstOffset(offsets[0]));
    }
    for (i, w) in offsets.windows(2).enumerate() {
        let delta = w[1] as i128 - w[0] as i128;
        if !(0..=m as i128).contains(&delta) {
            return Err(PgViolation::DeltaOutOfRange { ordered: i + 1, delta });
        }
    }
    let expected = p.checked_sub(m as u64).unwrap_or(u64::MAX);
    if offsets[q - 1] != expected {
        return Err(PgViolation::LastOffset { expected, found: offsets[q - 1] });
    }
    let mut seen = vec![false; q];
    for (i, &r) in order.iter().enumerate() {
        match seen.get_mut(r as usize) {
            Some(s) if !*s => *s = true,
            _ => return Err(PgViolation::NotPermutation { ordered: i, read: r }),
        }
    }
    Ok(())
}

/// Verifies every pseudogenome invariant against the reads it was built from.
pub fn validate_pseudogenome(pg: &Pseudogenome, reads: &ReadSet) -> Result<(), PgViolation> {
    let m = reads.m();
    if pg.m != m {
        return Err(PgViolation::CountMismatch {
            order: pg.order.len(),
            offsets: pg.offsets.len(),
            reads: reads.len(),
        });
    }
    check_layout(&pg.order, &pg.offsets, reads.len(), m, pg.text.len() as u64)?;
    for (i, (&r, &off)) in pg.order.iter().zip(&pg.offsets).enumerate() {
        let off = off as usize;
        if pg.text[off..off + m] != *reads.read(r as usize) {
            return Err(PgViolation::ReadMismatch { ordered: i });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::LengthPolicy;
    use proptest::prelude::*;

    fn rs(reads: &[&str]) -> ReadSet {
        ReadSet::from_ascii(reads, LengthPolicy::Reject).unwrap()
    }

    #[test]
    fn worked_example() {
        let reads = rs(&["ACGT", "CGTA", "ACGT", "TTTT"]);
        let pg = build_pseudogenome(&reads);
        assert_eq!(reads.alphabet().decode(pg.text()), b"ACGTATTTT");
        assert_eq!(pg.order(), &[0, 2, 1, 3]);
        assert_eq!(pg.offsets(), &[0, 0, 1, 5]);
        validate_pseudogenome(&pg, &reads).unwrap();
    }

    #[test]
    fn identical_reads_collapse() {
        let reads = rs(&["GATTACA"; 6]);
        let pg = build_pseudogenome(&reads);
        assert_eq!(pg.len(), 7);
        assert!(pg.offsets().iter().all(|&o| o == 0));
        assert_eq!(pg.order(), &[0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn disjoint_reads_concatenate() {
        let reads = rs(&["AAA", "CCC", "GGG"]);
        let pg = build_pseudogenome(&reads);
        assert_eq!(pg.len(), 9);
        assert_eq!(pg.offsets(), &[0, 3, 6]);
    }

    #[test]
    fn self_overlap_is_not_linked() {
        // AAAA overlaps itself at every length; alone it must stay a single read
        let reads = rs(&["AAAA"]);
        let pg = build_pseudogenome(&reads);
        assert_eq!(pg.len(), 4);
    }

    fn merge(x: &[u8], y: &[u8]) -> Vec<u8> {
        let ol = (0..=y.len().min(x.len())).rev().find(|&ol| x.ends_with(&y[..ol])).unwrap();
        [x, &y[ol..]].concat()
    }

    #[test]
    fn greedy_is_not_optimal() {
        let ascii = ["CACTA", "TGCAC", "CACAC"];
        let reads = rs(&ascii);
        let pg = build_pseudogenome(&reads);
        validate_pseudogenome(&pg, &reads).unwrap();
        assert_eq!(reads.alphabet().decode(pg.text()), b"TGCACTACACAC");

        // brute force over all merge orders
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let best = perms
            .iter()
            .map(|p| p.iter().fold(Vec::new(), |acc, &i| merge(&acc, ascii[i].as_bytes())).len())
            .min()
            .unwrap();
        assert_eq!(best, 9);
        assert!(pg.len() > best);
    }

    #[test]
    fn violations_are_reported() {
        let reads = rs(&["ACGT", "CGTA", "ACGT", "TTTT"]);
        let pg = build_pseudogenome(&reads);

        let mut text = pg.text().to_vec();
        text[6] = 0;
        let bad = Pseudogenome::from_parts(4, text, pg.order().to_vec(), pg.offsets().to_vec());
        let v = validate_pseudogenome(&bad, &reads).unwrap_err();
        assert_eq!(v, PgViolation::ReadMismatch { ordered: 3 });
        assert_eq!(v.to_string(), "read mismatch at ordered read 3");

        let bad = Pseudogenome::from_parts(4, vec![0; 10], pg.order().to_vec(), vec![0, 0, 1, 6]);
        let v = validate_pseudogenome(&bad, &reads).unwrap_err();
        assert!(matches!(v, PgViolation::DeltaOutOfRange { ordered: 3, delta: 5 }));
        assert!(v.to_string().starts_with("delta out of range"));

        let bad = Pseudogenome::from_parts(4, pg.text().to_vec(), vec![0, 2, 2, 3], pg.offsets().to_vec());
        assert!(matches!(validate_pseudogenome(&bad, &reads), Err(PgViolation::NotPermutation { .. })));
    }

    fn arb_reads() -> impl Strategy<Value = ReadSet> {
        (1usize..12, 1usize..40, 2u8..5).prop_flat_map(|(m, q, sigma)| {
            prop::collection::vec(prop::collection::vec(0..sigma, m), q).prop_map(move |rs| {
                let ascii: Vec<Vec<u8>> = rs.iter().map(|r| r.iter().map(|&c| b"ACGT"[c as usize]).collect()).collect();
                ReadSet::from_ascii(&ascii, LengthPolicy::Reject).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn built_pseudogenomes_are_valid(reads in arb_reads()) {
            let pg = build_pseudogenome(&reads);
            prop_assert_eq!(validate_pseudogenome(&pg, &reads), Ok(()));
            prop_assert!(pg.len() <= reads.len() * reads.m());
            prop_assert_eq!(build_pseudogenome(&reads), pg.clone());
            // duplicates share offsets
            let mut offset_of = vec![0u64; reads.len()];
            for (&r, &o) in pg.order().iter().zip(pg.offsets()) {
                offset_of[r as usize] = o;
            }
            for i in 0..reads.len() {
                for j in 0..i {
                    if reads.read(i) == reads.read(j) {
                        prop_assert_eq!(offset_of[i], offset_of[j]);
                    }
                }
            }
        }
    }
}
