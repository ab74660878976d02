use std::time::{Duration, Instant};

use crate::alphabet::{Alphabet, PackedText, PackingScheme};
use crate::countcache::CountCache;
use crate::error::{Error, Result};
use crate::ingest::ReadSet;
use crate::layout::{component_sizes, CacheLevels, ComponentSizes, Dimensions};
use crate::pgbuild::{build_pseudogenome, check_layout};
use crate::query::QuerySession;
use crate::saindex::{
    build_read_array, build_suffix_index, ReadArray, SparseSuffixArray, DEFAULT_REPETITIVE_THRESHOLD,
};

/// Which count-cache levels to build.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CacheChoice {
    /// Levels picked from the pseudogenome length.
    #[default]
    Auto,
    Levels(CacheLevels),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BuildOptions {
    pub sparsity: u8,
    pub cache: CacheChoice,
    /// Window length of the repetitive-read flag; the flag is consulted for
    /// queries with `k` at least this long.
    pub repetitive_threshold: u8,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { sparsity: 1, cache: CacheChoice::Auto, repetitive_threshold: DEFAULT_REPETITIVE_THRESHOLD as u8 }
    }
}

impl BuildOptions {
    pub fn with_sparsity(s: u8) -> Self {
        BuildOptions { sparsity: s, ..Default::default() }
    }

    pub fn without_cache(mut self) -> Self {
        self.cache = CacheChoice::Levels(CacheLevels::NONE);
        self
    }

    pub fn cache_levels(mut self, levels: CacheLevels) -> Self {
        self.cache = CacheChoice::Levels(levels);
        self
    }
}

/// Wall time of each construction phase.
#[derive(Clone, Debug, Default)]
pub struct BuildReport {
    pub pseudogenome: Duration,
    pub read_array: Duration,
    pub suffix_array: Duration,
    pub cache: Duration,
}

/// Pseudogenome, read array, sparse suffix array and optional count cache.
/// Immutable once built; queries go through a [`QuerySession`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PgsaIndex {
    m: usize,
    text: PackedText,
    reads: ReadArray,
    sa: SparseSuffixArray,
    cache: Option<CountCache>,
    repetitive_threshold: u8,
}

impl PgsaIndex {
    pub fn build(reads: &ReadSet, opts: &BuildOptions) -> Result<Self> {
        Self::build_with_report(reads, opts).map(|(index, _)| index)
    }

    pub fn build_with_report(reads: &ReadSet, opts: &BuildOptions) -> Result<(Self, BuildReport)> {
        let scheme = PackingScheme::for_sparsity(reads.alphabet(), opts.sparsity)?;
        let mut report = BuildReport::default();

        let clock = Instant::now();
        let pg = build_pseudogenome(reads);
        report.pseudogenome = clock.elapsed();

        let clock = Instant::now();
        let ra = build_read_array(&pg, opts.repetitive_threshold as usize);
        report.read_array = clock.elapsed();

        let clock = Instant::now();
        let sa = build_suffix_index(&pg, &ra, reads.alphabet(), opts.sparsity)?;
        let text = PackedText::pack(pg.text(), scheme)?;
        report.suffix_array = clock.elapsed();

        let clock = Instant::now();
        let levels = match opts.cache {
            CacheChoice::Auto => CacheLevels::default_for_length(pg.len() as u64),
            CacheChoice::Levels(l) => l,
        };
        let cache = if levels.is_empty() { None } else { Some(CountCache::build(&text, &ra, reads.m(), levels)?) };
        report.cache = clock.elapsed();

        let index =
            PgsaIndex { m: reads.m(), text, reads: ra, sa, cache, repetitive_threshold: opts.repetitive_threshold };
        Ok((index, report))
    }

    /// Reassembles an index from deserialized parts and checks its
    /// structure. The suffix order is spot-checked on every `stride`-th
    /// element.
    pub fn from_parts(
        m: usize,
        text: PackedText,
        reads: ReadArray,
        sa: SparseSuffixArray,
        cache: Option<CountCache>,
        repetitive_threshold: u8,
        stride: usize,
    ) -> Result<Self> {
        check_layout(reads.orig_indices(), reads.pg_offsets(), reads.len(), m, text.len() as u64)
            .map_err(|v| Error::Invariant(v.to_string()))?;
        sa.verify(&text, &reads, m, stride)?;
        Ok(PgsaIndex { m, text, reads, sa, cache, repetitive_threshold })
    }

    pub fn alphabet(&self) -> Alphabet {
        self.text.scheme().alphabet()
    }

    /// Read length.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Read count.
    pub fn read_count(&self) -> usize {
        self.reads.len()
    }

    /// Pseudogenome length.
    pub fn pg_len(&self) -> usize {
        self.text.len()
    }

    pub fn sparsity(&self) -> u8 {
        self.sa.sparsity()
    }

    pub fn text(&self) -> &PackedText {
        &self.text
    }

    pub fn read_array(&self) -> &ReadArray {
        &self.reads
    }

    pub fn suffix_array(&self) -> &SparseSuffixArray {
        &self.sa
    }

    pub fn cache(&self) -> Option<&CountCache> {
        self.cache.as_ref()
    }

    pub fn cache_levels(&self) -> CacheLevels {
        self.cache.as_ref().map_or(CacheLevels::NONE, |c| c.levels())
    }

    pub fn repetitive_threshold(&self) -> u8 {
        self.repetitive_threshold
    }

    pub fn dimensions(&self) -> Dimensions {
        Dimensions {
            alphabet: self.alphabet(),
            q: self.read_count() as u64,
            m: self.m as u64,
            p: self.pg_len() as u64,
            s: self.sparsity(),
        }
    }

    pub fn component_sizes(&self) -> ComponentSizes {
        component_sizes(&self.dimensions(), self.cache_levels()).expect("sparsity validated at construction")
    }

    /// p / (q·m).
    pub fn compaction_ratio(&self) -> f64 {
        self.pg_len() as f64 / (self.read_count() as f64 * self.m as f64)
    }

    /// Codes of an original read.
    pub fn read_codes(&self, orig: u32) -> Option<Vec<u8>> {
        let r = self.reads.ordered_index(orig)?;
        Some(self.text.extract(self.reads.pg_offset(r) as usize, self.m))
    }

    /// Recovers the reads in their original order.
    pub fn to_read_set(&self) -> ReadSet {
        let mut codes = Vec::with_capacity(self.read_count() * self.m);
        for orig in 0..self.read_count() as u32 {
            codes.extend(self.read_codes(orig).expect("read array is a permutation"));
        }
        ReadSet::from_codes(self.alphabet(), self.m, codes).expect("index holds valid reads")
    }

    pub fn session(&self) -> QuerySession<'_> {
        QuerySession::new(self)
    }
}
