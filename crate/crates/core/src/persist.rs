//! On-disk index format.
//!
//! ```text
//! offset size  field
//!      0    4  magic "PGSA"
//!      4    1  format version (1)
//!      5    1  alphabet size (4 or 5)
//!      6    5  symbols in code order, ASCII, zero padded
//!     11    2  m, read length
//!     13    4  q, read count
//!     17    8  p, pseudogenome length
//!     25    1  s, sparsity
//!     26    1  read-index width (3|4)
//!     27    1  in-read offset width (1|2)
//!     28    1  pseudogenome offset width (4|8)
//!     29    1  preceding-symbols width (0|1|2)
//!     30    1  packed unit width (1|2)
//!     31    1  repetitive-read window length
//!     32    1  count cache: full levels up to k (0 = none)
//!     33    1  count cache: bit 0 = k=12 level, bit 1 = k=13 level
//!     34   32  section lengths: pseudogenome, read array, suffix array, cache
//!     66       sections in that order
//!    end    8  CRC-64/XZ of everything before it
//! ```
//!
//! Integers are little-endian. A read-array record is the pseudogenome
//! offset, a flag byte (bit 0 = repetitive) and the 4-byte original index.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use crc::{Crc, Digest, CRC_64_XZ};

use crate::alphabet::{Alphabet, PackedText, PackingScheme};
use crate::countcache::CountCache;
use crate::error::{Error, Result};
use crate::index::PgsaIndex;
use crate::layout::{component_sizes, CacheLevels, Dimensions, FieldWidths};
use crate::saindex::{ReadArray, ReadArrayEntry, SparseSuffixArray};

pub const MAGIC: &[u8; 4] = b"PGSA";
pub const FORMAT_VERSION: u8 = 1;
pub const HEADER_LEN: usize = 66;
pub const CHECKSUM_LEN: usize = 8;

const FLAG_REPETITIVE: u8 = 1;
const CACHE_PARTIAL12: u8 = 1;
const CACHE_PARTIAL13: u8 = 2;

static CRC64: Crc<u64> = Crc::<u64>::new(&CRC_64_XZ);

struct Checked<'c, W> {
    inner: W,
    digest: Digest<'c, u64>,
    count: u64,
}

impl<W: Write> Write for Checked<'_, W> {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.digest.update(&buf[..n]);
        self.count += n as u64;
        Ok(n)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.inner.flush()
    }
}

/// Parsed fixed-size header.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Header {
    pub dims: Dimensions,
    pub widths: FieldWidths,
    pub unit_width: u8,
    pub repetitive_threshold: u8,
    pub cache: CacheLevels,
    pub sections: [u64; 4],
}

impl Header {
    fn of(index: &PgsaIndex) -> Self {
        let sizes = index.component_sizes();
        Header {
            dims: index.dimensions(),
            widths: index.suffix_array().widths(),
            unit_width: index.text().scheme().unit_width() as u8,
            repetitive_threshold: index.repetitive_threshold(),
            cache: index.cache_levels(),
            sections: [sizes.pg, sizes.read_array, sizes.sa, sizes.lut],
        }
    }

    fn write<W: Write>(&self, w: &mut W) -> io::Result<()> {
        let d = &self.dims;
        w.write_all(MAGIC)?;
        w.write_u8(FORMAT_VERSION)?;
        w.write_u8(d.alphabet.size())?;
        let mut symbols = [0u8; 5];
        symbols[..d.alphabet.symbols().len()].copy_from_slice(d.alphabet.symbols());
        w.write_all(&symbols)?;
        w.write_u16::<LittleEndian>(d.m as u16)?;
        w.write_u32::<LittleEndian>(d.q as u32)?;
        w.write_u64::<LittleEndian>(d.p)?;
        w.write_u8(d.s)?;
        w.write_all(&[
            self.widths.read_idx,
            self.widths.in_read_offset,
            self.widths.pg_offset,
            self.widths.prev_symbols,
            self.unit_width,
            self.repetitive_threshold,
            self.cache.full_k,
            (self.cache.partial12 as u8 * CACHE_PARTIAL12) | (self.cache.partial13 as u8 * CACHE_PARTIAL13),
        ])?;
        for len in self.sections {
            w.write_u64::<LittleEndian>(len)?;
        }
        Ok(())
    }

    /// Parses and cross-checks the header against the size formulas.
    pub fn parse(bytes: &[u8]) -> Result<Self> {
        if bytes.len() >= MAGIC.len() && &bytes[..MAGIC.len()] != MAGIC {
            return Err(Error::BadMagic);
        }
        if bytes.len() < HEADER_LEN {
            return Err(Error::SectionLengthMismatch(format!(
                "file has {} bytes, header needs {HEADER_LEN}",
                bytes.len()
            )));
        }
        let mut r = &bytes[MAGIC.len()..HEADER_LEN];
        let version = r.read_u8()?;
        if version != FORMAT_VERSION {
            return Err(Error::UnsupportedVersion(version));
        }
        let alphabet = Alphabet::from_size(r.read_u8()?).ok_or_else(|| Error::Invariant("bad alphabet size".into()))?;
        let mut symbols = [0u8; 5];
        r.read_exact(&mut symbols)?;
        if &symbols[..alphabet.symbols().len()] != alphabet.symbols() {
            return Err(Error::Invariant(format!("unexpected symbol order {:?}", String::from_utf8_lossy(&symbols))));
        }
        let m = r.read_u16::<LittleEndian>()? as u64;
        let q = r.read_u32::<LittleEndian>()? as u64;
        let p = r.read_u64::<LittleEndian>()?;
        let s = r.read_u8()?;
        let mut f = [0u8; 8];
        r.read_exact(&mut f)?;
        let widths = FieldWidths { read_idx: f[0], in_read_offset: f[1], pg_offset: f[2], prev_symbols: f[3] };
        let cache = CacheLevels {
            full_k: f[6],
            partial12: f[7] & CACHE_PARTIAL12 != 0,
            partial13: f[7] & CACHE_PARTIAL13 != 0,
        };
        let mut sections = [0u64; 4];
        for len in &mut sections {
            *len = r.read_u64::<LittleEndian>()?;
        }
        let header = Header {
            dims: Dimensions { alphabet, q, m, p, s },
            widths,
            unit_width: f[4],
            repetitive_threshold: f[5],
            cache,
            sections,
        };

        let scheme = PackingScheme::for_sparsity(alphabet, s)?;
        if widths != FieldWidths::for_dimensions(&header.dims) || header.unit_width as usize != scheme.unit_width() {
            return Err(Error::SectionLengthMismatch(format!(
                "field widths {widths:?} do not match the index dimensions"
            )));
        }
        let sizes = component_sizes(&header.dims, cache)?;
        let expected = [sizes.pg, sizes.read_array, sizes.sa, sizes.lut];
        if sections != expected {
            return Err(Error::SectionLengthMismatch(format!("declared sections {sections:?}, expected {expected:?}")));
        }
        Ok(header)
    }

    pub fn file_len(&self) -> u64 {
        HEADER_LEN as u64 + self.sections.iter().sum::<u64>() + CHECKSUM_LEN as u64
    }
}

/// Writes the index and returns the number of bytes written.
pub fn save_index<W: Write>(index: &PgsaIndex, sink: W) -> Result<u64> {
    let header = Header::of(index);
    let mut w = Checked { inner: sink, digest: CRC64.digest(), count: 0 };
    header.write(&mut w)?;

    w.write_all(index.text().as_bytes())?;

    let pg_width = header.widths.pg_offset as usize;
    let mut buf = Vec::with_capacity(64 * 1024);
    for e in index.read_array().entries() {
        buf.extend_from_slice(&e.pg_offset.to_le_bytes()[..pg_width]);
        buf.push(if e.repetitive { FLAG_REPETITIVE } else { 0 });
        buf.extend_from_slice(&e.orig_index.to_le_bytes());
        if buf.len() >= 60 * 1024 {
            w.write_all(&buf)?;
            buf.clear();
        }
    }
    w.write_all(&buf)?;

    w.write_all(index.suffix_array().as_bytes())?;

    if let Some(cache) = index.cache() {
        let mut bytes = Vec::new();
        cache.write_bytes(&mut bytes);
        w.write_all(&bytes)?;
    }

    let checksum = w.digest.clone().finalize();
    let mut inner = w.inner;
    inner.write_u64::<LittleEndian>(checksum)?;
    inner.flush()?;
    debug_assert_eq!(w.count + CHECKSUM_LEN as u64, header.file_len());
    Ok(w.count + CHECKSUM_LEN as u64)
}

/// Reads an index, spot-checking about a thousand suffix-array elements.
pub fn load_index<R: Read>(source: R) -> Result<PgsaIndex> {
    load_index_checked(source, None)
}

/// Reads an index, checking every `stride`-th suffix-array element (all of
/// them for `Some(1)`).
pub fn load_index_checked<R: Read>(mut source: R, stride: Option<usize>) -> Result<PgsaIndex> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    let header = Header::parse(&bytes)?;
    if bytes.len() as u64 != header.file_len() {
        return Err(Error::SectionLengthMismatch(format!(
            "file has {} bytes, header implies {}",
            bytes.len(),
            header.file_len()
        )));
    }
    let body_end = bytes.len() - CHECKSUM_LEN;
    let stored = u64::from_le_bytes(bytes[body_end..].try_into().unwrap());
    let computed = CRC64.checksum(&bytes[..body_end]);
    if stored != computed {
        return Err(Error::ChecksumMismatch { stored, computed });
    }

    let d = header.dims;
    let mut rest = &bytes[HEADER_LEN..body_end];
    let mut take = |n: u64| {
        let (head, tail) = rest.split_at(n as usize);
        rest = tail;
        head
    };
    let [pg_len, ra_len, sa_len, cache_len] = header.sections;

    let scheme = PackingScheme::for_sparsity(d.alphabet, d.s)?;
    let text = PackedText::from_raw(take(pg_len).to_vec(), d.p as usize, scheme)?;

    let pg_width = header.widths.pg_offset as usize;
    let entries: Vec<ReadArrayEntry> = take(ra_len)
        .chunks_exact(header.widths.record_size())
        .map(|rec| {
            let mut off = [0u8; 8];
            off[..pg_width].copy_from_slice(&rec[..pg_width]);
            ReadArrayEntry {
                pg_offset: u64::from_le_bytes(off),
                repetitive: rec[pg_width] & FLAG_REPETITIVE != 0,
                orig_index: u32::from_le_bytes(rec[pg_width + 1..pg_width + 5].try_into().unwrap()),
            }
        })
        .collect();
    let reads = ReadArray::from_entries(&entries);

    let sa = SparseSuffixArray::from_raw(d.alphabet, d.s, header.widths, take(sa_len).to_vec())?;

    let cache_bytes = take(cache_len);
    let cache = if header.cache.is_empty() {
        None
    } else {
        Some(CountCache::from_bytes(d.alphabet, header.cache, cache_bytes)?)
    };

    let stride = stride.unwrap_or_else(|| (sa.len() / 1024).max(1));
    PgsaIndex::from_parts(d.m as usize, text, reads, sa, cache, header.repetitive_threshold, stride)
}

pub fn save_index_to_path(index: &PgsaIndex, path: &Path) -> Result<u64> {
    save_index(index, BufWriter::new(File::create(path)?))
}

pub fn load_index_from_path(path: &Path) -> Result<PgsaIndex> {
    load_index(BufReader::new(File::open(path)?))
}
