//! DNA symbol codes and the packed-symbol codecs.
//!
//! Codes follow ASCII order of the symbols (`A<C<G<T`, or `A<C<G<N<T` for the
//! five-letter alphabet), so comparing codes compares symbols. A packed unit
//! stores its first symbol in the most significant base-σ digit, which makes
//! integer comparison of two full units equal to lexicographic comparison of
//! the symbol groups.

use std::fmt;

use crate::error::{Error, Result};

/// Largest supported sparsity, and therefore the largest packing density.
pub const MAX_SPARSITY: u8 = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Alphabet {
    /// `ACGT`
    Dna4,
    /// `ACGNT`
    Dna5,
}

const DNA4: &[u8] = b"ACGT";
const DNA5: &[u8] = b"ACGNT";

impl Alphabet {
    pub fn from_size(size: u8) -> Option<Self> {
        match size {
            4 => Some(Alphabet::Dna4),
            5 => Some(Alphabet::Dna5),
            _ => None,
        }
    }

    pub fn size(self) -> u8 {
        self.symbols().len() as u8
    }

    /// Symbols in code order.
    pub fn symbols(self) -> &'static [u8] {
        match self {
            Alphabet::Dna4 => DNA4,
            Alphabet::Dna5 => DNA5,
        }
    }

    /// Code of an ASCII symbol. Lowercase is accepted.
    #[inline]
    pub fn code(self, symbol: u8) -> Option<u8> {
        match (self, symbol.to_ascii_uppercase()) {
            (_, b'A') => Some(0),
            (_, b'C') => Some(1),
            (_, b'G') => Some(2),
            (Alphabet::Dna4, b'T') => Some(3),
            (Alphabet::Dna5, b'N') => Some(3),
            (Alphabet::Dna5, b'T') => Some(4),
            _ => None,
        }
    }

    /// ASCII symbol of a code. Panics if `code >= size`.
    #[inline]
    pub fn symbol(self, code: u8) -> u8 {
        self.symbols()[code as usize]
    }

    /// Rank of a code within `ACGT`, or `None` for `N`.
    #[inline]
    pub fn acgt_rank(self, code: u8) -> Option<u8> {
        match self {
            Alphabet::Dna4 => Some(code),
            Alphabet::Dna5 => match code {
                0..=2 => Some(code),
                4 => Some(3),
                _ => None,
            },
        }
    }

    /// Converts ASCII symbols to codes. `read` is only used for error
    /// reporting.
    pub fn encode(self, text: &[u8], read: usize) -> Result<Vec<u8>> {
        text.iter()
            .enumerate()
            .map(|(offset, &c)| self.code(c).ok_or(Error::InvalidSymbol { symbol: c as char, read, offset }))
            .collect()
    }

    pub fn decode(self, codes: &[u8]) -> Vec<u8> {
        codes.iter().map(|&c| self.symbol(c)).collect()
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(std::str::from_utf8(self.symbols()).unwrap())
    }
}

/// How symbols are grouped into 1- or 2-byte units. The group size always
/// equals the suffix-array sparsity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PackingScheme {
    alphabet: Alphabet,
    per_unit: u8,
    unit_width: u8,
}

impl PackingScheme {
    pub fn for_sparsity(alphabet: Alphabet, s: u8) -> Result<Self> {
        if !(1..=MAX_SPARSITY).contains(&s) {
            return Err(Error::IncompatibleSparsity(s));
        }
        let unit_width = match (alphabet, s) {
            (_, 1) => 1,
            (Alphabet::Dna4, 2..=4) => 1,
            (Alphabet::Dna5, 2..=3) => 1,
            _ => 2,
        };
        Ok(PackingScheme { alphabet, per_unit: s, unit_width })
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn symbols_per_unit(&self) -> usize {
        self.per_unit as usize
    }

    pub fn unit_width(&self) -> usize {
        self.unit_width as usize
    }

    /// σ^symbols_per_unit; every valid unit is below this.
    pub fn unit_count(&self) -> u32 {
        (self.alphabet.size() as u32).pow(self.per_unit as u32)
    }

    /// Packs up to `symbols_per_unit` codes. Missing trailing symbols count
    /// as code 0.
    pub fn pack(&self, codes: &[u8]) -> Result<u16> {
        debug_assert!(!codes.is_empty() && codes.len() <= self.symbols_per_unit());
        let sigma = self.alphabet.size();
        let mut unit = 0u32;
        for i in 0..self.symbols_per_unit() {
            let c = codes.get(i).copied().unwrap_or(0);
            if c >= sigma {
                return Err(Error::InvalidCode(c));
            }
            unit = unit * sigma as u32 + c as u32;
        }
        Ok(unit as u16)
    }

    pub fn unpack(&self, unit: u16) -> Result<Vec<u8>> {
        if unit as u32 >= self.unit_count() {
            return Err(Error::CorruptUnit { unit, max: self.unit_count() - 1 });
        }
        let sigma = self.alphabet.size() as u16;
        let mut out = vec![0u8; self.symbols_per_unit()];
        let mut rest = unit;
        for slot in out.iter_mut().rev() {
            *slot = (rest % sigma) as u8;
            rest /= sigma;
        }
        Ok(out)
    }

    /// Bytes needed for `len` symbols.
    pub fn packed_bytes(&self, len: u64) -> u64 {
        len.div_ceil(self.per_unit as u64) * self.unit_width as u64
    }
}

/// A symbol sequence stored in packed units.
#[derive(Clone, Debug)]
pub struct PackedText {
    scheme: PackingScheme,
    len: usize,
    bytes: Vec<u8>,
    // unit value -> its symbols_per_unit codes
    table: Vec<u8>,
}

impl PartialEq for PackedText {
    fn eq(&self, other: &Self) -> bool {
        self.scheme == other.scheme && self.len == other.len && self.bytes == other.bytes
    }
}

impl Eq for PackedText {}

impl PackedText {
    pub fn pack(codes: &[u8], scheme: PackingScheme) -> Result<Self> {
        let spu = scheme.symbols_per_unit();
        let mut bytes = Vec::with_capacity(scheme.packed_bytes(codes.len() as u64) as usize);
        for group in codes.chunks(spu) {
            let unit = scheme.pack(group)?;
            match scheme.unit_width() {
                1 => bytes.push(unit as u8),
                _ => bytes.extend_from_slice(&unit.to_le_bytes()),
            }
        }
        Ok(Self::with_table(scheme, codes.len(), bytes))
    }

    /// Wraps already-packed bytes, checking every unit.
    pub fn from_raw(bytes: Vec<u8>, len: usize, scheme: PackingScheme) -> Result<Self> {
        if bytes.len() as u64 != scheme.packed_bytes(len as u64) {
            return Err(Error::SectionLengthMismatch(format!(
                "packed text has {} bytes, expected {}",
                bytes.len(),
                scheme.packed_bytes(len as u64)
            )));
        }
        let text = Self::with_table(scheme, len, bytes);
        let max = scheme.unit_count();
        for i in 0..text.unit_len() {
            let unit = text.unit(i);
            if unit as u32 >= max {
                return Err(Error::CorruptUnit { unit, max: max - 1 });
            }
        }
        Ok(text)
    }

    fn with_table(scheme: PackingScheme, len: usize, bytes: Vec<u8>) -> Self {
        let mut table = Vec::with_capacity(scheme.unit_count() as usize * scheme.symbols_per_unit());
        for unit in 0..scheme.unit_count() {
            table.extend(scheme.unpack(unit as u16).unwrap());
        }
        PackedText { scheme, len, bytes, table }
    }

    pub fn scheme(&self) -> PackingScheme {
        self.scheme
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn unit_len(&self) -> usize {
        self.bytes.len() / self.scheme.unit_width()
    }

    #[inline]
    pub fn unit(&self, i: usize) -> u16 {
        match self.scheme.unit_width {
            1 => self.bytes[i] as u16,
            _ => u16::from_le_bytes([self.bytes[2 * i], self.bytes[2 * i + 1]]),
        }
    }

    /// Code at position `i`.
    #[inline]
    pub fn get(&self, i: usize) -> u8 {
        debug_assert!(i < self.len);
        let spu = self.scheme.symbols_per_unit();
        let unit = self.unit(i / spu) as usize;
        self.table[unit * spu + i % spu]
    }

    pub fn extract(&self, start: usize, len: usize) -> Vec<u8> {
        (start..start + len).map(|i| self.get(i)).collect()
    }

    pub fn to_codes(&self) -> Vec<u8> {
        self.extract(0, self.len)
    }
}
