//! FASTA/FASTQ parsing into an equal-length [`ReadSet`].

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use crate::alphabet::Alphabet;
use crate::error::{Error, Result};

/// Longest read the index can address with a 2-byte in-read offset.
pub const MAX_READ_LEN: usize = u16::MAX as usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Fasta,
    Fastq,
    /// Decided by the first non-blank character: `>` or `@`.
    Auto,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fasta" | "fa" => Ok(Format::Fasta),
            "fastq" | "fq" => Ok(Format::Fastq),
            "auto" => Ok(Format::Auto),
            _ => Err(Error::Config(format!("unknown input format {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LengthPolicy {
    /// Unequal read lengths are an error.
    #[default]
    Reject,
    /// Truncate every read to the shortest length present.
    TrimToMin,
}

impl FromStr for LengthPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reject" => Ok(LengthPolicy::Reject),
            "trim" | "trim_to_min" | "trim-to-min" => Ok(LengthPolicy::TrimToMin),
            _ => Err(Error::Config(format!("unknown length policy {s:?}"))),
        }
    }
}

/// `q` reads of exactly `m` symbols each, stored as codes in one buffer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReadSet {
    alphabet: Alphabet,
    m: usize,
    codes: Vec<u8>,
}

impl ReadSet {
    /// Builds a read set from ASCII sequences. The alphabet is `ACGT` unless
    /// an `N` occurs somewhere.
    pub fn from_ascii<S: AsRef<[u8]>>(reads: &[S], policy: LengthPolicy) -> Result<Self> {
        let first = reads.first().ok_or(Error::EmptyInput)?.as_ref().len();
        let m = match policy {
            LengthPolicy::Reject => {
                for (i, r) in reads.iter().enumerate() {
                    if r.as_ref().len() != first {
                        return Err(Error::LengthMismatch { read: i, len: r.as_ref().len(), expected: first });
                    }
                }
                first
            }
            LengthPolicy::TrimToMin => reads.iter().map(|r| r.as_ref().len()).min().unwrap(),
        };
        if m == 0 {
            return Err(Error::LengthMismatch { read: 0, len: 0, expected: 1 });
        }
        if m > MAX_READ_LEN {
            return Err(Error::ReadTooLong(m));
        }

        let mut has_n = false;
        for (i, r) in reads.iter().enumerate() {
            for (offset, &c) in r.as_ref()[..m].iter().enumerate() {
                match c.to_ascii_uppercase() {
                    b'A' | b'C' | b'G' | b'T' => {}
                    b'N' => has_n = true,
                    _ => return Err(Error::InvalidSymbol { symbol: c as char, read: i, offset }),
                }
            }
        }
        let alphabet = if has_n { Alphabet::Dna5 } else { Alphabet::Dna4 };
        let mut codes = Vec::with_capacity(reads.len() * m);
        for (i, r) in reads.iter().enumerate() {
            codes.extend(alphabet.encode(&r.as_ref()[..m], i)?);
        }
        Ok(ReadSet { alphabet, m, codes })
    }

    /// Builds a read set from codes laid out read after read.
    pub fn from_codes(alphabet: Alphabet, m: usize, codes: Vec<u8>) -> Result<Self> {
        if m == 0 || codes.is_empty() {
            return Err(Error::EmptyInput);
        }
        if m > MAX_READ_LEN {
            return Err(Error::ReadTooLong(m));
        }
        if !codes.len().is_multiple_of(m) {
            return Err(Error::LengthMismatch { read: codes.len() / m, len: codes.len() % m, expected: m });
        }
        if let Some(pos) = codes.iter().position(|&c| c >= alphabet.size()) {
            return Err(Error::InvalidCode(codes[pos]));
        }
        Ok(ReadSet { alphabet, m, codes })
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    /// Read length.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Read count.
    pub fn len(&self) -> usize {
        self.codes.len() / self.m
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    /// Codes of read `i` (0-based, input order).
    #[inline]
    pub fn read(&self, i: usize) -> &[u8] {
        &self.codes[i * self.m..(i + 1) * self.m]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[u8]> + '_ {
        self.codes.chunks_exact(self.m)
    }

    /// Writes the reads as ASCII, one per line.
    pub fn dump<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for r in self.iter() {
            out.write_all(&self.alphabet.decode(r))?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Parses and validates reads from a byte stream.
pub fn load_reads<R: BufRead>(source: R, format: Format, policy: LengthPolicy) -> Result<ReadSet> {
    let records = parse_records(source, format)?;
    ReadSet::from_ascii(&records, policy)
}

/// Opens a possibly gzip-compressed file for reading.
pub fn open_input(path: &Path) -> Result<Box<dyn BufRead>> {
    let mut file = BufReader::new(File::open(path)?);
    let head = file.fill_buf()?;
    if head.starts_with(&[0x1f, 0x8b]) {
        #[cfg(feature = "gzip")]
        {
            return Ok(Box::new(BufReader::new(flate2::bufread::MultiGzDecoder::new(file))));
        }
        #[cfg(not(feature = "gzip"))]
        return Err(Error::Config("gzip input requires the `gzip` feature".into()));
    }
    Ok(Box::new(file))
}

/// Loads and concatenates reads from several files in argument order.
pub fn load_read_files<P: AsRef<Path>>(paths: &[P], format: Format, policy: LengthPolicy) -> Result<ReadSet> {
    let mut records = Vec::new();
    for p in paths {
        records.extend(parse_records(open_input(p.as_ref())?, format)?);
    }
    ReadSet::from_ascii(&records, policy)
}

/// Raw ASCII sequences in file order; no symbol validation.
pub fn parse_records<R: BufRead>(source: R, format: Format) -> Result<Vec<Vec<u8>>> {
    let mut lines = Lines { inner: source, line_no: 0, buf: Vec::new() };
    let format = match format {
        Format::Auto => match lines.peek_first()? {
            Some(b'>') => Format::Fasta,
            Some(b'@') => Format::Fastq,
            Some(c) => {
                return Err(Error::Parse {
                    line: lines.line_no + 1,
                    msg: format!("unexpected leading character {:?}", c as char),
                })
            }
            None => return Ok(Vec::new()),
        },
        f => f,
    };
    match format {
        Format::Fasta => parse_fasta(lines),
        _ => parse_fastq(lines),
    }
}

struct Lines<R> {
    inner: R,
    line_no: usize,
    buf: Vec<u8>,
}

impl<R: BufRead> Lines<R> {
    fn peek_first(&mut self) -> Result<Option<u8>> {
        loop {
            let buf = self.inner.fill_buf()?;
            match buf.first() {
                None => return Ok(None),
                Some(b'\n') | Some(b'\r') | Some(b' ') | Some(b'\t') => {
                    if buf[0] == b'\n' {
                        self.line_no += 1;
                    }
                    self.inner.consume(1);
                }
                Some(&c) => return Ok(Some(c)),
            }
        }
    }

    /// Next line without its terminator, or `None` at end of input.
    fn next_line(&mut self) -> Result<Option<&[u8]>> {
        self.buf.clear();
        if self.inner.read_until(b'\n', &mut self.buf)? == 0 {
            return Ok(None);
        }
        self.line_no += 1;
        while matches!(self.buf.last(), Some(b'\n') | Some(b'\r')) {
            self.buf.pop();
        }
        Ok(Some(&self.buf))
    }
}

fn parse_fasta<R: BufRead>(mut lines: Lines<R>) -> Result<Vec<Vec<u8>>> {
    let mut records: Vec<Vec<u8>> = Vec::new();
    let mut in_record = false;
    let mut header_line = 0;
    while let Some(line) = lines.next_line()? {
        if line.first() == Some(&b'>') {
            if in_record && records.last().is_some_and(|r| r.is_empty()) {
                return Err(Error::Parse { line: header_line, msg: "record has an empty sequence".into() });
            }
            records.push(Vec::new());
            in_record = true;
            header_line = lines.line_no;
        } else if !line.is_empty() {
            if !in_record {
                return Err(Error::Parse { line: lines.line_no, msg: "sequence before first '>' header".into() });
            }
            records.last_mut().unwrap().extend_from_slice(line);
        }
    }
    if in_record && records.last().is_some_and(|r| r.is_empty()) {
        return Err(Error::Parse { line: header_line, msg: "record has an empty sequence".into() });
    }
    Ok(records)
}

fn parse_fastq<R: BufRead>(mut lines: Lines<R>) -> Result<Vec<Vec<u8>>> {
    let mut records = Vec::new();
    loop {
        let header = match lines.next_line()? {
            None => break,
            Some([]) => continue,
            Some(h) => h,
        };
        if header[0] != b'@' {
            return Err(Error::Parse { line: lines.line_no, msg: "expected '@' header".into() });
        }
        let truncated = |line| Error::Parse { line, msg: "truncated FASTQ record".into() };
        let seq = match lines.next_line()? {
            Some(seq) => seq.to_vec(),
            None => return Err(truncated(lines.line_no)),
        };
        if seq.is_empty() {
            return Err(Error::Parse { line: lines.line_no, msg: "record has an empty sequence".into() });
        }
        match lines.next_line()? {
            Some(sep) if sep.first() == Some(&b'+') => {}
            Some(_) => return Err(Error::Parse { line: lines.line_no, msg: "expected '+' separator".into() }),
            None => return Err(truncated(lines.line_no)),
        }
        let qual_len = match lines.next_line()? {
            Some(qual) => qual.len(),
            None => return Err(truncated(lines.line_no)),
        };
        if qual_len != seq.len() {
            return Err(Error::Parse {
                line: lines.line_no,
                msg: "quality length differs from sequence length".into(),
            });
        }
        records.push(seq);
    }
    Ok(records)
}
