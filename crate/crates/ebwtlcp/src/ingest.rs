//! Input parsing and column transposition.
//!
//! The builder consumes one symbol per string per iteration, scanning the
//! strings right to left. To keep that access pattern sequential on disk the
//! collection is transposed up front: column file `j` holds, for every string
//! in input order, the symbol `j+1` positions from the right end (or the
//! end-marker, or a pad mark once the string is exhausted). Iteration `j`
//! then reads exactly one column file, once, front to back.

use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::alphabet::{Alphabet, AlphabetScanner, CollectionMeta, END_MARKER_CODE};
use crate::error::{Error, Result};
use crate::io_audit::{AuditStats, FileClass, TrackedReader, TrackedWriter};

/// Supported input layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    /// Decide from the first byte: `>` fasta, `@` fastq, anything else lines.
    Auto,
    /// One string per line, LF or CRLF, no blank lines.
    Lines,
    Fasta,
    Fastq,
}

impl InputFormat {
    pub fn name(self) -> &'static str {
        match self {
            InputFormat::Auto => "auto",
            InputFormat::Lines => "lines",
            InputFormat::Fasta => "fasta",
            InputFormat::Fastq => "fastq",
        }
    }
}

impl std::str::FromStr for InputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(InputFormat::Auto),
            "lines" => Ok(InputFormat::Lines),
            "fasta" => Ok(InputFormat::Fasta),
            "fastq" => Ok(InputFormat::Fastq),
            other => Err(Error::InvalidConfig(format!("unknown format `{other}`"))),
        }
    }
}

/// Where the strings come from. The pipeline replays the source once per
/// pass (alphabet scan, then transposition windows), so it must be rewindable.
#[derive(Debug, Clone)]
pub enum CollectionSource {
    Path { path: PathBuf, format: InputFormat },
    Memory(Vec<Vec<u8>>),
}

impl CollectionSource {
    pub fn path(path: impl Into<PathBuf>, format: InputFormat) -> Self {
        CollectionSource::Path {
            path: path.into(),
            format,
        }
    }

    /// Start a fresh pass over the records.
    pub fn records(&self) -> Result<RecordReader<'_>> {
        match self {
            CollectionSource::Path { path, format } => {
                let format = resolve_format(path, *format)?;
                let file = BufReader::with_capacity(64 * 1024, File::open(path)?);
                let kind = match format {
                    InputFormat::Lines => ReaderKind::Lines(file),
                    InputFormat::Fasta => ReaderKind::Fasta {
                        file,
                        pending_header: false,
                        started: false,
                    },
                    InputFormat::Fastq => ReaderKind::Fastq(file),
                    InputFormat::Auto => unreachable!("resolve_format returns a concrete format"),
                };
                Ok(RecordReader { kind, index: 0 })
            }
            CollectionSource::Memory(items) => Ok(RecordReader {
                kind: ReaderKind::Memory { items, pos: 0 },
                index: 0,
            }),
        }
    }
}

/// Resolve `Auto` by peeking at the first byte of the file.
pub fn resolve_format(path: &Path, format: InputFormat) -> Result<InputFormat> {
    if format != InputFormat::Auto {
        return Ok(format);
    }
    let mut first = [0u8; 1];
    let n = File::open(path)?.read(&mut first)?;
    Ok(match first[..n].first() {
        Some(b'>') => InputFormat::Fasta,
        Some(b'@') => InputFormat::Fastq,
        _ => InputFormat::Lines,
    })
}

enum ReaderKind<'a> {
    Lines(BufReader<File>),
    Fasta {
        file: BufReader<File>,
        pending_header: bool,
        started: bool,
    },
    Fastq(BufReader<File>),
    Memory {
        items: &'a [Vec<u8>],
        pos: usize,
    },
}

/// Streams records in file order. `next_record` fills the caller's buffer so
/// a full pass allocates nothing per record.
pub struct RecordReader<'a> {
    kind: ReaderKind<'a>,
    index: usize,
}

fn read_line(file: &mut BufReader<File>, line: &mut Vec<u8>) -> Result<bool> {
    line.clear();
    let n = file.read_until(b'\n', line)?;
    if n == 0 {
        return Ok(false);
    }
    if line.last() == Some(&b'\n') {
        line.pop();
    }
    if line.last() == Some(&b'\r') {
        line.pop();
    }
    Ok(true)
}

impl RecordReader<'_> {
    /// Fetch the next record into `buf`. Returns `false` at end of input.
    pub fn next_record(&mut self, buf: &mut Vec<u8>) -> Result<bool> {
        buf.clear();
        let got = match &mut self.kind {
            ReaderKind::Lines(file) => {
                if !read_line(file, buf)? {
                    false
                } else if buf.is_empty() {
                    return Err(Error::MalformedRecord {
                        format: "lines",
                        index: self.index,
                        reason: "blank line".into(),
                    });
                } else {
                    true
                }
            }
            ReaderKind::Fasta {
                file,
                pending_header,
                started,
            } => {
                let mut line = Vec::new();
                let mut in_record = *pending_header;
                *pending_header = false;
                loop {
                    if !read_line(file, &mut line)? {
                        break in_record;
                    }
                    if line.is_empty() {
                        continue;
                    }
                    if line[0] == b'>' {
                        if !*started {
                            *started = true;
                            in_record = true;
                            continue;
                        }
                        if in_record {
                            // Next record's header; hand the current one out.
                            *pending_header = true;
                            break true;
                        }
                        in_record = true;
                        continue;
                    }
                    if !*started {
                        return Err(Error::MalformedRecord {
                            format: "fasta",
                            index: self.index,
                            reason: "sequence data before the first header".into(),
                        });
                    }
                    buf.extend_from_slice(&line);
                }
            }
            ReaderKind::Fastq(file) => {
                let mut header = Vec::new();
                if !read_line(file, &mut header)? {
                    false
                } else {
                    if header.first() != Some(&b'@') {
                        return Err(Error::MalformedRecord {
                            format: "fastq",
                            index: self.index,
                            reason: "record does not start with `@`".into(),
                        });
                    }
                    let mut sep = Vec::new();
                    let mut qual = Vec::new();
                    if !read_line(file, buf)? || !read_line(file, &mut sep)? || !read_line(file, &mut qual)?
                    {
                        return Err(Error::MalformedRecord {
                            format: "fastq",
                            index: self.index,
                            reason: "truncated quartet".into(),
                        });
                    }
                    if sep.first() != Some(&b'+') {
                        return Err(Error::MalformedRecord {
                            format: "fastq",
                            index: self.index,
                            reason: "separator line does not start with `+`".into(),
                        });
                    }
                    if qual.len() != buf.len() {
                        return Err(Error::MalformedRecord {
                            format: "fastq",
                            index: self.index,
                            reason: "quality length differs from sequence length".into(),
                        });
                    }
                    true
                }
            }
            ReaderKind::Memory { items, pos } => {
                if *pos == items.len() {
                    false
                } else {
                    buf.extend_from_slice(&items[*pos]);
                    *pos += 1;
                    true
                }
            }
        };
        if got {
            self.index += 1;
        }
        Ok(got)
    }
}

/// First pass: alphabet detection and collection shape.
///
/// Pass a pre-built alphabet to skip detection; every byte is still validated
/// against it.
pub fn scan_collection(
    source: &CollectionSource,
    end_marker_byte: u8,
    alphabet: Option<Alphabet>,
) -> Result<(Alphabet, CollectionMeta)> {
    let mut reader = source.records()?;
    let mut meta = CollectionMeta::new();
    let mut buf = Vec::new();
    let alphabet = match alphabet {
        Some(a) => {
            while reader.next_record(&mut buf)? {
                for &b in &buf {
                    a.encode(b)?;
                }
                meta.push_string(buf.len())?;
            }
            a
        }
        None => {
            let mut scanner = AlphabetScanner::new(end_marker_byte);
            while reader.next_record(&mut buf)? {
                scanner.observe(&buf);
                meta.push_string(buf.len())?;
            }
            scanner.finish()?
        }
    };
    Ok((alphabet, meta.finish()?))
}

/// How many columns are transposed per pass over the input. Bounds the number
/// of simultaneously open files when the longest string is very long.
const COLUMN_WINDOW: usize = 256;

/// The column-transposed collection on disk.
pub struct TransposedInput {
    dir: PathBuf,
    m: usize,
    k: u32,
    active_counts: Vec<u64>,
    stats: Arc<AuditStats>,
}

fn column_path(dir: &Path, j: u32) -> PathBuf {
    dir.join(format!("col.{j}"))
}

/// Second pass(es): write the K column files under `dir`.
pub fn transpose(
    source: &CollectionSource,
    alphabet: &Alphabet,
    meta: &CollectionMeta,
    dir: &Path,
    stats: Arc<AuditStats>,
) -> Result<TransposedInput> {
    let k = meta.k();
    let pad = alphabet.pad_code();

    let mut win_start = 0u32;
    while win_start < k {
        let win_end = (win_start + COLUMN_WINDOW as u32).min(k);
        let mut writers: Vec<TrackedWriter> = (win_start..win_end)
            .map(|j| TrackedWriter::create(&column_path(dir, j), FileClass::Column, stats.clone()))
            .collect::<Result<_>>()?;

        let mut reader = source.records()?;
        let mut buf = Vec::new();
        let mut q = 0usize;
        while reader.next_record(&mut buf)? {
            let raw_len = buf.len() as u32;
            debug_assert_eq!(raw_len + 1, meta.len_with_marker(q));
            for (w, j) in writers.iter_mut().zip(win_start..win_end) {
                let cell = if j < raw_len {
                    alphabet.encode(buf[(raw_len - 1 - j) as usize])?
                } else if j == raw_len {
                    END_MARKER_CODE
                } else {
                    pad
                };
                w.put_u8(cell)?;
            }
            q += 1;
        }
        if q != meta.m() {
            return Err(Error::InvalidConfig(format!(
                "input changed between passes: expected {} records, saw {q}",
                meta.m()
            )));
        }
        for w in writers {
            w.finish()?;
        }
        win_start = win_end;
    }

    // active_counts[j] = number of strings still holding a cell for column j,
    // i.e. with length (end-marker included) > j.
    let mut longer_than = vec![0u64; k as usize + 1];
    for &len in meta.lengths() {
        longer_than[len as usize] += 1;
    }
    let mut active_counts = vec![0u64; k as usize];
    let mut running = 0u64;
    for j in (0..k as usize).rev() {
        running += longer_than[j + 1];
        active_counts[j] = running;
    }

    Ok(TransposedInput {
        dir: dir.to_path_buf(),
        m: meta.m(),
        k,
        active_counts,
        stats,
    })
}

impl TransposedInput {
    pub fn k(&self) -> u32 {
        self.k
    }

    /// Number of non-pad cells in column `j`.
    pub fn active_count(&self, j: u32) -> u64 {
        self.active_counts[j as usize]
    }

    /// Read column `j` in full: the per-string symbol slice for iteration `j`.
    pub fn read_column(&self, j: u32) -> Result<Vec<u8>> {
        if j >= self.k {
            return Err(Error::OutOfRange {
                index: j as u64,
                limit: self.k as u64,
            });
        }
        let mut reader = TrackedReader::open(
            &column_path(&self.dir, j),
            FileClass::Column,
            self.stats.clone(),
        )?;
        let mut column = Vec::with_capacity(self.m);
        while let Some(b) = reader.next_u8()? {
            column.push(b);
        }
        if column.len() != self.m {
            return Err(Error::InvalidConfig(format!(
                "column {j} holds {} cells, expected {}",
                column.len(),
                self.m
            )));
        }
        Ok(column)
    }

    /// Delete the column files.
    pub fn remove(&self) -> Result<()> {
        for j in 0..self.k {
            crate::io_audit::remove_tracked_sized(
                &column_path(&self.dir, j),
                FileClass::Column,
                &self.stats,
                self.m as u64,
            )?;
        }
        Ok(())
    }
}
