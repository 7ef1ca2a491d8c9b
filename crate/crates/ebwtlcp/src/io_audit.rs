//! Instrumented file IO.
//!
//! Every working file of the pipeline (input columns, segment files, final
//! outputs) is accessed through [`TrackedReader`] / [`TrackedWriter`], which
//! count bytes, watch live working-set sizes and record any backward seek.
//! The build itself only ever reads forward and appends, so a passing audit
//! reports zero backward seeks; the counters make that a measurement rather
//! than an assumption.

use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::error::Result;

const BUF_CAP: usize = 64 * 1024;

/// What a file is used for; decides which working-set gauge it feeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileClass {
    /// Transposed input columns (`col.<j>`), excluded from the working-disk budget.
    Column,
    /// Segment working files (`B.*`, `L.*`, `G.*`), the budgeted working set.
    Segment,
    /// Final output files.
    Output,
}

/// Shared instrumentation counters for one build.
#[derive(Debug, Default)]
pub struct AuditStats {
    bytes_read: AtomicU64,
    bytes_written: AtomicU64,
    backward_seeks: AtomicU64,
    live_segment_bytes: AtomicU64,
    peak_segment_bytes: AtomicU64,
    live_column_bytes: AtomicU64,
    peak_column_bytes: AtomicU64,
    peak_tracker_bytes: AtomicU64,
}

impl AuditStats {
    pub fn new() -> Arc<Self> {
        Arc::new(Self::default())
    }

    fn on_write(&self, class: FileClass, n: u64) {
        self.bytes_written.fetch_add(n, Ordering::Relaxed);
        match class {
            FileClass::Segment => {
                let live = self.live_segment_bytes.fetch_add(n, Ordering::Relaxed) + n;
                self.peak_segment_bytes.fetch_max(live, Ordering::Relaxed);
            }
            FileClass::Column => {
                let live = self.live_column_bytes.fetch_add(n, Ordering::Relaxed) + n;
                self.peak_column_bytes.fetch_max(live, Ordering::Relaxed);
            }
            FileClass::Output => {}
        }
    }

    fn on_read(&self, n: u64) {
        self.bytes_read.fetch_add(n, Ordering::Relaxed);
    }

    fn on_remove(&self, class: FileClass, size: u64) {
        match class {
            FileClass::Segment => {
                self.live_segment_bytes.fetch_sub(size, Ordering::Relaxed);
            }
            FileClass::Column => {
                self.live_column_bytes.fetch_sub(size, Ordering::Relaxed);
            }
            FileClass::Output => {}
        }
    }

    fn on_backward_seek(&self) {
        self.backward_seeks.fetch_add(1, Ordering::Relaxed);
    }

    /// Report the internal-memory footprint of the tracker state for the
    /// current iteration; the peak is what the audit checks.
    pub fn note_tracker_bytes(&self, bytes: u64) {
        self.peak_tracker_bytes.fetch_max(bytes, Ordering::Relaxed);
    }

    pub fn bytes_read(&self) -> u64 {
        self.bytes_read.load(Ordering::Relaxed)
    }

    pub fn bytes_written(&self) -> u64 {
        self.bytes_written.load(Ordering::Relaxed)
    }

    pub fn backward_seeks(&self) -> u64 {
        self.backward_seeks.load(Ordering::Relaxed)
    }

    pub fn peak_segment_bytes(&self) -> u64 {
        self.peak_segment_bytes.load(Ordering::Relaxed)
    }

    pub fn peak_column_bytes(&self) -> u64 {
        self.peak_column_bytes.load(Ordering::Relaxed)
    }

    pub fn peak_tracker_bytes(&self) -> u64 {
        self.peak_tracker_bytes.load(Ordering::Relaxed)
    }
}

/// Remove a tracked file, keeping the live working-set gauges in sync.
/// Missing files are fine; lazily created segments may never exist.
pub fn remove_tracked(path: &Path, class: FileClass, stats: &AuditStats) -> Result<()> {
    match std::fs::metadata(path) {
        Ok(meta) => {
            std::fs::remove_file(path)?;
            stats.on_remove(class, meta.len());
            Ok(())
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(()),
        Err(e) => Err(e.into()),
    }
}

/// Remove a tracked file whose size the caller already knows, skipping the
/// metadata round trip.
pub fn remove_tracked_sized(
    path: &Path,
    class: FileClass,
    stats: &AuditStats,
    size: u64,
) -> Result<()> {
    match std::fs::remove_file(path) {
        Ok(()) => {
            stats.on_remove(class, size);
            Ok(())
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(()),
        Err(e) => Err(e.into()),
    }
}

/// Append-only buffered writer with byte accounting.
pub struct TrackedWriter {
    file: File,
    buf: Vec<u8>,
    written: u64,
    class: FileClass,
    stats: Arc<AuditStats>,
    path: PathBuf,
}

impl TrackedWriter {
    pub fn create(path: &Path, class: FileClass, stats: Arc<AuditStats>) -> Result<Self> {
        let file = File::create(path)?;
        // The buffer grows with use; tiny segment files stay tiny.
        Ok(Self {
            file,
            buf: Vec::new(),
            written: 0,
            class,
            stats,
            path: path.to_path_buf(),
        })
    }

    #[inline]
    pub fn put_u8(&mut self, byte: u8) -> Result<()> {
        self.buf.push(byte);
        if self.buf.len() >= BUF_CAP {
            self.flush_buf()?;
        }
        Ok(())
    }

    #[inline]
    pub fn put_slice(&mut self, bytes: &[u8]) -> Result<()> {
        self.buf.extend_from_slice(bytes);
        if self.buf.len() >= BUF_CAP {
            self.flush_buf()?;
        }
        Ok(())
    }

    fn flush_buf(&mut self) -> Result<()> {
        if !self.buf.is_empty() {
            self.file.write_all(&self.buf)?;
            let n = self.buf.len() as u64;
            self.written += n;
            self.stats.on_write(self.class, n);
            self.buf.clear();
        }
        Ok(())
    }

    /// Total bytes handed to this writer so far (flushed or not).
    pub fn logical_len(&self) -> u64 {
        self.written + self.buf.len() as u64
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Flush and return the final file size.
    pub fn finish(mut self) -> Result<u64> {
        self.flush_buf()?;
        self.file.flush()?;
        Ok(self.written)
    }
}

/// Forward-only buffered reader with byte accounting.
///
/// `advance`/`next_u8` move strictly forward; the only way to move backward
/// is `seek_to`, which is counted so the sequentiality audit can prove the
/// builder never did it.
pub struct TrackedReader {
    file: File,
    buf: Vec<u8>,
    buf_pos: usize,
    /// Logical offset of `buf[0]` within the file.
    buf_start: u64,
    class: FileClass,
    stats: Arc<AuditStats>,
}

impl TrackedReader {
    pub fn open(path: &Path, class: FileClass, stats: Arc<AuditStats>) -> Result<Self> {
        let file = File::open(path)?;
        Ok(Self {
            file,
            buf: Vec::new(),
            buf_pos: 0,
            buf_start: 0,
            class,
            stats,
        })
    }

    /// Open a file that may legitimately not exist (lazily created segment);
    /// a missing file reads as empty.
    pub fn open_or_empty(path: &Path, class: FileClass, stats: Arc<AuditStats>) -> Result<Option<Self>> {
        match Self::open(path, class, stats) {
            Ok(r) => Ok(Some(r)),
            Err(crate::error::Error::Io(e)) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e),
        }
    }

    fn refill(&mut self) -> Result<bool> {
        self.buf_start += self.buf.len() as u64;
        // Double the buffer per refill up to the cap, so short files cost a
        // small allocation and long scans still amortize syscalls.
        let target = (self.buf.capacity() * 2).clamp(4 * 1024, BUF_CAP);
        self.buf.resize(target, 0);
        let n = self.file.read(&mut self.buf)?;
        self.buf.truncate(n);
        self.buf_pos = 0;
        self.stats.on_read(n as u64);
        Ok(n > 0)
    }

    #[inline]
    pub fn next_u8(&mut self) -> Result<Option<u8>> {
        if self.buf_pos == self.buf.len() && !self.refill()? {
            return Ok(None);
        }
        let b = self.buf[self.buf_pos];
        self.buf_pos += 1;
        Ok(Some(b))
    }

    /// Read exactly `out.len()` bytes, or report a clean EOF at a record
    /// boundary as `Ok(false)`. EOF inside a record is an error.
    pub fn read_record(&mut self, out: &mut [u8]) -> Result<bool> {
        for (i, slot) in out.iter_mut().enumerate() {
            match self.next_u8()? {
                Some(b) => *slot = b,
                None if i == 0 => return Ok(false),
                None => {
                    return Err(std::io::Error::new(
                        std::io::ErrorKind::UnexpectedEof,
                        "truncated record",
                    )
                    .into())
                }
            }
        }
        Ok(true)
    }

    /// Current logical read offset.
    pub fn position(&self) -> u64 {
        self.buf_start + self.buf_pos as u64
    }

    /// Reposition the reader. Forward motion is a buffered skip; backward
    /// motion is allowed but counted against the sequentiality audit for
    /// column and segment files.
    pub fn seek_to(&mut self, offset: u64) -> Result<()> {
        use std::io::{Seek, SeekFrom};
        let pos = self.position();
        if offset < pos && self.class != FileClass::Output {
            self.stats.on_backward_seek();
        }
        if offset >= self.buf_start && offset <= self.buf_start + self.buf.len() as u64 {
            self.buf_pos = (offset - self.buf_start) as usize;
            return Ok(());
        }
        self.file.seek(SeekFrom::Start(offset))?;
        self.buf.clear();
        self.buf_pos = 0;
        self.buf_start = offset;
        Ok(())
    }
}
