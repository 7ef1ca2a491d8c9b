//! The end-to-end pipeline: ingest → K iterations → final outputs.
//!
//! Iteration `j` handles the length-`j` suffixes of every still-active
//! string: phase 1 computes where each new symbol lands (LF-mapping against
//! the previous generation) and sorts the trackers; phase 2 splices segment
//! by segment into a fresh generation, carrying the LCP interval minima.
//! Only the per-string trackers live in memory; all segment data streams
//! through disk, forward only.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use crate::alphabet::{Alphabet, CollectionMeta};
use crate::bcr::{self, TrackerEntry, TRACKER_ENTRY_BYTES};
use crate::error::{Error, Result};
use crate::extlcp::{merge_generation, IntervalTrackers};
use crate::gsa::{entry_for, width_for, GsaWidths};
use crate::ingest::{scan_collection, transpose, CollectionSource};
use crate::io_audit::{AuditStats, FileClass, TrackedReader, TrackedWriter};
use crate::meta::{output_path, BuildMeta, FORMAT_VERSION};
use crate::segstore::{SegmentStore, StoreConfig};

/// Build-time switches. Defaults: LCP on, GSA off, widths auto.
#[derive(Debug, Clone)]
pub struct BuildOptions {
    pub with_lcp: bool,
    pub with_gsa: bool,
    /// Fixed `.lcp` cell width; `None` picks the smallest of {1,2,4} that
    /// holds `K - 1`.
    pub lcp_width: Option<u8>,
    pub end_marker_byte: u8,
    /// Explicit alphabet bytes; `None` auto-detects from the input.
    pub alphabet: Option<Vec<u8>>,
    /// Keep the transposed columns and segment files around (debugging).
    pub keep_tmp: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            with_lcp: true,
            with_gsa: false,
            lcp_width: None,
            end_marker_byte: crate::alphabet::DEFAULT_END_MARKER_BYTE,
            alphabet: None,
            keep_tmp: false,
        }
    }
}

/// Counters of one finished build, straight from the instrumentation.
#[derive(Debug, Clone)]
pub struct BuildCounters {
    pub bytes_read: u64,
    pub bytes_written: u64,
    pub backward_seeks: u64,
    /// Peak bytes held by segment working files.
    pub peak_working_disk: u64,
    /// Peak bytes held by the transposed input columns.
    pub peak_column_disk: u64,
    /// Peak bytes of tracker arrays + interval state + the column slice.
    pub peak_tracker_memory: u64,
    /// Total bytes of the data output files (`.ebwt` + `.lcp` + `.gsa`).
    pub output_bytes: u64,
    pub wall: Duration,
}

#[derive(Debug, Clone)]
pub struct BuildSummary {
    pub prefix: PathBuf,
    pub meta: BuildMeta,
    pub counters: BuildCounters,
}

/// Hook called after every committed iteration with the tracker state and
/// read access to the freshly written generation.
pub trait IterationObserver {
    fn on_iteration(&mut self, view: IterationView<'_>) -> Result<()>;
}

impl<F: FnMut(IterationView<'_>) -> Result<()>> IterationObserver for F {
    fn on_iteration(&mut self, view: IterationView<'_>) -> Result<()> {
        self(view)
    }
}

pub struct IterationView<'a> {
    /// Iteration that just committed.
    pub j: u32,
    /// Trackers sorted by `(segment, position)`, holding the values for the
    /// next iteration in `c`/`s`.
    pub entries: &'a [TrackerEntry],
    pub store: &'a SegmentStore,
    pub alphabet: &'a Alphabet,
}

fn pick_lcp_width(k: u32, requested: Option<u8>) -> Result<u8> {
    let needed = width_for(k.saturating_sub(1) as u64);
    match requested {
        None => Ok(needed),
        Some(w) => {
            if ![1, 2, 4, 8].contains(&w) {
                Err(Error::InvalidConfig(format!(
                    "lcp width must be one of 1, 2, 4, 8 (got {w})"
                )))
            } else if w < needed {
                Err(Error::InvalidConfig(format!(
                    "lcp width {w} cannot hold values up to {}",
                    k - 1
                )))
            } else {
                Ok(w)
            }
        }
    }
}

/// Run the full build, writing `<prefix>.ebwt` (+ `.lcp`, `.gsa`,
/// `.meta.json`) and cleaning the working files up on success.
pub fn build(
    source: &CollectionSource,
    prefix: &Path,
    tmp_dir: &Path,
    opts: &BuildOptions,
    mut observer: Option<&mut dyn IterationObserver>,
) -> Result<BuildSummary> {
    let start = Instant::now();
    let stats = AuditStats::new();

    let explicit = opts
        .alphabet
        .as_deref()
        .map(|bytes| Alphabet::from_symbols(bytes, opts.end_marker_byte))
        .transpose()?;
    let (alphabet, meta) = scan_collection(source, opts.end_marker_byte, explicit)?;

    std::fs::create_dir_all(tmp_dir)?;
    if let Some(parent) = prefix.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }

    let lcp_width = pick_lcp_width(meta.k(), opts.lcp_width)?;
    let cfg = StoreConfig {
        sigma: alphabet.sigma() as u8,
        with_lcp: opts.with_lcp,
        lcp_width,
        gsa: opts.with_gsa.then(|| GsaWidths::for_collection(&meta)),
    };

    let transposed = transpose(source, &alphabet, &meta, tmp_dir, stats.clone())?;
    let mut store = SegmentStore::new(tmp_dir, cfg, stats.clone());
    let mut intervals = IntervalTrackers::new(alphabet.sigma() as u8);
    let interval_bytes = 26 * (alphabet.sigma() as u64 + 1);

    // Iteration 0: one cell per string into segment 0, in input order.
    let column0 = transposed.read_column(0)?;
    let mut writer = store.begin_generation(0)?;
    let mut entries = bcr::init_iteration_zero(&column0, &mut writer, |nid| {
        opts.with_gsa.then(|| entry_for(&meta, 0, nid))
    })?;
    store.commit(writer)?;
    stats.note_tracker_bytes(
        entries.len() as u64 * TRACKER_ENTRY_BYTES as u64 + column0.len() as u64 + interval_bytes,
    );
    drop(column0);
    if let Some(obs) = observer.as_deref_mut() {
        obs.on_iteration(IterationView {
            j: 0,
            entries: &entries,
            store: &store,
            alphabet: &alphabet,
        })?;
    }

    for j in 1..meta.k() {
        let column = transposed.read_column(j)?;
        bcr::compute_positions(&mut entries, &store, &column, alphabet.pad_code())?;
        bcr::sort_trackers(&mut entries);
        stats.note_tracker_bytes(
            entries.len() as u64 * TRACKER_ENTRY_BYTES as u64
                + column.len() as u64
                + interval_bytes,
        );
        drop(column);

        let mut writer = store.begin_generation(j)?;
        merge_generation(&mut entries, &store, &mut writer, &mut intervals, &meta)?;
        store.commit(writer)?;

        debug_assert_eq!(entries.len() as u64, transposed.active_count(j));
        if let Some(obs) = observer.as_deref_mut() {
            obs.on_iteration(IterationView {
                j,
                entries: &entries,
                store: &store,
                alphabet: &alphabet,
            })?;
        }
    }
    debug_assert_eq!(store.total_cells(), meta.n());

    let build_meta = make_meta(&alphabet, &meta, store.config());
    let output_bytes = finalize_outputs(&store, &alphabet, prefix)?;
    build_meta.save(prefix)?;

    if !opts.keep_tmp {
        transposed.remove()?;
        store.remove_all()?;
    }

    Ok(BuildSummary {
        prefix: prefix.to_path_buf(),
        meta: build_meta,
        counters: BuildCounters {
            bytes_read: stats.bytes_read(),
            bytes_written: stats.bytes_written(),
            backward_seeks: stats.backward_seeks(),
            peak_working_disk: stats.peak_segment_bytes(),
            peak_column_disk: stats.peak_column_bytes(),
            peak_tracker_memory: stats.peak_tracker_bytes(),
            output_bytes,
            wall: start.elapsed(),
        },
    })
}

fn make_meta(alphabet: &Alphabet, meta: &CollectionMeta, cfg: &StoreConfig) -> BuildMeta {
    BuildMeta {
        format_version: FORMAT_VERSION,
        m: meta.m() as u64,
        n: meta.n(),
        k: meta.k(),
        sigma: alphabet.sigma() as u32,
        alphabet: alphabet.symbols().to_vec(),
        end_marker_byte: alphabet.end_marker_byte(),
        with_lcp: cfg.with_lcp,
        lcp_width: cfg.with_lcp.then_some(cfg.lcp_width),
        with_gsa: cfg.gsa.is_some(),
        gsa_start_width: cfg.gsa.map(|g| g.start_width),
        gsa_id_width: cfg.gsa.map(|g| g.id_width),
    }
}

/// Concatenate the final generation's segments into the output files: the
/// symbol segments decode to source bytes, `L`/`G` segments are already in
/// their output encoding.
fn finalize_outputs(store: &SegmentStore, alphabet: &Alphabet, prefix: &Path) -> Result<u64> {
    let stats = store.stats();
    let generation = store.generation();
    let mut total = 0u64;

    let mut ebwt = TrackedWriter::create(&output_path(prefix, "ebwt"), FileClass::Output, stats.clone())?;
    for h in 0..=store.sigma() {
        let mut reader = store.symbol_reader(generation, h)?;
        while let Some(code) = reader.next_symbol()? {
            ebwt.put_u8(alphabet.decode(code)?)?;
        }
    }
    total += ebwt.finish()?;

    for (family, ext, enabled) in [
        ('L', "lcp", store.config().with_lcp),
        ('G', "gsa", store.config().gsa.is_some()),
    ] {
        if !enabled {
            continue;
        }
        let mut out =
            TrackedWriter::create(&output_path(prefix, ext), FileClass::Output, stats.clone())?;
        for h in 0..=store.sigma() {
            if store.seg_len(h) == 0 {
                continue;
            }
            let parity = (generation.rem_euclid(2)) as u8;
            let path = store.tmp_path(family, parity, h);
            if let Some(mut reader) =
                TrackedReader::open_or_empty(&path, FileClass::Segment, stats.clone())?
            {
                while let Some(b) = reader.next_u8()? {
                    out.put_u8(b)?;
                }
            }
        }
        total += out.finish()?;
    }
    Ok(total)
}
