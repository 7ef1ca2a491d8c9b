//! Phase 1 of each iteration: position computation and tracker sorting.
//!
//! One tracker entry lives per active string. Between iterations it remembers
//! where the string's previous symbol was inserted (segment `q`, 1-based
//! position `p`); the new target position is the classic LF-mapping step,
//! evaluated against the previous generation with one table lookup plus a
//! sequential rank scan: occurrences of the symbol in all segments below the
//! old one, plus its rank up to the old position inside it. Entries are then
//! co-sorted by `(q, p)` so phase 2 can splice every segment front to back.

use crate::alphabet::END_MARKER_CODE;
use crate::error::{Error, Result};
use crate::segstore::{RankScanner, SegmentStore};

/// Per-string state carried across iterations.
///
/// `c` and `s` hold the LCP values the merge phase of the *previous*
/// iteration prepared for this one: `c` for the inserted cell itself, `s` for
/// the cell right after it. The merge phase overwrites them with the values
/// for the next iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrackerEntry {
    /// 1-based insert position within segment `q`.
    pub p: u64,
    /// LCP value to write at the insert position.
    pub c: u64,
    /// LCP value for the cell following the insert position.
    pub s: u64,
    /// Originating string index.
    pub nid: u32,
    /// Symbol code to insert this iteration (end-marker when the string is
    /// on its last iteration).
    pub u: u8,
    /// Target segment.
    pub q: u8,
}

pub const TRACKER_ENTRY_BYTES: usize = std::mem::size_of::<TrackerEntry>();

// The documented memory budget (64 bytes per string) leans on this staying
// compact.
const _: () = assert!(TRACKER_ENTRY_BYTES <= 32);

/// Iteration 0: place the last symbol of every string into segment 0, in
/// input order, with all-zero LCP cells. The returned trackers are already
/// sorted (single segment, positions ascending) and carry `c = s = 1` for
/// iteration 1: there, any neighbour within a segment shares exactly the one
/// first symbol.
pub fn init_iteration_zero(
    column0: &[u8],
    writer: &mut crate::segstore::GenerationWriter,
    gsa_entry: impl Fn(u32) -> Option<crate::gsa::GsaEntry>,
) -> Result<Vec<TrackerEntry>> {
    debug_assert_eq!(writer.iteration(), 0);
    let mut entries = Vec::with_capacity(column0.len());
    for (idx, &sym) in column0.iter().enumerate() {
        debug_assert_ne!(sym, END_MARKER_CODE, "column 0 never holds a pad or marker");
        let nid = idx as u32;
        writer.append_cell(0, sym, 0, gsa_entry(nid))?;
        entries.push(TrackerEntry {
            p: idx as u64 + 1,
            c: 1,
            s: 1,
            nid,
            u: sym,
            q: 0,
        });
    }
    Ok(entries)
}

/// Compute the iteration-`j` targets in place.
///
/// On entry the trackers are sorted by their previous `(q, p)` and `u` holds
/// the symbol inserted last iteration; `column` is the slice `U_j` indexed by
/// string id. Strings whose column cell is the pad mark are dropped by a
/// stable sweep. On success every surviving entry has its new `(q, p, u)`
/// and the array is *unsorted* with respect to the new keys.
pub fn compute_positions(
    entries: &mut Vec<TrackerEntry>,
    store: &SegmentStore,
    column: &[u8],
    pad_code: u8,
) -> Result<()> {
    entries.retain(|e| {
        let exhausted = column[e.nid as usize] == pad_code;
        debug_assert_eq!(exhausted, e.u == END_MARKER_CODE);
        !exhausted
    });

    let generation = store.generation();
    let mut scanner: Option<(u8, RankScanner)> = None;
    for e in entries.iter_mut() {
        let old_segment = e.q;
        let old_pos = e.p;
        let code = e.u;
        debug_assert_ne!(code, END_MARKER_CODE);

        let fresh = match &scanner {
            Some((seg, _)) => *seg != old_segment,
            None => true,
        };
        if fresh {
            scanner = Some((
                old_segment,
                RankScanner::new(store.symbol_reader(generation, old_segment)?, store.sigma()),
            ));
        }
        let (_, scan) = scanner.as_mut().unwrap();
        let in_segment = scan.rank(code, old_pos).map_err(|_| Error::InconsistentTracker {
            string_id: e.nid,
            segment: old_segment,
            position: old_pos,
            length: store.seg_len(old_segment),
        })?;

        e.q = code;
        e.p = store.cumulative_occ(old_segment, code) + in_segment;
        e.u = column[e.nid as usize];
    }
    Ok(())
}

/// Joint sort by `(q, p)`. Position pairs are distinct, so stability is
/// irrelevant; all per-entry fields travel together.
pub fn sort_trackers(entries: &mut [TrackerEntry]) {
    entries.sort_unstable_by_key(|e| (e.q, e.p));
    debug_assert!(entries.windows(2).all(|w| (w[0].q, w[0].p) < (w[1].q, w[1].p)));
}
