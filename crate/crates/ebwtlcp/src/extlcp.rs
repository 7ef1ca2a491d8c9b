//! Phase 2 of each iteration: segment merging and LCP bookkeeping.
//!
//! Merging splices the new symbols into the previous generation's segments at
//! the tracked positions. Alongside, two LCP values per inserted suffix must
//! come out for the *next* iteration: the prefix shared with its predecessor
//! (`c`) and with its successor (`s`). Both are range minima over the LCP
//! cells between the insert and the nearest earlier/later occurrence of the
//! inserted symbol in the same segment — ranges whose far endpoint is unknown
//! while writing sequentially. So per symbol a running minimum is kept
//! instead: opened when the symbol passes by, lowered by every cell written
//! after that, harvested when the range closes.
//!
//! The ordering per emitted cell is fixed: (1) write the cell, (2) fold its
//! LCP value into every open minimum, (3) close/open the intervals of the
//! emitted symbol. Both interval families exclude their opening position and
//! include their closing position, which is exactly what fold-before-close
//! realizes.

use crate::alphabet::CollectionMeta;
use crate::bcr::TrackerEntry;
use crate::error::{Error, Result};
use crate::gsa::{entry_for, GsaEntry};
use crate::segstore::{GenerationWriter, SegmentStore};

/// Running-minimum state per symbol code, reset at every segment boundary.
///
/// `lci` tracks the interval back to the previous occurrence of a symbol
/// (feeding `c` values), `lsi` the interval forward from an insert to the
/// symbol's next occurrence (feeding `s` values). At most one of each per
/// symbol can be open within a segment.
#[derive(Debug)]
pub struct IntervalTrackers {
    lci_open: Vec<bool>,
    lci_min: Vec<u64>,
    lsi_open: Vec<bool>,
    lsi_min: Vec<u64>,
    lsi_owner: Vec<usize>,
}

impl IntervalTrackers {
    pub fn new(sigma: u8) -> Self {
        let n = sigma as usize + 1;
        Self {
            lci_open: vec![false; n],
            lci_min: vec![u64::MAX; n],
            lsi_open: vec![false; n],
            lsi_min: vec![u64::MAX; n],
            lsi_owner: vec![0; n],
        }
    }

    /// Clear all interval state (segment boundary).
    pub fn reset(&mut self) {
        self.lci_open.fill(false);
        self.lci_min.fill(u64::MAX);
        self.lsi_open.fill(false);
        self.lsi_min.fill(u64::MAX);
    }

    /// Step (2): lower every open minimum by the LCP value just written.
    #[inline]
    pub fn fold(&mut self, lcp: u64) {
        self.fold_lci(lcp);
        self.fold_lsi(lcp);
    }

    #[inline]
    fn fold_lci(&mut self, lcp: u64) {
        for (open, min) in self.lci_open.iter().zip(self.lci_min.iter_mut()) {
            if *open && lcp < *min {
                *min = lcp;
            }
        }
    }

    /// Tail copies only maintain the forward intervals; no insert can close a
    /// backward interval once the segment's inserts are done.
    #[inline]
    pub fn fold_lsi(&mut self, lcp: u64) {
        for (open, min) in self.lsi_open.iter().zip(self.lsi_min.iter_mut()) {
            if *open && lcp < *min {
                *min = lcp;
            }
        }
    }

    /// Running minimum of the open backward interval for `x`, if any.
    #[inline]
    pub fn lci_value(&self, x: u8) -> Option<u64> {
        if self.lci_open[x as usize] {
            debug_assert_ne!(self.lci_min[x as usize], u64::MAX);
            Some(self.lci_min[x as usize])
        } else {
            None
        }
    }

    /// Step (3) for the backward family: the emitted occurrence of `x`
    /// becomes the new interval start, with an empty minimum.
    #[inline]
    pub fn reopen_lci(&mut self, x: u8) {
        self.lci_open[x as usize] = true;
        self.lci_min[x as usize] = u64::MAX;
    }

    /// Step (3) for the forward family: an emitted occurrence of `x` closes
    /// an open interval, delivering `min + 1` to the owning tracker.
    #[inline]
    pub fn close_lsi(&mut self, x: u8, close: impl FnOnce(usize, u64)) {
        let xi = x as usize;
        if self.lsi_open[xi] {
            debug_assert_ne!(self.lsi_min[xi], u64::MAX);
            close(self.lsi_owner[xi], self.lsi_min[xi] + 1);
            self.lsi_open[xi] = false;
            self.lsi_min[xi] = u64::MAX;
        }
    }

    /// An insert of `x` opens a forward interval owned by tracker `owner`.
    #[inline]
    pub fn open_lsi(&mut self, x: u8, owner: usize) {
        let xi = x as usize;
        self.lsi_open[xi] = true;
        self.lsi_min[xi] = u64::MAX;
        self.lsi_owner[xi] = owner;
    }

    /// Segment end: intervals whose symbol never reappeared degenerate to a
    /// shared prefix of exactly the first symbol, value 1.
    pub fn flush_open_lsi(&mut self, mut set_one: impl FnMut(usize)) {
        for xi in 0..self.lsi_open.len() {
            if self.lsi_open[xi] {
                set_one(self.lsi_owner[xi]);
                self.lsi_open[xi] = false;
                self.lsi_min[xi] = u64::MAX;
            }
        }
    }
}

/// Splice one generation: merge the sorted trackers with the previous
/// segments into `writer`, and leave the next iteration's `c`/`s` values in
/// the entries.
///
/// `meta` is only consulted for GSA entries; `j` is the iteration being
/// written.
pub fn merge_generation(
    entries: &mut [TrackerEntry],
    store: &SegmentStore,
    writer: &mut GenerationWriter,
    trackers: &mut IntervalTrackers,
    meta: &CollectionMeta,
) -> Result<()> {
    let with_lcp = store.config().with_lcp;
    let with_gsa = store.config().gsa.is_some();
    let j = writer.iteration();
    let generation = store.generation();
    let sigma = store.sigma();

    let pass = |cell_gsa: GsaEntry| -> Option<GsaEntry> { with_gsa.then_some(cell_gsa) };
    let fresh = |nid: u32| -> Option<GsaEntry> { with_gsa.then(|| entry_for(meta, j, nid)) };

    let mut idx = 0usize;
    for z in 0..=sigma {
        let group_start = idx;
        while idx < entries.len() && entries[idx].q == z {
            idx += 1;
        }
        if group_start == idx {
            if store.seg_len(z) > 0 {
                writer.copy_segment_verbatim(z, store)?;
            }
            continue;
        }

        trackers.reset();
        let mut reader = store.cell_reader(generation, z)?;
        let mut s = 1u64;

        for g in group_start..idx {
            let insert_p = entries[g].p;
            while s < insert_p {
                let cell = reader.next_cell()?.ok_or(Error::TrackerSegmentOverrun {
                    segment: z,
                    position: insert_p,
                })?;
                writer.append_cell(z, cell.sym, cell.lcp, pass(cell.gsa))?;
                if with_lcp {
                    trackers.fold(cell.lcp);
                    trackers.reopen_lci(cell.sym);
                    trackers.close_lsi(cell.sym, |owner, v| entries[owner].s = v);
                }
                s += 1;
            }

            let x = entries[g].u;
            let lcp_val = if insert_p == 1 { 0 } else { entries[g].c };
            writer.append_cell(z, x, lcp_val, fresh(entries[g].nid))?;
            if with_lcp {
                trackers.fold(lcp_val);
                entries[g].c = match trackers.lci_value(x) {
                    Some(min) => min + 1,
                    None => 1,
                };
                trackers.reopen_lci(x);
                trackers.close_lsi(x, |owner, v| entries[owner].s = v);
                trackers.open_lsi(x, g);
            }
            s += 1;

            let next_insert_is_adjacent = g + 1 < idx && entries[g + 1].p == s;
            if !next_insert_is_adjacent {
                if let Some(cell) = reader.next_cell()? {
                    // The suffix that used to follow here gained a new
                    // predecessor; its stored LCP is superseded by `s`.
                    let new_lcp = if with_lcp { entries[g].s } else { 0 };
                    writer.append_cell(z, cell.sym, new_lcp, pass(cell.gsa))?;
                    if with_lcp {
                        trackers.fold(new_lcp);
                        trackers.reopen_lci(cell.sym);
                        trackers.close_lsi(cell.sym, |owner, v| entries[owner].s = v);
                    }
                    s += 1;
                }
            }
        }

        while let Some(cell) = reader.next_cell()? {
            writer.append_cell(z, cell.sym, cell.lcp, pass(cell.gsa))?;
            if with_lcp {
                trackers.fold_lsi(cell.lcp);
                trackers.close_lsi(cell.sym, |owner, v| entries[owner].s = v);
            }
        }
        if with_lcp {
            trackers.flush_open_lsi(|owner| entries[owner].s = 1);
        }
    }
    debug_assert_eq!(idx, entries.len());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io_audit::AuditStats;
    use crate::segstore::{SegmentStore, StoreConfig};

    fn entry(q: u8, p: u64, u: u8, c: u64, s: u64, nid: u32) -> TrackerEntry {
        TrackerEntry { p, c, s, nid, u, q }
    }

    fn dummy_meta(m: usize) -> CollectionMeta {
        let mut meta = CollectionMeta::new();
        for _ in 0..m {
            meta.push_string(1).unwrap();
        }
        meta.finish().unwrap()
    }

    /// Store with one committed generation holding the given `(sym, lcp)`
    /// cells per segment.
    fn store_with(sigma: u8, segments: &[(u8, Vec<(u8, u64)>)]) -> (tempfile::TempDir, SegmentStore) {
        let dir = tempfile::tempdir().unwrap();
        let mut store = SegmentStore::new(
            dir.path(),
            StoreConfig {
                sigma,
                with_lcp: true,
                lcp_width: 2,
                gsa: None,
            },
            AuditStats::new(),
        );
        let mut w = store.begin_generation(0).unwrap();
        for (h, cells) in segments {
            for &(sym, lcp) in cells {
                w.append_cell(*h, sym, lcp, None).unwrap();
            }
        }
        store.commit(w).unwrap();
        (dir, store)
    }

    fn run_merge(
        store: &mut SegmentStore,
        entries: &mut [TrackerEntry],
    ) -> (Vec<Vec<u8>>, Vec<Vec<u64>>) {
        let mut w = store.begin_generation(1).unwrap();
        let mut trk = IntervalTrackers::new(store.sigma());
        let meta = dummy_meta(entries.len().max(1));
        merge_generation(entries, store, &mut w, &mut trk, &meta).unwrap();
        store.commit(w).unwrap();
        let syms = (0..=store.sigma())
            .map(|h| store.read_segment_symbols(h).unwrap())
            .collect();
        let lcps = (0..=store.sigma())
            .map(|h| store.read_segment_lcps(h).unwrap())
            .collect();
        (syms, lcps)
    }

    // Worked segment-1 state: merging `G` at position 3 with incoming c=3,
    // s=2 must produce c'=min{2,3}+1=3 and, with no later G, s'=1 at flush.
    #[test]
    fn backward_interval_minimum_feeds_next_c() {
        let old = vec![
            (3u8, 0u64), // G
            (2, 2),      // C
            (1, 2),      // A
            (1, 1),      // A
            (1, 2),      // A
            (4, 2),      // T
            (2, 2),      // C
            (2, 1),      // C
            (1, 2),      // A
        ];
        let (_d, mut store) = store_with(4, &[(1, old)]);
        let mut entries = vec![entry(1, 3, 3, 3, 2, 1)];
        let (syms, lcps) = run_merge(&mut store, &mut entries);
        assert_eq!(syms[1], vec![3, 2, 3, 1, 1, 1, 4, 2, 2, 1]);
        assert_eq!(lcps[1], vec![0, 2, 3, 2, 1, 2, 2, 2, 1, 2]);
        assert_eq!(entries[0].c, 3);
        assert_eq!(entries[0].s, 1);
    }

    // Worked segment-2 state: merging `A` at position 4 with incoming c=2,
    // s=2. The backward interval holds min 1 so c'=2; the overwritten
    // successor cell is itself an `A`, closing the forward interval at
    // min 2, so s'=3.
    #[test]
    fn forward_interval_closes_on_next_occurrence() {
        let old = vec![
            (1u8, 0u64), // A
            (4, 1),      // T
            (2, 1),      // C
            (1, 2),      // A
            (1, 1),      // A
            (3, 1),      // G
            (1, 2),      // A
        ];
        let (_d, mut store) = store_with(4, &[(2, old)]);
        let mut entries = vec![entry(2, 4, 1, 2, 2, 0)];
        let (syms, lcps) = run_merge(&mut store, &mut entries);
        assert_eq!(syms[2], vec![1, 4, 2, 1, 1, 1, 3, 1]);
        assert_eq!(lcps[2], vec![0, 1, 1, 2, 2, 1, 1, 2]);
        assert_eq!(entries[0].c, 2);
        assert_eq!(entries[0].s, 3);
    }

    #[test]
    fn untouched_segment_is_copied_verbatim() {
        let seg1 = vec![(1u8, 0u64), (2, 3), (1, 1)];
        let (_d, mut store) = store_with(2, &[(1, seg1.clone())]);
        let mut entries = vec![entry(2, 1, 1, 5, 5, 0)];
        let (syms, lcps) = run_merge(&mut store, &mut entries);
        assert_eq!(syms[1], vec![1, 2, 1]);
        assert_eq!(lcps[1], vec![0, 3, 1]);
        assert_eq!(syms[2], vec![1]);
        assert_eq!(lcps[2], vec![0]); // insert at position 1 writes 0
        assert_eq!(entries[0].c, 1); // first occurrence in its segment
    }

    #[test]
    fn adjacent_inserts_skip_the_overwrite() {
        // Two inserts of the same symbol at positions 1 and 2: the second
        // keeps its own c as the written cell, and closes the first's
        // forward interval with that value + 1.
        let (_d, mut store) = store_with(2, &[]);
        let mut entries = vec![entry(1, 1, 2, 9, 9, 0), entry(1, 2, 2, 1, 9, 1)];
        let (syms, lcps) = run_merge(&mut store, &mut entries);
        assert_eq!(syms[1], vec![2, 2]);
        assert_eq!(lcps[1], vec![0, 1]);
        assert_eq!(entries[0].c, 1);
        assert_eq!(entries[0].s, 2); // min over {1} + 1
        assert_eq!(entries[1].c, 2); // min over {1} + 1
        assert_eq!(entries[1].s, 1); // flushed: no later occurrence
    }

    #[test]
    fn flush_with_no_open_intervals_is_a_noop() {
        let mut trk = IntervalTrackers::new(3);
        let mut touched = false;
        trk.flush_open_lsi(|_| touched = true);
        assert!(!touched);
    }

    #[test]
    fn fold_only_lowers_open_minima() {
        let mut trk = IntervalTrackers::new(3);
        trk.reopen_lci(2);
        trk.fold(5);
        trk.fold(7);
        assert_eq!(trk.lci_value(2), Some(5));
        assert_eq!(trk.lci_value(1), None);
        trk.reopen_lci(2); // reset on reopen
        trk.fold(9);
        assert_eq!(trk.lci_value(2), Some(9));
    }

    // Reference splice + Theorem-style range scan, used as the independent
    // oracle for randomized merges.
    mod reference {
        pub struct Expected {
            pub syms: Vec<u8>,
            pub lcps: Vec<u64>,
            pub c_next: Vec<u64>,
            pub s_next: Vec<u64>,
        }

        /// Splice `inserts = (p, sym, c, s)` into `(syms, lcps)` and derive
        /// the next-iteration values by brute-force range minima over the
        /// final arrays.
        pub fn merge(old: &[(u8, u64)], inserts: &[(u64, u8, u64, u64)]) -> Expected {
            let mut syms: Vec<u8> = Vec::new();
            let mut lcps: Vec<u64> = Vec::new();
            let mut is_insert: Vec<Option<usize>> = Vec::new();
            let mut old_iter = old.iter().copied().peekable();
            let insert_pos: Vec<u64> = inserts.iter().map(|i| i.0).collect();

            let mut pos = 1u64;
            let mut which = 0usize;
            while which < inserts.len() || old_iter.peek().is_some() {
                if which < inserts.len() && inserts[which].0 == pos {
                    let (_, sym, c, _) = inserts[which];
                    syms.push(sym);
                    lcps.push(if pos == 1 { 0 } else { c });
                    is_insert.push(Some(which));
                    which += 1;
                } else {
                    let (sym, lcp) = old_iter.next().expect("insert positions in range");
                    syms.push(sym);
                    lcps.push(lcp);
                    is_insert.push(None);
                }
                pos += 1;
            }
            // successor overwrites
            for (i, &(p, _, _, s)) in inserts.iter().enumerate() {
                let succ = p as usize; // 0-based index of position p+1
                let _ = i;
                if succ < lcps.len() && !insert_pos.contains(&(p + 1)) {
                    lcps[succ] = s;
                }
            }
            // Theorem-style range minima over the final arrays.
            let mut c_next = Vec::new();
            let mut s_next = Vec::new();
            for &(p, sym, _, _) in inserts {
                let r = p as usize - 1; // 0-based
                let d1 = (0..r).rev().find(|&t| syms[t] == sym);
                c_next.push(match d1 {
                    Some(d1) => 1 + lcps[d1 + 1..=r].iter().min().unwrap(),
                    None => 1,
                });
                let d2 = (r + 1..syms.len()).find(|&t| syms[t] == sym);
                s_next.push(match d2 {
                    Some(d2) => 1 + lcps[r + 1..=d2].iter().min().unwrap(),
                    None => 1,
                });
            }
            Expected {
                syms,
                lcps,
                c_next,
                s_next,
            }
        }
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(128))]

        #[test]
        fn randomized_merge_matches_range_scan_oracle(
            old in proptest::collection::vec((1u8..=4, 0u64..6), 0..40),
            raw_inserts in proptest::collection::vec((1u8..=4, 1u64..6, 1u64..6, 0u64..12), 1..10),
        ) {
            // Fix the first old cell to LCP 0 and place inserts at valid,
            // strictly increasing positions.
            let mut old = old;
            if let Some(first) = old.first_mut() {
                first.1 = 0;
            }
            let mut inserts: Vec<(u64, u8, u64, u64)> = Vec::new();
            let mut prev = 0u64;
            for (i, &(sym, c, s, gap)) in raw_inserts.iter().enumerate() {
                let lo = prev + 1;
                let hi = old.len() as u64 + i as u64 + 1;
                if lo > hi {
                    break;
                }
                let p = lo + gap % (hi - lo + 1);
                inserts.push((p, sym, c, s));
                prev = p;
            }
            proptest::prop_assume!(!inserts.is_empty());

            let (_d, mut store) = store_with(4, &[(1, old.clone())]);
            let mut entries: Vec<TrackerEntry> = inserts
                .iter()
                .enumerate()
                .map(|(i, &(p, sym, c, s))| entry(1, p, sym, c, s, i as u32))
                .collect();
            let (syms, lcps) = run_merge(&mut store, &mut entries);

            let expected = reference::merge(&old, &inserts);
            proptest::prop_assert_eq!(&syms[1], &expected.syms);
            proptest::prop_assert_eq!(&lcps[1], &expected.lcps);
            for (i, e) in entries.iter().enumerate() {
                proptest::prop_assert_eq!(e.c, expected.c_next[i], "c mismatch at insert {}", i);
                proptest::prop_assert_eq!(e.s, expected.s_next[i], "s mismatch at insert {}", i);
            }
        }
    }
}
