//! Brute-force reference for small collections.
//!
//! Materializes and comparison-sorts every suffix, then derives the
//! transform, LCP values and suffix-array entries directly from the sorted
//! list. Quadratic-ish and capped accordingly — this exists to check the
//! pipeline, never to replace it. The strings here are the raw inputs; the
//! end-marker is implicit: it compares below every symbol, and two suffixes
//! with identical symbol content order by string index (each string's marker
//! is conceptually distinct, so markers never match each other).

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::gsa::GsaEntry;

/// Upper bound on total collection size (end-markers included) accepted by
/// the oracle.
pub const ORACLE_CAP: u64 = 100_000;

/// All suffixes of the collection in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SortedSuffixList {
    /// `(start, string_id)` pairs; `start` is 1-based and may point at the
    /// end-marker position (`raw length + 1`).
    pub entries: Vec<GsaEntry>,
}

fn assert_capped(collection: &[Vec<u8>]) {
    let n: u64 = collection.iter().map(|s| s.len() as u64 + 1).sum();
    assert!(
        n <= ORACLE_CAP,
        "oracle input of {n} cells exceeds the {ORACLE_CAP}-cell cap"
    );
}

/// Compare two suffixes by content, end-markers smaller than every symbol.
/// Returns `Ordering::Equal` only for identical symbol content (both markers
/// reached simultaneously).
fn content_cmp(a: &[u8], a_start: usize, b: &[u8], b_start: usize) -> Ordering {
    let mut k = 0usize;
    loop {
        let ab = a.get(a_start + k);
        let bb = b.get(b_start + k);
        match (ab, bb) {
            (None, None) => return Ordering::Equal,
            (None, Some(_)) => return Ordering::Less,
            (Some(_), None) => return Ordering::Greater,
            (Some(x), Some(y)) => match x.cmp(y) {
                Ordering::Equal => k += 1,
                other => return other,
            },
        }
    }
}

/// Length of the longest common prefix of two suffixes; markers never match.
pub fn suffix_lcp(collection: &[Vec<u8>], a: GsaEntry, b: GsaEntry) -> u64 {
    let sa = &collection[a.string_id as usize];
    let sb = &collection[b.string_id as usize];
    let mut k = 0usize;
    loop {
        match (
            sa.get(a.start as usize - 1 + k),
            sb.get(b.start as usize - 1 + k),
        ) {
            (Some(x), Some(y)) if x == y => k += 1,
            _ => return k as u64,
        }
    }
}

/// Sort every suffix of every string, ties on equal content broken by
/// string index.
pub fn naive_gsa(collection: &[Vec<u8>]) -> SortedSuffixList {
    assert!(!collection.is_empty());
    assert_capped(collection);
    let mut entries = Vec::new();
    for (id, s) in collection.iter().enumerate() {
        for start in 1..=s.len() as u64 + 1 {
            entries.push(GsaEntry {
                start,
                string_id: id as u32,
            });
        }
    }
    entries.sort_by(|a, b| {
        content_cmp(
            &collection[a.string_id as usize],
            a.start as usize - 1,
            &collection[b.string_id as usize],
            b.start as usize - 1,
        )
        .then(a.string_id.cmp(&b.string_id))
    });
    SortedSuffixList { entries }
}

/// LCP values of consecutive sorted suffixes; first cell 0.
pub fn naive_lcp(collection: &[Vec<u8>], sorted: &SortedSuffixList) -> Vec<u64> {
    let mut lcp = Vec::with_capacity(sorted.entries.len());
    lcp.push(0);
    for pair in sorted.entries.windows(2) {
        lcp.push(suffix_lcp(collection, pair[0], pair[1]));
    }
    lcp
}

/// The transform: for every sorted suffix, the symbol before it (wrapping to
/// the end-marker byte at the string head).
pub fn naive_ebwt(
    collection: &[Vec<u8>],
    sorted: &SortedSuffixList,
    end_marker_byte: u8,
) -> Vec<u8> {
    sorted
        .entries
        .iter()
        .map(|e| {
            if e.start == 1 {
                end_marker_byte
            } else {
                collection[e.string_id as usize][e.start as usize - 2]
            }
        })
        .collect()
}

/// Convenience bundle of all three reference outputs.
pub fn naive_all(
    collection: &[Vec<u8>],
    end_marker_byte: u8,
) -> (Vec<u8>, Vec<u64>, SortedSuffixList) {
    let sorted = naive_gsa(collection);
    let lcp = naive_lcp(collection, &sorted);
    let ebwt = naive_ebwt(collection, &sorted, end_marker_byte);
    (ebwt, lcp, sorted)
}

/// Minimum of `lcp` over 1-based positions `(r, s]`, which equals the LCP of
/// the suffixes ranked `r` and `s`.
pub fn naive_rmq_lcp(r: u64, s: u64, lcp: &[u64]) -> Result<u64> {
    let n = lcp.len() as u64;
    if r == 0 || r >= s || s > n {
        return Err(Error::OutOfRange {
            index: s.max(r),
            limit: n,
        });
    }
    Ok(*lcp[r as usize..s as usize].iter().min().unwrap())
}
