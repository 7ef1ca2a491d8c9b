//! Generalized suffix array entries.
//!
//! When GSA output is enabled, each segment carries a third file `G` that is
//! spliced cell-for-cell like the symbol file: the insert for string `i` at
//! iteration `j` contributes the pair `(|w_i| - j, i)`, the start position and
//! owner of the suffix being placed. After the last iteration the
//! concatenation of the `G` segments is the generalized suffix array.

use crate::alphabet::CollectionMeta;

/// One suffix: 1-based start position within its string (end-marker counted)
/// and the owning string's index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct GsaEntry {
    pub start: u64,
    pub string_id: u32,
}

/// Fixed little-endian field widths used to serialize entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GsaWidths {
    pub start_width: u8,
    pub id_width: u8,
}

/// Smallest of {1, 2, 4, 8} bytes that holds `max`.
pub fn width_for(max: u64) -> u8 {
    match max {
        v if v <= 0xFF => 1,
        v if v <= 0xFFFF => 2,
        v if v <= 0xFFFF_FFFF => 4,
        _ => 8,
    }
}

impl GsaWidths {
    pub fn for_collection(meta: &CollectionMeta) -> Self {
        Self {
            start_width: width_for(meta.k() as u64),
            id_width: width_for(meta.m() as u64 - 1),
        }
    }

    pub fn entry_bytes(&self) -> usize {
        self.start_width as usize + self.id_width as usize
    }

    pub fn encode(&self, entry: GsaEntry, out: &mut Vec<u8>) {
        out.extend_from_slice(&entry.start.to_le_bytes()[..self.start_width as usize]);
        out.extend_from_slice(&(entry.string_id as u64).to_le_bytes()[..self.id_width as usize]);
    }

    pub fn decode(&self, bytes: &[u8]) -> GsaEntry {
        let mut start = [0u8; 8];
        start[..self.start_width as usize].copy_from_slice(&bytes[..self.start_width as usize]);
        let mut id = [0u8; 8];
        id[..self.id_width as usize]
            .copy_from_slice(&bytes[self.start_width as usize..self.entry_bytes()]);
        GsaEntry {
            start: u64::from_le_bytes(start),
            string_id: u64::from_le_bytes(id) as u32,
        }
    }
}

/// The entry recorded when string `string_id` places its iteration-`j` symbol:
/// the suffix of length `j` starts `j` positions before the string's end.
pub fn entry_for(meta: &CollectionMeta, j: u32, string_id: u32) -> GsaEntry {
    GsaEntry {
        start: (meta.len_with_marker(string_id as usize) - j) as u64,
        string_id,
    }
}
