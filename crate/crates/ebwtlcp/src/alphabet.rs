//! Symbol encoding and the end-marker convention.
//!
//! Source bytes are mapped to dense codes `1..=sigma` in byte order; code `0`
//! is the reserved end-marker and sorts below every symbol. All strings share
//! the single end-marker code — where two suffixes compare equal symbol by
//! symbol, the string with the smaller index wins. That tie rule is enforced
//! by construction wherever suffixes are ordered, so the `m` conceptually
//! distinct markers are never materialized.

use crate::error::{Error, Result};

/// Reserved code for the end-marker appended to every string.
pub const END_MARKER_CODE: u8 = 0;

/// Byte used to render the end-marker in textual and final outputs.
pub const DEFAULT_END_MARKER_BYTE: u8 = b'$';

/// Highest supported alphabet size. One byte must remain available above the
/// code range for the column pad mark, so codes occupy `0..=254` at most.
pub const MAX_SIGMA: usize = 254;

/// Dense, ordered byte alphabet with a reserved end-marker code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<u8>,
    code_of: [u8; 256],
    end_marker_byte: u8,
}

impl Alphabet {
    /// Build from an explicit symbol set. Bytes are deduplicated and sorted;
    /// the end-marker byte must not be among them.
    pub fn from_symbols(symbols: &[u8], end_marker_byte: u8) -> Result<Self> {
        let mut seen = [false; 256];
        for &b in symbols {
            seen[b as usize] = true;
        }
        Self::from_seen(&seen, end_marker_byte)
    }

    fn from_seen(seen: &[bool; 256], end_marker_byte: u8) -> Result<Self> {
        if seen[end_marker_byte as usize] {
            return Err(Error::EndMarkerCollision {
                byte: end_marker_byte,
            });
        }
        let symbols: Vec<u8> = (0..=255u8).filter(|&b| seen[b as usize]).collect();
        if symbols.is_empty() {
            return Err(Error::EmptyInput);
        }
        if symbols.len() > MAX_SIGMA {
            return Err(Error::AlphabetTooLarge {
                count: symbols.len(),
                max: MAX_SIGMA,
            });
        }
        let mut code_of = [0u8; 256];
        for (i, &b) in symbols.iter().enumerate() {
            code_of[b as usize] = (i + 1) as u8;
        }
        Ok(Self {
            symbols,
            code_of,
            end_marker_byte,
        })
    }

    /// Number of distinct symbols (the end-marker not counted).
    pub fn sigma(&self) -> usize {
        self.symbols.len()
    }

    /// The symbols in code order (code `h` is `symbols()[h - 1]`).
    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    pub fn end_marker_byte(&self) -> u8 {
        self.end_marker_byte
    }

    /// Pad mark for column files; one past the largest code, never written
    /// to any segment.
    pub fn pad_code(&self) -> u8 {
        (self.sigma() + 1) as u8
    }

    #[inline]
    pub fn encode(&self, byte: u8) -> Result<u8> {
        match self.code_of[byte as usize] {
            0 => Err(Error::UnknownSymbol { byte }),
            c => Ok(c),
        }
    }

    /// Inverse of `encode`; code 0 renders as the end-marker byte.
    #[inline]
    pub fn decode(&self, code: u8) -> Result<u8> {
        if code == END_MARKER_CODE {
            Ok(self.end_marker_byte)
        } else if (code as usize) <= self.sigma() {
            Ok(self.symbols[code as usize - 1])
        } else {
            Err(Error::UnknownSymbol { byte: code })
        }
    }
}

/// Streaming alphabet detection over the raw input strings.
#[derive(Debug)]
pub struct AlphabetScanner {
    seen: [bool; 256],
    total: u64,
    end_marker_byte: u8,
}

impl AlphabetScanner {
    pub fn new(end_marker_byte: u8) -> Self {
        Self {
            seen: [false; 256],
            total: 0,
            end_marker_byte,
        }
    }

    #[inline]
    pub fn observe(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.seen[b as usize] = true;
        }
        self.total += bytes.len() as u64;
    }

    pub fn finish(self) -> Result<Alphabet> {
        if self.total == 0 {
            return Err(Error::EmptyInput);
        }
        Alphabet::from_seen(&self.seen, self.end_marker_byte)
    }
}

/// Collection shape: per-string lengths with the end-marker counted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollectionMeta {
    lengths: Vec<u32>,
    n: u64,
    k: u32,
}

impl CollectionMeta {
    pub fn new() -> Self {
        Self {
            lengths: Vec::new(),
            n: 0,
            k: 0,
        }
    }

    /// Record one string of `raw_len` symbols (end-marker not yet counted).
    pub fn push_string(&mut self, raw_len: usize) -> Result<()> {
        if raw_len == 0 {
            return Err(Error::EmptyString {
                index: self.lengths.len(),
            });
        }
        let with_marker = (raw_len + 1) as u32;
        self.lengths.push(with_marker);
        self.n += with_marker as u64;
        self.k = self.k.max(with_marker);
        Ok(())
    }

    pub fn finish(self) -> Result<Self> {
        if self.lengths.is_empty() {
            return Err(Error::EmptyCollection);
        }
        Ok(self)
    }

    /// Number of strings.
    pub fn m(&self) -> usize {
        self.lengths.len()
    }

    /// Total length including end-markers.
    pub fn n(&self) -> u64 {
        self.n
    }

    /// Maximum string length including the end-marker; also the number of
    /// build iterations.
    pub fn k(&self) -> u32 {
        self.k
    }

    /// Length of string `i` including its end-marker.
    pub fn len_with_marker(&self, i: usize) -> u32 {
        self.lengths[i]
    }

    pub fn lengths(&self) -> &[u32] {
        &self.lengths
    }
}

impl Default for CollectionMeta {
    fn default() -> Self {
        Self::new()
    }
}
