//! Helpers shared by the integration suites.
#![allow(dead_code)] // each suite uses its own subset

use std::io::Write;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random collection: `m` in 1..=64, lengths in 1..=32, symbols drawn from
/// the first `sigma` lowercase letters.
pub fn random_collection(rng: &mut ChaCha8Rng, sigma: usize) -> Vec<Vec<u8>> {
    let m = rng.random_range(1..=64);
    (0..m)
        .map(|_| {
            let len = rng.random_range(1..=32);
            (0..len)
                .map(|_| b'a' + rng.random_range(0..sigma) as u8)
                .collect()
        })
        .collect()
}

/// Deterministic DNA-like dataset: `m` strings of fixed length `len`.
pub fn synthetic_dna(seed: u64, m: usize, len: usize) -> Vec<Vec<u8>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    const BASES: [u8; 4] = *b"ACGT";
    (0..m)
        .map(|_| (0..len).map(|_| BASES[rng.random_range(0..4)]).collect())
        .collect()
}

/// Scratch directory for build working files; prefers the RAM-backed
/// `/dev/shm` where file syscalls are cheapest.
pub fn scratch_dir() -> tempfile::TempDir {
    if Path::new("/dev/shm").is_dir() {
        if let Ok(dir) = tempfile::tempdir_in("/dev/shm") {
            return dir;
        }
    }
    tempfile::tempdir().unwrap()
}

/// Write a collection as a lines file and return its path.
pub fn write_lines(dir: &Path, name: &str, strings: &[Vec<u8>]) -> PathBuf {
    let path = dir.join(name);
    let mut f = std::io::BufWriter::new(std::fs::File::create(&path).unwrap());
    for s in strings {
        f.write_all(s).unwrap();
        f.write_all(b"\n").unwrap();
    }
    f.flush().unwrap();
    path
}
