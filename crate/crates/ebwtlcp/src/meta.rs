//! The `.meta.json` sidecar: everything needed to parse the binary outputs.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct BuildMeta {
    pub format_version: u32,
    /// Number of strings.
    pub m: u64,
    /// Total cells (symbols plus one end-marker per string).
    pub n: u64,
    /// Longest string including its end-marker.
    pub k: u32,
    /// Alphabet size.
    pub sigma: u32,
    /// Source bytes in code order; code `h` is `alphabet[h - 1]`.
    pub alphabet: Vec<u8>,
    pub end_marker_byte: u8,
    pub with_lcp: bool,
    /// Bytes per `.lcp` cell (little-endian), present when `with_lcp`.
    pub lcp_width: Option<u8>,
    pub with_gsa: bool,
    /// Bytes per `.gsa` start field, present when `with_gsa`.
    pub gsa_start_width: Option<u8>,
    /// Bytes per `.gsa` string-id field, present when `with_gsa`.
    pub gsa_id_width: Option<u8>,
}

/// `<prefix>.<ext>`, keeping whatever the prefix already contains intact.
pub fn output_path(prefix: &Path, ext: &str) -> PathBuf {
    let mut os = prefix.as_os_str().to_os_string();
    os.push(".");
    os.push(ext);
    PathBuf::from(os)
}

impl BuildMeta {
    pub fn save(&self, prefix: &Path) -> Result<()> {
        let path = output_path(prefix, "meta.json");
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| Error::InvalidConfig(format!("cannot serialize metadata: {e}")))?;
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn load(prefix: &Path) -> Result<Self> {
        let path = output_path(prefix, "meta.json");
        let raw = match std::fs::read_to_string(&path) {
            Ok(raw) => raw,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(Error::MissingMetadata(path))
            }
            Err(e) => return Err(e.into()),
        };
        let meta: BuildMeta = serde_json::from_str(&raw)
            .map_err(|e| Error::InvalidConfig(format!("cannot parse {}: {e}", path.display())))?;
        if meta.format_version != FORMAT_VERSION {
            return Err(Error::InvalidConfig(format!(
                "unsupported metadata format_version {}",
                meta.format_version
            )));
        }
        Ok(meta)
    }
}
