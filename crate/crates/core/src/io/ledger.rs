//! Append-only JSON-lines record of runs.
//!
//! Each entry hashes the canonical config text and every output file. The
//! outputs digest covers (relative path, file hash) pairs only, so two runs
//! with the same config and seed give the same digest; the timestamp sits
//! beside it and is not hashed.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputRecord {
    /// Relative to the output directory, `/`-separated.
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub timestamp_unix: u64,
    pub command: String,
    pub seed: u64,
    pub config_sha256: String,
    pub outputs_digest: String,
    pub outputs: Vec<OutputRecord>,
}

impl LedgerEntry {
    pub fn new(command: &str, seed: u64, config_text: &str, outputs: Vec<OutputRecord>, outputs_digest: String) -> Self {
        let timestamp_unix =
            std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        LedgerEntry {
            timestamp_unix,
            command: command.to_string(),
            seed,
            config_sha256: sha256_hex(config_text.as_bytes()),
            outputs_digest,
            outputs,
        }
    }
}

/// Hashes the given files (paths relative to `root`) and combines them into
/// one digest, independent of the order they were listed in.
pub fn digest_outputs(root: &Path, files: &[PathBuf]) -> Result<(Vec<OutputRecord>, String)> {
    let mut records = files
        .iter()
        .map(|rel| {
            let bytes = std::fs::read(root.join(rel))?;
            let path = rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/");
            Ok(OutputRecord { path, sha256: sha256_hex(&bytes) })
        })
        .collect::<Result<Vec<_>>>()?;
    records.sort_by(|a, b| a.path.cmp(&b.path));
    let mut h = Sha256::new();
    for r in &records {
        h.update(r.path.as_bytes());
        h.update(b"\t");
        h.update(r.sha256.as_bytes());
        h.update(b"\n");
    }
    Ok((records, hex::encode(h.finalize())))
}

pub fn append_ledger(path: &Path, entry: &LedgerEntry) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut line = serde_json::to_string(entry)?;
    line.push('\n');
    let mut f = std::fs::OpenOptions::new().create(true).append(true).open(path)?;
    f.write_all(line.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_ignores_listing_order() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("a.txt"), "alpha").unwrap();
        std::fs::create_dir(dir.path().join("sub")).unwrap();
        std::fs::write(dir.path().join("sub/b.txt"), "beta").unwrap();
        let (_, d1) = digest_outputs(dir.path(), &["a.txt".into(), "sub/b.txt".into()]).unwrap();
        let (recs, d2) = digest_outputs(dir.path(), &["sub/b.txt".into(), "a.txt".into()]).unwrap();
        assert_eq!(d1, d2);
        assert_eq!(recs[1].path, "sub/b.txt");
        std::fs::write(dir.path().join("a.txt"), "alpha!").unwrap();
        let (_, d3) = digest_outputs(dir.path(), &["a.txt".into(), "sub/b.txt".into()]).unwrap();
        assert_ne!(d1, d3);
    }

    #[test]
    fn known_sha256() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn ledger_appends_lines() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("ledger.jsonl");
        let e = LedgerEntry::new("simulate", 1, "x = 1\n", vec![], "d".into());
        append_ledger(&p, &e).unwrap();
        append_ledger(&p, &e).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(text.lines().count(), 2);
        let back: LedgerEntry = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!(back, e);
    }
}
