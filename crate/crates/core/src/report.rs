//! Output files: CSV tables with units in the headers, JSON summaries and the
//! run manifest.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Content hash in the style of git blobs: SHA-256 over `blob <len>\0`
/// followed by the bytes. Line endings are normalized to `\n` first so the
/// hash does not depend on the platform a config was written on.
pub fn content_hash(bytes: &[u8]) -> String {
    let text: Vec<u8> = bytes.iter().copied().filter(|b| *b != b'\r').collect();
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", text.len()).as_bytes());
    h.update(&text);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Description of one command invocation, written before any result file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentManifest {
    pub command: String,
    pub config_file: Option<PathBuf>,
    /// Resolved parameters, SI units unless the key says otherwise.
    pub parameters: serde_json::Value,
    pub seed: Option<u64>,
    /// Hash of the command, seed and every input file's contents.
    pub input_hash: String,
    pub output_dir: PathBuf,
    pub created_unix_s: u64,
    /// Result files, filled in once they are written.
    pub outputs: Vec<String>,
    pub counts: BTreeMap<String, u64>,
}

impl ExperimentManifest {
    pub fn new(
        command: &str,
        config_file: Option<&Path>,
        parameters: serde_json::Value,
        seed: Option<u64>,
        inputs: &[&[u8]],
        output_dir: &Path,
    ) -> Self {
        let mut all = format!("{command}\nseed={seed:?}\n").into_bytes();
        for i in inputs {
            all.extend_from_slice(content_hash(i).as_bytes());
            all.push(b'\n');
        }
        Self {
            command: command.to_string(),
            config_file: config_file.map(Path::to_path_buf),
            parameters,
            seed,
            input_hash: content_hash(&all),
            output_dir: output_dir.to_path_buf(),
            created_unix_s: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            outputs: Vec::new(),
            counts: BTreeMap::new(),
        }
    }

    pub fn write(&self) -> Result<()> {
        write_json(&self.output_dir.join(MANIFEST_FILE), self)
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::format(&path, e.to_string()))
    }
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::format(path, e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes a numeric table. Headers should carry their unit, e.g.
/// `wavelength_nm`.
pub fn write_table(path: &Path, headers: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::format(path, e.to_string()))?;
    let err = |e: csv::Error| Error::format(path, e.to_string());
    w.write_record(headers).map_err(err)?;
    for r in rows {
        if r.len() != headers.len() {
            return Err(Error::format(
                path,
                format!("row has {} fields, header {}", r.len(), headers.len()),
            ));
        }
        w.write_record(r.iter().map(|x| x.to_string())).map_err(err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a numeric table written by [`write_table`], returning the header
/// and rows.
pub fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::format(path, e.to_string()))?;
    let headers = r
        .headers()
        .map_err(|e| Error::format(path, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (n, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| Error::format(path, e.to_string()))?;
        let row = rec
            .iter()
            .map(|f| {
                f.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::format(path, format!("row {}: `{f}` is not a number", n + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok((headers, rows))
}

/// Column index of `name`, as a format error if absent.
pub fn column(path: &Path, headers: &[String], name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::format(path, format!("missing column `{name}`")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_matches_git_blob_layout() {
        // `printf hello | git hash-object --stdin` uses SHA-1; the layout is
        // the same, so compare against a direct SHA-256 of the framed bytes.
        let direct: String = Sha256::digest(b"blob 5\0hello")
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect();
        assert_eq!(content_hash(b"hello"), direct);
        assert_eq!(content_hash(b"a\r\nb\n"), content_hash(b"a\nb\n"));
    }

    #[test]
    fn table_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        write_table(&p, &["x_nm", "y"], &[vec![1.5, 2.0], vec![-3.0, 1e-300]]).unwrap();
        let (h, rows) = read_table(&p).unwrap();
        assert_eq!(h, vec!["x_nm", "y"]);
        assert_eq!(rows, vec![vec![1.5, 2.0], vec![-3.0, 1e-300]]);
        assert_eq!(column(&p, &h, "y").unwrap(), 1);
        assert!(column(&p, &h, "z").is_err());
        assert!(write_table(&p, &["a"], &[vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn manifest_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let m = ExperimentManifest::new("jsa", None, serde_json::json!({"a": 1}), Some(3), &[b"x"], dir.path());
        m.write().unwrap();
        assert_eq!(ExperimentManifest::read(dir.path()).unwrap(), m);
        let other = ExperimentManifest::new("jsa", None, serde_json::json!({}), Some(4), &[b"x"], dir.path());
        assert_ne!(m.input_hash, other.input_hash);
    }
}
