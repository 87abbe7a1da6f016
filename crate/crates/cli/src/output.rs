//! Run-directory writing: atomic files, the run log and the output manifest.

use std::fs::{self, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use reprotest_core::sha256_hex;
use serde::Serialize;
use walkdir::WalkDir;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const RUN_LOG_FILE: &str = "run.log";
pub const CACHE_DIR: &str = ".cache";

/// Write through a sibling temp file and rename into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut tmp_name = path.file_name().unwrap_or_default().to_os_string();
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("output types serialize");
    out.push(b'\n');
    out
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, &to_json(value)).with_context(|| format!("writing {}", path.display()))
}

/// File-system safe form of a candidate or bug id.
pub fn safe_name(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '-' | '.') {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Append-only log; the only output carrying wall-clock time.
pub struct RunLog {
    path: PathBuf,
    lock: Mutex<()>,
}

impl RunLog {
    pub fn new(dir: &Path) -> Self {
        RunLog {
            path: dir.join(RUN_LOG_FILE),
            lock: Mutex::new(()),
        }
    }

    pub fn line(&self, message: impl AsRef<str>) {
        let ts = SystemTime::now().duration_since(UNIX_EPOCH).unwrap_or_default();
        let _guard = self.lock.lock().unwrap_or_else(|e| e.into_inner());
        let written = self.path.parent().map_or(Ok(()), fs::create_dir_all).and_then(|_| {
            let mut f = OpenOptions::new().create(true).append(true).open(&self.path)?;
            writeln!(f, "{}.{:03} {}", ts.as_secs(), ts.subsec_millis(), message.as_ref())
        });
        if let Err(e) = written {
            tracing::warn!(path = %self.path.display(), "cannot append to run log: {e}");
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ManifestEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Every output file under `dir` except the log, the cache and the manifest itself.
pub fn write_manifest(dir: &Path) -> Result<Vec<ManifestEntry>> {
    let mut entries = Vec::new();
    let walker = WalkDir::new(dir)
        .sort_by_file_name()
        .into_iter()
        .filter_entry(|e| e.depth() == 0 || e.file_name() != CACHE_DIR);
    for entry in walker {
        let entry = entry?;
        if !entry.file_type().is_file() {
            continue;
        }
        let rel = entry.path().strip_prefix(dir).expect("walk stays under dir");
        let rel = rel.to_string_lossy().replace('\\', "/");
        if rel == MANIFEST_FILE || rel == RUN_LOG_FILE || rel.ends_with(".tmp") {
            continue;
        }
        let bytes = fs::read(entry.path()).with_context(|| format!("reading {}", entry.path().display()))?;
        entries.push(ManifestEntry {
            path: rel,
            sha256: sha256_hex(&bytes),
            bytes: bytes.len() as u64,
        });
    }
    write_json(&dir.join(MANIFEST_FILE), &entries)?;
    Ok(entries)
}
