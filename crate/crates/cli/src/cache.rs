//! File-backed verdict cache.

use std::fs;
use std::path::{Path, PathBuf};

use reprotest_core::pipeline::{CachedRun, VerdictCache};
use reprotest_core::sha256_hex;
use tracing::warn;

use crate::output::{to_json, write_atomic};

/// One JSON file per (candidate hash, version ref).
pub struct FileCache {
    dir: PathBuf,
}

impl FileCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        FileCache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path_for(&self, candidate_hash: &str, version_ref: &str) -> PathBuf {
        let key = sha256_hex(format!("{candidate_hash}\n{version_ref}").as_bytes());
        self.dir.join(format!("{key}.json"))
    }
}

impl VerdictCache for FileCache {
    fn get(&self, candidate_hash: &str, version_ref: &str) -> Option<CachedRun> {
        let path = self.path_for(candidate_hash, version_ref);
        let text = fs::read_to_string(&path).ok()?;
        match serde_json::from_str(&text) {
            Ok(run) => Some(run),
            Err(e) => {
                warn!(path = %path.display(), "ignoring corrupt cache entry: {e}");
                None
            }
        }
    }

    fn put(&self, candidate_hash: &str, version_ref: &str, run: &CachedRun) {
        let path = self.path_for(candidate_hash, version_ref);
        if let Err(e) = write_atomic(&path, &to_json(run)) {
            warn!(path = %path.display(), "cannot write cache entry: {e}");
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use reprotest_core::harness::{ExecutionRecord, RunStatus, Version};

    #[test]
    fn round_trip_is_keyed_by_hash_and_ref() {
        let dir = tempfile::tempdir().unwrap();
        let cache = FileCache::new(dir.path());
        let run = CachedRun {
            record: ExecutionRecord::other(Version::Buggy, RunStatus::Pass, None, std::time::Duration::ZERO),
            flaky: false,
        };
        cache.put("h", "v1", &run);
        assert_eq!(cache.get("h", "v1"), Some(run));
        assert_eq!(cache.get("h", "v2"), None);
        assert_eq!(cache.get("g", "v1"), None);
    }
}
