//! Recorded completions keyed by request fingerprint.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::provider::{CompletionRequest, Provider, ProviderError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayEntry {
    pub fingerprint: String,
    pub text: String,
}

/// One JSON file per fingerprint under a directory.
#[derive(Debug, Clone)]
pub struct ReplayStore {
    dir: PathBuf,
}

impl ReplayStore {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        ReplayStore { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path_for(&self, fingerprint: &str) -> PathBuf {
        self.dir.join(format!("{fingerprint}.json"))
    }

    pub fn get(&self, fingerprint: &str) -> Result<Option<String>, ProviderError> {
        let path = self.path_for(fingerprint);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(ProviderError::Config(format!("{}: {e}", path.display()))),
        };
        let entry: ReplayEntry =
            serde_json::from_str(&text).map_err(|e| ProviderError::Malformed(format!("{}: {e}", path.display())))?;
        if entry.fingerprint != fingerprint {
            return Err(ProviderError::Malformed(format!(
                "{}: recorded fingerprint {} does not match its file name",
                path.display(),
                entry.fingerprint
            )));
        }
        Ok(Some(entry.text))
    }

    pub fn put(&self, fingerprint: &str, text: &str) -> std::io::Result<PathBuf> {
        fs::create_dir_all(&self.dir)?;
        let path = self.path_for(fingerprint);
        let entry = ReplayEntry {
            fingerprint: fingerprint.to_string(),
            text: text.to_string(),
        };
        let tmp = path.with_extension("json.tmp");
        let mut file = fs::File::create(&tmp)?;
        file.write_all(serde_json::to_string_pretty(&entry)?.as_bytes())?;
        file.write_all(b"\n")?;
        fs::rename(&tmp, &path)?;
        Ok(path)
    }
}

/// Serves completions only from the store. A miss is an error, never a live call.
pub struct ReplayProvider {
    store: ReplayStore,
}

impl ReplayProvider {
    pub fn new(store: ReplayStore) -> Self {
        ReplayProvider { store }
    }
}

impl Provider for ReplayProvider {
    fn id(&self) -> &str {
        "replay"
    }

    fn complete(&self, request: &CompletionRequest<'_>) -> Result<String, ProviderError> {
        self.store
            .get(request.fingerprint)?
            .ok_or_else(|| ProviderError::Unrecorded(request.fingerprint.to_string()))
    }
}

/// Forwards to another provider and writes every answer into the store.
pub struct RecordingProvider<P> {
    inner: P,
    store: ReplayStore,
}

impl<P: Provider> RecordingProvider<P> {
    pub fn new(inner: P, store: ReplayStore) -> Self {
        RecordingProvider { inner, store }
    }
}

impl<P: Provider> Provider for RecordingProvider<P> {
    fn id(&self) -> &str {
        self.inner.id()
    }

    fn complete(&self, request: &CompletionRequest<'_>) -> Result<String, ProviderError> {
        let text = self.inner.complete(request)?;
        self.store
            .put(request.fingerprint, &text)
            .map_err(|e| ProviderError::Config(format!("cannot write replay entry: {e}")))?;
        Ok(text)
    }
}

/// Answers sample `i` with the `i`-th of a fixed list of texts.
pub struct ScriptedProvider {
    texts: Vec<String>,
}

impl ScriptedProvider {
    pub fn new(texts: Vec<String>) -> Self {
        ScriptedProvider { texts }
    }
}

impl Provider for ScriptedProvider {
    fn id(&self) -> &str {
        "scripted"
    }

    fn complete(&self, request: &CompletionRequest<'_>) -> Result<String, ProviderError> {
        self.texts
            .get(request.sample_index)
            .cloned()
            .ok_or_else(|| ProviderError::Config(format!("no scripted completion for sample {}", request.sample_index)))
    }
}
