//! TOML run configuration.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use reprotest_core::completion::{
    HttpProvider, HttpProviderConfig, Provider, RecordingProvider, ReplayProvider, ReplayStore, RetryPolicy,
    SamplingParams,
};
use reprotest_core::harness::{CommandRunner, CommandRunnerConfig, FixtureRunner, Runner};
use reprotest_core::inject::{InjectionConfig, ScratchStrategy};
use reprotest_core::java::IndexConfig;
use reprotest_core::pipeline::ExecutionConfig;
use reprotest_core::prompt::PromptConfig;
use reprotest_core::select::SelectionConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderMode {
    Live,
    #[default]
    Replay,
    Record,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProviderSection {
    pub mode: ProviderMode,
    /// Replay store directory.
    pub fixtures: Option<PathBuf>,
    pub endpoint: String,
    pub model: String,
    /// Environment variable holding the bearer token.
    pub auth_env: String,
    pub timeout_secs: u64,
    pub retry_attempts: u32,
    pub retry_base_ms: u64,
}

impl Default for ProviderSection {
    fn default() -> Self {
        ProviderSection {
            mode: ProviderMode::Replay,
            fixtures: None,
            endpoint: "http://127.0.0.1:8080/v1/completions".into(),
            model: "code-completion".into(),
            auth_env: "REPROTEST_API_KEY".into(),
            timeout_secs: 60,
            retry_attempts: 3,
            retry_base_ms: 500,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PromptSection {
    pub n_examples: Option<usize>,
    pub include_stack: bool,
    pub constructor_info: Option<String>,
    /// Few-shot example files, in prompt order.
    pub examples: Vec<PathBuf>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunnerKind {
    #[default]
    Fixture,
    Command,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunnerSection {
    pub kind: RunnerKind,
    pub fixture_manifest: Option<PathBuf>,
    pub cmd: Option<String>,
    pub timeout_secs: u64,
    pub flaky_repeats: usize,
    pub scratch: ScratchStrategy,
    pub scratch_root: Option<PathBuf>,
    pub exhaustive_fixed: bool,
}

impl Default for RunnerSection {
    fn default() -> Self {
        RunnerSection {
            kind: RunnerKind::Fixture,
            fixture_manifest: None,
            cmd: None,
            timeout_secs: 60,
            flaky_repeats: 0,
            scratch: ScratchStrategy::Copy,
            scratch_root: None,
            exhaustive_fixed: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsSection {
    pub ns: Vec<usize>,
    pub random_repeats: usize,
    pub seed: u64,
}

impl Default for MetricsSection {
    fn default() -> Self {
        MetricsSection {
            ns: vec![1, 3, 5],
            random_repeats: 100,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub output_dir: PathBuf,
    /// Verdict cache; `<output_dir>/.cache` when unset.
    pub cache_dir: Option<PathBuf>,
    pub workers: usize,
    pub provider: ProviderSection,
    pub sampling: SamplingParams,
    pub prompt: PromptSection,
    pub selection: SelectionConfig,
    pub injection: InjectionConfig,
    pub index: IndexConfig,
    pub runner: RunnerSection,
    pub metrics: MetricsSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            output_dir: PathBuf::from("out"),
            cache_dir: None,
            workers: 4,
            provider: ProviderSection::default(),
            sampling: SamplingParams::default(),
            prompt: PromptSection::default(),
            selection: SelectionConfig::default(),
            injection: InjectionConfig::default(),
            index: IndexConfig::default(),
            runner: RunnerSection::default(),
            metrics: MetricsSection::default(),
        }
    }
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    /// Load, resolve relative paths against the file's directory, validate.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg = Self::parse(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        resolve(base, &mut self.output_dir);
        for p in [
            self.cache_dir.as_mut(),
            self.provider.fixtures.as_mut(),
            self.runner.fixture_manifest.as_mut(),
            self.runner.scratch_root.as_mut(),
        ]
        .into_iter()
        .flatten()
        {
            resolve(base, p);
        }
        for p in &mut self.prompt.examples {
            resolve(base, p);
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.provider.mode != ProviderMode::Live && self.provider.fixtures.is_none() {
            bail!("provider.mode = {:?} requires provider.fixtures", self.provider.mode);
        }
        match self.runner.kind {
            RunnerKind::Fixture if self.runner.fixture_manifest.is_none() => {
                bail!("runner.kind = \"fixture\" requires runner.fixture_manifest")
            }
            RunnerKind::Command if self.runner.cmd.is_none() => {
                bail!("runner.kind = \"command\" requires runner.cmd")
            }
            _ => {}
        }
        if self.runner.flaky_repeats == 1 {
            bail!("runner.flaky_repeats must be 0 (off) or at least 2");
        }
        if self.metrics.ns.contains(&0) {
            bail!("metrics.ns entries must be at least 1");
        }
        if self.workers == 0 {
            bail!("workers must be at least 1");
        }
        self.sampling.validate()?;
        Ok(())
    }

    pub fn prompt_config(&self, available_examples: usize) -> PromptConfig {
        PromptConfig {
            n_examples: self.prompt.n_examples.unwrap_or(available_examples),
            include_stack: self.prompt.include_stack,
            constructor_info: self.prompt.constructor_info.clone(),
        }
    }

    pub fn retry(&self) -> RetryPolicy {
        RetryPolicy {
            attempts: self.provider.retry_attempts,
            base_delay: Duration::from_millis(self.provider.retry_base_ms),
        }
    }

    pub fn execution(&self) -> ExecutionConfig {
        ExecutionConfig {
            injection: self.injection.clone(),
            selection: self.selection,
            index: self.index.clone(),
            scratch: self.runner.scratch,
            flaky_repeats: self.runner.flaky_repeats,
            exhaustive_fixed: self.runner.exhaustive_fixed,
            scratch_root: self.runner.scratch_root.clone(),
        }
    }

    pub fn cache_dir(&self) -> PathBuf {
        self.cache_dir.clone().unwrap_or_else(|| self.output_dir.join(".cache"))
    }

    pub fn replay_store(&self) -> Result<ReplayStore> {
        let dir = self.provider.fixtures.clone().context("provider.fixtures is not set")?;
        Ok(ReplayStore::new(dir))
    }

    pub fn http_provider(&self) -> HttpProvider {
        let auth_token = std::env::var(&self.provider.auth_env).ok().filter(|t| !t.is_empty());
        HttpProvider::new(HttpProviderConfig {
            endpoint: self.provider.endpoint.clone(),
            model: self.provider.model.clone(),
            auth_token,
            timeout: Duration::from_secs(self.provider.timeout_secs),
        })
    }

    /// The configured provider. Replay mode never builds an HTTP client.
    pub fn provider(&self) -> Result<Box<dyn Provider>> {
        Ok(match self.provider.mode {
            ProviderMode::Replay => Box::new(ReplayProvider::new(self.replay_store()?)),
            ProviderMode::Live => Box::new(self.http_provider()),
            ProviderMode::Record => Box::new(RecordingProvider::new(self.http_provider(), self.replay_store()?)),
        })
    }

    pub fn runner(&self) -> Result<Box<dyn Runner>> {
        Ok(match self.runner.kind {
            RunnerKind::Fixture => {
                let path = self
                    .runner
                    .fixture_manifest
                    .as_ref()
                    .context("runner.fixture_manifest is not set")?;
                Box::new(FixtureRunner::load(path)?)
            }
            RunnerKind::Command => Box::new(CommandRunner::new(CommandRunnerConfig {
                cmd: self.runner.cmd.clone().context("runner.cmd is not set")?,
                timeout: Duration::from_secs(self.runner.timeout_secs),
            })),
        })
    }
}
