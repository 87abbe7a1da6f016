//! Running injected tests and classifying the outcome.
//!
//! A [`Runner`] executes one test method in a materialized project. Two are
//! provided: [`CommandRunner`] shells out to a configured command template,
//! and [`FixtureRunner`] answers from a manifest of declared outcomes.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use tracing::{debug, warn};

use crate::hash::sha256_hex;
use crate::inject::{materialize, ModifiedSuite, ScratchStrategy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Version {
    Buggy,
    Fixed,
}

impl Version {
    pub fn as_str(self) -> &'static str {
        match self {
            Version::Buggy => "buggy",
            Version::Fixed => "fixed",
        }
    }
}

impl fmt::Display for Version {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    CompileError,
    Pass,
    Fail,
    Timeout,
    InfraError,
}

impl RunStatus {
    pub const ALL: [RunStatus; 5] = [
        RunStatus::CompileError,
        RunStatus::Pass,
        RunStatus::Fail,
        RunStatus::Timeout,
        RunStatus::InfraError,
    ];
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FailureOutput {
    /// Simple name of the thrown exception.
    pub error_type: String,
    /// First line of the failure message.
    pub message: String,
    #[serde(default)]
    pub trace: String,
}

impl FailureOutput {
    pub fn new(error_type: &str, message: &str, trace: &str) -> Self {
        FailureOutput {
            error_type: simple_name(error_type).to_string(),
            message: message.lines().next().unwrap_or("").to_string(),
            trace: trace.to_string(),
        }
    }
}

fn simple_name(name: &str) -> &str {
    let name = name.trim();
    name.rsplit(['.', '$']).next().unwrap_or(name)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutionRecord {
    pub version: Version,
    pub status: RunStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure_output: Option<FailureOutput>,
    pub duration_secs: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<String>,
}

impl ExecutionRecord {
    pub fn failed(version: Version, output: FailureOutput, duration: Duration) -> Self {
        ExecutionRecord {
            version,
            status: RunStatus::Fail,
            failure_output: Some(output),
            duration_secs: duration.as_secs_f64(),
            diagnostics: None,
        }
    }

    /// A record for any status other than `Fail`.
    pub fn other(version: Version, status: RunStatus, diagnostics: Option<String>, duration: Duration) -> Self {
        debug_assert_ne!(status, RunStatus::Fail);
        ExecutionRecord {
            version,
            status,
            failure_output: None,
            duration_secs: duration.as_secs_f64(),
            diagnostics,
        }
    }

    pub fn infra(version: Version, diagnostics: impl Into<String>) -> Self {
        Self::other(version, RunStatus::InfraError, Some(diagnostics.into()), Duration::ZERO)
    }
}

/// One test execution request.
#[derive(Debug, Clone, Copy)]
pub struct RunRequest<'a> {
    pub project_dir: &'a Path,
    /// Fully qualified host class name.
    pub test_class: &'a str,
    pub test_method: &'a str,
    pub version: Version,
    /// Hash of the candidate's source, used by fixture runners.
    pub candidate_hash: &'a str,
}

pub trait Runner: Send + Sync {
    fn run(&self, request: &RunRequest<'_>) -> ExecutionRecord;
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommandRunnerConfig {
    /// Shell command with `{project_dir}`, `{test_class}`, `{test_method}`,
    /// `{result_file}` and `{version}` placeholders.
    pub cmd: String,
    pub timeout: Duration,
}

/// Runs a shell command per test.
///
/// Exit 0 means pass and exit 1 means fail. If the command writes a JSON
/// result file, its `status` overrides the exit code.
#[derive(Debug, Clone)]
pub struct CommandRunner {
    config: CommandRunnerConfig,
}

#[derive(Debug, Deserialize)]
struct ResultFile {
    status: RunStatus,
    #[serde(default)]
    error_type: Option<String>,
    #[serde(default)]
    message: Option<String>,
    #[serde(default)]
    trace: Option<String>,
}

fn shell_quote(s: &str) -> String {
    format!("'{}'", s.replace('\'', r"'\''"))
}

/// First `pkg.SomeException: message` line in free-form test output.
fn scrape_failure(output: &str) -> FailureOutput {
    for line in output.lines() {
        let line = line.trim();
        let (head, msg) = line.split_once(':').unwrap_or((line, ""));
        let head = head.trim();
        let looks_like_type = !head.is_empty()
            && !head.contains(char::is_whitespace)
            && (head.ends_with("Exception") || head.ends_with("Error") || head.ends_with("Failure"));
        if looks_like_type {
            return FailureOutput::new(head, msg.trim(), output);
        }
    }
    FailureOutput::new("UnknownFailure", "", output)
}

impl CommandRunner {
    pub fn new(config: CommandRunnerConfig) -> Self {
        CommandRunner { config }
    }

    fn command_line(&self, req: &RunRequest<'_>, result_file: &Path) -> String {
        self.config
            .cmd
            .replace("{project_dir}", &shell_quote(&req.project_dir.to_string_lossy()))
            .replace("{test_class}", &shell_quote(req.test_class))
            .replace("{test_method}", &shell_quote(req.test_method))
            .replace("{result_file}", &shell_quote(&result_file.to_string_lossy()))
            .replace("{version}", req.version.as_str())
    }
}

fn drain<R: Read + Send + 'static>(pipe: Option<R>) -> thread::JoinHandle<String> {
    thread::spawn(move || {
        let mut buf = Vec::new();
        if let Some(mut p) = pipe {
            let _ = p.read_to_end(&mut buf);
        }
        String::from_utf8_lossy(&buf).into_owned()
    })
}

#[cfg(unix)]
fn configure_group(cmd: &mut Command) {
    use std::os::unix::process::CommandExt;
    cmd.process_group(0);
}

#[cfg(not(unix))]
fn configure_group(_cmd: &mut Command) {}

fn kill_tree(child: &mut std::process::Child) {
    #[cfg(unix)]
    if let Ok(pid) = libc::pid_t::try_from(child.id()) {
        if pid > 1 {
            // SAFETY: signals only the process group created for this child.
            unsafe {
                libc::kill(-pid, libc::SIGKILL);
            }
        }
    }
    let _ = child.kill();
}

impl Runner for CommandRunner {
    fn run(&self, req: &RunRequest<'_>) -> ExecutionRecord {
        let result_file: PathBuf = req.project_dir.join(".reprotest-result.json");
        let _ = fs::remove_file(&result_file);
        let line = self.command_line(req, &result_file);
        debug!(%line, "launching test command");

        let start = Instant::now();
        let mut cmd = Command::new("sh");
        cmd.arg("-c")
            .arg(&line)
            .current_dir(req.project_dir)
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped());
        configure_group(&mut cmd);
        let mut child = match cmd.spawn() {
            Ok(c) => c,
            Err(e) => return ExecutionRecord::infra(req.version, format!("failed to launch runner: {e}")),
        };
        let out = drain(child.stdout.take());
        let err = drain(child.stderr.take());

        let exit = loop {
            match child.try_wait() {
                Ok(Some(status)) => break Some(status),
                Ok(None) if start.elapsed() >= self.config.timeout => {
                    kill_tree(&mut child);
                    let _ = child.wait();
                    break None;
                }
                Ok(None) => thread::sleep(Duration::from_millis(5)),
                Err(e) => {
                    kill_tree(&mut child);
                    return ExecutionRecord::infra(req.version, format!("waiting on runner: {e}"));
                }
            }
        };
        let stdout = out.join().unwrap_or_default();
        let stderr = err.join().unwrap_or_default();
        let elapsed = start.elapsed();

        let Some(exit) = exit else {
            warn!(test = req.test_method, "test run timed out");
            return ExecutionRecord::other(
                req.version,
                RunStatus::Timeout,
                Some(format!("killed after {:?}", self.config.timeout)),
                elapsed,
            );
        };

        if let Ok(text) = fs::read_to_string(&result_file) {
            return match serde_json::from_str::<ResultFile>(&text) {
                Ok(r) if r.status == RunStatus::Fail => ExecutionRecord::failed(
                    req.version,
                    FailureOutput::new(
                        r.error_type.as_deref().unwrap_or("UnknownFailure"),
                        r.message.as_deref().unwrap_or(""),
                        r.trace.as_deref().unwrap_or(""),
                    ),
                    elapsed,
                ),
                Ok(r) => ExecutionRecord::other(req.version, r.status, r.message, elapsed),
                Err(e) => ExecutionRecord::infra(req.version, format!("bad result file: {e}")),
            };
        }
        match exit.code() {
            Some(0) => ExecutionRecord::other(req.version, RunStatus::Pass, None, elapsed),
            Some(1) => ExecutionRecord::failed(req.version, scrape_failure(&format!("{stdout}{stderr}")), elapsed),
            code => ExecutionRecord::infra(req.version, format!("runner exited with {code:?}: {}", stderr.trim())),
        }
    }
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("flakiness check needs at least 2 repeats, got {0}")]
    InvalidRepeats(usize),
    #[error("fixture manifest {path}: {problem}")]
    Manifest { path: PathBuf, problem: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeclaredOutcome {
    pub status: RunStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_type: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<String>,
}

impl DeclaredOutcome {
    fn record(&self, version: Version) -> ExecutionRecord {
        if self.status == RunStatus::Fail {
            ExecutionRecord::failed(
                version,
                FailureOutput::new(
                    self.error_type.as_deref().unwrap_or("UnknownFailure"),
                    self.message.as_deref().unwrap_or(""),
                    self.trace.as_deref().unwrap_or(""),
                ),
                Duration::ZERO,
            )
        } else {
            ExecutionRecord::other(version, self.status, self.message.clone(), Duration::ZERO)
        }
    }
}

/// One manifest row: a candidate (by source hash or literal source) and
/// its outcome on one version. `sequence` cycles across repeated calls.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureEntry {
    pub version: Version,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_hash: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_source: Option<String>,
    #[serde(flatten, default, skip_serializing_if = "Option::is_none")]
    pub outcome: Option<DeclaredOutcome>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sequence: Vec<DeclaredOutcome>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureManifest {
    pub entries: Vec<FixtureEntry>,
}

/// Answers runs from declared outcomes keyed by (version, candidate hash).
/// Unknown keys yield `InfraError`.
#[derive(Debug, Default)]
pub struct FixtureRunner {
    outcomes: HashMap<(Version, String), Vec<DeclaredOutcome>>,
    calls: Mutex<HashMap<(Version, String), usize>>,
}

impl FixtureRunner {
    pub fn from_manifest(manifest: FixtureManifest) -> Result<Self, String> {
        let mut outcomes = HashMap::new();
        for (i, e) in manifest.entries.into_iter().enumerate() {
            let hash = match (e.test_hash, e.test_source) {
                (Some(h), _) => h,
                (None, Some(src)) => sha256_hex(src.as_bytes()),
                (None, None) => return Err(format!("entry {i} has neither test_hash nor test_source")),
            };
            let seq = match (e.outcome, e.sequence.is_empty()) {
                (Some(o), true) => vec![o],
                (None, false) => e.sequence,
                _ => return Err(format!("entry {i} needs exactly one of status or sequence")),
            };
            if outcomes.insert((e.version, hash.clone()), seq).is_some() {
                return Err(format!("entry {i} duplicates ({}, {hash})", e.version));
            }
        }
        Ok(FixtureRunner {
            outcomes,
            calls: Mutex::default(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let problem = |problem: String| HarnessError::Manifest {
            path: path.to_path_buf(),
            problem,
        };
        let text = fs::read_to_string(path).map_err(|e| problem(e.to_string()))?;
        let manifest: FixtureManifest = serde_json::from_str(&text).map_err(|e| problem(e.to_string()))?;
        Self::from_manifest(manifest).map_err(problem)
    }
}

impl Runner for FixtureRunner {
    fn run(&self, req: &RunRequest<'_>) -> ExecutionRecord {
        let key = (req.version, req.candidate_hash.to_string());
        let Some(seq) = self.outcomes.get(&key) else {
            return ExecutionRecord::infra(
                req.version,
                format!("no declared outcome for {} on {}", req.candidate_hash, req.version),
            );
        };
        let mut calls = self.calls.lock().expect("fixture counter poisoned");
        let n = calls.entry(key).or_insert(0);
        let outcome = &seq[*n % seq.len()];
        *n += 1;
        outcome.record(req.version)
    }
}

/// Materialize `suite` under `scratch` and run its injected test.
pub fn run_candidate(
    suite: &ModifiedSuite,
    version: Version,
    runner: &dyn Runner,
    scratch: &Path,
    strategy: ScratchStrategy,
    candidate_hash: &str,
) -> ExecutionRecord {
    if let Err(e) = materialize(suite, scratch, strategy) {
        return ExecutionRecord::infra(version, format!("materializing scratch project: {e}"));
    }
    runner.run(&RunRequest {
        project_dir: scratch,
        test_class: &suite.test_class,
        test_method: &suite.injected_test_name,
        version,
        candidate_hash,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateVerdict {
    pub candidate_id: String,
    pub buggy: ExecutionRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed: Option<ExecutionRecord>,
    pub fib: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub brt: Option<bool>,
    #[serde(default)]
    pub flaky: bool,
}

impl CandidateVerdict {
    pub fn is_brt(&self) -> bool {
        self.brt == Some(true)
    }

    /// Drop a flaky candidate from the FIB set.
    pub fn mark_flaky(&mut self) {
        self.flaky = true;
        self.fib = false;
        if self.brt.is_some() {
            self.brt = Some(false);
        }
    }
}

pub fn verdict(
    candidate_id: impl Into<String>,
    buggy: ExecutionRecord,
    fixed: Option<ExecutionRecord>,
) -> CandidateVerdict {
    let fib = buggy.status == RunStatus::Fail;
    let brt = fixed.as_ref().map(|f| fib && f.status == RunStatus::Pass);
    CandidateVerdict {
        candidate_id: candidate_id.into(),
        buggy,
        fixed,
        fib,
        brt,
        flaky: false,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlakyCheck {
    pub flaky: bool,
    pub statuses: Vec<RunStatus>,
    /// Record of the first run.
    pub first: ExecutionRecord,
}

/// Run the same request `k` times; flaky when the statuses disagree.
pub fn detect_flaky(runner: &dyn Runner, request: &RunRequest<'_>, k: usize) -> Result<FlakyCheck, HarnessError> {
    if k < 2 {
        return Err(HarnessError::InvalidRepeats(k));
    }
    let first = runner.run(request);
    let mut statuses = vec![first.status];
    statuses.extend((1..k).map(|_| runner.run(request).status));
    Ok(FlakyCheck {
        flaky: statuses.iter().any(|s| *s != statuses[0]),
        statuses,
        first,
    })
}
