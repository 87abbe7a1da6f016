//! End-to-end processing of one bug.
//!
//! [`generate`] renders the prompt and samples candidates; [`execute`]
//! injects, runs and ranks them.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tracing::{debug, info};

use crate::completion::{
    sample, to_candidates, CandidateBatch, GatewayError, Provider, RawCompletion, RetryPolicy, SamplingParams,
    TestCandidate,
};
use crate::harness::{
    detect_flaky, run_candidate, verdict, CandidateVerdict, ExecutionRecord, RunRequest, Runner, Version,
};
use crate::inject::{
    apply_injection, find_best_matching_class, materialize, plan_injection, InjectionConfig, InjectionPlan,
    MatchResult, ModifiedSuite, ScratchStrategy,
};
use crate::java::{build_index, IndexConfig, IndexError, SourceIndex};
use crate::metrics::BugOutcome;
use crate::prompt::{render_prompt, PromptConfig, PromptError, PromptText};
use crate::report::{BugReport, ExamplePair};
use crate::select::{rank, FibTest, RankedSuggestions, SelectionConfig};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("[prompt] rendering failed")]
    Prompt(#[from] PromptError),
    #[error("[sample] sampling failed")]
    Sample(#[from] GatewayError),
    #[error("[index] indexing failed")]
    Index(#[from] IndexError),
    #[error("[run] cannot create scratch directory")]
    Scratch(#[source] std::io::Error),
}

/// Prompt text, raw samples and the parsed candidates for one report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generation {
    pub prompt: PromptText,
    pub raw: Vec<RawCompletion>,
    pub batch: CandidateBatch,
}

pub fn generate(
    report: &BugReport,
    examples: &[ExamplePair],
    prompt_config: &PromptConfig,
    params: &SamplingParams,
    provider: &dyn Provider,
    retry: &RetryPolicy,
) -> Result<Generation, PipelineError> {
    let prompt = render_prompt(report, examples, prompt_config)?;
    let raw = sample(&prompt, params, provider, retry)?;
    let batch = to_candidates(&raw);
    info!(
        report = %report.id,
        candidates = batch.candidates.len(),
        rejected = batch.rejections.len(),
        "sampled completions"
    );
    Ok(Generation { prompt, raw, batch })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExecutionConfig {
    pub injection: InjectionConfig,
    pub selection: SelectionConfig,
    pub index: IndexConfig,
    pub scratch: ScratchStrategy,
    /// Buggy-version repeats for the flakiness check; below 2 disables it.
    pub flaky_repeats: usize,
    /// Run the fixed version for every candidate instead of FIB ones only.
    pub exhaustive_fixed: bool,
    /// Parent for per-candidate scratch projects; the system temp dir if unset.
    pub scratch_root: Option<PathBuf>,
}

impl Default for ExecutionConfig {
    fn default() -> Self {
        ExecutionConfig {
            injection: InjectionConfig::default(),
            selection: SelectionConfig::default(),
            index: IndexConfig::default(),
            scratch: ScratchStrategy::Copy,
            flaky_repeats: 0,
            exhaustive_fixed: false,
            scratch_root: None,
        }
    }
}

/// Buggy and fixed trees of one bug with their references.
#[derive(Debug, Clone)]
pub struct ProjectPair {
    pub buggy_root: PathBuf,
    pub fixed_root: PathBuf,
    pub buggy_ref: String,
    pub fixed_ref: String,
}

/// A cached run result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CachedRun {
    pub record: ExecutionRecord,
    #[serde(default)]
    pub flaky: bool,
}

/// Execution records keyed by (candidate source hash, version reference).
pub trait VerdictCache: Send + Sync {
    fn get(&self, candidate_hash: &str, version_ref: &str) -> Option<CachedRun>;
    fn put(&self, candidate_hash: &str, version_ref: &str, run: &CachedRun);
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRun {
    pub candidate_id: String,
    pub candidate_hash: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub host: Option<MatchResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<InjectionPlan>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub injection_error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<CandidateVerdict>,
}

impl CandidateRun {
    pub fn is_fib(&self) -> bool {
        self.verdict.as_ref().is_some_and(|v| v.fib)
    }

    pub fn is_brt(&self) -> bool {
        self.verdict.as_ref().is_some_and(|v| v.is_brt())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BugRun {
    pub report_id: String,
    pub runs: Vec<CandidateRun>,
    pub suggestions: RankedSuggestions,
    pub flaky_excluded: usize,
    pub outcome: BugOutcome,
}

struct Indexes {
    buggy: SourceIndex,
    fixed: SourceIndex,
}

fn inject(
    candidate: &TestCandidate,
    root: &Path,
    index: &SourceIndex,
    config: &InjectionConfig,
) -> Result<(MatchResult, InjectionPlan, ModifiedSuite), String> {
    let matched = find_best_matching_class(candidate, index).map_err(|e| e.to_string())?;
    let plan = plan_injection(candidate, &matched, index, config).map_err(|e| e.to_string())?;
    let suite = apply_injection(&plan, root, index, config).map_err(|e| e.to_string())?;
    Ok((matched, plan, suite))
}

fn scratch_dir(config: &ExecutionConfig) -> Result<tempfile::TempDir, std::io::Error> {
    let mut b = tempfile::Builder::new();
    b.prefix("reprotest-");
    match &config.scratch_root {
        Some(root) => {
            std::fs::create_dir_all(root)?;
            b.tempdir_in(root)
        }
        None => b.tempdir(),
    }
}

struct Ctx<'a> {
    project: &'a ProjectPair,
    indexes: &'a Indexes,
    runner: &'a dyn Runner,
    cache: Option<&'a dyn VerdictCache>,
    config: &'a ExecutionConfig,
}

impl Ctx<'_> {
    fn run_version(
        &self,
        suite: &ModifiedSuite,
        version: Version,
        hash: &str,
        check_flaky: bool,
    ) -> Result<CachedRun, PipelineError> {
        let version_ref = match version {
            Version::Buggy => &self.project.buggy_ref,
            Version::Fixed => &self.project.fixed_ref,
        };
        if let Some(hit) = self.cache.and_then(|c| c.get(hash, version_ref)) {
            debug!(hash, version_ref, "verdict cache hit");
            return Ok(hit);
        }
        let scratch = scratch_dir(self.config).map_err(PipelineError::Scratch)?;
        let run = if check_flaky && self.config.flaky_repeats >= 2 {
            match materialize(suite, scratch.path(), self.config.scratch) {
                Err(e) => CachedRun {
                    record: ExecutionRecord::infra(version, format!("materializing scratch project: {e}")),
                    flaky: false,
                },
                Ok(()) => {
                    let req = RunRequest {
                        project_dir: scratch.path(),
                        test_class: &suite.test_class,
                        test_method: &suite.injected_test_name,
                        version,
                        candidate_hash: hash,
                    };
                    let check =
                        detect_flaky(self.runner, &req, self.config.flaky_repeats).expect("repeats checked above");
                    CachedRun {
                        record: check.first,
                        flaky: check.flaky,
                    }
                }
            }
        } else {
            CachedRun {
                record: run_candidate(suite, version, self.runner, scratch.path(), self.config.scratch, hash),
                flaky: false,
            }
        };
        if let Some(c) = self.cache {
            c.put(hash, version_ref, &run);
        }
        Ok(run)
    }

    fn run_one(&self, candidate: &TestCandidate) -> Result<CandidateRun, PipelineError> {
        let hash = candidate.source_hash();
        let mut out = CandidateRun {
            candidate_id: candidate.id(),
            candidate_hash: hash.clone(),
            host: None,
            plan: None,
            injection_error: None,
            verdict: None,
        };
        let cfg = &self.config.injection;
        let suite = match inject(candidate, &self.project.buggy_root, &self.indexes.buggy, cfg) {
            Ok((m, plan, suite)) => {
                out.host = Some(m);
                out.plan = Some(plan);
                suite
            }
            Err(e) => {
                out.injection_error = Some(e);
                return Ok(out);
            }
        };
        let buggy = self.run_version(&suite, Version::Buggy, &hash, true)?;
        let fails = buggy.record.status == crate::harness::RunStatus::Fail && !buggy.flaky;
        let fixed = if fails || self.config.exhaustive_fixed {
            match inject(candidate, &self.project.fixed_root, &self.indexes.fixed, cfg) {
                Ok((_, _, fixed_suite)) => Some(self.run_version(&fixed_suite, Version::Fixed, &hash, false)?.record),
                Err(e) => Some(ExecutionRecord::infra(
                    Version::Fixed,
                    format!("injection into fixed version failed: {e}"),
                )),
            }
        } else {
            None
        };
        let mut v = verdict(candidate.id(), buggy.record, fixed);
        if buggy.flaky {
            v.mark_flaky();
        }
        out.verdict = Some(v);
        Ok(out)
    }
}

/// Inject, run and rank `candidates` for one bug.
pub fn execute(
    report: &BugReport,
    candidates: &[TestCandidate],
    project: &ProjectPair,
    runner: &dyn Runner,
    cache: Option<&dyn VerdictCache>,
    config: &ExecutionConfig,
) -> Result<BugRun, PipelineError> {
    let indexes = Indexes {
        buggy: build_index(&project.buggy_root, &config.index)?,
        fixed: build_index(&project.fixed_root, &config.index)?,
    };
    let ctx = Ctx {
        project,
        indexes: &indexes,
        runner,
        cache,
        config,
    };
    let runs: Vec<CandidateRun> = candidates
        .par_iter()
        .map(|c| ctx.run_one(c))
        .collect::<Result<_, _>>()?;

    let fibs: Vec<FibTest> = candidates
        .iter()
        .zip(&runs)
        .filter_map(|(c, r)| {
            let v = r.verdict.as_ref().filter(|v| v.fib)?;
            Some(FibTest {
                candidate: c.clone(),
                failure: v.buggy.failure_output.clone()?,
            })
        })
        .collect();
    let suggestions = rank(&fibs, report, &config.selection);
    let brt_of = |id: &str| runs.iter().any(|r| r.candidate_id == id && r.is_brt());
    let outcome = BugOutcome {
        bug_id: report.id.clone(),
        selected: suggestions.selected,
        ranking: suggestions.ranking.iter().map(|e| brt_of(&e.id)).collect(),
        n_fib: fibs.len(),
        reproduced: runs.iter().any(CandidateRun::is_brt),
    };
    let flaky_excluded = runs
        .iter()
        .filter(|r| r.verdict.as_ref().is_some_and(|v| v.flaky))
        .count();
    info!(
        report = %report.id,
        fib = outcome.n_fib,
        selected = outcome.selected,
        flaky_excluded,
        "ranked candidates"
    );
    Ok(BugRun {
        report_id: report.id.clone(),
        runs,
        suggestions,
        flaky_excluded,
        outcome,
    })
}
