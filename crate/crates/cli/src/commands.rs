//! Subcommand implementations.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use reprotest_core::completion::{Provider, RecordingProvider, ScriptedProvider, TestCandidate};
use reprotest_core::metrics::{self, random_baseline, render_table, RandomConfig};
use reprotest_core::mining::{self, load_history, load_pr_map, load_suite_size, MiningSummary, PrIssueMap};
use reprotest_core::pipeline::{execute, generate, BugRun, ProjectPair};
use reprotest_core::report::{load_example, load_manifest, load_report, BugReport, ExamplePair};
use reprotest_core::{EvaluationReport, RankedSuggestions, Runner};
use serde::Serialize;
use tracing::{info, warn};

use crate::cache::FileCache;
use crate::config::RunConfig;
use crate::output::{safe_name, write_atomic, write_json, write_manifest, RunLog};

/// Everything shared by the bugs of one command invocation.
pub struct Session {
    pub config: RunConfig,
    pub out_dir: PathBuf,
    provider: Box<dyn Provider>,
    runner: Box<dyn Runner>,
    cache: FileCache,
    log: RunLog,
    pool: rayon::ThreadPool,
}

/// Per-bug `report.json`.
#[derive(Debug, Serialize)]
pub struct BugSummary<'a> {
    pub report_id: &'a str,
    #[serde(flatten)]
    pub suggestions: &'a RankedSuggestions,
    pub n_candidates: usize,
    pub n_rejected: usize,
    pub n_fib: usize,
    pub flaky_excluded: usize,
    pub reproduced: bool,
    /// Whether each ranked entry is a BRT.
    pub ranking_is_brt: &'a [bool],
    pub ranked_files: Vec<String>,
}

impl Session {
    pub fn new(config: RunConfig, out_dir: Option<PathBuf>) -> Result<Self> {
        let out_dir = out_dir.unwrap_or_else(|| config.output_dir.clone());
        fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
        let cache = FileCache::new(match &config.cache_dir {
            Some(d) => d.clone(),
            None => out_dir.join(crate::output::CACHE_DIR),
        });
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .context("building worker pool")?;
        Ok(Session {
            provider: config.provider()?,
            runner: config.runner()?,
            log: RunLog::new(&out_dir),
            cache,
            pool,
            out_dir,
            config,
        })
    }

    pub fn load_examples(&self, paths: &[PathBuf]) -> Result<Vec<ExamplePair>> {
        paths
            .iter()
            .map(|p| load_example(p).with_context(|| format!("[prompt] loading example {}", p.display())))
            .collect()
    }

    /// Prompt, sample, run and rank one bug, writing its artifacts under `bug_dir`.
    pub fn process_bug(
        &self,
        report: &BugReport,
        examples: &[ExamplePair],
        project: &ProjectPair,
        bug_dir: &Path,
    ) -> Result<BugRun> {
        let cfg = &self.config;
        self.log.line(format!("{} start", report.id));
        let generation = generate(
            report,
            examples,
            &cfg.prompt_config(examples.len()),
            &cfg.sampling,
            self.provider.as_ref(),
            &cfg.retry(),
        )
        .with_context(|| format!("bug {}", report.id))?;
        write_atomic(&bug_dir.join("prompt.md"), generation.prompt.text.as_bytes())?;
        write_json(&bug_dir.join("completions.json"), &generation.raw)?;
        write_json(&bug_dir.join("candidates.json"), &generation.batch)?;
        self.log.line(format!(
            "{} sampled {} candidates, {} rejected",
            report.id,
            generation.batch.candidates.len(),
            generation.batch.rejections.len()
        ));

        let run = execute(
            report,
            &generation.batch.candidates,
            project,
            self.runner.as_ref(),
            Some(&self.cache),
            &cfg.execution(),
        )
        .with_context(|| format!("bug {}", report.id))?;

        let plans = bug_dir.join("plans");
        if plans.exists() {
            fs::remove_dir_all(&plans)?;
        }
        for r in &run.runs {
            write_json(&plans.join(format!("{}.json", safe_name(&r.candidate_id))), r)?;
        }
        let ranked_files = write_ranked(bug_dir, &run.suggestions, &generation.batch.candidates)?;
        let summary = BugSummary {
            report_id: &report.id,
            suggestions: &run.suggestions,
            n_candidates: generation.batch.candidates.len(),
            n_rejected: generation.batch.rejections.len(),
            n_fib: run.outcome.n_fib,
            flaky_excluded: run.flaky_excluded,
            reproduced: run.outcome.reproduced,
            ranking_is_brt: &run.outcome.ranking,
            ranked_files,
        };
        write_json(&bug_dir.join("report.json"), &summary)?;
        self.log.line(format!(
            "{} done: fib={} selected={} ranked={}",
            report.id,
            run.outcome.n_fib,
            run.suggestions.selected,
            run.suggestions.ranking.len()
        ));
        Ok(run)
    }

    pub fn finish(&self) -> Result<()> {
        write_manifest(&self.out_dir)?;
        Ok(())
    }
}

/// `ranked/NN_<id>.java`; the directory exists but is empty when gated out.
fn write_ranked(bug_dir: &Path, suggestions: &RankedSuggestions, candidates: &[TestCandidate]) -> Result<Vec<String>> {
    let dir = bug_dir.join("ranked");
    if dir.exists() {
        fs::remove_dir_all(&dir)?;
    }
    fs::create_dir_all(&dir)?;
    let mut files = Vec::new();
    for (i, entry) in suggestions.ranking.iter().enumerate() {
        let candidate = candidates
            .iter()
            .find(|c| c.id() == entry.id)
            .expect("ranked ids come from the candidate list");
        let name = format!("{:02}_{}.java", i + 1, safe_name(&entry.id));
        let mut source = candidate.source.clone();
        if !source.ends_with('\n') {
            source.push('\n');
        }
        write_atomic(&dir.join(&name), source.as_bytes())?;
        files.push(format!("ranked/{name}"));
    }
    Ok(files)
}

pub struct ReproduceArgs {
    pub report: PathBuf,
    pub buggy: PathBuf,
    pub fixed: PathBuf,
    pub buggy_ref: Option<String>,
    pub fixed_ref: Option<String>,
    pub out: Option<PathBuf>,
    pub thr: Option<usize>,
}

pub struct ReproduceOutcome {
    pub bug_dir: PathBuf,
    pub run: BugRun,
}

impl ReproduceOutcome {
    /// 0 when presented with at least one suggestion, 2 when gated out.
    pub fn exit_code(&self) -> u8 {
        if self.run.suggestions.selected && !self.run.suggestions.ranking.is_empty() {
            0
        } else {
            2
        }
    }
}

pub fn reproduce(mut config: RunConfig, args: ReproduceArgs) -> Result<ReproduceOutcome> {
    if let Some(thr) = args.thr {
        config.selection.thr = thr;
    }
    let report = load_report(&args.report).context("[report] loading bug report")?;
    let session = Session::new(config, args.out)?;
    let examples = session.load_examples(&session.config.prompt.examples)?;
    let project = ProjectPair {
        buggy_ref: args.buggy_ref.unwrap_or_else(|| args.buggy.display().to_string()),
        fixed_ref: args.fixed_ref.unwrap_or_else(|| args.fixed.display().to_string()),
        buggy_root: args.buggy,
        fixed_root: args.fixed,
    };
    let bug_dir = session.out_dir.join(safe_name(&report.id));
    let result = session
        .pool
        .install(|| session.process_bug(&report, &examples, &project, &bug_dir));
    let run = match result {
        Ok(run) => run,
        Err(e) => {
            session.log.line(format!("{} error: {e:#}", report.id));
            return Err(e);
        }
    };
    session.finish()?;
    Ok(ReproduceOutcome { bug_dir, run })
}

pub struct EvaluateArgs {
    pub manifest: PathBuf,
    pub out: Option<PathBuf>,
    pub random: bool,
    pub ns: Option<Vec<usize>>,
}

pub struct EvaluateOutcome {
    pub report: EvaluationReport,
    pub table: String,
    pub out_dir: PathBuf,
}

pub fn evaluate(config: RunConfig, args: EvaluateArgs) -> Result<EvaluateOutcome> {
    let manifest = load_manifest(&args.manifest).context("[report] loading manifest")?;
    let ns = args.ns.clone().unwrap_or_else(|| config.metrics.ns.clone());
    let session = Session::new(config, args.out)?;
    let example_paths = if manifest.examples.is_empty() {
        session.config.prompt.examples.clone()
    } else {
        manifest.examples.clone()
    };
    let examples = session.load_examples(&example_paths)?;

    let results: Vec<Result<BugRun>> = session.pool.install(|| {
        manifest
            .entries
            .par_iter()
            .map(|entry| {
                let report = load_report(&entry.report_path)
                    .with_context(|| format!("[report] loading {}", entry.report_path.display()))?;
                let project = ProjectPair {
                    buggy_root: entry.buggy_root.clone(),
                    fixed_root: entry.fixed_root.clone(),
                    buggy_ref: entry.buggy_version_ref.clone(),
                    fixed_ref: entry.fixed_version_ref.clone(),
                };
                let bug_dir = session.out_dir.join(safe_name(&report.id));
                session.process_bug(&report, &examples, &project, &bug_dir)
            })
            .collect()
    });
    let mut outcomes = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(run) => outcomes.push(run.outcome),
            Err(e) => {
                session.log.line(format!("error: {e:#}"));
                failures.push(format!("{e:#}"));
            }
        }
    }
    if !failures.is_empty() {
        bail!(
            "{} of {} bugs failed:\n{}",
            failures.len(),
            manifest.entries.len(),
            failures.join("\n")
        );
    }

    let mut report = metrics::summarize(&outcomes, &ns)?;
    if args.random {
        let rc = RandomConfig {
            repeats: session.config.metrics.random_repeats,
            seed: session.config.metrics.seed,
        };
        report.random = Some(random_baseline(&outcomes, &ns, &rc)?);
    }
    let table = render_table(&report);
    write_json(&session.out_dir.join("outcomes.json"), &outcomes)?;
    write_json(&session.out_dir.join("evaluation.json"), &report)?;
    write_atomic(&session.out_dir.join("evaluation.txt"), table.as_bytes())?;
    session.finish()?;
    info!(bugs = outcomes.len(), "evaluation written");
    Ok(EvaluateOutcome {
        report,
        table,
        out_dir: session.out_dir.clone(),
    })
}

pub const HISTORY_FILE: &str = "history.jsonl";
pub const SUITE_FILE: &str = "suite.txt";
pub const PR_MAP_FILE: &str = "pr_map.json";

/// Repository directories: each given directory that holds a history export,
/// otherwise its immediate subdirectories that do.
pub fn discover_repos(dirs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut repos = Vec::new();
    for dir in dirs {
        if dir.join(HISTORY_FILE).is_file() {
            repos.push(dir.clone());
            continue;
        }
        let mut subs: Vec<PathBuf> = fs::read_dir(dir)
            .with_context(|| format!("reading {}", dir.display()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.join(HISTORY_FILE).is_file())
            .collect();
        if subs.is_empty() {
            bail!("{} contains no {HISTORY_FILE} export", dir.display());
        }
        subs.sort();
        repos.extend(subs);
    }
    Ok(repos)
}

pub fn mine_repo(dir: &Path) -> Result<mining::MiningResult> {
    let repo_id = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| dir.display().to_string());
    let history = load_history(&dir.join(HISTORY_FILE))?;
    let suite = load_suite_size(&dir.join(SUITE_FILE))?;
    let pr_path = dir.join(PR_MAP_FILE);
    let (pr_map, warning) = if pr_path.is_file() {
        (load_pr_map(&pr_path)?, None)
    } else {
        let w = format!("{repo_id}: no {PR_MAP_FILE}; linking by commit message only");
        warn!("{w}");
        (PrIssueMap::new(), Some(w))
    };
    let mut row = mining::mine(&repo_id, &history, suite, &pr_map)?;
    row.warnings.extend(warning);
    Ok(row)
}

pub fn mine(dirs: &[PathBuf], out: Option<&Path>) -> Result<(MiningSummary, String)> {
    let repos = discover_repos(dirs)?;
    let rows = repos
        .par_iter()
        .map(|d| mine_repo(d).with_context(|| format!("mining {}", d.display())))
        .collect::<Result<Vec<_>>>()?;
    let summary = mining::summarize(rows);
    let table = render_mining_table(&summary);
    if let Some(out) = out {
        write_json(&out.join("mining.json"), &summary)?;
        write_atomic(&out.join("mining.txt"), table.as_bytes())?;
    }
    Ok((summary, table))
}

pub fn render_mining_table(summary: &MiningSummary) -> String {
    let mut s = format!(
        "{:<20} {:>10} {:>10} {:>8} {:>8}\n",
        "repo", "additions", "commits", "suite", "ratio"
    );
    for r in &summary.rows {
        let ratio = match (r.flagged, r.ratio) {
            (true, _) => "filtered".to_string(),
            (false, Some(x)) => format!("{x:.3}"),
            (false, None) => "n/a".to_string(),
        };
        s += &format!(
            "{:<20} {:>10} {:>10} {:>8} {:>8}\n",
            r.repo_id, r.n_issue_linked_test_additions, r.n_linked_commits, r.current_suite_size, ratio
        );
    }
    match summary.median_ratio {
        Some(m) => s += &format!("median ratio: {m:.3}\n"),
        None => s += "median ratio: n/a\n",
    }
    if !summary.filtered.is_empty() {
        s += &format!("filtered: {}\n", summary.filtered.join(", "));
    }
    s
}

pub struct RecordArgs {
    pub report: PathBuf,
    /// JSON array of completion texts to store instead of calling the endpoint.
    pub import: Option<PathBuf>,
}

/// Fill the replay store for one report; returns the number of stored samples.
pub fn record(config: RunConfig, args: RecordArgs) -> Result<usize> {
    let report = load_report(&args.report).context("[report] loading bug report")?;
    let examples: Vec<ExamplePair> = config
        .prompt
        .examples
        .iter()
        .map(|p| load_example(p).with_context(|| format!("[prompt] loading example {}", p.display())))
        .collect::<Result<_>>()?;
    let store = config.replay_store()?;
    let generation = match &args.import {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let texts: Vec<String> =
                serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
            if texts.len() != config.sampling.n_samples {
                bail!(
                    "{} holds {} completions but sampling.n_samples is {}",
                    path.display(),
                    texts.len(),
                    config.sampling.n_samples
                );
            }
            let provider = RecordingProvider::new(ScriptedProvider::new(texts), store);
            generate(
                &report,
                &examples,
                &config.prompt_config(examples.len()),
                &config.sampling,
                &provider,
                &config.retry(),
            )
        }
        None => {
            let provider = RecordingProvider::new(config.http_provider(), store);
            generate(
                &report,
                &examples,
                &config.prompt_config(examples.len()),
                &config.sampling,
                &provider,
                &config.retry(),
            )
        }
    }
    .with_context(|| format!("bug {}", report.id))?;
    Ok(generation.raw.len())
}
