//! The MATH-370 fixture bug through `execute` with the fixture runner.

use std::fs;
use std::path::{Path, PathBuf};

use reprotest_core::completion::{to_candidates, RawCompletion};
use reprotest_core::harness::FixtureRunner;
use reprotest_core::pipeline::{execute, BugRun, ExecutionConfig, ProjectPair};
use reprotest_core::report::load_report;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn run(exhaustive_fixed: bool, flaky_repeats: usize) -> BugRun {
    let f = fixtures();
    let report = load_report(&f.join("bugs/MATH-370/report.json")).unwrap();
    let texts: Vec<String> =
        serde_json::from_str(&fs::read_to_string(f.join("bugs/MATH-370/completions.json")).unwrap()).unwrap();
    let raws: Vec<RawCompletion> = texts
        .into_iter()
        .enumerate()
        .map(|(i, text)| RawCompletion {
            text,
            provider_id: "fixture".into(),
            request_fingerprint: String::new(),
            report_id: report.id.clone(),
            sample_index: i,
        })
        .collect();
    let batch = to_candidates(&raws);
    let project = ProjectPair {
        buggy_root: f.join("projects/nanmath/buggy"),
        fixed_root: f.join("projects/nanmath/fixed"),
        buggy_ref: "buggy".into(),
        fixed_ref: "fixed".into(),
    };
    let runner = FixtureRunner::load(&f.join("runner.json")).unwrap();
    let config = ExecutionConfig {
        exhaustive_fixed,
        flaky_repeats,
        ..ExecutionConfig::default()
    };
    execute(&report, &batch.candidates, &project, &runner, None, &config).unwrap()
}

#[test]
fn exhaustive_fixed_runs_do_not_change_brt_labels() {
    let lazy = run(false, 3);
    let full = run(true, 3);
    let labels = |r: &BugRun| {
        r.runs
            .iter()
            .map(|c| (c.candidate_id.clone(), c.is_brt(), c.is_fib()))
            .collect::<Vec<_>>()
    };
    assert_eq!(labels(&lazy), labels(&full));
    assert_eq!(lazy.suggestions, full.suggestions);
    assert_eq!(lazy.outcome, full.outcome);
    // Only FIB candidates reach the fixed version in the default mode.
    for c in &lazy.runs {
        if let Some(v) = &c.verdict {
            assert_eq!(v.fixed.is_some(), v.fib, "{}", c.candidate_id);
        }
    }
    assert!(full
        .runs
        .iter()
        .filter_map(|c| c.verdict.as_ref())
        .all(|v| v.fixed.is_some()));
}

#[test]
fn fixture_bug_ranks_a_brt_first() {
    let r = run(false, 3);
    assert!(r.outcome.selected);
    assert_eq!(r.outcome.ranking.first(), Some(&true));
    let ids: Vec<&str> = r.suggestions.ranking.iter().map(|e| e.id.as_str()).collect();
    assert_eq!(
        ids,
        ["MATH-370#1", "MATH-370#4", "MATH-370#5", "MATH-370#2", "MATH-370#0"]
    );
    assert_eq!(r.runs.iter().filter(|c| c.is_brt()).count(), 4);
    assert_eq!(r.flaky_excluded, 1);
    assert_eq!(r.suggestions.duplicates_removed, 1);
}

#[test]
fn without_the_flakiness_check_the_alternating_test_counts_as_fib() {
    let r = run(false, 0);
    assert_eq!(r.flaky_excluded, 0);
    assert_eq!(r.outcome.n_fib, 7);
}
