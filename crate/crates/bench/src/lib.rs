//! Shared inputs for the benchmarks in `benches/`.

use std::fs;
use std::path::{Path, PathBuf};

use reprotest_core::completion::{to_candidates, CandidateOrigin, RawCompletion};
use reprotest_core::harness::FailureOutput;
use reprotest_core::report::load_report;
use reprotest_core::select::FibTest;
use reprotest_core::{BugReport, TestCandidate};

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

/// The MATH-370 fixture report and its parsed candidates.
pub fn math370() -> (BugReport, Vec<TestCandidate>) {
    let dir = fixtures().join("bugs/MATH-370");
    let report = load_report(&dir.join("report.json")).expect("fixture report");
    let texts: Vec<String> =
        serde_json::from_str(&fs::read_to_string(dir.join("completions.json")).expect("fixture completions"))
            .expect("completion array");
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
    (report, to_candidates(&raws).candidates)
}

/// `n` FIB tests spread over `keys` failure clusters.
pub fn synthetic_fibs(n: usize, keys: usize) -> Vec<FibTest> {
    (0..n)
        .map(|i| {
            let body = "assertEquals(1, x);\n    ".repeat(1 + i % 5);
            let source = format!("public void test{i}() {{\n    int x = {i};\n    {body}\n}}");
            FibTest {
                candidate: TestCandidate::from_source(
                    source,
                    CandidateOrigin {
                        report_id: "BENCH".into(),
                        sample_index: i,
                    },
                )
                .expect("generated method parses"),
                failure: FailureOutput::new("AssertionError", &format!("expected:<1> but was:<{}>", i % keys), ""),
            }
        })
        .collect()
}
