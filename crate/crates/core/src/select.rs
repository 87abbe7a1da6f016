//! Failure clustering, the agreement gate and ranking.
//!
//! FIB tests are grouped by (error type, normalized message). A bug is
//! presented only when the largest group exceeds the threshold. Clusters
//! are ordered by report match, size and shortest member; members by test
//! match and length; the ranking interleaves clusters round-robin.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, HashSet};
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::completion::TestCandidate;
use crate::harness::FailureOutput;
use crate::java::TokenKind;
use crate::report::BugReport;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FailureKey {
    pub error_type: String,
    pub message: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizationStats {
    pub addresses: usize,
    pub paths: usize,
}

static HEX_ADDRESS: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"@[0-9a-fA-F]+\b").unwrap());
static ABS_PATH: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r#"(^|[\s"'(=:<\[])(?:/[^\s/"'<>()\[\]:]+(?:/[^\s/"'<>()\[\]:]+)+/?|[A-Za-z]:\\[^\s"'<>()\[\]]+)"#)
        .unwrap()
});
static MESSAGE_NUMBER: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\d+(?:\.\d+)?(?:[eE][-+]?\d+)?").unwrap());
static MESSAGE_STRING: LazyLock<Regex> = LazyLock::new(|| Regex::new(r#""[^"]*""#).unwrap());

/// Trim and replace object addresses and absolute paths with placeholders.
pub fn normalize_message(message: &str, stats: &mut NormalizationStats) -> String {
    let trimmed = message.trim();
    let addresses = HEX_ADDRESS.find_iter(trimmed).count();
    let s = HEX_ADDRESS.replace_all(trimmed, "@<addr>");
    let paths = ABS_PATH.find_iter(&s).count();
    let s = ABS_PATH.replace_all(&s, "${1}<path>");
    stats.addresses += addresses;
    stats.paths += paths;
    s.into_owned()
}

pub fn failure_key(output: &FailureOutput, stats: &mut NormalizationStats) -> FailureKey {
    FailureKey {
        error_type: output.error_type.clone(),
        message: normalize_message(&output.message, stats),
    }
}

/// A test that compiled and failed on the buggy version.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FibTest {
    pub candidate: TestCandidate,
    pub failure: FailureOutput,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    pub key: FailureKey,
    /// Indices into the FIB list, in input order.
    pub members: Vec<usize>,
    pub size: usize,
    pub output_match: bool,
}

/// Partition FIB tests by failure key. Clusters come back sorted by key.
pub fn cluster_by_failure(fibs: &[FibTest], stats: &mut NormalizationStats) -> Vec<Cluster> {
    let mut groups: BTreeMap<FailureKey, Vec<usize>> = BTreeMap::new();
    for (i, fib) in fibs.iter().enumerate() {
        groups.entry(failure_key(&fib.failure, stats)).or_default().push(i);
    }
    groups
        .into_iter()
        .map(|(key, members)| Cluster {
            key,
            size: members.len(),
            members,
            output_match: false,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectionConfig {
    pub thr: usize,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig { thr: 1 }
    }
}

pub fn gate(clusters: &[Cluster], config: &SelectionConfig) -> bool {
    clusters.iter().map(|c| c.size).max().is_some_and(|m| m > config.thr)
}

/// Collapse members with identical normalized token sequences to the
/// earliest-sampled one. Sizes are left as computed before deduplication.
/// Returns the number of members removed.
pub fn dedupe_syntactic(fibs: &[FibTest], clusters: &mut [Cluster]) -> usize {
    let mut removed = 0;
    for cluster in clusters.iter_mut() {
        let mut order = cluster.members.clone();
        order.sort_by_key(|&i| (fibs[i].candidate.origin.sample_index, fibs[i].candidate.id()));
        let mut seen = HashSet::new();
        let keep: HashSet<usize> = order
            .into_iter()
            .filter(|&i| seen.insert(fibs[i].candidate.normalized_tokens()))
            .collect();
        removed += cluster.members.len() - keep.len();
        cluster.members.retain(|i| keep.contains(i));
    }
    removed
}

fn collapse_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Title, description and stack trace with whitespace runs collapsed.
pub fn report_text(report: &BugReport) -> String {
    collapse_ws(&report.full_text())
}

fn occurs(needle: &str, haystack: &str) -> bool {
    let needle = collapse_ws(needle);
    !needle.is_empty() && haystack.contains(&needle)
}

pub fn match_output_with_report(key: &FailureKey, report_text: &str) -> bool {
    if occurs(&key.error_type, report_text) {
        return true;
    }
    let strings = MESSAGE_STRING
        .find_iter(&key.message)
        .map(|m| m.as_str())
        .filter(|s| s.len() >= 3)
        .map(|s| &s[1..s.len() - 1]);
    let numbers = MESSAGE_NUMBER
        .find_iter(&key.message)
        .map(|m| m.as_str())
        .filter(|s| s.len() >= 3);
    strings.chain(numbers).any(|lit| occurs(lit, report_text))
}

/// Numeric literal spelling without a type suffix (`10L` -> `10`).
fn numeric_text(text: &str) -> &str {
    let hex = text.starts_with("0x") || text.starts_with("0X");
    if hex {
        text.trim_end_matches(['l', 'L'])
    } else {
        text.trim_end_matches(['l', 'L', 'f', 'F', 'd', 'D'])
    }
}

/// Whether a string literal (spelled with at least 3 characters including
/// its quotes) or any numeric literal of the candidate occurs in the report.
pub fn match_test_with_report(candidate: &TestCandidate, report_text: &str) -> bool {
    candidate.tokens().iter().any(|t| match t.kind {
        TokenKind::Str if t.text.len() >= 3 && !t.text.starts_with("\"\"\"") => {
            occurs(&t.text[1..t.text.len() - 1], report_text)
        }
        TokenKind::Number => occurs(numeric_text(&t.text), report_text),
        _ => false,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankedEntry {
    pub id: String,
    pub test_match: bool,
    pub tok_cnt: usize,
    pub cluster: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterSummary {
    pub key: FailureKey,
    pub size: usize,
    pub output_match: bool,
    /// Candidate ids after deduplication, in rank order.
    pub members: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankedSuggestions {
    pub selected: bool,
    pub thr: usize,
    /// Clusters in rank order.
    pub clusters: Vec<ClusterSummary>,
    pub ranking: Vec<RankedEntry>,
    pub duplicates_removed: usize,
    pub normalization: NormalizationStats,
}

fn cluster_order(a: &Cluster, b: &Cluster, min_tok: impl Fn(&Cluster) -> usize) -> Ordering {
    (Reverse(a.output_match), Reverse(a.size), min_tok(a), &a.key).cmp(&(
        Reverse(b.output_match),
        Reverse(b.size),
        min_tok(b),
        &b.key,
    ))
}

/// Cluster, gate, deduplicate and rank one bug's FIB tests.
pub fn rank(fibs: &[FibTest], report: &BugReport, config: &SelectionConfig) -> RankedSuggestions {
    let mut normalization = NormalizationStats::default();
    let mut clusters = cluster_by_failure(fibs, &mut normalization);
    let selected = gate(&clusters, config);
    let duplicates_removed = dedupe_syntactic(fibs, &mut clusters);

    let text = report_text(report);
    for c in &mut clusters {
        c.output_match = match_output_with_report(&c.key, &text);
    }
    let test_match: Vec<bool> = fibs
        .iter()
        .map(|f| match_test_with_report(&f.candidate, &text))
        .collect();
    let tok = |i: usize| fibs[i].candidate.tok_cnt;
    for c in &mut clusters {
        c.members.sort_by_key(|&i| {
            let cand = &fibs[i].candidate;
            (Reverse(test_match[i]), tok(i), cand.origin.sample_index, cand.id())
        });
    }
    let min_tok = |c: &Cluster| c.members.iter().map(|&i| tok(i)).min().unwrap_or(usize::MAX);
    clusters.sort_by(|a, b| cluster_order(a, b, min_tok));

    let mut ranking = Vec::new();
    if selected {
        let depth = clusters.iter().map(|c| c.members.len()).max().unwrap_or(0);
        for round in 0..depth {
            for (ci, c) in clusters.iter().enumerate() {
                if let Some(&i) = c.members.get(round) {
                    ranking.push(RankedEntry {
                        id: fibs[i].candidate.id(),
                        test_match: test_match[i],
                        tok_cnt: tok(i),
                        cluster: ci,
                    });
                }
            }
        }
    }

    RankedSuggestions {
        selected,
        thr: config.thr,
        clusters: clusters
            .into_iter()
            .map(|c| ClusterSummary {
                members: c.members.iter().map(|&i| fibs[i].candidate.id()).collect(),
                key: c.key,
                size: c.size,
                output_match: c.output_match,
            })
            .collect(),
        ranking,
        duplicates_removed,
        normalization,
    }
}
