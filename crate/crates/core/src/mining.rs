//! Counting issue-linked test additions in exported commit histories.
//!
//! Inputs are offline exports: commit records as JSON lines, a suite listing
//! of `path count` lines, and an optional PR-to-issue map.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitRecord {
    pub sha: String,
    pub message: String,
    #[serde(default)]
    pub diff: String,
    #[serde(default)]
    pub pr_refs: Vec<u64>,
}

pub type PrIssueMap = BTreeMap<u64, u64>;

#[derive(Debug, Error)]
pub enum MiningError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {problem}")]
    Parse {
        path: PathBuf,
        line: usize,
        problem: String,
    },
    #[error("malformed diff at line {line}: {problem}")]
    Diff { line: usize, problem: String },
}

fn diff_err(line: usize, problem: impl Into<String>) -> MiningError {
    MiningError::Diff {
        line,
        problem: problem.into(),
    }
}

static HUNK_HEADER: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^@@ -(\d+)(?:,(\d+))? \+(\d+)(?:,(\d+))? @@").unwrap());
static SIGNATURE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^(?:(?:public|protected|private|static|final|synchronized|abstract|default)\s+)*(?:<[^>]*>\s+)?[\w.$<>\[\],?]+(?:\s*\[\])*\s+\w+\s*\(").unwrap()
});
static MODIFIERS_ONLY: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^(?:(?:public|protected|private|static|final|synchronized|abstract|default)\s*)+$").unwrap()
});

const FILE_HEADERS: &[&str] = &[
    "diff ",
    "index ",
    "--- ",
    "+++ ",
    "new file mode",
    "deleted file mode",
    "old mode",
    "new mode",
    "similarity index",
    "dissimilarity index",
    "rename from",
    "rename to",
    "copy from",
    "copy to",
    "Binary files",
];

fn is_test_annotation(code: &str) -> bool {
    code.strip_prefix("@Test")
        .is_some_and(|rest| rest.is_empty() || rest.starts_with('(') || rest.starts_with(char::is_whitespace))
}

/// Count tests added by a unified diff: an added `@Test` line followed, in the
/// same hunk and through added annotation, modifier or blank lines only, by an
/// added method signature.
pub fn adds_test(diff: &str) -> Result<usize, MiningError> {
    let mut count = 0;
    let mut old_left = 0usize;
    let mut new_left = 0usize;
    let mut pending = false;
    for (i, line) in diff.lines().enumerate() {
        let lineno = i + 1;
        if old_left == 0 && new_left == 0 {
            pending = false;
            if let Some(c) = HUNK_HEADER.captures(line) {
                let num = |k: usize| c.get(k).map_or(Ok(1), |m| m.as_str().parse::<usize>());
                old_left = num(2).map_err(|e| diff_err(lineno, e.to_string()))?;
                new_left = num(4).map_err(|e| diff_err(lineno, e.to_string()))?;
            } else if line.starts_with("@@") {
                return Err(diff_err(lineno, "bad hunk header"));
            } else if !(line.is_empty() || FILE_HEADERS.iter().any(|h| line.starts_with(h))) {
                return Err(diff_err(lineno, format!("unexpected line outside a hunk: {line:?}")));
            }
            continue;
        }
        let (tag, code) = match line.chars().next() {
            Some(c @ ('+' | '-' | ' ' | '\\')) => (c, &line[1..]),
            None => (' ', ""),
            Some(_) => return Err(diff_err(lineno, "line in hunk lacks a +, - or space prefix")),
        };
        match tag {
            '+' if new_left == 0 => return Err(diff_err(lineno, "hunk longer than its header")),
            '+' => new_left -= 1,
            '-' if old_left == 0 => return Err(diff_err(lineno, "hunk longer than its header")),
            '-' => old_left -= 1,
            ' ' if old_left == 0 || new_left == 0 => return Err(diff_err(lineno, "hunk longer than its header")),
            ' ' => {
                old_left -= 1;
                new_left -= 1;
            }
            _ => continue,
        }
        if tag != '+' {
            pending = false;
            continue;
        }
        let code = code.trim();
        if is_test_annotation(code) {
            pending = true;
        } else if pending {
            if SIGNATURE.is_match(code) {
                count += 1;
                pending = false;
            } else if !(code.is_empty() || code.starts_with('@') || MODIFIERS_ONLY.is_match(code)) {
                pending = false;
            }
        }
    }
    if old_left != 0 || new_left != 0 {
        return Err(diff_err(diff.lines().count(), "diff ends inside a hunk"));
    }
    Ok(count)
}

static LINK: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)\b(?:fixes|resolves|closes)\s+#(\d+)").unwrap());
static HASH_REF: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"#(\d+)").unwrap());

/// Issue linked by the message, else by a referenced pull request.
pub fn link_issue(commit: &CommitRecord, pr_issue_map: &PrIssueMap) -> Option<u64> {
    if let Some(n) = LINK.captures(&commit.message).and_then(|c| c[1].parse().ok()) {
        return Some(n);
    }
    let message_refs = HASH_REF
        .captures_iter(&commit.message)
        .filter_map(|c| c[1].parse::<u64>().ok());
    commit
        .pr_refs
        .iter()
        .copied()
        .chain(message_refs)
        .find_map(|pr| pr_issue_map.get(&pr).copied())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiningResult {
    pub repo_id: String,
    pub n_issue_linked_test_additions: usize,
    pub n_linked_commits: usize,
    pub current_suite_size: usize,
    /// Absent when the suite is empty but tests were added.
    pub ratio: Option<f64>,
    /// No issue-linked test additions; excluded from the median.
    pub flagged: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

pub fn mine(
    repo_id: &str,
    history: &[CommitRecord],
    suite_size: usize,
    pr_issue_map: &PrIssueMap,
) -> Result<MiningResult, MiningError> {
    let mut additions = 0;
    let mut linked_commits = 0;
    for commit in history {
        if link_issue(commit, pr_issue_map).is_none() {
            continue;
        }
        let added = adds_test(&commit.diff).map_err(|e| match e {
            MiningError::Diff { line, problem } => MiningError::Diff {
                line,
                problem: format!("commit {}: {problem}", commit.sha),
            },
            other => other,
        })?;
        if added > 0 {
            linked_commits += 1;
            additions += added;
        }
    }
    let mut warnings = Vec::new();
    let ratio = if suite_size > 0 {
        Some(additions as f64 / suite_size as f64)
    } else if additions == 0 {
        Some(0.0)
    } else {
        warnings.push(format!("{repo_id}: empty suite snapshot, ratio undefined"));
        None
    };
    Ok(MiningResult {
        repo_id: repo_id.to_string(),
        n_issue_linked_test_additions: additions,
        n_linked_commits: linked_commits,
        current_suite_size: suite_size,
        ratio,
        flagged: additions == 0,
        warnings,
    })
}

/// Median; the mean of the middle pair for even counts.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiningSummary {
    pub rows: Vec<MiningResult>,
    /// Over unflagged repositories with a defined ratio.
    pub median_ratio: Option<f64>,
    pub filtered: Vec<String>,
}

pub fn summarize(rows: Vec<MiningResult>) -> MiningSummary {
    let ratios: Vec<f64> = rows.iter().filter(|r| !r.flagged).filter_map(|r| r.ratio).collect();
    MiningSummary {
        median_ratio: median(&ratios),
        filtered: rows.iter().filter(|r| r.flagged).map(|r| r.repo_id.clone()).collect(),
        rows,
    }
}

fn read(path: &Path) -> Result<String, MiningError> {
    fs::read_to_string(path).map_err(|source| MiningError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_err(path: &Path, line: usize, problem: impl Into<String>) -> MiningError {
    MiningError::Parse {
        path: path.to_path_buf(),
        line,
        problem: problem.into(),
    }
}

/// One JSON commit record per non-blank line; shas must be unique.
pub fn load_history(path: &Path) -> Result<Vec<CommitRecord>, MiningError> {
    let text = read(path)?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: CommitRecord = serde_json::from_str(line).map_err(|e| parse_err(path, i + 1, e.to_string()))?;
        if !seen.insert(rec.sha.clone()) {
            return Err(parse_err(path, i + 1, format!("duplicate sha {}", rec.sha)));
        }
        out.push(rec);
    }
    Ok(out)
}

/// Sum of per-file test counts from `path count` lines.
pub fn load_suite_size(path: &Path) -> Result<usize, MiningError> {
    let text = read(path)?;
    let mut total = 0;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let count = line
            .rsplit_once(char::is_whitespace)
            .and_then(|(_, n)| n.parse::<usize>().ok())
            .ok_or_else(|| parse_err(path, i + 1, "expected `path count`"))?;
        total += count;
    }
    Ok(total)
}

/// JSON object mapping PR numbers to issue numbers.
pub fn load_pr_map(path: &Path) -> Result<PrIssueMap, MiningError> {
    let text = read(path)?;
    serde_json::from_str(&text).map_err(|e| parse_err(path, e.line(), e.to_string()))
}
