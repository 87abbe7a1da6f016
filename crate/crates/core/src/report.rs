//! Bug reports, few-shot example pairs and dataset manifests.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;
use tracing::warn;

use crate::java::parse_method;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed JSON: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: field `{field}`: {problem}")]
    Field {
        path: PathBuf,
        field: String,
        problem: String,
    },
    #[error("{path}: {problem}")]
    Invalid { path: PathBuf, problem: String },
    #[error("manifest {manifest} references missing paths: {}", .missing.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(", "))]
    Dangling { manifest: PathBuf, missing: Vec<PathBuf> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BugReport {
    pub id: String,
    pub title: String,
    pub description: String,
    pub stack_trace: Option<String>,
    pub crash_flag: bool,
}

impl BugReport {
    /// Title, description and stack trace joined with newlines.
    pub fn full_text(&self) -> String {
        let mut text = format!("{}\n{}", self.title, self.description);
        if let Some(trace) = &self.stack_trace {
            text.push('\n');
            text.push_str(trace);
        }
        text
    }

    fn validate(&self) -> Result<(), String> {
        if self.id.is_empty() {
            return Err("`id` must not be empty".into());
        }
        if self.title.trim().is_empty() {
            return Err("`title` must not be empty".into());
        }
        if self.title.contains(['\n', '\r']) {
            return Err("`title` must not contain line breaks".into());
        }
        Ok(())
    }

    pub fn from_json_value(value: &Value, path: &Path) -> Result<Self, IngestError> {
        let obj = value.as_object().ok_or_else(|| IngestError::Invalid {
            path: path.to_path_buf(),
            problem: "expected a JSON object".into(),
        })?;
        let report = BugReport {
            id: required_str(obj, "id", path)?,
            title: required_str(obj, "title", path)?,
            description: optional_str(obj, "description", path)?.unwrap_or_default(),
            stack_trace: optional_str(obj, "stack_trace", path)?,
            crash_flag: match obj.get("crash_flag") {
                None | Some(Value::Null) => false,
                Some(Value::Bool(b)) => *b,
                Some(_) => return Err(field_err(path, "crash_flag", "expected a boolean")),
            },
        };
        report.validate().map_err(|problem| IngestError::Invalid {
            path: path.to_path_buf(),
            problem,
        })?;
        Ok(report)
    }
}

fn field_err(path: &Path, field: &str, problem: &str) -> IngestError {
    IngestError::Field {
        path: path.to_path_buf(),
        field: field.to_string(),
        problem: problem.to_string(),
    }
}

fn required_str(obj: &Map<String, Value>, field: &str, path: &Path) -> Result<String, IngestError> {
    optional_str(obj, field, path)?.ok_or_else(|| field_err(path, field, "missing"))
}

fn optional_str(obj: &Map<String, Value>, field: &str, path: &Path) -> Result<Option<String>, IngestError> {
    match obj.get(field) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) => Ok(Some(s.clone())),
        Some(_) => Err(field_err(path, field, "expected a string")),
    }
}

fn read_json(path: &Path) -> Result<Value, IngestError> {
    let text = fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| IngestError::Json {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_report(path: &Path) -> Result<BugReport, IngestError> {
    BugReport::from_json_value(&read_json(path)?, path)
}

/// A bug report paired with the test that reproduces it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExamplePair {
    pub report: BugReport,
    pub test_source: String,
}

pub fn load_example(path: &Path) -> Result<ExamplePair, IngestError> {
    let value = read_json(path)?;
    let report = value
        .get("report")
        .ok_or_else(|| field_err(path, "report", "missing"))?;
    let report = BugReport::from_json_value(report, path)?;
    let test_source = match value.get("test_source") {
        Some(Value::String(s)) => s.clone(),
        Some(_) => return Err(field_err(path, "test_source", "expected a string")),
        None => return Err(field_err(path, "test_source", "missing")),
    };
    match parse_method(&test_source) {
        Ok((_, shape)) if shape.name.starts_with("test") => {}
        Ok((_, shape)) => {
            return Err(field_err(
                path,
                "test_source",
                &format!("method name {:?} does not start with \"test\"", shape.name),
            ))
        }
        Err(e) => {
            return Err(field_err(
                path,
                "test_source",
                &format!("not a single method declaration: {e}"),
            ))
        }
    }
    Ok(ExamplePair { report, test_source })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ManifestEntry {
    pub report_path: PathBuf,
    pub project_id: String,
    pub buggy_version_ref: String,
    pub fixed_version_ref: String,
    /// `buggy_version_ref` resolved against the manifest directory.
    pub buggy_root: PathBuf,
    pub fixed_root: PathBuf,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct DatasetManifest {
    pub entries: Vec<ManifestEntry>,
    pub examples: Vec<PathBuf>,
    #[serde(skip)]
    pub warnings: Vec<String>,
}

#[derive(Deserialize)]
struct RawManifest {
    #[serde(default)]
    entries: Vec<RawEntry>,
    #[serde(default)]
    examples: Vec<String>,
}

#[derive(Deserialize)]
struct RawEntry {
    report: String,
    project: String,
    buggy: String,
    fixed: String,
}

pub fn load_manifest(path: &Path) -> Result<DatasetManifest, IngestError> {
    let raw: RawManifest = serde_json::from_value(read_json(path)?).map_err(|source| IngestError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut missing = Vec::new();
    let mut check = |p: PathBuf| {
        if !p.exists() {
            missing.push(p.clone());
        }
        p
    };

    let mut entries = Vec::with_capacity(raw.entries.len());
    for e in raw.entries {
        if e.buggy == e.fixed {
            return Err(IngestError::Invalid {
                path: path.to_path_buf(),
                problem: format!(
                    "entry for {}: buggy and fixed version refs are identical ({})",
                    e.report, e.buggy
                ),
            });
        }
        entries.push(ManifestEntry {
            report_path: check(base.join(&e.report)),
            project_id: e.project,
            buggy_root: check(base.join(&e.buggy)),
            fixed_root: check(base.join(&e.fixed)),
            buggy_version_ref: e.buggy,
            fixed_version_ref: e.fixed,
        });
    }
    let examples = raw.examples.iter().map(|p| check(base.join(p))).collect();
    if !missing.is_empty() {
        return Err(IngestError::Dangling {
            manifest: path.to_path_buf(),
            missing,
        });
    }
    let mut warnings = Vec::new();
    if entries.is_empty() {
        let msg = format!("manifest {} has no entries", path.display());
        warn!("{msg}");
        warnings.push(msg);
    }
    Ok(DatasetManifest {
        entries,
        examples,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
        let path = dir.join(name);
        fs::File::create(&path).unwrap().write_all(body.as_bytes()).unwrap();
        path
    }

    #[test]
    fn loads_report_fields() {
        let dir = tempfile::tempdir().unwrap();
        let path = write(
            dir.path(),
            "r.json",
            r#"{"id":"MATH-370","title":"NaN in \"equals\" methods","description":"In \"MathUtils\", some \"equals\" methods will return true if both argument are NaN."}"#,
        );
        let report = load_report(&path).unwrap();
        assert_eq!(report.id, "MATH-370");
        assert_eq!(report.title, "NaN in \"equals\" methods");
        assert!(report.description.starts_with("In \"MathUtils\""));
        assert_eq!(report.stack_trace, None);
        assert!(!report.crash_flag);
    }

    #[test]
    fn empty_description_is_allowed() {
        let dir = tempfile::tempdir().unwrap();
        let path = write(dir.path(), "r.json", r#"{"id":"X-1","title":"t","description":""}"#);
        assert_eq!(load_report(&path).unwrap().description, "");
    }

    #[test]
    fn missing_id_names_the_field() {
        let dir = tempfile::tempdir().unwrap();
        let path = write(dir.path(), "r.json", r#"{"title":"t","description":""}"#);
        let err = load_report(&path).unwrap_err();
        assert!(
            matches!(&err, IngestError::Field { field, .. } if field == "id"),
            "{err}"
        );
    }

    #[test]
    fn wrong_type_names_the_field() {
        let dir = tempfile::tempdir().unwrap();
        let path = write(dir.path(), "r.json", r#"{"id":"A","title":"t","crash_flag":"yes"}"#);
        let err = load_report(&path).unwrap_err();
        assert!(err.to_string().contains("crash_flag"));
    }

    #[test]
    fn empty_title_or_newline_title_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = write(dir.path(), "a.json", r#"{"id":"A","title":""}"#);
        assert!(matches!(load_report(&path), Err(IngestError::Invalid { .. })));
        let path = write(dir.path(), "b.json", r#"{"id":"A","title":"a\nb"}"#);
        assert!(matches!(load_report(&path), Err(IngestError::Invalid { .. })));
    }

    #[test]
    fn malformed_json() {
        let dir = tempfile::tempdir().unwrap();
        let path = write(dir.path(), "r.json", "{");
        assert!(matches!(load_report(&path), Err(IngestError::Json { .. })));
    }

    #[test]
    fn report_round_trips_through_json() {
        let report = BugReport {
            id: "A-1".into(),
            title: "t".into(),
            description: "d\n```\ncode\n```".into(),
            stack_trace: Some("java.lang.NullPointerException\n\tat A.b(A.java:1)".into()),
            crash_flag: true,
        };
        let dir = tempfile::tempdir().unwrap();
        let path = write(dir.path(), "r.json", &serde_json::to_string(&report).unwrap());
        assert_eq!(load_report(&path).unwrap(), report);
    }

    #[test]
    fn example_requires_test_method() {
        let dir = tempfile::tempdir().unwrap();
        let ok = write(
            dir.path(),
            "ok.json",
            r#"{"report":{"id":"A","title":"t"},"test_source":"public void testX(){}"}"#,
        );
        assert_eq!(load_example(&ok).unwrap().test_source, "public void testX(){}");
        let bad = write(
            dir.path(),
            "bad.json",
            r#"{"report":{"id":"A","title":"t"},"test_source":"public void helper(){}"}"#,
        );
        assert!(load_example(&bad).is_err());
    }

    fn manifest_fixture(dir: &Path, entries: &str) -> PathBuf {
        write(dir, "r1.json", r#"{"id":"A","title":"t"}"#);
        write(dir, "r2.json", r#"{"id":"B","title":"t"}"#);
        fs::create_dir_all(dir.join("p/buggy")).unwrap();
        fs::create_dir_all(dir.join("p/fixed")).unwrap();
        write(dir, "m.json", entries)
    }

    #[test]
    fn manifest_preserves_order() {
        let dir = tempfile::tempdir().unwrap();
        let path = manifest_fixture(
            dir.path(),
            r#"{"entries":[
                {"report":"r2.json","project":"p","buggy":"p/buggy","fixed":"p/fixed"},
                {"report":"r1.json","project":"p","buggy":"p/buggy","fixed":"p/fixed"}]}"#,
        );
        let m = load_manifest(&path).unwrap();
        assert_eq!(m.entries.len(), 2);
        assert!(m.entries[0].report_path.ends_with("r2.json"));
        assert!(m.entries[1].report_path.ends_with("r1.json"));
        assert!(m.warnings.is_empty());
    }

    #[test]
    fn empty_manifest_warns() {
        let dir = tempfile::tempdir().unwrap();
        let path = manifest_fixture(dir.path(), r#"{"entries":[]}"#);
        let m = load_manifest(&path).unwrap();
        assert!(m.entries.is_empty());
        assert_eq!(m.warnings.len(), 1);
    }

    #[test]
    fn dangling_paths_are_all_listed() {
        let dir = tempfile::tempdir().unwrap();
        let path = manifest_fixture(
            dir.path(),
            r#"{"entries":[
                {"report":"nope.json","project":"p","buggy":"p/buggy","fixed":"p/fixed"},
                {"report":"r1.json","project":"p","buggy":"p/buggy","fixed":"gone"}]}"#,
        );
        match load_manifest(&path) {
            Err(IngestError::Dangling { missing, .. }) => {
                assert_eq!(missing.len(), 2);
                assert!(missing[0].ends_with("nope.json"));
                assert!(missing[1].ends_with("gone"));
            }
            other => panic!("expected dangling error, got {other:?}"),
        }
    }
}
