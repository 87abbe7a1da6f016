//! Placing a generated test into the existing suite.
//!
//! The host class is the test class sharing the largest fraction of the
//! candidate's token set. Types the host does not already see are imported
//! from their unique project definition, else via the most common matching
//! import in the project; assertion helpers fall back to a configured
//! framework import.

use std::collections::BTreeSet;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use walkdir::WalkDir;

use crate::completion::TestCandidate;
use crate::hash::sha256_hex;
use crate::java::{
    assertion_calls, extract_dependencies, is_java_lang, lex, parse_import_statement, parse_method, CompilationUnit,
    SourceIndex, TestClassInfo,
};

#[derive(Debug, Error)]
pub enum InjectError {
    #[error("the project has no test classes")]
    NoTestClasses,
    #[error("candidate {0} has an empty token set")]
    EmptyCandidate(String),
    #[error("host class {0} is not in the index")]
    UnknownHost(String),
    #[error("{path} changed since it was indexed")]
    StaleIndex { path: String },
    #[error("{path} already contains candidate {candidate}")]
    DuplicateMethod { path: String, candidate: String },
    #[error("edited {path} no longer lexes: {message}")]
    LexFailure { path: String, message: String },
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> InjectError + '_ {
    move |source| InjectError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub class_path: String,
    pub score: f64,
    /// `|T_t ∩ T_c|`; the score's numerator.
    pub shared_tokens: usize,
}

/// Fraction of the candidate's tokens that also occur in the class.
pub fn similarity(candidate: &BTreeSet<String>, class: &BTreeSet<String>) -> f64 {
    if candidate.is_empty() {
        return 0.0;
    }
    candidate.intersection(class).count() as f64 / candidate.len() as f64
}

/// Test class maximizing token overlap; ties go to the smallest path.
pub fn find_best_matching_class(candidate: &TestCandidate, index: &SourceIndex) -> Result<MatchResult, InjectError> {
    if index.test_classes.is_empty() {
        return Err(InjectError::NoTestClasses);
    }
    if candidate.token_set.is_empty() {
        return Err(InjectError::EmptyCandidate(candidate.id()));
    }
    // The denominator is shared, so comparing numerators is exact.
    let (best, shared) = index
        .test_classes
        .iter()
        .map(|c| (c, candidate.token_set.intersection(&c.token_set).count()))
        .max_by(|(a, sa), (b, sb)| sa.cmp(sb).then_with(|| b.path.cmp(&a.path)))
        .expect("non-empty");
    Ok(MatchResult {
        class_path: best.path.clone(),
        score: shared as f64 / candidate.token_set.len() as f64,
        shared_tokens: shared,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InjectionConfig {
    /// Import added for assertion helpers nothing else resolves.
    pub assertion_import: String,
    /// Helper names covered by `assertion_import`.
    pub assertion_methods: Vec<String>,
    /// Appended (with a counter) to a method name the host already declares.
    pub rename_suffix: String,
}

impl Default for InjectionConfig {
    fn default() -> Self {
        InjectionConfig {
            assertion_import: "import static org.junit.Assert.*;".to_string(),
            assertion_methods: [
                "assertArrayEquals",
                "assertEquals",
                "assertFalse",
                "assertNotEquals",
                "assertNotNull",
                "assertNotSame",
                "assertNull",
                "assertSame",
                "assertThrows",
                "assertTrue",
                "fail",
            ]
            .map(String::from)
            .to_vec(),
            rename_suffix: "_repro".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InjectionPlan {
    pub candidate: TestCandidate,
    pub host_path: String,
    pub new_imports: Vec<String>,
    pub unresolved: BTreeSet<String>,
}

fn imports_cover(host: &TestClassInfo, name: &str, want_static: bool) -> bool {
    host.existing_imports.iter().any(|stmt| {
        let Some((is_static, path)) = parse_import_statement(stmt) else {
            return false;
        };
        is_static == want_static && (path.ends_with(".*") || path.rsplit('.').next() == Some(name))
    })
}

fn type_visible(name: &str, host: &TestClassInfo, index: &SourceIndex) -> bool {
    if is_java_lang(name) || name == host.simple_name || imports_cover(host, name, false) {
        return true;
    }
    index
        .public_class_locations
        .get(name)
        .is_some_and(|locs| locs.iter().any(|l| l.package == host.package))
}

fn assertion_visible(name: &str, host: &TestClassInfo) -> bool {
    let inherits = host
        .superclass
        .as_deref()
        .is_some_and(|s| s.ends_with("TestCase") || s == "Assert");
    inherits || host.declared_methods.iter().any(|m| m == name) || imports_cover(host, name, true)
}

pub fn plan_injection(
    candidate: &TestCandidate,
    matched: &MatchResult,
    index: &SourceIndex,
    config: &InjectionConfig,
) -> Result<InjectionPlan, InjectError> {
    let host = index
        .test_class(&matched.class_path)
        .ok_or_else(|| InjectError::UnknownHost(matched.class_path.clone()))?;
    let tokens = candidate.tokens();
    let mut new_imports: Vec<String> = Vec::new();
    let mut unresolved = BTreeSet::new();
    let add = |stmt: String, new_imports: &mut Vec<String>| {
        if !new_imports.contains(&stmt) && !host.existing_imports.contains(&stmt) {
            new_imports.push(stmt);
        }
    };

    for name in extract_dependencies(&tokens) {
        if type_visible(&name, host, index) {
            continue;
        }
        let unique = index
            .public_class_locations
            .get(&name)
            .filter(|locs| locs.len() == 1)
            .map(|locs| &locs[0]);
        if let Some(loc) = unique {
            if loc.package.as_deref().is_some_and(|p| !p.is_empty()) {
                add(format!("import {};", loc.qualified(&name)), &mut new_imports);
            }
            continue;
        }
        match index.most_common_import(&name) {
            Some(stmt) => add(stmt, &mut new_imports),
            None => {
                unresolved.insert(name);
            }
        }
    }

    for name in assertion_calls(&tokens) {
        if assertion_visible(&name, host) {
            continue;
        }
        let project_import = index
            .most_common_import(&name)
            .filter(|stmt| parse_import_statement(stmt).is_some_and(|(is_static, _)| is_static));
        if let Some(stmt) = project_import {
            add(stmt, &mut new_imports);
        } else if config.assertion_methods.contains(&name) {
            if !imports_cover_statement(host, &config.assertion_import) {
                add(config.assertion_import.clone(), &mut new_imports);
            }
        } else {
            unresolved.insert(name);
        }
    }

    Ok(InjectionPlan {
        candidate: candidate.clone(),
        host_path: host.path.clone(),
        new_imports,
        unresolved,
    })
}

fn imports_cover_statement(host: &TestClassInfo, stmt: &str) -> bool {
    host.existing_imports.iter().any(|s| s == stmt)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEdit {
    pub path: String,
    pub content: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModifiedSuite {
    pub base_root: PathBuf,
    pub edits: Vec<FileEdit>,
    pub injected_test_name: String,
    /// Fully qualified name of the host class.
    pub test_class: String,
}

/// Whether `haystack` contains `needle` as a contiguous run, treating one
/// position of `needle` (the method name) as a wildcard.
fn contains_method(haystack: &[&str], needle: &[&str], wildcard: usize) -> bool {
    needle.len() <= haystack.len()
        && haystack.windows(needle.len()).any(|w| {
            w.iter()
                .zip(needle)
                .enumerate()
                .all(|(i, (a, b))| i == wildcard || a == b)
        })
}

fn indent_method(source: &str, unit: &str) -> String {
    source
        .trim_end()
        .lines()
        .map(|line| {
            let line = line.trim_end();
            if line.is_empty() {
                String::new()
            } else {
                format!("{unit}{line}")
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Insert the candidate and its imports into the host's source text.
pub fn apply_injection(
    plan: &InjectionPlan,
    project_root: &Path,
    index: &SourceIndex,
    config: &InjectionConfig,
) -> Result<ModifiedSuite, InjectError> {
    let host = index
        .test_class(&plan.host_path)
        .ok_or_else(|| InjectError::UnknownHost(plan.host_path.clone()))?;
    let file = project_root.join(&host.path);
    let original = fs::read_to_string(&file).map_err(io_err(&file))?;

    let (cand_tokens, shape) = parse_method(&plan.candidate.source).expect("candidate parsed at construction");
    let cand_texts: Vec<&str> = cand_tokens.iter().map(|t| t.text.as_str()).collect();
    let host_tokens = lex(&original).map_err(|e| InjectError::LexFailure {
        path: host.path.clone(),
        message: e.to_string(),
    })?;
    let host_texts: Vec<&str> = host_tokens.iter().map(|t| t.text.as_str()).collect();
    if contains_method(&host_texts, &cand_texts, shape.name_index) {
        return Err(InjectError::DuplicateMethod {
            path: host.path.clone(),
            candidate: plan.candidate.id(),
        });
    }
    if sha256_hex(original.as_bytes()) != host.content_hash {
        return Err(InjectError::StaleIndex {
            path: host.path.clone(),
        });
    }

    let mut name = shape.name.clone();
    let mut n = 0;
    while host.declared_methods.contains(&name) {
        n += 1;
        name = format!("{}{}{}", shape.name, config.rename_suffix, n);
    }
    let name_span = cand_tokens[shape.name_index].span.clone();
    let mut method = plan.candidate.source.clone();
    method.replace_range(name_span, &name);

    let offset = host.insertion_offset;
    let (before, after) = original.split_at(offset);
    let mut content = String::with_capacity(original.len() + method.len() + 64);
    content.push_str(before);
    if !before.ends_with('\n') {
        content.push('\n');
    }
    content.push('\n');
    content.push_str(&indent_method(&method, &host.indent));
    content.push('\n');
    content.push_str(after);

    if !plan.new_imports.is_empty() {
        let cu = CompilationUnit::parse(&original).map_err(|e| InjectError::LexFailure {
            path: host.path.clone(),
            message: e.to_string(),
        })?;
        let block = plan.new_imports.join("\n");
        let (at, text) = match (cu.imports.last(), cu.package_end) {
            (Some(last), _) => (last.end, format!("\n{block}")),
            (None, Some(end)) => (end, format!("\n\n{block}")),
            (None, None) => (0, format!("{block}\n\n")),
        };
        content.insert_str(at, &text);
    }

    lex(&content).map_err(|e| InjectError::LexFailure {
        path: host.path.clone(),
        message: e.to_string(),
    })?;

    let test_class = match &host.package {
        Some(p) if !p.is_empty() => format!("{p}.{}", host.simple_name),
        _ => host.simple_name.clone(),
    };
    Ok(ModifiedSuite {
        base_root: project_root.to_path_buf(),
        edits: vec![FileEdit {
            path: host.path.clone(),
            content,
        }],
        injected_test_name: name,
        test_class,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScratchStrategy {
    /// Copy every file.
    #[default]
    Copy,
    /// Symlink unedited files; only edited files are real copies.
    Symlink,
}

/// Write the project plus the suite's edits into `dest`. The base tree is
/// never modified.
pub fn materialize(suite: &ModifiedSuite, dest: &Path, strategy: ScratchStrategy) -> Result<(), InjectError> {
    let root = &suite.base_root;
    for entry in WalkDir::new(root).follow_links(true) {
        let entry = entry.map_err(|e| InjectError::Io {
            path: root.clone(),
            source: e.into(),
        })?;
        let rel = entry.path().strip_prefix(root).expect("walk stays under root");
        let target = dest.join(rel);
        if entry.file_type().is_dir() {
            fs::create_dir_all(&target).map_err(io_err(&target))?;
            continue;
        }
        let rel_str = rel
            .components()
            .map(|c| c.as_os_str().to_string_lossy())
            .collect::<Vec<_>>()
            .join("/");
        if suite.edits.iter().any(|e| e.path == rel_str) {
            continue;
        }
        match strategy {
            ScratchStrategy::Copy => {
                fs::copy(entry.path(), &target).map_err(io_err(&target))?;
            }
            ScratchStrategy::Symlink => {
                let src = fs::canonicalize(entry.path()).map_err(io_err(entry.path()))?;
                symlink(&src, &target).map_err(io_err(&target))?;
            }
        }
    }
    for edit in &suite.edits {
        let target = dest.join(&edit.path);
        if let Some(parent) = target.parent() {
            fs::create_dir_all(parent).map_err(io_err(parent))?;
        }
        fs::write(&target, &edit.content).map_err(io_err(&target))?;
    }
    Ok(())
}

#[cfg(unix)]
fn symlink(src: &Path, dst: &Path) -> io::Result<()> {
    std::os::unix::fs::symlink(src, dst)
}

#[cfg(not(unix))]
fn symlink(src: &Path, dst: &Path) -> io::Result<()> {
    fs::copy(src, dst).map(|_| ())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::completion::CandidateOrigin;
    use crate::java::{build_index, ClassLocation, IndexConfig};

    fn candidate(src: &str) -> TestCandidate {
        TestCandidate::from_source(
            src.to_string(),
            CandidateOrigin {
                report_id: "R".into(),
                sample_index: 0,
            },
        )
        .unwrap()
    }

    fn class(path: &str, tokens: &[&str]) -> TestClassInfo {
        TestClassInfo {
            path: path.into(),
            simple_name: path.rsplit('/').next().unwrap().trim_end_matches(".java").into(),
            package: Some("p".into()),
            superclass: None,
            token_set: tokens.iter().map(|s| s.to_string()).collect(),
            existing_imports: vec![],
            declared_methods: vec![],
            insertion_offset: 0,
            indent: "    ".into(),
            content_hash: String::new(),
        }
    }

    #[test]
    fn similarity_arithmetic() {
        let t: BTreeSet<String> = ["a", "b", "c", "d"].map(String::from).into();
        let y: BTreeSet<String> = ["a", "b", "c", "z"].map(String::from).into();
        assert_eq!(similarity(&t, &y), 0.75);
    }

    #[test]
    fn picks_highest_overlap() {
        let c = candidate("public void testA() { alpha(beta); }");
        // Shared with every class: public void testA ( ) { } ; -> 7 tokens out of 12.
        let idx = SourceIndex {
            test_classes: vec![
                class("x/X.java", &["public", "void", "(", ")", "{", "}", ";", "beta"]),
                class(
                    "y/Y.java",
                    &["public", "void", "(", ")", "{", "}", ";", "alpha", "beta"],
                ),
            ],
            ..Default::default()
        };
        let m = find_best_matching_class(&c, &idx).unwrap();
        assert_eq!(m.class_path, "y/Y.java");
        assert_eq!(m.shared_tokens, 9);
        assert!((m.score - 9.0 / c.token_set.len() as f64).abs() < 1e-12);
    }

    #[test]
    fn full_containment_scores_one() {
        let c = candidate("public void testA() {}");
        let idx = SourceIndex {
            test_classes: vec![
                class("a/A.java", &["public"]),
                class("b/B.java", &["public", "void", "testA", "(", ")", "{", "}"]),
            ],
            ..Default::default()
        };
        let m = find_best_matching_class(&c, &idx).unwrap();
        assert_eq!(m.class_path, "b/B.java");
        assert_eq!(m.score, 1.0);
    }

    #[test]
    fn ties_go_to_smallest_path() {
        let c = candidate("public void testA() {}");
        let idx = SourceIndex {
            test_classes: vec![class("b/T2.java", &["public", "void"]), class("a/T1.java", &["{", "}"])],
            ..Default::default()
        };
        assert_eq!(find_best_matching_class(&c, &idx).unwrap().class_path, "a/T1.java");
    }

    #[test]
    fn empty_index_is_an_error() {
        let c = candidate("public void testA() {}");
        assert!(matches!(
            find_best_matching_class(&c, &SourceIndex::default()),
            Err(InjectError::NoTestClasses)
        ));
    }

    fn plan_for(src: &str, host: TestClassInfo, idx: &mut SourceIndex) -> InjectionPlan {
        let path = host.path.clone();
        idx.test_classes = vec![host];
        let c = candidate(src);
        let m = MatchResult {
            class_path: path,
            score: 1.0,
            shared_tokens: 0,
        };
        plan_injection(&c, &m, idx, &InjectionConfig::default()).unwrap()
    }

    #[test]
    fn already_imported_needs_nothing() {
        let mut host = class("t/MathUtilsTest.java", &[]);
        host.package = Some("t".into());
        host.superclass = Some("TestCase".into());
        host.existing_imports = vec!["import org.apache.commons.math.util.MathUtils;".into()];
        let mut idx = SourceIndex::default();
        idx.public_class_locations.insert(
            "MathUtils".into(),
            vec![ClassLocation {
                path: "src/main/java/org/apache/commons/math/util/MathUtils.java".into(),
                package: Some("org.apache.commons.math.util".into()),
            }],
        );
        let plan = plan_for(
            "public void testEquals() { assertFalse(MathUtils.equals(Double.NaN, Double.NaN)); }",
            host,
            &mut idx,
        );
        assert!(plan.new_imports.is_empty());
        assert!(plan.unresolved.is_empty());
    }

    #[test]
    fn unique_definition_is_imported() {
        let mut idx = SourceIndex::default();
        idx.public_class_locations.insert(
            "Widget".into(),
            vec![ClassLocation {
                path: "src/main/java/p/q/Widget.java".into(),
                package: Some("p.q".into()),
            }],
        );
        let mut host = class("t/WTest.java", &[]);
        host.package = Some("t".into());
        let plan = plan_for("public void testW() { Widget w = null; }", host, &mut idx);
        assert_eq!(plan.new_imports, ["import p.q.Widget;"]);
    }

    #[test]
    fn same_package_and_wildcards_resolve() {
        let mut idx = SourceIndex::default();
        idx.public_class_locations.insert(
            "Widget".into(),
            vec![ClassLocation {
                path: "src/main/java/t/Widget.java".into(),
                package: Some("t".into()),
            }],
        );
        let mut host = class("t/WTest.java", &[]);
        host.package = Some("t".into());
        host.existing_imports = vec!["import java.util.*;".into()];
        let plan = plan_for(
            "public void testW() { Widget w = null; List<Map> l = null; }",
            host,
            &mut idx,
        );
        assert!(plan.new_imports.is_empty());
        assert!(plan.unresolved.is_empty());
    }

    #[test]
    fn ambiguous_definition_uses_most_common_import() {
        let mut idx = SourceIndex::default();
        let loc = |p: &str| ClassLocation {
            path: format!("{p}/Node.java"),
            package: Some(p.into()),
        };
        idx.public_class_locations
            .insert("Node".into(), vec![loc("a"), loc("b")]);
        idx.import_frequency.insert("import a.Node;".into(), 2);
        idx.import_frequency.insert("import b.Node;".into(), 7);
        let plan = plan_for(
            "public void testN() { Node n = null; }",
            class("t/NTest.java", &[]),
            &mut idx,
        );
        assert_eq!(plan.new_imports, ["import b.Node;"]);
    }

    #[test]
    fn assertion_rule_and_its_limits() {
        let mut idx = SourceIndex::default();
        let plan = plan_for(
            "public void testA() { assertTrue(true); assertThat(1); }",
            class("t/ATest.java", &[]),
            &mut idx,
        );
        assert_eq!(plan.new_imports, ["import static org.junit.Assert.*;"]);
        assert_eq!(plan.unresolved.iter().collect::<Vec<_>>(), ["assertThat"]);

        idx.import_frequency
            .insert("import static org.assertj.core.api.Assertions.assertThat;".into(), 3);
        let plan = plan_for(
            "public void testA() { assertThat(1); }",
            class("t/ATest.java", &[]),
            &mut idx,
        );
        assert_eq!(
            plan.new_imports,
            ["import static org.assertj.core.api.Assertions.assertThat;"]
        );
    }

    #[test]
    fn unknown_type_is_unresolved() {
        let mut idx = SourceIndex::default();
        let plan = plan_for(
            "public void testA() { Gizmo g = new Gizmo(); }",
            class("t/ATest.java", &[]),
            &mut idx,
        );
        assert_eq!(plan.unresolved.iter().collect::<Vec<_>>(), ["Gizmo"]);
    }

    const HOST: &str = "package t;\n\nimport junit.framework.TestCase;\n\npublic class FooTest extends TestCase {\n    public void testEquals() {\n        assertTrue(true);\n    }\n}\n";

    fn project(host_src: &str) -> (tempfile::TempDir, SourceIndex) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("src/test/java/t/FooTest.java");
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(&path, host_src).unwrap();
        let idx = build_index(dir.path(), &IndexConfig::default()).unwrap();
        (dir, idx)
    }

    fn plan_with(src: &str, idx: &SourceIndex, imports: &[&str]) -> InjectionPlan {
        InjectionPlan {
            candidate: candidate(src),
            host_path: idx.test_classes[0].path.clone(),
            new_imports: imports.iter().map(|s| s.to_string()).collect(),
            unresolved: BTreeSet::new(),
        }
    }

    #[test]
    fn injects_before_final_brace_and_renames() {
        let (dir, idx) = project(HOST);
        let plan = plan_with(
            "public void testEquals() {\n    assertFalse(false);\n}\n",
            &idx,
            &["import java.util.Locale;"],
        );
        let suite = apply_injection(&plan, dir.path(), &idx, &InjectionConfig::default()).unwrap();
        assert_eq!(suite.injected_test_name, "testEquals_repro1");
        assert_eq!(suite.test_class, "t.FooTest");
        let content = &suite.edits[0].content;
        let expected = "package t;\n\nimport junit.framework.TestCase;\nimport java.util.Locale;\n\npublic class FooTest extends TestCase {\n    public void testEquals() {\n        assertTrue(true);\n    }\n\n    public void testEquals_repro1() {\n        assertFalse(false);\n    }\n}\n";
        assert_eq!(content, expected);
    }

    #[test]
    fn imports_go_after_package_when_none_exist() {
        let host = "package t;\npublic class FooTest {\n}\n";
        let (dir, idx) = project(host);
        let plan = plan_with("public void testX() {}", &idx, &["import a.B;"]);
        let suite = apply_injection(&plan, dir.path(), &idx, &InjectionConfig::default()).unwrap();
        assert_eq!(
            suite.edits[0].content,
            "package t;\n\nimport a.B;\npublic class FooTest {\n\n    public void testX() {}\n}\n"
        );
    }

    #[test]
    fn no_imports_means_only_method_edit() {
        let (dir, idx) = project(HOST);
        let plan = plan_with("public void testX() {}", &idx, &[]);
        let suite = apply_injection(&plan, dir.path(), &idx, &InjectionConfig::default()).unwrap();
        let content = &suite.edits[0].content;
        assert!(content.starts_with(&HOST[..HOST.rfind('}').unwrap()]));
        assert!(content.ends_with("\n    public void testX() {}\n}\n"));
    }

    #[test]
    fn stale_host_is_rejected() {
        let (dir, idx) = project(HOST);
        fs::write(
            dir.path().join("src/test/java/t/FooTest.java"),
            HOST.replace("true", "false"),
        )
        .unwrap();
        let plan = plan_with("public void testX() {}", &idx, &[]);
        assert!(matches!(
            apply_injection(&plan, dir.path(), &idx, &InjectionConfig::default()),
            Err(InjectError::StaleIndex { .. })
        ));
    }

    #[test]
    fn applying_twice_is_rejected() {
        let (dir, idx) = project(HOST);
        let plan = plan_with("public void testX() { f(1); }", &idx, &[]);
        let suite = apply_injection(&plan, dir.path(), &idx, &InjectionConfig::default()).unwrap();
        let scratch = tempfile::tempdir().unwrap();
        materialize(&suite, scratch.path(), ScratchStrategy::Copy).unwrap();
        assert!(matches!(
            apply_injection(&plan, scratch.path(), &idx, &InjectionConfig::default()),
            Err(InjectError::DuplicateMethod { .. })
        ));
    }

    #[test]
    fn materialize_leaves_base_untouched() {
        let (dir, idx) = project(HOST);
        let plan = plan_with("public void testX() {}", &idx, &[]);
        let suite = apply_injection(&plan, dir.path(), &idx, &InjectionConfig::default()).unwrap();
        for strategy in [ScratchStrategy::Copy, ScratchStrategy::Symlink] {
            let scratch = tempfile::tempdir().unwrap();
            materialize(&suite, scratch.path(), strategy).unwrap();
            let written = fs::read_to_string(scratch.path().join("src/test/java/t/FooTest.java")).unwrap();
            assert_eq!(written, suite.edits[0].content);
        }
        let base = fs::read_to_string(dir.path().join("src/test/java/t/FooTest.java")).unwrap();
        assert_eq!(base, HOST);
    }
}
