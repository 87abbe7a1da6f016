//! Project-wide lookup tables: test classes, public type definitions and
//! import statement frequencies.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tracing::warn;
use walkdir::WalkDir;

use super::file::{indent_unit, CompilationUnit};
use crate::hash::sha256_hex;

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("project root {0} does not exist or is not a directory")]
    MissingRoot(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IndexConfig {
    /// Directory patterns under which test classes are discovered. A trailing
    /// `/**` matches everything below the prefix.
    pub test_roots: Vec<String>,
}

impl Default for IndexConfig {
    fn default() -> Self {
        IndexConfig {
            test_roots: vec!["src/test/**".to_string()],
        }
    }
}

impl IndexConfig {
    fn is_test_path(&self, rel: &str) -> bool {
        self.test_roots.iter().any(|pattern| {
            let prefix = pattern.trim_end_matches("**").trim_end_matches('/');
            prefix.is_empty() || rel == prefix || rel.starts_with(&format!("{prefix}/"))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestClassInfo {
    /// Path relative to the project root, `/`-separated.
    pub path: String,
    pub simple_name: String,
    pub package: Option<String>,
    pub superclass: Option<String>,
    pub token_set: BTreeSet<String>,
    pub existing_imports: Vec<String>,
    pub declared_methods: Vec<String>,
    /// Byte offset of the closing brace of the top-level type.
    pub insertion_offset: usize,
    pub indent: String,
    pub content_hash: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ClassLocation {
    pub path: String,
    pub package: Option<String>,
}

impl ClassLocation {
    pub fn qualified(&self, name: &str) -> String {
        match &self.package {
            Some(p) if !p.is_empty() => format!("{p}.{name}"),
            _ => name.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedFile {
    pub path: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceIndex {
    pub test_classes: Vec<TestClassInfo>,
    pub public_class_locations: BTreeMap<String, Vec<ClassLocation>>,
    pub import_frequency: BTreeMap<String, usize>,
    pub skipped: Vec<SkippedFile>,
}

struct FileFacts {
    rel: String,
    test_class: Option<TestClassInfo>,
    public_types: Vec<String>,
    package: Option<String>,
    imports: Vec<String>,
}

fn rel_path(root: &Path, path: &Path) -> String {
    path.strip_prefix(root)
        .unwrap_or(path)
        .components()
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join("/")
}

fn analyze(rel: String, source: &str, config: &IndexConfig) -> Result<FileFacts, String> {
    let cu = CompilationUnit::parse(source).map_err(|e| e.to_string())?;
    let stem = rel
        .rsplit('/')
        .next()
        .unwrap_or(&rel)
        .trim_end_matches(".java")
        .to_string();
    let imports: Vec<String> = cu.imports.iter().map(|i| i.statement.clone()).collect();
    let public_types = cu.types.iter().filter(|t| t.public).map(|t| t.name.clone()).collect();

    let mut test_class = None;
    if config.is_test_path(&rel) {
        if let Some(decl) = cu.primary_type(&stem) {
            let named_test = decl.name.ends_with("Test") || decl.name.ends_with("Tests");
            if named_test || cu.has_test_annotation() {
                let header = &cu.tokens[..decl.body_open];
                let superclass = header
                    .iter()
                    .rposition(|t| t.is_keyword("extends"))
                    .and_then(|i| header.get(i + 1))
                    .filter(|t| t.is_ident())
                    .map(|t| t.text.clone());
                let open = cu.tokens[decl.body_open].span.start;
                let close = cu.tokens[decl.body_close].span.start;
                test_class = Some(TestClassInfo {
                    path: rel.clone(),
                    simple_name: decl.name.clone(),
                    package: cu.package.clone(),
                    superclass,
                    token_set: cu.tokens.iter().map(|t| t.text.clone()).collect(),
                    existing_imports: imports.clone(),
                    declared_methods: cu.declared_methods(decl),
                    insertion_offset: close,
                    indent: indent_unit(source, open, close),
                    content_hash: sha256_hex(source.as_bytes()),
                });
            }
        }
    }
    Ok(FileFacts {
        rel,
        test_class,
        public_types,
        package: cu.package,
        imports,
    })
}

/// Scan every `.java` file under `root`.
pub fn build_index(root: &Path, config: &IndexConfig) -> Result<SourceIndex, IndexError> {
    if !root.is_dir() {
        return Err(IndexError::MissingRoot(root.to_path_buf()));
    }
    let mut files: Vec<PathBuf> = WalkDir::new(root)
        .follow_links(true)
        .into_iter()
        .filter_map(Result::ok)
        .filter(|e| e.file_type().is_file())
        .map(|e| e.into_path())
        .filter(|p| p.extension().is_some_and(|ext| ext == "java"))
        .collect();
    files.sort_by_key(|p| rel_path(root, p));

    let results: Vec<Result<FileFacts, SkippedFile>> = files
        .par_iter()
        .map(|path| {
            let rel = rel_path(root, path);
            let source = fs::read_to_string(path).map_err(|e| SkippedFile {
                path: rel.clone(),
                reason: e.to_string(),
            })?;
            analyze(rel.clone(), &source, config).map_err(|reason| SkippedFile { path: rel, reason })
        })
        .collect();

    let mut index = SourceIndex::default();
    for result in results {
        match result {
            Ok(facts) => {
                for name in facts.public_types {
                    index
                        .public_class_locations
                        .entry(name)
                        .or_default()
                        .push(ClassLocation {
                            path: facts.rel.clone(),
                            package: facts.package.clone(),
                        });
                }
                for stmt in facts.imports {
                    *index.import_frequency.entry(stmt).or_default() += 1;
                }
                if let Some(tc) = facts.test_class {
                    index.test_classes.push(tc);
                }
            }
            Err(skipped) => {
                warn!(path = %skipped.path, reason = %skipped.reason, "skipping unreadable source file");
                index.skipped.push(skipped);
            }
        }
    }
    Ok(index)
}

/// Split `import [static ]a.b.C;` into (is_static, path).
pub fn parse_import_statement(stmt: &str) -> Option<(bool, &str)> {
    let rest = stmt.trim().strip_prefix("import")?.trim_start();
    let (is_static, rest) = match rest.strip_prefix("static ") {
        Some(r) => (true, r.trim_start()),
        None => (false, rest),
    };
    Some((is_static, rest.strip_suffix(';')?.trim_end()))
}

fn last_segment(path: &str) -> &str {
    path.rsplit('.').next().unwrap_or(path)
}

impl SourceIndex {
    pub fn test_class(&self, path: &str) -> Option<&TestClassInfo> {
        self.test_classes.iter().find(|t| t.path == path)
    }

    /// The most frequent project import whose last segment is `name`.
    ///
    /// Wildcard imports qualify only when no explicit import matches and the
    /// wildcard's package defines `name` somewhere in the project.
    pub fn most_common_import(&self, name: &str) -> Option<String> {
        let best = |wildcard: bool| {
            self.import_frequency
                .iter()
                .filter(|(stmt, _)| {
                    let Some((_, path)) = parse_import_statement(stmt) else {
                        return false;
                    };
                    if wildcard {
                        let qualifier = path.trim_end_matches(".*");
                        path.ends_with(".*")
                            && self
                                .public_class_locations
                                .get(name)
                                .is_some_and(|locs| locs.iter().any(|l| l.package.as_deref() == Some(qualifier)))
                    } else {
                        last_segment(path) == name
                    }
                })
                // BTreeMap iterates in lexicographic order, so `max_by_key` alone would
                // pick the last of equal counts; reverse the tie-break explicitly.
                .max_by(|(sa, ca), (sb, cb)| ca.cmp(cb).then_with(|| sb.cmp(sa)))
                .map(|(stmt, _)| stmt.clone())
        };
        best(false).or_else(|| best(true))
    }
}
