//! Bundled injection cases against the fixture project.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use reprotest_core::completion::{CandidateOrigin, TestCandidate};
use reprotest_core::inject::{apply_injection, find_best_matching_class, plan_injection, InjectionConfig};
use reprotest_core::java::{build_index, lex, IndexConfig};
use serde::Deserialize;

#[derive(Deserialize)]
struct Cases {
    project: String,
    cases: Vec<Case>,
}

#[derive(Deserialize)]
struct Case {
    name: String,
    test_source: String,
    host: String,
    injected_name: String,
    imports: Vec<String>,
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn import_lines(src: &str) -> BTreeSet<String> {
    src.lines()
        .map(str::trim)
        .filter(|l| l.starts_with("import "))
        .map(str::to_string)
        .collect()
}

#[test]
fn every_bundled_case_injects_exactly() {
    let dir = fixtures().join("injection");
    let cases: Cases = serde_json::from_str(&fs::read_to_string(dir.join("cases.json")).unwrap()).unwrap();
    let root = dir.join(&cases.project);
    let index = build_index(&root, &IndexConfig::default()).unwrap();
    let config = InjectionConfig::default();
    assert_eq!(cases.cases.len(), 5);

    for (i, case) in cases.cases.iter().enumerate() {
        let origin = CandidateOrigin {
            report_id: case.name.clone(),
            sample_index: i,
        };
        let candidate = TestCandidate::from_source(case.test_source.clone(), origin).unwrap();
        let matched = find_best_matching_class(&candidate, &index).unwrap();
        assert_eq!(matched.class_path, case.host, "{}: host", case.name);
        let plan = plan_injection(&candidate, &matched, &index, &config).unwrap();
        assert!(
            plan.unresolved.is_empty(),
            "{}: unresolved {:?}",
            case.name,
            plan.unresolved
        );
        let suite = apply_injection(&plan, &root, &index, &config).unwrap();
        assert_eq!(suite.injected_test_name, case.injected_name, "{}: name", case.name);

        let original = fs::read_to_string(root.join(&case.host)).unwrap();
        let edit = suite.edits.iter().find(|e| e.path == case.host).unwrap();
        lex(&edit.content).unwrap();

        let added: Vec<String> = import_lines(&edit.content)
            .difference(&import_lines(&original))
            .cloned()
            .collect();
        assert_eq!(added, case.imports, "{}: imports", case.name);

        let sig = format!("void {}(", case.injected_name);
        let at = edit
            .content
            .find(&sig)
            .unwrap_or_else(|| panic!("{}: method missing", case.name));
        let last_brace = edit.content.rfind('}').unwrap();
        assert!(at < last_brace);
        let tail_start = edit.content[..last_brace].trim_end().len();
        assert!(
            edit.content[..tail_start].ends_with('}'),
            "{}: method is not last member",
            case.name
        );
    }
}
