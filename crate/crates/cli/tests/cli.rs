//! Subcommand behavior through the binary and the library entry points.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use reprotest_cli::commands::{evaluate, reproduce, EvaluateArgs, ReproduceArgs};
use reprotest_cli::RunConfig;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn config() -> RunConfig {
    RunConfig::load(&fixtures().join("reproduce.toml")).unwrap()
}

fn math370(out: &Path, thr: Option<usize>) -> ReproduceArgs {
    let f = fixtures();
    ReproduceArgs {
        report: f.join("bugs/MATH-370/report.json"),
        buggy: f.join("projects/nanmath/buggy"),
        fixed: f.join("projects/nanmath/fixed"),
        buggy_ref: None,
        fixed_ref: None,
        out: Some(out.to_path_buf()),
        thr,
    }
}

#[test]
fn gate_above_largest_cluster_exits_2_with_empty_ranking() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixtures();
    let status = Command::new(env!("CARGO_BIN_EXE_reprotest"))
        .arg("--config")
        .arg(f.join("reproduce.toml"))
        .args(["reproduce", "--thr", "4", "--report"])
        .arg(f.join("bugs/MATH-370/report.json"))
        .arg("--buggy")
        .arg(f.join("projects/nanmath/buggy"))
        .arg("--fixed")
        .arg(f.join("projects/nanmath/fixed"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(2));
    let bug = dir.path().join("MATH-370");
    assert_eq!(fs::read_dir(bug.join("ranked")).unwrap().count(), 0);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(bug.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["selected"], false);
    assert_eq!(report["ranking"].as_array().unwrap().len(), 0);
    // Largest cluster has 4 members, so thr 3 still selects.
    let again = reproduce(config(), math370(&dir.path().join("thr3"), Some(3))).unwrap();
    assert_eq!(again.exit_code(), 0);
}

#[test]
fn outputs_carry_a_manifest_and_no_secret() {
    std::env::set_var("REPROTEST_API_KEY", "do-not-leak-7731");
    let dir = tempfile::tempdir().unwrap();
    reproduce(config(), math370(dir.path(), None)).unwrap();
    let manifest: Vec<serde_json::Value> =
        serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    let paths: Vec<&str> = manifest.iter().map(|e| e["path"].as_str().unwrap()).collect();
    for want in [
        "MATH-370/prompt.md",
        "MATH-370/completions.json",
        "MATH-370/report.json",
        "MATH-370/ranked/01_MATH-370_1.java",
    ] {
        assert!(paths.contains(&want), "{want} missing from {paths:?}");
    }
    for entry in walk(dir.path()) {
        let bytes = fs::read(&entry).unwrap();
        assert!(
            !String::from_utf8_lossy(&bytes).contains("do-not-leak-7731"),
            "{}",
            entry.display()
        );
    }
}

fn walk(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(walk(&p));
        } else {
            out.push(p);
        }
    }
    out
}

#[test]
fn evaluate_fixture_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let args = EvaluateArgs {
        manifest: fixtures().join("eval/manifest.json"),
        out: Some(dir.path().to_path_buf()),
        random: true,
        ns: None,
    };
    let out = evaluate(config(), args).unwrap();
    let r = &out.report;
    assert_eq!(
        (r.n_bugs, r.n_reproduced, r.n_selected, r.n_selected_reproduced),
        (4, 3, 3, 2)
    );
    assert_eq!(
        r.acc_at.iter().map(|(&n, &a)| (n, a)).collect::<Vec<_>>(),
        [(1, 1), (3, 2), (5, 2)]
    );
    assert_eq!(r.wef_sum_at.values().copied().collect::<Vec<_>>(), [2, 3, 3]);
    assert_eq!(r.wef_sum, 3);
    assert!((r.recall.unwrap() - 2.0 / 3.0).abs() < 1e-12);
    assert!((r.precision_at[&1] - 1.0 / 3.0).abs() < 1e-12);
    let random = r.random.as_ref().unwrap();
    assert_eq!(random.acc_at.keys().copied().collect::<Vec<_>>(), [1, 3, 5]);
    assert!(out.table.contains("acc@5") && out.table.contains("random"));

    let again_dir = tempfile::tempdir().unwrap();
    let args = EvaluateArgs {
        manifest: fixtures().join("eval/manifest.json"),
        out: Some(again_dir.path().to_path_buf()),
        random: true,
        ns: None,
    };
    evaluate(config(), args).unwrap();
    for name in ["evaluation.json", "evaluation.txt", "outcomes.json", "manifest.json"] {
        assert_eq!(
            fs::read(dir.path().join(name)).unwrap(),
            fs::read(again_dir.path().join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn evaluate_columns_follow_configured_cutoffs() {
    let dir = tempfile::tempdir().unwrap();
    let args = EvaluateArgs {
        manifest: fixtures().join("eval/manifest.json"),
        out: Some(dir.path().to_path_buf()),
        random: false,
        ns: Some(vec![2, 4]),
    };
    let out = evaluate(config(), args).unwrap();
    assert_eq!(out.report.acc_at.keys().copied().collect::<Vec<_>>(), [2, 4]);
    assert!(out.report.random.is_none());
    assert!(out.table.contains("acc@2") && !out.table.contains("acc@1 "));
}

#[test]
fn empty_manifest_gives_empty_report() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_reprotest"))
        .arg("--config")
        .arg(fixtures().join("reproduce.toml"))
        .arg("evaluate")
        .arg("--manifest")
        .arg(fixtures().join("eval/empty.json"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("evaluation.json")).unwrap()).unwrap();
    assert_eq!(report["n_bugs"], 0);
    assert_eq!(report["acc_at"]["1"], 0);
}

#[test]
fn evaluate_reuses_reproduce_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config();
    cfg.cache_dir = Some(dir.path().join("cache"));
    let mut args = math370(&dir.path().join("r"), None);
    // The manifest's version refs.
    args.buggy_ref = Some("../projects/nanmath/buggy".into());
    args.fixed_ref = Some("../projects/nanmath/fixed".into());
    assert_eq!(reproduce(cfg.clone(), args).unwrap().run.outcome.n_fib, 6);

    // Rewrite every cached buggy failure as a pass; a reused cache must show it.
    for path in walk(&dir.path().join("cache")) {
        let mut v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
        if v["record"]["version"] == "buggy" && v["record"]["status"] == "fail" {
            v["record"]["status"] = "pass".into();
            v["record"]["failure_output"] = serde_json::Value::Null;
            fs::write(&path, v.to_string()).unwrap();
        }
    }
    let out = evaluate(
        cfg,
        EvaluateArgs {
            manifest: fixtures().join("eval/manifest.json"),
            out: Some(dir.path().join("e")),
            random: false,
            ns: None,
        },
    )
    .unwrap();
    let outcomes: Vec<serde_json::Value> =
        serde_json::from_str(&fs::read_to_string(out.out_dir.join("outcomes.json")).unwrap()).unwrap();
    let math = outcomes.iter().find(|o| o["bug_id"] == "MATH-370").unwrap();
    assert_eq!(math["n_fib"], 0);
    let nm3 = outcomes.iter().find(|o| o["bug_id"] == "NM-3").unwrap();
    assert_eq!(nm3["selected"], true);
}

#[test]
fn mine_prints_rows_median_and_filtered() {
    let out = Command::new(env!("CARGO_BIN_EXE_reprotest"))
        .arg("mine")
        .arg(fixtures().join("mining"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = stdout
        .lines()
        .filter(|l| ["alpha", "beta", "gamma"].iter().any(|r| l.starts_with(r)))
        .collect();
    assert_eq!(rows.len(), 3, "{stdout}");
    assert!(stdout.contains("median ratio: 0.290"), "{stdout}");
    assert!(stdout.contains("filtered: gamma"), "{stdout}");
    assert!(String::from_utf8_lossy(&out.stderr).contains("gamma: no pr_map.json"));
}

#[test]
fn replay_mode_without_fixtures_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.toml");
    fs::write(&path, "[runner]\nfixture_manifest = \"m.json\"\n").unwrap();
    let err = RunConfig::load(&path).unwrap_err();
    assert!(format!("{err:#}").contains("provider.fixtures"));
}
