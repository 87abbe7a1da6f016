//! Evaluation measures over a set of bugs with BRT labels.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Per-bug outcome: `ranking[i]` tells whether the i-th suggestion is a BRT.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BugOutcome {
    pub bug_id: String,
    pub selected: bool,
    pub ranking: Vec<bool>,
    pub n_fib: usize,
    /// At least one BRT among all generated candidates, before selection.
    pub reproduced: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("cutoffs must be at least 1")]
    ZeroCutoff,
}

fn has_brt_within(ranking: &[bool], n: usize) -> bool {
    ranking.iter().take(n).any(|&b| b)
}

/// Selected bugs with a BRT in the top `n`.
pub fn acc_at_n(outcomes: &[BugOutcome], n: usize) -> usize {
    outcomes
        .iter()
        .filter(|o| o.selected && has_brt_within(&o.ranking, n))
        .count()
}

/// Non-BRTs ranked above the first BRT; the ranking length if none.
pub fn wef(ranking: &[bool]) -> usize {
    ranking.iter().position(|&b| b).unwrap_or(ranking.len())
}

/// `wef` restricted to the top `n`.
pub fn wef_at_n(ranking: &[bool], n: usize) -> usize {
    match ranking.iter().position(|&b| b) {
        Some(p) if p < n => p,
        _ => n.min(ranking.len()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomBaseline {
    pub repeats: usize,
    pub seed: u64,
    pub acc_at: BTreeMap<usize, f64>,
    pub precision_at: BTreeMap<usize, f64>,
    pub wef_sum_at: BTreeMap<usize, f64>,
    pub wef_mean_at: BTreeMap<usize, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub n_bugs: usize,
    pub n_reproduced: usize,
    pub n_selected: usize,
    pub n_selected_reproduced: usize,
    pub acc_at: BTreeMap<usize, usize>,
    /// Empty when no bug was selected.
    pub precision_at: BTreeMap<usize, f64>,
    /// Absent when no bug was reproduced.
    pub recall: Option<f64>,
    pub wef_sum: usize,
    pub wef_mean: Option<f64>,
    pub wef_sum_at: BTreeMap<usize, usize>,
    /// Empty when no bug was selected.
    pub wef_mean_at: BTreeMap<usize, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random: Option<RandomBaseline>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomConfig {
    pub repeats: usize,
    pub seed: u64,
}

impl Default for RandomConfig {
    fn default() -> Self {
        RandomConfig { repeats: 100, seed: 0 }
    }
}

fn check_cutoffs(ns: &[usize]) -> Result<(), MetricsError> {
    if ns.contains(&0) {
        return Err(MetricsError::ZeroCutoff);
    }
    Ok(())
}

pub fn summarize(outcomes: &[BugOutcome], ns: &[usize]) -> Result<EvaluationReport, MetricsError> {
    check_cutoffs(ns)?;
    let selected: Vec<&BugOutcome> = outcomes.iter().filter(|o| o.selected).collect();
    let n_selected = selected.len();
    let n_reproduced = outcomes.iter().filter(|o| o.reproduced).count();
    let n_selected_reproduced = selected.iter().filter(|o| o.reproduced).count();

    let mut report = EvaluationReport {
        n_bugs: outcomes.len(),
        n_reproduced,
        n_selected,
        n_selected_reproduced,
        acc_at: BTreeMap::new(),
        precision_at: BTreeMap::new(),
        recall: (n_reproduced > 0).then(|| n_selected_reproduced as f64 / n_reproduced as f64),
        wef_sum: selected.iter().map(|o| wef(&o.ranking)).sum(),
        wef_mean: None,
        wef_sum_at: BTreeMap::new(),
        wef_mean_at: BTreeMap::new(),
        random: None,
    };
    if n_selected > 0 {
        report.wef_mean = Some(report.wef_sum as f64 / n_selected as f64);
    }
    for &n in ns {
        let acc = acc_at_n(outcomes, n);
        let wef_sum: usize = selected.iter().map(|o| wef_at_n(&o.ranking, n)).sum();
        report.acc_at.insert(n, acc);
        report.wef_sum_at.insert(n, wef_sum);
        if n_selected > 0 {
            report.precision_at.insert(n, acc as f64 / n_selected as f64);
            report.wef_mean_at.insert(n, wef_sum as f64 / n_selected as f64);
        }
    }
    Ok(report)
}

/// Averages over `repeats` uniform shuffles of each selected bug's ranking.
pub fn random_baseline(
    outcomes: &[BugOutcome],
    ns: &[usize],
    config: &RandomConfig,
) -> Result<RandomBaseline, MetricsError> {
    check_cutoffs(ns)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let selected: Vec<&BugOutcome> = outcomes.iter().filter(|o| o.selected).collect();
    let mut acc = vec![0usize; ns.len()];
    let mut wef = vec![0usize; ns.len()];
    let mut scratch = Vec::new();
    for _ in 0..config.repeats {
        for o in &selected {
            scratch.clear();
            scratch.extend_from_slice(&o.ranking);
            scratch.shuffle(&mut rng);
            for (k, &n) in ns.iter().enumerate() {
                acc[k] += usize::from(has_brt_within(&scratch, n));
                wef[k] += wef_at_n(&scratch, n);
            }
        }
    }
    let reps = config.repeats.max(1) as f64;
    let per_bug = selected.len() as f64;
    let mut out = RandomBaseline {
        repeats: config.repeats,
        seed: config.seed,
        acc_at: BTreeMap::new(),
        precision_at: BTreeMap::new(),
        wef_sum_at: BTreeMap::new(),
        wef_mean_at: BTreeMap::new(),
    };
    for (k, &n) in ns.iter().enumerate() {
        let a = acc[k] as f64 / reps;
        let w = wef[k] as f64 / reps;
        out.acc_at.insert(n, a);
        out.wef_sum_at.insert(n, w);
        if !selected.is_empty() {
            out.precision_at.insert(n, a / per_bug);
            out.wef_mean_at.insert(n, w / per_bug);
        }
    }
    Ok(out)
}

fn opt(v: Option<&f64>, digits: usize) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.digits$}"))
}

/// Plain-text table: one row per ranker, acc@n (precision) and wef@n
/// (sum / mean) columns.
pub fn render_table(report: &EvaluationReport) -> String {
    let ns: Vec<usize> = report.acc_at.keys().copied().collect();
    let mut out = String::new();
    let recall = report.recall.map_or("-".to_string(), |r| format!("{r:.2}"));
    let _ = writeln!(
        out,
        "bugs: {}  reproduced: {}  selected: {}  recall: {}",
        report.n_bugs, report.n_reproduced, report.n_selected, recall
    );
    let mut header = format!("{:<8}", "ranker");
    for n in &ns {
        header.push_str(&format!(" | {:>14}", format!("acc@{n}")));
    }
    for n in &ns {
        header.push_str(&format!(" | {:>14}", format!("wef@{n} sum/mean")));
    }
    let _ = writeln!(out, "{header}");
    let _ = writeln!(out, "{}", "-".repeat(header.len()));

    let mut row = format!("{:<8}", "ranked");
    for n in &ns {
        let cell = format!("{} ({})", report.acc_at[n], opt(report.precision_at.get(n), 2));
        row.push_str(&format!(" | {cell:>14}"));
    }
    for n in &ns {
        let cell = format!("{} / {}", report.wef_sum_at[n], opt(report.wef_mean_at.get(n), 2));
        row.push_str(&format!(" | {cell:>14}"));
    }
    let _ = writeln!(out, "{row}");

    if let Some(r) = &report.random {
        let mut row = format!("{:<8}", "random");
        for n in &ns {
            let cell = format!("{} ({})", opt(r.acc_at.get(n), 1), opt(r.precision_at.get(n), 2));
            row.push_str(&format!(" | {cell:>14}"));
        }
        for n in &ns {
            let cell = format!("{} / {}", opt(r.wef_sum_at.get(n), 1), opt(r.wef_mean_at.get(n), 2));
            row.push_str(&format!(" | {cell:>14}"));
        }
        let _ = writeln!(out, "{row}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn outcome(id: &str, selected: bool, ranking: &[bool]) -> BugOutcome {
        BugOutcome {
            bug_id: id.into(),
            selected,
            ranking: ranking.to_vec(),
            n_fib: ranking.len(),
            reproduced: ranking.contains(&true),
        }
    }

    #[test]
    fn acc_examples() {
        let o = [outcome("a", true, &[false, true])];
        assert_eq!(acc_at_n(&o, 1), 0);
        assert_eq!(acc_at_n(&o, 2), 1);
        assert_eq!(acc_at_n(&[outcome("b", false, &[true])], 5), 0);
    }

    #[test]
    fn wef_examples() {
        assert_eq!(wef(&[false, false, true]), 2);
        assert_eq!(wef(&[true, false]), 0);
        assert_eq!(wef(&[false; 7]), 7);
        assert_eq!(wef_at_n(&[false, true, false], 1), 1);
        assert_eq!(wef_at_n(&[false, true, false], 3), 1);
        assert_eq!(wef_at_n(&[false; 10], 5), 5);
    }

    #[test]
    fn precision_and_recall() {
        let o = [
            outcome("a", true, &[true]),
            outcome("b", true, &[true, false]),
            outcome("c", true, &[false, true]),
            outcome("d", true, &[false]),
            outcome("e", false, &[]),
        ];
        let mut gated_reproduced = outcome("f", false, &[]);
        gated_reproduced.reproduced = true;
        let mut all = o.to_vec();
        all.push(gated_reproduced);
        let r = summarize(&all, &[1, 3]).unwrap();
        assert_eq!(r.acc_at[&1], 2);
        assert_eq!(r.precision_at[&1], 0.5);
        assert_eq!(r.acc_at[&3], 3);
        assert_eq!(r.n_reproduced, 4);
        assert_eq!(r.recall, Some(0.75));
        assert_eq!(r.wef_sum_at[&1], 2);
        // wef per selected bug: 0, 0, 1, 1.
        assert_eq!(r.wef_sum, 2);
    }

    #[test]
    fn degenerate_inputs() {
        let r = summarize(&[outcome("x", false, &[])], &[1]).unwrap();
        assert_eq!(r.recall, None);
        assert!(r.precision_at.is_empty());
        assert_eq!(r.acc_at[&1], 0);
        assert_eq!(summarize(&[], &[0]), Err(MetricsError::ZeroCutoff));
    }

    #[test]
    fn random_baseline_is_seeded() {
        let o = [outcome("a", true, &[false, false, true]), outcome("b", true, &[true])];
        let cfg = RandomConfig { repeats: 50, seed: 7 };
        let a = random_baseline(&o, &[1, 3], &cfg).unwrap();
        assert_eq!(a, random_baseline(&o, &[1, 3], &cfg).unwrap());
        // Bug b always counts; bug a counts at n=3 on every shuffle.
        assert_eq!(a.acc_at[&3], 2.0);
        assert!(a.acc_at[&1] >= 1.0 && a.acc_at[&1] <= 2.0);
    }

    #[test]
    fn table_lists_requested_columns() {
        let o = [outcome("a", true, &[true])];
        let mut r = summarize(&o, &[1, 3, 5]).unwrap();
        r.random = Some(random_baseline(&o, &[1, 3, 5], &RandomConfig::default()).unwrap());
        let t = render_table(&r);
        assert!(t.contains("acc@1") && t.contains("acc@3") && t.contains("acc@5"));
        assert!(!t.contains("acc@10"));
        assert!(t.lines().any(|l| l.starts_with("random")));
    }
}
