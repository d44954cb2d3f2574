use std::cmp::Ordering;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::spec::Method;
use crate::error::Result;

pub const RESULT_HEADER: &str =
    "dataset,distance,method,fraction,seed,accuracy_unlabeled,accuracy_all,wall_time_s,converged";

/// Outcome of one grid cell.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentResult {
    pub dataset: String,
    pub distance: String,
    pub method: Method,
    /// Labeled fraction. For the archive split this is `|TRAIN| / n`.
    pub fraction: f64,
    /// Split seed; `None` for the archive split.
    pub seed: Option<u64>,
    /// Accuracy on the nodes whose label was hidden. `None` when every node
    /// was labeled or the cell failed.
    pub accuracy_unlabeled: Option<f64>,
    pub accuracy_all: Option<f64>,
    /// Time spent in the classifier itself.
    pub wall_time_s: f64,
    pub converged: bool,
    /// Why the cell failed, if it did.
    pub error: Option<String>,
}

impl ExperimentResult {
    fn sort_key_cmp(&self, other: &Self) -> Ordering {
        self.dataset
            .cmp(&other.dataset)
            .then_with(|| self.distance.cmp(&other.distance))
            .then_with(|| self.method.cmp(&other.method))
            .then_with(|| self.fraction.total_cmp(&other.fraction))
            .then_with(|| self.seed.cmp(&other.seed))
    }

    fn same_group(&self, other: &Self) -> bool {
        self.dataset == other.dataset
            && self.distance == other.distance
            && self.method == other.method
            && self.fraction == other.fraction
    }
}

/// Sorts rows by dataset, distance, method, fraction and seed.
pub fn sort_results(results: &mut [ExperimentResult]) {
    results.sort_by(ExperimentResult::sort_key_cmp);
}

/// Mean and sample standard deviation of a group of cells.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    /// `None` for an empty sample. One value has deviation 0.
    pub fn of(values: &[f64]) -> Option<MeanStd> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Some(MeanStd { mean, std })
    }
}

/// Aggregate over the repeats of one `(dataset, distance, method, fraction)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupSummary {
    pub dataset: String,
    pub distance: String,
    pub method: Method,
    pub fraction: f64,
    pub rows: usize,
    /// Over successful cells only.
    pub accuracy_unlabeled: Option<MeanStd>,
    pub accuracy_all: Option<MeanStd>,
    pub wall_time_s: MeanStd,
    pub all_converged: bool,
}

/// One summary per group, in sorted order.
pub fn summarize(results: &[ExperimentResult]) -> Vec<GroupSummary> {
    let mut sorted = results.to_vec();
    sort_results(&mut sorted);
    sorted
        .chunk_by(|a, b| a.same_group(b))
        .map(|group| {
            let first = &group[0];
            let unlabeled: Vec<f64> = group.iter().filter_map(|r| r.accuracy_unlabeled).collect();
            let all: Vec<f64> = group.iter().filter_map(|r| r.accuracy_all).collect();
            let times: Vec<f64> = group.iter().map(|r| r.wall_time_s).collect();
            GroupSummary {
                dataset: first.dataset.clone(),
                distance: first.distance.clone(),
                method: first.method,
                fraction: first.fraction,
                rows: group.len(),
                accuracy_unlabeled: MeanStd::of(&unlabeled),
                accuracy_all: MeanStd::of(&all),
                wall_time_s: MeanStd::of(&times).expect("group is nonempty"),
                all_converged: group.iter().all(|r| r.converged),
            }
        })
        .collect()
}

fn csv_field(text: &str) -> String {
    if text.contains([',', '"', '\n']) {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

fn optional(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn mean_std(v: Option<MeanStd>) -> String {
    v.map(|m| format!("{}±{}", m.mean, m.std))
        .unwrap_or_default()
}

/// The result table as CSV text: one row per cell in sorted order, then a
/// `summary` row for every group with at least two cells. Summary fields
/// hold `mean±std`.
pub fn format_results(results: &[ExperimentResult]) -> String {
    let mut sorted = results.to_vec();
    sort_results(&mut sorted);
    let mut out = String::new();
    out.push_str(RESULT_HEADER);
    out.push('\n');
    for r in &sorted {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{:.6},{}",
            csv_field(&r.dataset),
            csv_field(&r.distance),
            r.method,
            r.fraction,
            r.seed
                .map_or_else(|| "archive".to_string(), |s| s.to_string()),
            optional(r.accuracy_unlabeled),
            optional(r.accuracy_all),
            r.wall_time_s,
            r.converged,
        );
    }
    for s in summarize(&sorted).into_iter().filter(|s| s.rows > 1) {
        let _ = writeln!(
            out,
            "{},{},{},{},summary,{},{},{:.6}±{:.6},{}",
            csv_field(&s.dataset),
            csv_field(&s.distance),
            s.method,
            s.fraction,
            mean_std(s.accuracy_unlabeled),
            mean_std(s.accuracy_all),
            s.wall_time_s.mean,
            s.wall_time_s.std,
            s.all_converged,
        );
    }
    out
}

pub fn write_results(results: &[ExperimentResult], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, format_results(results))?;
    Ok(())
}
