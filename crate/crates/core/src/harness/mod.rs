//! Experiment grids: load datasets, build and cache distance matrices, run
//! every method on every split and tabulate accuracies.

mod bench;
mod cache;
mod results;
mod run;
mod spec;

pub use bench::{bench_distances, format_bench, BenchEntry};
pub use cache::{CacheStats, DistanceCache};
pub use results::{
    format_results, sort_results, summarize, write_results, ExperimentResult, GroupSummary,
    MeanStd, RESULT_HEADER,
};
pub use run::{run_experiment, run_experiment_with_cache, ExperimentReport};
pub use spec::{
    load_dataset, ExperimentSpec, Method, SplitMode, DEFAULT_FRACTIONS, DEFAULT_REPEATS,
};

use crate::dataset::Label;
use crate::error::{Error, Result};

/// Share of `eval` on which `predicted` agrees with `truth`.
///
/// ```
/// use tsgraph::dataset::Label::{Negative as N, Positive as P};
/// use tsgraph::harness::accuracy;
///
/// let acc = accuracy(&[P, P, N, N], &[P, P, N, P], &[0, 1, 2, 3])?;
/// assert_eq!(acc, 0.75);
/// assert!(accuracy(&[P], &[P], &[]).is_err());
/// # Ok::<(), tsgraph::Error>(())
/// ```
pub fn accuracy(predicted: &[Label], truth: &[Label], eval: &[usize]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            found: predicted.len(),
        });
    }
    if eval.is_empty() {
        return Err(Error::Metric("empty evaluation set".into()));
    }
    let mut correct = 0usize;
    for &i in eval {
        if i >= truth.len() {
            return Err(Error::Metric(format!("index {i} out of range")));
        }
        correct += usize::from(predicted[i] == truth[i]);
    }
    Ok(correct as f64 / eval.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::{Negative as N, Positive as P};

    #[test]
    fn accuracy_extremes() {
        let truth = [P, N, N, P];
        let all = [0, 1, 2, 3];
        assert_eq!(accuracy(&truth, &truth, &all).unwrap(), 1.0);
        let flipped: Vec<Label> = truth.iter().map(|l| l.opposite()).collect();
        assert_eq!(accuracy(&flipped, &truth, &all).unwrap(), 0.0);
        assert!(accuracy(&flipped, &truth, &[])
            .unwrap_err()
            .to_string()
            .contains("empty"));
        assert!(accuracy(&truth, &truth, &[4]).is_err());
        assert!(accuracy(&truth[..2], &truth, &all).is_err());
    }
}
