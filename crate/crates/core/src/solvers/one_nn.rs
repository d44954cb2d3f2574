use super::LabelVector;
use crate::dataset::Label;
use crate::distance::DistanceMatrix;
use crate::error::{Error, Result};

/// One label copy: `to` received the label of `from`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PropagationStep {
    pub from: usize,
    pub to: usize,
    pub distance: f64,
}

#[derive(Clone, Debug)]
pub struct OneNnOutcome {
    pub labels: Vec<Label>,
    /// Copy steps in the order they were taken.
    pub steps: Vec<PropagationStep>,
}

/// Greedy nearest-neighbour propagation.
///
/// Repeatedly takes the globally shortest distance between a labeled node
/// `i` and an unlabeled node `j` and copies the label of `i` to `j`, until
/// nothing is unlabeled. Ties go to the lexicographically smallest `(i, j)`.
///
/// Each unlabeled node remembers its nearest labeled node, so the whole run
/// costs `O(n²)`.
pub fn one_nn_classify(distances: &DistanceMatrix, labels: &LabelVector) -> Result<OneNnOutcome> {
    let n = distances.n();
    if labels.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: labels.len(),
        });
    }
    let mut assigned: Vec<Option<Label>> = (0..n).map(|i| labels.label(i)).collect();
    if assigned.iter().all(Option::is_none) {
        return Err(Error::Parameter(
            "1NN propagation needs at least one labeled node".into(),
        ));
    }

    // nearest[j] = (distance, source) for unlabeled j
    let mut nearest: Vec<Option<(f64, usize)>> = vec![None; n];
    for j in (0..n).filter(|&j| assigned[j].is_none()) {
        nearest[j] = (0..n)
            .filter(|&i| assigned[i].is_some())
            .map(|i| (distances.get(i, j), i))
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    }

    let mut steps = Vec::with_capacity(labels.unlabeled_count());
    loop {
        let best = nearest
            .iter()
            .enumerate()
            .filter_map(|(j, e)| e.map(|(d, i)| (d, i, j)))
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let Some((distance, from, to)) = best else {
            break;
        };
        assigned[to] = assigned[from];
        nearest[to] = None;
        steps.push(PropagationStep { from, to, distance });
        for (k, slot) in nearest.iter_mut().enumerate() {
            if let Some((d, i)) = slot {
                let candidate = distances.get(to, k);
                if candidate < *d || (candidate == *d && to < *i) {
                    *slot = Some((candidate, to));
                }
            }
        }
    }

    Ok(OneNnOutcome {
        labels: assigned
            .into_iter()
            .map(|l| l.expect("every node assigned"))
            .collect(),
        steps,
    })
}
