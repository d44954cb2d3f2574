//! Semi-supervised binary classifiers on a similarity graph.
//!
//! All four take the known labels as a [`LabelVector`] (`±1` on labeled
//! nodes, `0` elsewhere) and return a [`Label`] for every node.

mod allen_cahn;
mod gcn;
mod linear;
mod one_nn;

pub use allen_cahn::{allen_cahn_classify, AllenCahnOutcome, AllenCahnParams, AllenCahnSolver};
pub use gcn::{
    gcn_propagation, gcn_train_and_classify, GcnFeatures, GcnGradients, GcnModel, GcnOutcome,
    GcnParams, GcnProblem, SparseRows,
};
pub use linear::{
    conjugate_gradient, linear_system_classify, LinearSystemOutcome, LinearSystemParams,
};
pub use one_nn::{one_nn_classify, OneNnOutcome, PropagationStep};

use nalgebra::DVector;

use crate::dataset::{Dataset, Label, LabeledSplit};
use crate::error::{Error, Result};

/// Known labels: `+1`/`−1` on labeled nodes and `0` on the rest.
#[derive(Clone, Debug, PartialEq)]
pub struct LabelVector {
    f: DVector<f64>,
}

impl LabelVector {
    /// Reveals the ground truth of `dataset` on the indices of `split`.
    pub fn from_split(dataset: &Dataset, split: &LabeledSplit) -> Self {
        let truth = dataset.labels();
        let mut f = DVector::zeros(dataset.len());
        for &i in split.indices() {
            f[i] = truth[i].sign();
        }
        LabelVector { f }
    }

    pub fn from_pairs(n: usize, known: &[(usize, Label)]) -> Result<Self> {
        let mut f = DVector::zeros(n);
        for &(i, label) in known {
            if i >= n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: i + 1,
                });
            }
            f[i] = label.sign();
        }
        Ok(LabelVector { f })
    }

    /// Every node labeled.
    pub fn from_labels(labels: &[Label]) -> Self {
        LabelVector {
            f: DVector::from_iterator(labels.len(), labels.iter().map(|l| l.sign())),
        }
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.f
    }

    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }

    pub fn label(&self, i: usize) -> Option<Label> {
        match self.f[i] {
            v if v > 0.0 => Some(Label::Positive),
            v if v < 0.0 => Some(Label::Negative),
            _ => None,
        }
    }

    pub fn labeled_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.f[i] != 0.0).collect()
    }

    pub fn unlabeled_count(&self) -> usize {
        self.f.iter().filter(|&&v| v == 0.0).count()
    }
}

/// Elementwise sign, with `0 ↦ +1`.
pub fn predict_labels(u: &[f64]) -> Vec<Label> {
    u.iter().map(|&v| Label::from_value(v)).collect()
}
