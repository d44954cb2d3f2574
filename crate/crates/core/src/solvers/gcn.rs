//! Two-layer graph convolutional network, trained full-batch with Adam.
//!
//! ```text
//! Â  = D̂^{−1/2} (W + I) D̂^{−1/2}
//! X¹ = ReLU(Â X⁰ Θ¹ + b¹)          (dropout on X¹ while training)
//! X² = Â X¹ Θ² + b²               (two logits per node)
//! loss = mean cross-entropy over labeled rows + λ ‖Θ¹‖²_F
//! ```
//!
//! `Â X⁰` does not change during training and is computed once.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use super::LabelVector;
use crate::dataset::Label;
use crate::error::{Error, Result};
use crate::graph::SimilarityGraph;

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// Node features fed to the first layer.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GcnFeatures {
    /// Rows of the dense (unsparsified) Gaussian weight matrix.
    #[default]
    GaussianRows,
    /// One-hot node indicators.
    Identity,
}

#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GcnParams {
    /// Neighbours kept per node when sparsifying.
    pub knn: usize,
    pub hidden: usize,
    pub dropout: f64,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for GcnParams {
    fn default() -> Self {
        GcnParams {
            knn: 10,
            hidden: 32,
            dropout: 0.5,
            learning_rate: 0.01,
            weight_decay: 5e-4,
            epochs: 500,
            seed: 0,
        }
    }
}

/// Compressed sparse rows.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseRows {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseRows {
    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let n = m.nrows();
        let mut indptr = Vec::with_capacity(n + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for i in 0..n {
            for j in 0..m.ncols() {
                let v = m[(i, j)];
                if v != 0.0 {
                    indices.push(j);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        SparseRows {
            n,
            indptr,
            indices,
            values,
        }
    }

    pub fn nrows(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for k in self.indptr[i]..self.indptr[i + 1] {
                m[(i, self.indices[k])] = self.values[k];
            }
        }
        m
    }

    /// `self · rhs`.
    pub fn mul_dense(&self, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.n, rhs.ncols());
        for c in 0..rhs.ncols() {
            let src = rhs.column(c);
            let mut dst = out.column_mut(c);
            for i in 0..self.n {
                let mut acc = 0.0;
                for k in self.indptr[i]..self.indptr[i + 1] {
                    acc += self.values[k] * src[self.indices[k]];
                }
                dst[i] = acc;
            }
        }
        out
    }
}

/// `D̂^{−1/2} (W + I) D̂^{−1/2}` in sparse form.
pub fn gcn_propagation(graph: &SimilarityGraph) -> SparseRows {
    let n = graph.n();
    let w_hat = graph.weights() + DMatrix::<f64>::identity(n, n);
    let inv_sqrt: Vec<f64> = w_hat.row_iter().map(|r| 1.0 / r.sum().sqrt()).collect();
    let a_hat = DMatrix::from_fn(n, n, |i, j| inv_sqrt[i] * w_hat[(i, j)] * inv_sqrt[j]);
    SparseRows::from_dense(&a_hat)
}

/// Everything about a training problem that stays fixed across epochs.
#[derive(Clone, Debug)]
pub struct GcnProblem {
    propagation: SparseRows,
    propagated_features: DMatrix<f64>,
    /// `(node, class)` with class 0 for negative and 1 for positive.
    targets: Vec<(usize, usize)>,
}

impl GcnProblem {
    pub fn new(
        graph: &SimilarityGraph,
        features: &DMatrix<f64>,
        labels: &LabelVector,
    ) -> Result<Self> {
        let n = graph.n();
        if features.nrows() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: features.nrows(),
            });
        }
        if labels.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: labels.len(),
            });
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("non-finite GCN feature".into()));
        }
        let targets: Vec<(usize, usize)> = (0..n)
            .filter_map(|i| labels.label(i).map(|l| (i, class_index(l))))
            .collect();
        if targets.is_empty() {
            return Err(Error::Parameter(
                "GCN training needs at least one labeled node".into(),
            ));
        }
        let propagation = gcn_propagation(graph);
        let propagated_features = propagation.mul_dense(features);
        Ok(GcnProblem {
            propagation,
            propagated_features,
            targets,
        })
    }

    pub fn n(&self) -> usize {
        self.propagation.nrows()
    }

    pub fn feature_dim(&self) -> usize {
        self.propagated_features.ncols()
    }

    pub fn propagation(&self) -> &SparseRows {
        &self.propagation
    }
}

fn class_index(label: Label) -> usize {
    match label {
        Label::Negative => 0,
        Label::Positive => 1,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GcnGradients {
    pub theta1: DMatrix<f64>,
    pub bias1: DVector<f64>,
    pub theta2: DMatrix<f64>,
    pub bias2: DVector<f64>,
}

#[derive(Clone, Debug, PartialEq)]
struct AdamMoments {
    first: GcnGradients,
    second: GcnGradients,
    step: i32,
}

/// Network weights plus optimizer state.
#[derive(Clone, Debug, PartialEq)]
pub struct GcnModel {
    pub theta1: DMatrix<f64>,
    pub bias1: DVector<f64>,
    pub theta2: DMatrix<f64>,
    pub bias2: DVector<f64>,
    adam: AdamMoments,
}

fn glorot(rows: usize, cols: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-limit..=limit))
}

fn zero_like(model_dims: (usize, usize)) -> GcnGradients {
    let (d, h) = model_dims;
    GcnGradients {
        theta1: DMatrix::zeros(d, h),
        bias1: DVector::zeros(h),
        theta2: DMatrix::zeros(h, 2),
        bias2: DVector::zeros(2),
    }
}

struct Forward {
    pre_hidden: DMatrix<f64>,
    /// Hidden activations after dropout.
    hidden: DMatrix<f64>,
    propagated_hidden: DMatrix<f64>,
    logits: DMatrix<f64>,
}

impl GcnModel {
    /// Glorot-uniform weights, zero biases.
    pub fn init(feature_dim: usize, hidden: usize, rng: &mut impl Rng) -> Self {
        let theta1 = glorot(feature_dim, hidden, rng);
        let theta2 = glorot(hidden, 2, rng);
        let dims = (feature_dim, hidden);
        GcnModel {
            theta1,
            bias1: DVector::zeros(hidden),
            theta2,
            bias2: DVector::zeros(2),
            adam: AdamMoments {
                first: zero_like(dims),
                second: zero_like(dims),
                step: 0,
            },
        }
    }

    fn forward(&self, problem: &GcnProblem, mask: Option<&DMatrix<f64>>) -> Forward {
        let mut pre_hidden = &problem.propagated_features * &self.theta1;
        for mut row in pre_hidden.row_iter_mut() {
            row += self.bias1.transpose();
        }
        let mut hidden = pre_hidden.map(|v| v.max(0.0));
        if let Some(mask) = mask {
            hidden.component_mul_assign(mask);
        }
        let propagated_hidden = problem.propagation.mul_dense(&hidden);
        let mut logits = &propagated_hidden * &self.theta2;
        for mut row in logits.row_iter_mut() {
            row += self.bias2.transpose();
        }
        Forward {
            pre_hidden,
            hidden,
            propagated_hidden,
            logits,
        }
    }

    /// `n × 2` logits with dropout disabled.
    pub fn logits(&self, problem: &GcnProblem) -> DMatrix<f64> {
        self.forward(problem, None).logits
    }

    /// `n × hidden` activations with dropout disabled.
    pub fn hidden(&self, problem: &GcnProblem) -> DMatrix<f64> {
        self.forward(problem, None).hidden
    }

    /// Training loss and its gradient. `mask` holds the already scaled
    /// inverted-dropout multipliers for the hidden layer.
    pub fn loss_and_gradients(
        &self,
        problem: &GcnProblem,
        mask: Option<&DMatrix<f64>>,
        weight_decay: f64,
    ) -> (f64, GcnGradients) {
        let fw = self.forward(problem, mask);
        let n = problem.n();
        let count = problem.targets.len() as f64;

        let mut loss = 0.0;
        let mut d_logits = DMatrix::zeros(n, 2);
        for &(node, class) in &problem.targets {
            let (z0, z1) = (fw.logits[(node, 0)], fw.logits[(node, 1)]);
            let top = z0.max(z1);
            let lse = top + ((z0 - top).exp() + (z1 - top).exp()).ln();
            loss += lse - fw.logits[(node, class)];
            for c in 0..2 {
                let p = (fw.logits[(node, c)] - lse).exp();
                let y = if c == class { 1.0 } else { 0.0 };
                d_logits[(node, c)] = (p - y) / count;
            }
        }
        loss /= count;
        loss += weight_decay * self.theta1.norm_squared();

        let theta2 = fw.propagated_hidden.tr_mul(&d_logits);
        let bias2 = DVector::from_iterator(2, d_logits.column_iter().map(|c| c.sum()));
        let d_propagated = &d_logits * self.theta2.transpose();
        // Â is symmetric
        let mut d_hidden = problem.propagation.mul_dense(&d_propagated);
        if let Some(mask) = mask {
            d_hidden.component_mul_assign(mask);
        }
        let d_pre = d_hidden.zip_map(&fw.pre_hidden, |g, z| if z > 0.0 { g } else { 0.0 });
        let theta1 =
            problem.propagated_features.tr_mul(&d_pre) + &self.theta1 * (2.0 * weight_decay);
        let bias1 = DVector::from_iterator(d_pre.ncols(), d_pre.column_iter().map(|c| c.sum()));

        (
            loss,
            GcnGradients {
                theta1,
                bias1,
                theta2,
                bias2,
            },
        )
    }

    fn adam_step(&mut self, grads: &GcnGradients, learning_rate: f64) {
        self.adam.step += 1;
        let t = self.adam.step;
        let c1 = 1.0 - ADAM_BETA1.powi(t);
        let c2 = 1.0 - ADAM_BETA2.powi(t);
        let update = |param: &mut [f64], grad: &[f64], m: &mut [f64], v: &mut [f64]| {
            for k in 0..param.len() {
                m[k] = ADAM_BETA1 * m[k] + (1.0 - ADAM_BETA1) * grad[k];
                v[k] = ADAM_BETA2 * v[k] + (1.0 - ADAM_BETA2) * grad[k] * grad[k];
                let m_hat = m[k] / c1;
                let v_hat = v[k] / c2;
                param[k] -= learning_rate * m_hat / (v_hat.sqrt() + ADAM_EPS);
            }
        };
        let AdamMoments { first, second, .. } = &mut self.adam;
        update(
            self.theta1.as_mut_slice(),
            grads.theta1.as_slice(),
            first.theta1.as_mut_slice(),
            second.theta1.as_mut_slice(),
        );
        update(
            self.bias1.as_mut_slice(),
            grads.bias1.as_slice(),
            first.bias1.as_mut_slice(),
            second.bias1.as_mut_slice(),
        );
        update(
            self.theta2.as_mut_slice(),
            grads.theta2.as_slice(),
            first.theta2.as_mut_slice(),
            second.theta2.as_mut_slice(),
        );
        update(
            self.bias2.as_mut_slice(),
            grads.bias2.as_slice(),
            first.bias2.as_mut_slice(),
            second.bias2.as_mut_slice(),
        );
    }

    /// Larger logit wins; a tie counts as positive.
    pub fn predict(&self, problem: &GcnProblem) -> Vec<Label> {
        let logits = self.logits(problem);
        logits
            .row_iter()
            .map(|r| {
                if r[1] >= r[0] {
                    Label::Positive
                } else {
                    Label::Negative
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct GcnOutcome {
    pub labels: Vec<Label>,
    pub logits: DMatrix<f64>,
    /// Training loss at every epoch, before that epoch's update.
    pub losses: Vec<f64>,
    pub model: GcnModel,
}

fn dropout_mask(rows: usize, cols: usize, p: f64, rng: &mut impl Rng) -> DMatrix<f64> {
    let keep = 1.0 - p;
    DMatrix::from_fn(rows, cols, |_, _| {
        if rng.random::<f64>() < keep {
            1.0 / keep
        } else {
            0.0
        }
    })
}

/// Trains on `graph` (already sparsified) and predicts every node.
/// Deterministic for a fixed `params.seed`.
pub fn gcn_train_and_classify(
    graph: &SimilarityGraph,
    features: &DMatrix<f64>,
    labels: &LabelVector,
    params: &GcnParams,
) -> Result<GcnOutcome> {
    if params.hidden == 0 || params.epochs == 0 {
        return Err(Error::Parameter(
            "GCN needs hidden > 0 and epochs > 0".into(),
        ));
    }
    if !(0.0..1.0).contains(&params.dropout)
        || !(params.learning_rate > 0.0)
        || !(params.weight_decay >= 0.0)
    {
        return Err(Error::Parameter(format!(
            "invalid GCN hyperparameters (dropout {}, lr {}, decay {})",
            params.dropout, params.learning_rate, params.weight_decay
        )));
    }
    let problem = GcnProblem::new(graph, features, labels)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut model = GcnModel::init(problem.feature_dim(), params.hidden, &mut rng);
    let mut losses = Vec::with_capacity(params.epochs);
    for epoch in 0..params.epochs {
        let mask = (params.dropout > 0.0)
            .then(|| dropout_mask(problem.n(), params.hidden, params.dropout, &mut rng));
        let (loss, grads) = model.loss_and_gradients(&problem, mask.as_ref(), params.weight_decay);
        if !loss.is_finite() {
            return Err(Error::Training {
                epoch,
                message: format!("loss became {loss}"),
            });
        }
        losses.push(loss);
        model.adam_step(&grads, params.learning_rate);
    }
    let logits = model.logits(&problem);
    if logits.iter().any(|v| !v.is_finite()) {
        return Err(Error::Training {
            epoch: params.epochs,
            message: "non-finite logits".into(),
        });
    }
    let labels = model.predict(&problem);
    Ok(GcnOutcome {
        labels,
        logits,
        losses,
        model,
    })
}
