use nalgebra::DVector;
use serde::Deserialize;

use super::{predict_labels, LabelVector};
use crate::dataset::Label;
use crate::error::{Error, Result};
use crate::graph::NormalizedLaplacian;

#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinearSystemParams {
    /// Smoothness weight on `uᵀ L u`.
    pub beta: f64,
    /// Relative residual target.
    pub tol: f64,
}

impl Default for LinearSystemParams {
    fn default() -> Self {
        LinearSystemParams {
            beta: 1.0,
            tol: 1e-5,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LinearSystemOutcome {
    pub labels: Vec<Label>,
    pub u: DVector<f64>,
    pub iterations: usize,
    /// `‖A u − f‖ / ‖f‖`, recomputed from scratch on return.
    pub relative_residual: f64,
}

/// Conjugate gradients for a symmetric positive definite operator, starting
/// from zero. Returns the solution, the iteration count and the true relative
/// residual. When the recursively updated residual meets `tol` the true one
/// is checked, and the iteration restarts from it if it does not.
pub fn conjugate_gradient<F>(
    apply: F,
    rhs: &DVector<f64>,
    tol: f64,
    max_iters: usize,
) -> Result<(DVector<f64>, usize, f64)>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    let n = rhs.len();
    let rhs_norm = rhs.norm();
    let mut x = DVector::zeros(n);
    if rhs_norm == 0.0 {
        return Ok((x, 0, 0.0));
    }
    let target = tol * rhs_norm;
    let mut r = rhs.clone();
    let mut p = r.clone();
    let mut rr = r.dot(&r);
    for it in 1..=max_iters {
        let ap = apply(&p);
        let pap = p.dot(&ap);
        if !(pap > 0.0) {
            return Err(Error::Numerical {
                iterations: it,
                message: format!("operator not positive definite (pᵀAp = {pap})"),
            });
        }
        let alpha = rr / pap;
        x.axpy(alpha, &p, 1.0);
        r.axpy(-alpha, &ap, 1.0);
        let rr_next = r.dot(&r);
        if rr_next.sqrt() <= target {
            let true_r = rhs - apply(&x);
            let true_norm = true_r.norm();
            if true_norm <= target {
                return Ok((x, it, true_norm / rhs_norm));
            }
            r = true_r;
            p = r.clone();
            rr = r.dot(&r);
            continue;
        }
        p = &r + &p * (rr_next / rr);
        rr = rr_next;
    }
    Err(Error::Numerical {
        iterations: max_iters,
        message: format!("conjugate gradients did not reach relative residual {tol}"),
    })
}

/// Solves `(I + β L) u = f` and thresholds `u`. The iteration cap is `10 n`.
pub fn linear_system_classify(
    laplacian: &NormalizedLaplacian,
    labels: &LabelVector,
    params: &LinearSystemParams,
) -> Result<LinearSystemOutcome> {
    let n = laplacian.n();
    if labels.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: labels.len(),
        });
    }
    if !(params.beta >= 0.0) || !(params.tol > 0.0) {
        return Err(Error::Parameter(format!(
            "linear system needs β ≥ 0 and tol > 0 (β={}, tol={})",
            params.beta, params.tol
        )));
    }
    let l = laplacian.matrix();
    let beta = params.beta;
    let apply = |v: &DVector<f64>| v + (l * v) * beta;
    let (u, iterations, relative_residual) =
        conjugate_gradient(apply, labels.values(), params.tol, 10 * n.max(1))?;
    Ok(LinearSystemOutcome {
        labels: predict_labels(u.as_slice()),
        u,
        iterations,
        relative_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use Label::{Negative as N, Positive as P};

    fn two_node() -> NormalizedLaplacian {
        NormalizedLaplacian::from_matrix(DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]))
            .unwrap()
    }

    #[test]
    fn beta_zero_is_identity() {
        let l = two_node();
        let f = LabelVector::from_pairs(2, &[(1, N)]).unwrap();
        let out = linear_system_classify(
            &l,
            &f,
            &LinearSystemParams {
                beta: 0.0,
                tol: 1e-12,
            },
        )
        .unwrap();
        assert_eq!(out.u.as_slice(), &[0.0, -1.0]);
        assert_eq!(out.labels, vec![P, N]);
    }

    #[test]
    fn two_node_hand_inverse() {
        // (I + L) = [[2, −1], [−1, 2]], inverse · (1, 0) = (2/3, 1/3)
        let l = two_node();
        let f = LabelVector::from_pairs(2, &[(0, P)]).unwrap();
        let out = linear_system_classify(
            &l,
            &f,
            &LinearSystemParams {
                beta: 1.0,
                tol: 1e-12,
            },
        )
        .unwrap();
        assert!((out.u[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((out.u[1] - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(out.labels, vec![P, P]);
        assert!(out.relative_residual <= 1e-12);
    }

    #[test]
    fn zero_rhs() {
        let l = two_node();
        let f = LabelVector::from_pairs(2, &[]).unwrap();
        let out = linear_system_classify(&l, &f, &LinearSystemParams::default()).unwrap();
        assert_eq!(out.u.as_slice(), &[0.0, 0.0]);
        assert_eq!(out.iterations, 0);
    }

    #[test]
    fn cg_detects_indefinite_operator() {
        let rhs = DVector::from_vec(vec![1.0, 0.0]);
        let err = conjugate_gradient(|v| -v, &rhs, 1e-8, 10).unwrap_err();
        assert!(matches!(err, Error::Numerical { .. }));
    }

    #[test]
    fn cg_iteration_cap() {
        let a = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 2.0]);
        let rhs = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        assert!(conjugate_gradient(|v| &a * v, &rhs, 1e-14, 1).is_err());
        let (x, _, res) = conjugate_gradient(|v| &a * v, &rhs, 1e-12, 30).unwrap();
        assert!(res <= 1e-12);
        assert!((&a * x - rhs).norm() < 1e-11);
    }

    #[test]
    fn rejects_negative_beta() {
        let l = two_node();
        let f = LabelVector::from_pairs(2, &[(0, P)]).unwrap();
        assert!(linear_system_classify(
            &l,
            &f,
            &LinearSystemParams {
                beta: -1.0,
                tol: 1e-5
            }
        )
        .is_err());
    }
}
