//! Smallest eigenpairs of a normalized Laplacian.
//!
//! The graphs handled here have at most a few thousand nodes, so the full
//! symmetric eigendecomposition is computed densely and truncated.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::graph::NormalizedLaplacian;

/// Default number of eigenpairs for the reduced Allen–Cahn scheme.
pub const DEFAULT_EIGENPAIRS: usize = 20;

const EIGEN_EPS: f64 = 1e-15;
const EIGEN_MAX_SWEEPS: usize = 10_000;

/// The `m` smallest eigenvalues (ascending) with orthonormal eigenvectors as
/// columns.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralBasis {
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
}

impl SpectralBasis {
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Number of graph nodes.
    pub fn n(&self) -> usize {
        self.eigenvectors.nrows()
    }

    /// The leading `m` pairs of this basis.
    pub fn truncated(&self, m: usize) -> Result<SpectralBasis> {
        if m == 0 || m > self.len() {
            return Err(Error::Parameter(format!(
                "cannot take {m} of {} eigenpairs",
                self.len()
            )));
        }
        Ok(SpectralBasis {
            eigenvalues: self.eigenvalues.rows(0, m).into_owned(),
            eigenvectors: self.eigenvectors.columns(0, m).into_owned(),
        })
    }

    /// Largest `‖L φⱼ − λⱼ φⱼ‖` over the columns.
    pub fn max_residual(&self, laplacian: &NormalizedLaplacian) -> f64 {
        let lphi = laplacian.matrix() * &self.eigenvectors;
        (0..self.len())
            .map(|j| (lphi.column(j) - self.eigenvectors.column(j) * self.eigenvalues[j]).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entry of `|ΦᵀΦ − I|`.
    pub fn orthonormality_error(&self) -> f64 {
        let gram = self.eigenvectors.transpose() * &self.eigenvectors;
        let m = self.len();
        (gram - DMatrix::<f64>::identity(m, m)).amax()
    }
}

/// The `m_e` algebraically smallest eigenpairs of `laplacian`.
///
/// Each eigenvector is signed so that its largest-magnitude entry (the first
/// one, on ties) is positive.
pub fn smallest_eigenpairs(laplacian: &NormalizedLaplacian, m_e: usize) -> Result<SpectralBasis> {
    let n = laplacian.n();
    if m_e == 0 || m_e > n {
        return Err(Error::Parameter(format!(
            "number of eigenpairs must be in 1..={n}, got {m_e}"
        )));
    }
    let eig = SymmetricEigen::try_new(laplacian.matrix().clone(), EIGEN_EPS, EIGEN_MAX_SWEEPS)
        .ok_or_else(|| Error::Numerical {
            iterations: EIGEN_MAX_SWEEPS,
            message: "symmetric eigensolver did not converge".into(),
        })?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .total_cmp(&eig.eigenvalues[b])
            .then(a.cmp(&b))
    });
    order.truncate(m_e);

    let eigenvalues = DVector::from_iterator(m_e, order.iter().map(|&k| eig.eigenvalues[k]));
    let mut eigenvectors = DMatrix::zeros(n, m_e);
    for (col, &k) in order.iter().enumerate() {
        let v = eig.eigenvectors.column(k);
        let pivot = v.iter().enumerate().fold(
            0,
            |best, (i, x)| {
                if x.abs() > v[best].abs() {
                    i
                } else {
                    best
                }
            },
        );
        let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
        eigenvectors.set_column(col, &(v * sign));
    }
    if eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical {
            iterations: EIGEN_MAX_SWEEPS,
            message: "non-finite eigenvalue".into(),
        });
    }

    let basis = SpectralBasis {
        eigenvalues,
        eigenvectors,
    };
    if cfg!(debug_assertions) {
        let residual = basis.max_residual(laplacian);
        let ortho = basis.orthonormality_error();
        debug_assert!(residual <= 1e-6, "eigen residual {residual}");
        debug_assert!(ortho <= 1e-8, "orthonormality error {ortho}");
    }
    Ok(basis)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(rows: &[f64], n: usize) -> NormalizedLaplacian {
        NormalizedLaplacian::from_matrix(DMatrix::from_row_slice(n, n, rows)).unwrap()
    }

    #[test]
    fn two_node_hand_diagonalization() {
        let l = laplacian(&[1.0, -1.0, -1.0, 1.0], 2);
        let b = smallest_eigenpairs(&l, 2).unwrap();
        assert!(b.eigenvalues()[0].abs() < 1e-15);
        assert!((b.eigenvalues()[1] - 2.0).abs() < 1e-15);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v0 = b.eigenvectors().column(0);
        let v1 = b.eigenvectors().column(1);
        assert!((v0[0] - h).abs() < 1e-15 && (v0[1] - h).abs() < 1e-15);
        assert!((v1[0].abs() - h).abs() < 1e-15 && (v1[0] + v1[1]).abs() < 1e-15);
        let pivot = if v1[0].abs() >= v1[1].abs() {
            v1[0]
        } else {
            v1[1]
        };
        assert!(pivot > 0.0);
    }

    #[test]
    fn full_spectrum_reconstructs() {
        let l = laplacian(
            &[
                1.0, -0.3, -0.2, 0.0, //
                -0.3, 1.0, -0.4, -0.1, //
                -0.2, -0.4, 1.0, -0.5, //
                0.0, -0.1, -0.5, 1.0,
            ],
            4,
        );
        let b = smallest_eigenpairs(&l, 4).unwrap();
        let phi = b.eigenvectors();
        let rebuilt = phi * DMatrix::from_diagonal(b.eigenvalues()) * phi.transpose();
        assert!((rebuilt - l.matrix()).amax() < 1e-12);
        assert!(b.eigenvalues().as_slice().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn truncation_and_bounds() {
        let l = laplacian(&[1.0, -1.0, -1.0, 1.0], 2);
        assert!(smallest_eigenpairs(&l, 0).is_err());
        assert!(smallest_eigenpairs(&l, 3).is_err());
        let b = smallest_eigenpairs(&l, 2).unwrap();
        assert_eq!(b.truncated(1).unwrap().len(), 1);
        assert!(b.truncated(3).is_err());
    }
}
