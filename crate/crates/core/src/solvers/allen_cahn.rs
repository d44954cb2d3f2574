//! Reduced graph Allen–Cahn classifier.
//!
//! Gradient flow of a Ginzburg–Landau energy
//!
//! ```text
//! E(u) = ε/2 uᵀ L u + 1/(4ε) Σ (uᵢ² − 1)² + Σ ωᵢ/2 (uᵢ − fᵢ)²
//! ```
//!
//! discretised by convexity splitting: the Laplacian term and `c/2 uᵀu` are
//! implicit, the double well, the fidelity and `−c/2 uᵀu` explicit. Writing
//! `u = Φ a` in the `m_e` smallest Laplacian eigenvectors makes the implicit
//! part diagonal:
//!
//! ```text
//! (1 + ετλⱼ + cτ) aⱼ⁺ = (1 + cτ) aⱼ − (τ/ε) bⱼ − τ dⱼ
//! b = Φᵀ ∇ψ(u),  ∇ψ(u)ᵢ = 4 uᵢ (uᵢ² − 1)
//! d = Φᵀ ∇φ(u),  ∇φ(u)ᵢ = ωᵢ (uᵢ − fᵢ)
//! ```
//!
//! with `ωᵢ = ω` on labeled nodes and `0` elsewhere.

use nalgebra::DVector;
use serde::Deserialize;

use super::{predict_labels, LabelVector};
use crate::dataset::Label;
use crate::error::{Error, Result};
use crate::spectral::SpectralBasis;

#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AllenCahnParams {
    /// Number of eigenpairs used.
    pub m_e: usize,
    /// Interface width; `None` means `1/√n`.
    pub epsilon: Option<f64>,
    /// Fidelity weight on labeled nodes.
    pub omega: f64,
    /// Convexity constant; `None` means `3/ε + ω`.
    pub c: Option<f64>,
    /// Pseudo time step.
    pub tau: f64,
    /// Relative change of `u` below which the iteration stops.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for AllenCahnParams {
    fn default() -> Self {
        AllenCahnParams {
            m_e: crate::spectral::DEFAULT_EIGENPAIRS,
            epsilon: None,
            omega: 1e10,
            c: None,
            tau: 0.01,
            tol: 1e-8,
            max_iters: 10_000,
        }
    }
}

impl AllenCahnParams {
    pub fn epsilon_for(&self, n: usize) -> f64 {
        self.epsilon.unwrap_or_else(|| 1.0 / (n as f64).sqrt())
    }

    pub fn convexity_for(&self, n: usize) -> f64 {
        self.c
            .unwrap_or_else(|| 3.0 / self.epsilon_for(n) + self.omega)
    }

    fn validate(&self, n: usize) -> Result<()> {
        let eps = self.epsilon_for(n);
        let c = self.convexity_for(n);
        if self.m_e == 0 {
            return Err(Error::Parameter("m_e must be positive".into()));
        }
        if !(eps > 0.0)
            || !(c > 0.0)
            || !(self.tau > 0.0)
            || !(self.tol > 0.0)
            || !(self.omega >= 0.0)
        {
            return Err(Error::Parameter(format!(
                "Allen–Cahn needs ε, c, τ, tol > 0 and ω ≥ 0 (ε={eps}, c={c}, τ={}, tol={}, ω={})",
                self.tau, self.tol, self.omega
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::Parameter("max_iters must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct AllenCahnOutcome {
    pub labels: Vec<Label>,
    /// Final order parameter in node space.
    pub u: DVector<f64>,
    pub iterations: usize,
    /// False when `max_iters` was reached before the tolerance.
    pub converged: bool,
}

/// Stepwise form of the iteration, for callers that want to inspect each
/// iterate.
#[derive(Clone, Debug)]
pub struct AllenCahnSolver {
    basis: SpectralBasis,
    f: DVector<f64>,
    fidelity: DVector<f64>,
    denominators: DVector<f64>,
    inv_eps: f64,
    one_plus_tau_c: f64,
    tau: f64,
    coefficients: DVector<f64>,
    u: DVector<f64>,
    iterations: usize,
}

impl AllenCahnSolver {
    /// Starts from `u⁰ = f`, `a⁰ = Φᵀ f`. A basis with more than `m_e`
    /// columns is truncated.
    pub fn new(
        basis: &SpectralBasis,
        labels: &LabelVector,
        params: &AllenCahnParams,
    ) -> Result<Self> {
        let n = basis.n();
        if labels.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: labels.len(),
            });
        }
        params.validate(n)?;
        if params.m_e > basis.len() {
            return Err(Error::Parameter(format!(
                "m_e = {} but only {} eigenpairs available",
                params.m_e,
                basis.len()
            )));
        }
        let basis = basis.truncated(params.m_e)?;
        let eps = params.epsilon_for(n);
        let c = params.convexity_for(n);
        let tau = params.tau;
        let f = labels.values().clone();
        let fidelity = f.map(|v| if v != 0.0 { params.omega } else { 0.0 });
        let denominators = basis
            .eigenvalues()
            .map(|lambda| 1.0 + eps * tau * lambda + c * tau);
        let coefficients = basis.eigenvectors().tr_mul(&f);
        Ok(AllenCahnSolver {
            basis,
            u: f.clone(),
            f,
            fidelity,
            denominators,
            inv_eps: 1.0 / eps,
            one_plus_tau_c: 1.0 + tau * c,
            tau,
            coefficients,
            iterations: 0,
        })
    }

    pub fn u(&self) -> &DVector<f64> {
        &self.u
    }

    pub fn coefficients(&self) -> &DVector<f64> {
        &self.coefficients
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Advances one step and returns `‖u⁺ − u‖ / max(‖u⁺‖, 1e−30)`.
    pub fn step(&mut self) -> Result<f64> {
        let phi = self.basis.eigenvectors();
        let well = self.u.map(|v| 4.0 * v * (v * v - 1.0));
        let pull = (&self.u - &self.f).component_mul(&self.fidelity);
        let b = phi.tr_mul(&well);
        let d = phi.tr_mul(&pull);
        let numerator =
            &self.coefficients * self.one_plus_tau_c - b * (self.tau * self.inv_eps) - d * self.tau;
        self.coefficients = numerator.component_div(&self.denominators);
        let next = phi * &self.coefficients;
        self.iterations += 1;
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical {
                iterations: self.iterations,
                message: "Allen–Cahn iterate became non-finite".into(),
            });
        }
        let change = (&next - &self.u).norm() / next.norm().max(1e-30);
        self.u = next;
        Ok(change)
    }
}

/// Runs the reduced Allen–Cahn iteration to convergence and thresholds `u`.
pub fn allen_cahn_classify(
    basis: &SpectralBasis,
    labels: &LabelVector,
    params: &AllenCahnParams,
) -> Result<AllenCahnOutcome> {
    let mut solver = AllenCahnSolver::new(basis, labels, params)?;
    let mut converged = false;
    while solver.iterations() < params.max_iters {
        if solver.step()? < params.tol {
            converged = true;
            break;
        }
    }
    Ok(AllenCahnOutcome {
        labels: predict_labels(solver.u().as_slice()),
        u: solver.u,
        iterations: solver.iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::NormalizedLaplacian;
    use crate::spectral::smallest_eigenpairs;
    use nalgebra::DMatrix;
    use Label::{Negative as N, Positive as P};

    fn two_node_basis() -> SpectralBasis {
        let l = NormalizedLaplacian::from_matrix(DMatrix::from_row_slice(
            2,
            2,
            &[1.0, -1.0, -1.0, 1.0],
        ))
        .unwrap();
        smallest_eigenpairs(&l, 2).unwrap()
    }

    #[test]
    fn defaults_follow_node_count() {
        let p = AllenCahnParams::default();
        assert_eq!(p.m_e, 20);
        assert!((p.epsilon_for(100) - 0.1).abs() < 1e-15);
        assert!((p.convexity_for(100) - (30.0 + 1e10)).abs() < 1e-3);
        assert_eq!(p.tau, 0.01);
        assert_eq!(p.tol, 1e-8);
        assert_eq!(p.max_iters, 10_000);
    }

    #[test]
    fn two_nodes_one_label() {
        let basis = two_node_basis();
        let f = LabelVector::from_pairs(2, &[(0, P)]).unwrap();
        let params = AllenCahnParams {
            m_e: 2,
            ..Default::default()
        };
        let out = allen_cahn_classify(&basis, &f, &params).unwrap();
        assert_eq!(out.labels, vec![P, P]);
    }

    #[test]
    fn all_labeled_keeps_labels() {
        let basis = two_node_basis();
        let f = LabelVector::from_labels(&[N, P]);
        let params = AllenCahnParams {
            m_e: 2,
            ..Default::default()
        };
        let out = allen_cahn_classify(&basis, &f, &params).unwrap();
        assert_eq!(out.labels, vec![N, P]);
        assert!(out.converged);
    }

    #[test]
    fn rejects_bad_parameters() {
        let basis = two_node_basis();
        let f = LabelVector::from_pairs(2, &[(0, P)]).unwrap();
        let too_many = AllenCahnParams {
            m_e: 3,
            ..Default::default()
        };
        assert!(allen_cahn_classify(&basis, &f, &too_many).is_err());
        let bad_tau = AllenCahnParams {
            m_e: 2,
            tau: 0.0,
            ..Default::default()
        };
        assert!(allen_cahn_classify(&basis, &f, &bad_tau).is_err());
        let wrong_len = LabelVector::from_pairs(3, &[(0, P)]).unwrap();
        assert!(AllenCahnSolver::new(
            &basis,
            &wrong_len,
            &AllenCahnParams {
                m_e: 2,
                ..Default::default()
            }
        )
        .is_err());
    }

    #[test]
    fn reports_non_convergence() {
        let basis = two_node_basis();
        let f = LabelVector::from_pairs(2, &[(0, P)]).unwrap();
        let params = AllenCahnParams {
            m_e: 2,
            max_iters: 1,
            tol: 1e-300,
            ..Default::default()
        };
        let out = allen_cahn_classify(&basis, &f, &params).unwrap();
        assert!(!out.converged);
        assert_eq!(out.iterations, 1);
    }
}
