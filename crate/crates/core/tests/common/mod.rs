//! Independent reference implementations used as test oracles. None of them
//! shares code with the library; they enumerate or loop in the plainest
//! possible way.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tsgraph::dataset::Dataset;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Every monotone path from `(0, 0)` to `(m − 1, n − 1)` with right, down
/// and diagonal unit steps.
pub fn warping_paths(m: usize, n: usize) -> Vec<Vec<(usize, usize)>> {
    fn extend(
        path: &mut Vec<(usize, usize)>,
        m: usize,
        n: usize,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        let (i, j) = *path.last().unwrap();
        if (i, j) == (m - 1, n - 1) {
            out.push(path.clone());
            return;
        }
        for (di, dj) in [(1, 0), (0, 1), (1, 1)] {
            if i + di < m && j + dj < n {
                path.push((i + di, j + dj));
                extend(path, m, n, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    extend(&mut vec![(0, 0)], m, n, &mut out);
    out
}

pub fn path_cost(x: &[f64], y: &[f64], path: &[(usize, usize)]) -> f64 {
    path.iter().map(|&(i, j)| (x[i] - y[j]).abs()).sum()
}

pub fn dtw_by_enumeration(x: &[f64], y: &[f64]) -> f64 {
    warping_paths(x.len(), y.len())
        .iter()
        .map(|p| path_cost(x, y, p))
        .fold(f64::INFINITY, f64::min)
}

/// `−γ log Σ_A exp(−⟨A, C⟩/γ)` over all alignment matrices, summed directly
/// with a shift by the smallest cost.
pub fn soft_dtw_by_enumeration(x: &[f64], y: &[f64], gamma: f64) -> f64 {
    let costs: Vec<f64> = warping_paths(x.len(), y.len())
        .iter()
        .map(|p| path_cost(x, y, p))
        .collect();
    let min = costs.iter().copied().fold(f64::INFINITY, f64::min);
    let sum: f64 = costs.iter().map(|c| (-(c - min) / gamma).exp()).sum();
    min - gamma * sum.ln()
}

/// Delannoy number D(m − 1, n − 1), the count of alignment matrices.
pub fn alignment_count(m: usize, n: usize) -> u64 {
    let mut table = vec![vec![1u64; n]; m];
    for i in 1..m {
        for j in 1..n {
            table[i][j] = table[i - 1][j] + table[i][j - 1] + table[i - 1][j - 1];
        }
    }
    table[m - 1][n - 1]
}

fn window_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| (p - q) * (p - q))
        .sum::<f64>()
        .sqrt()
}

/// Double loop over all subsequence pairs.
pub fn naive_matrix_profile(x: &[f64], y: &[f64], window: usize) -> Vec<f64> {
    let mut profile = Vec::new();
    for a in x.windows(window) {
        profile.push(
            y.windows(window)
                .map(|b| window_distance(a, b))
                .fold(f64::INFINITY, f64::min),
        );
    }
    for b in y.windows(window) {
        profile.push(
            x.windows(window)
                .map(|a| window_distance(a, b))
                .fold(f64::INFINITY, f64::min),
        );
    }
    profile
}

pub fn naive_mpdist(x: &[f64], y: &[f64], window_fraction: f64, k_fraction: f64) -> f64 {
    let shortest = x.len().min(y.len());
    let window = ((window_fraction * shortest as f64).floor() as usize).max(2);
    let mut profile = naive_matrix_profile(x, y, window);
    profile.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let k = ((k_fraction * (x.len() + y.len()) as f64).floor() as usize)
        .max(1)
        .min(profile.len());
    profile[k - 1]
}

/// Cyclic Jacobi rotations until the off-diagonal mass vanishes. Returns
/// ascending eigenvalues and matching orthonormal eigenvector columns.
pub fn jacobi_eigen(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let mut m = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].partial_cmp(&m[(j, j)]).unwrap());
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    (values, vectors)
}

/// One convexity-splitting step of the Allen–Cahn flow in node space:
/// `((1 + cτ) I + ετ L) u⁺ = (1 + cτ) u − (τ/ε) ∇ψ(u) − τ ∇φ(u)`,
/// solved by dense LU.
pub struct DenseAllenCahn {
    pub system: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    pub f: DVector<f64>,
    pub omega: DVector<f64>,
    pub epsilon: f64,
    pub c: f64,
    pub tau: f64,
}

impl DenseAllenCahn {
    pub fn new(
        laplacian: &DMatrix<f64>,
        f: &DVector<f64>,
        omega: f64,
        epsilon: f64,
        c: f64,
        tau: f64,
    ) -> Self {
        let n = laplacian.nrows();
        let a = DMatrix::<f64>::identity(n, n) * (1.0 + c * tau) + laplacian * (epsilon * tau);
        DenseAllenCahn {
            system: a.lu(),
            f: f.clone(),
            omega: f.map(|v| if v != 0.0 { omega } else { 0.0 }),
            epsilon,
            c,
            tau,
        }
    }

    pub fn step(&self, u: &DVector<f64>) -> DVector<f64> {
        let mut rhs = u * (1.0 + self.c * self.tau);
        for i in 0..u.len() {
            let well = 4.0 * u[i] * (u[i] * u[i] - 1.0);
            let pull = self.omega[i] * (u[i] - self.f[i]);
            rhs[i] -= self.tau / self.epsilon * well + self.tau * pull;
        }
        self.system.solve(&rhs).expect("system is nonsingular")
    }
}

/// Two classes of noisy series: slow sines for one, phase-shifted and
/// sharper bumps for the other.
pub fn two_class_series(n: usize, len: usize, seed: u64) -> Dataset {
    let mut r = rng(seed);
    let records: Vec<(String, Vec<f64>)> = (0..n)
        .map(|i| {
            let class = i % 2;
            let shift = r.random_range(0.0..1.0);
            let values = (0..len)
                .map(|t| {
                    let x = t as f64 / len as f64;
                    let clean = if class == 0 {
                        (std::f64::consts::TAU * (x + 0.1 * shift)).sin()
                    } else {
                        (-((x - 0.5 - 0.1 * shift) * 8.0).powi(2)).exp() * 2.0 - 0.5
                    };
                    clean + r.random_range(-0.3..0.3)
                })
                .collect();
            (format!("c{class}"), values)
        })
        .collect();
    Dataset::from_records("synthetic", records).unwrap()
}

/// Series of random length in `[min_len, max_len]` with uniform values.
pub fn random_series(r: &mut ChaCha8Rng, min_len: usize, max_len: usize) -> Vec<f64> {
    let len = r.random_range(min_len..=max_len);
    (0..len).map(|_| r.random_range(-2.0..2.0)).collect()
}

/// Random points in the plane as a dataset of length-2 series.
pub fn random_points(n: usize, seed: u64) -> Dataset {
    let mut r = rng(seed);
    let records: Vec<(String, Vec<f64>)> = (0..n)
        .map(|i| {
            let token = if i % 2 == 0 { "a" } else { "b" };
            (
                token.to_string(),
                vec![r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)],
            )
        })
        .collect();
    Dataset::from_records("points", records).unwrap()
}
