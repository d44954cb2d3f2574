use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{soft_dtw, DistanceKind};
use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Symmetric, zero-diagonal, nonnegative matrix of pairwise distances.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix {
    entries: DMatrix<f64>,
    kind: DistanceKind,
    fingerprint: String,
}

impl DistanceMatrix {
    /// Checks the matrix invariants before wrapping `entries`.
    pub fn new(
        entries: DMatrix<f64>,
        kind: DistanceKind,
        fingerprint: impl Into<String>,
    ) -> Result<Self> {
        let n = entries.nrows();
        if entries.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: entries.ncols(),
            });
        }
        for i in 0..n {
            if entries[(i, i)] != 0.0 {
                return Err(Error::Data(format!("nonzero diagonal entry at {i}")));
            }
            for j in i + 1..n {
                let v = entries[(i, j)];
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(Error::Data(format!("invalid distance {v} at ({i}, {j})")));
                }
                if entries[(j, i)] != v {
                    return Err(Error::Data(format!("asymmetric entries at ({i}, {j})")));
                }
            }
        }
        Ok(DistanceMatrix {
            entries,
            kind,
            fingerprint: fingerprint.into(),
        })
    }

    /// Builds a matrix from the strict upper triangle in row-major order.
    pub fn from_upper_triangle(
        n: usize,
        upper: &[f64],
        kind: DistanceKind,
        fingerprint: impl Into<String>,
    ) -> Result<Self> {
        let expected = n * n.saturating_sub(1) / 2;
        if upper.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: upper.len(),
            });
        }
        let mut entries = DMatrix::zeros(n, n);
        let mut values = upper.iter();
        for i in 0..n {
            for j in i + 1..n {
                let v = *values.next().expect("length checked above");
                entries[(i, j)] = v;
                entries[(j, i)] = v;
            }
        }
        Self::new(entries, kind, fingerprint)
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn kind(&self) -> DistanceKind {
        self.kind
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    /// The strict upper triangle, row-major.
    pub fn upper_triangle(&self) -> Vec<f64> {
        let n = self.n();
        let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                out.push(self.entries[(i, j)]);
            }
        }
        out
    }
}

/// All pairwise distances of a dataset under `kind`.
///
/// Only the upper triangle is evaluated (rows in parallel) and mirrored. For
/// the soft-DTW divergence the self terms `SDTW(xᵢ, xᵢ)` are computed once
/// per series. Tiny negative divergences from round-off are clamped to zero.
/// When several pairs fail, the error names the first one in row-major order.
pub fn pairwise_distance_matrix(dataset: &Dataset, kind: DistanceKind) -> Result<DistanceMatrix> {
    kind.validate()?;
    let series = dataset.series();
    let n = series.len();
    if matches!(kind, DistanceKind::Euclidean) && !dataset.has_uniform_length() {
        let first = series[0].len();
        let other = series
            .iter()
            .map(|s| s.len())
            .find(|&l| l != first)
            .unwrap_or(first);
        return Err(Error::IncompatibleLengths {
            left: first,
            right: other,
        });
    }

    let self_terms: Vec<f64> = match kind {
        DistanceKind::SoftDtwDivergence { gamma } => series
            .par_iter()
            .enumerate()
            .map(|(i, s)| {
                soft_dtw(s.values(), s.values(), gamma).map_err(|e| Error::Pair {
                    i,
                    j: i,
                    source: Box::new(e),
                })
            })
            .collect::<Vec<_>>()
            .into_iter()
            .collect::<Result<_>>()?,
        _ => Vec::new(),
    };

    let pair = |i: usize, j: usize| -> Result<f64> {
        let (x, y) = (series[i].values(), series[j].values());
        let value = match kind {
            DistanceKind::SoftDtwDivergence { gamma } => {
                let cross = soft_dtw(x, y, gamma)?;
                (cross - 0.5 * (self_terms[i] + self_terms[j])).max(0.0)
            }
            _ => kind.distance(x, y)?,
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(Error::Data(format!("non-finite distance {value}")))
        }
    };

    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i + 1..n)
                .map(|j| {
                    pair(i, j).map_err(|e| Error::Pair {
                        i,
                        j,
                        source: Box::new(e),
                    })
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<_>>()?;

    let upper: Vec<f64> = rows.into_iter().flatten().collect();
    DistanceMatrix::from_upper_triangle(n, &upper, kind, dataset.fingerprint())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distance::{dtw_distance, soft_dtw_divergence};

    fn dataset(rows: &[(&str, &[f64])]) -> Dataset {
        Dataset::from_records("t", rows.iter().map(|(t, v)| (t.to_string(), v.to_vec()))).unwrap()
    }

    fn ragged() -> Dataset {
        dataset(&[
            ("a", &[0.0, 1.0, 2.0, 1.0]),
            ("a", &[0.0, 1.1, 2.1, 1.0, 0.2]),
            ("b", &[3.0, -1.0, 0.5]),
            ("b", &[2.5, -1.5, 0.5, 0.0]),
        ])
    }

    #[test]
    fn invariants_hold_for_all_kinds() {
        let ds = ragged();
        for kind in [
            DistanceKind::Dtw,
            DistanceKind::soft_dtw_default(),
            DistanceKind::mpdist_default(),
        ] {
            let m = pairwise_distance_matrix(&ds, kind).unwrap();
            assert_eq!(m.n(), 4);
            for i in 0..4 {
                assert_eq!(m.get(i, i), 0.0);
                for j in 0..4 {
                    assert_eq!(m.get(i, j), m.get(j, i));
                    assert!(m.get(i, j) >= 0.0);
                }
            }
            assert_eq!(m.kind(), kind);
            assert_eq!(m.fingerprint(), ds.fingerprint());
        }
    }

    #[test]
    fn matches_scalar_calls() {
        let ds = ragged();
        let m = pairwise_distance_matrix(&ds, DistanceKind::Dtw).unwrap();
        let s = pairwise_distance_matrix(&ds, DistanceKind::soft_dtw_default()).unwrap();
        for i in 0..4 {
            for j in i + 1..4 {
                let (x, y) = (ds.series()[i].values(), ds.series()[j].values());
                assert_eq!(m.get(i, j), dtw_distance(x, y).unwrap());
                let d = soft_dtw_divergence(x, y, 1.0).unwrap().max(0.0);
                assert!((s.get(i, j) - d).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn euclidean_needs_uniform_lengths() {
        assert!(matches!(
            pairwise_distance_matrix(&ragged(), DistanceKind::Euclidean),
            Err(Error::IncompatibleLengths { .. })
        ));
    }

    #[test]
    fn pair_errors_name_the_pair() {
        let ds = dataset(&[
            ("a", &[0.0, 1.0, 2.0, 3.0]),
            ("b", &[1.0]),
            ("a", &[0.0, 2.0, 2.0]),
        ]);
        match pairwise_distance_matrix(&ds, DistanceKind::mpdist_default()) {
            Err(Error::Pair { i, j, .. }) => assert_eq!((i, j), (0, 1)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn single_series_matrix() {
        let m = DistanceMatrix::from_upper_triangle(1, &[], DistanceKind::Dtw, "x").unwrap();
        assert_eq!(m.n(), 1);
        assert_eq!(m.get(0, 0), 0.0);
    }

    #[test]
    fn constructor_rejects_broken_matrices() {
        let mut e = DMatrix::zeros(2, 2);
        e[(0, 1)] = 1.0;
        assert!(DistanceMatrix::new(e.clone(), DistanceKind::Dtw, "").is_err());
        e[(1, 0)] = 1.0;
        assert!(DistanceMatrix::new(e.clone(), DistanceKind::Dtw, "").is_ok());
        e[(0, 0)] = 0.5;
        assert!(DistanceMatrix::new(e, DistanceKind::Dtw, "").is_err());
    }
}
