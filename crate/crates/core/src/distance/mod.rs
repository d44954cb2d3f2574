//! Distances between time series and pairwise distance matrices.
//!
//! Four measures are available through [`DistanceKind`]:
//!
//! * Euclidean distance (equal lengths only),
//! * dynamic time warping with absolute-difference local cost,
//! * the soft-DTW divergence, a debiased smooth relaxation of DTW,
//! * MPdist, the k-th smallest entry of the two-way matrix profile.

mod cache;
mod dtw;
mod euclidean;
mod matrix;
mod mpdist;

use std::fmt;

pub use cache::{
    decode_matrix, encode_matrix, read_cache, write_cache, CACHE_MAGIC, CACHE_VERSION,
};
pub use dtw::{dtw_distance, soft_dtw, soft_dtw_divergence, soft_min};
pub use euclidean::euclidean_distance;
pub use matrix::{pairwise_distance_matrix, DistanceMatrix};
pub use mpdist::{
    matrix_profile, matrix_profile_with, mpdist, mpdist_parameters, mpdist_with, SubsequenceMetric,
};

use crate::error::{Error, Result};

/// Default soft-min smoothing for the soft-DTW divergence.
pub const DEFAULT_GAMMA: f64 = 1.0;
/// Default MPdist window, as a fraction of the shorter series.
pub const DEFAULT_WINDOW_FRACTION: f64 = 0.5;
/// Default MPdist rank, as a fraction of the combined length.
pub const DEFAULT_K_FRACTION: f64 = 0.05;

/// A distance measure together with its parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DistanceKind {
    Euclidean,
    Dtw,
    SoftDtwDivergence {
        gamma: f64,
    },
    MpDist {
        window_fraction: f64,
        k_fraction: f64,
        z_normalized: bool,
    },
}

impl DistanceKind {
    pub fn soft_dtw_default() -> Self {
        DistanceKind::SoftDtwDivergence {
            gamma: DEFAULT_GAMMA,
        }
    }

    pub fn mpdist_default() -> Self {
        DistanceKind::MpDist {
            window_fraction: DEFAULT_WINDOW_FRACTION,
            k_fraction: DEFAULT_K_FRACTION,
            z_normalized: false,
        }
    }

    /// Short name used on the command line and in result files.
    pub fn name(&self) -> &'static str {
        match self {
            DistanceKind::Euclidean => "euclidean",
            DistanceKind::Dtw => "dtw",
            DistanceKind::SoftDtwDivergence { .. } => "sdtw",
            DistanceKind::MpDist { .. } => "mpdist",
        }
    }

    /// Parses a short name, filling in default parameters.
    pub fn from_name(name: &str) -> Result<Self> {
        match name.trim().to_ascii_lowercase().as_str() {
            "euclidean" | "euclid" => Ok(DistanceKind::Euclidean),
            "dtw" => Ok(DistanceKind::Dtw),
            "sdtw" | "softdtw" | "soft-dtw" => Ok(Self::soft_dtw_default()),
            "mpdist" | "mp" => Ok(Self::mpdist_default()),
            other => Err(Error::Parameter(format!("unknown distance {other:?}"))),
        }
    }

    pub(crate) fn tag(&self) -> u8 {
        match self {
            DistanceKind::Euclidean => 0,
            DistanceKind::Dtw => 1,
            DistanceKind::SoftDtwDivergence { .. } => 2,
            DistanceKind::MpDist { .. } => 3,
        }
    }

    pub(crate) fn params(&self) -> Vec<f64> {
        match *self {
            DistanceKind::Euclidean | DistanceKind::Dtw => Vec::new(),
            DistanceKind::SoftDtwDivergence { gamma } => vec![gamma],
            DistanceKind::MpDist {
                window_fraction,
                k_fraction,
                z_normalized,
            } => vec![
                window_fraction,
                k_fraction,
                if z_normalized { 1.0 } else { 0.0 },
            ],
        }
    }

    pub(crate) fn from_parts(tag: u8, params: &[f64]) -> Result<Self> {
        let kind = match (tag, params) {
            (0, []) => DistanceKind::Euclidean,
            (1, []) => DistanceKind::Dtw,
            (2, [gamma]) => DistanceKind::SoftDtwDivergence { gamma: *gamma },
            (3, [w, k, z]) => DistanceKind::MpDist {
                window_fraction: *w,
                k_fraction: *k,
                z_normalized: *z != 0.0,
            },
            _ => {
                return Err(Error::Cache(format!(
                    "unknown kind tag {tag} with {} parameters",
                    params.len()
                )))
            }
        };
        kind.validate()?;
        Ok(kind)
    }

    /// File-name friendly identifier including parameters.
    pub fn slug(&self) -> String {
        match *self {
            DistanceKind::Euclidean | DistanceKind::Dtw => self.name().to_string(),
            DistanceKind::SoftDtwDivergence { gamma } => format!("sdtw-g{gamma}"),
            DistanceKind::MpDist {
                window_fraction,
                k_fraction,
                z_normalized,
            } => format!(
                "mpdist-w{window_fraction}-k{k_fraction}{}",
                if z_normalized { "-z" } else { "" }
            ),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            DistanceKind::SoftDtwDivergence { gamma } if !(gamma > 0.0 && gamma.is_finite()) => {
                Err(Error::Parameter(format!("gamma must be positive, got {gamma}")))
            }
            DistanceKind::MpDist {
                window_fraction,
                k_fraction,
                ..
            } if !(window_fraction > 0.0 && window_fraction <= 1.0)
                || !(k_fraction > 0.0 && k_fraction <= 1.0) =>
            {
                Err(Error::Parameter(format!(
                    "MPdist fractions must lie in (0, 1], got window {window_fraction}, k {k_fraction}"
                )))
            }
            _ => Ok(()),
        }
    }

    /// Evaluates the measure on one pair of series.
    pub fn distance(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        match *self {
            DistanceKind::Euclidean => euclidean_distance(x, y),
            DistanceKind::Dtw => dtw_distance(x, y),
            DistanceKind::SoftDtwDivergence { gamma } => soft_dtw_divergence(x, y, gamma),
            DistanceKind::MpDist {
                window_fraction,
                k_fraction,
                z_normalized,
            } => mpdist_with(
                x,
                y,
                window_fraction,
                k_fraction,
                SubsequenceMetric::from_z_normalized(z_normalized),
            ),
        }
    }
}

impl fmt::Display for DistanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_roundtrip() {
        for kind in [
            DistanceKind::Euclidean,
            DistanceKind::Dtw,
            DistanceKind::soft_dtw_default(),
            DistanceKind::mpdist_default(),
        ] {
            assert_eq!(DistanceKind::from_name(kind.name()).unwrap(), kind);
            assert_eq!(
                DistanceKind::from_parts(kind.tag(), &kind.params()).unwrap(),
                kind
            );
        }
        assert!(DistanceKind::from_name("cosine").is_err());
    }

    #[test]
    fn parameter_validation() {
        assert!(DistanceKind::SoftDtwDivergence { gamma: 0.0 }
            .validate()
            .is_err());
        assert!(DistanceKind::MpDist {
            window_fraction: 1.5,
            k_fraction: 0.05,
            z_normalized: false
        }
        .validate()
        .is_err());
        assert!(DistanceKind::mpdist_default().validate().is_ok());
    }

    #[test]
    fn slugs_distinguish_parameters() {
        let a = DistanceKind::SoftDtwDivergence { gamma: 1.0 }.slug();
        let b = DistanceKind::SoftDtwDivergence { gamma: 0.1 }.slug();
        assert_ne!(a, b);
    }
}
