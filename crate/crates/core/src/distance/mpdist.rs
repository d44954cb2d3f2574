//! Two-way matrix profile and MPdist.
//!
//! For window length `L`, every length-`L` subsequence of `x` is matched to
//! its nearest subsequence of `y` and vice versa. The profile is scanned one
//! diagonal of the subsequence-pair grid at a time: moving one step along a
//! diagonal drops one squared difference and adds another, so each pair costs
//! `O(1)`. The running sums are recomputed from scratch every `L` steps to
//! bound round-off drift.

use crate::error::{Error, Result};

/// How two subsequences are compared.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SubsequenceMetric {
    /// Plain Euclidean norm of the difference.
    #[default]
    Euclidean,
    /// Euclidean norm after z-normalizing both windows. A constant window
    /// is at distance 0 from another constant window and `√L` from any
    /// other.
    ZNormalizedEuclidean,
}

impl SubsequenceMetric {
    pub fn from_z_normalized(z: bool) -> Self {
        if z {
            SubsequenceMetric::ZNormalizedEuclidean
        } else {
            SubsequenceMetric::Euclidean
        }
    }
}

/// `P_ABBA` with plain Euclidean subsequence distances. The first
/// `len(x) − L + 1` entries belong to the windows of `x`, the rest to the
/// windows of `y`.
pub fn matrix_profile(x: &[f64], y: &[f64], window: usize) -> Result<Vec<f64>> {
    matrix_profile_with(x, y, window, SubsequenceMetric::Euclidean)
}

pub fn matrix_profile_with(
    x: &[f64],
    y: &[f64],
    window: usize,
    metric: SubsequenceMetric,
) -> Result<Vec<f64>> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptySeries);
    }
    if window == 0 {
        return Err(Error::Parameter("window length must be positive".into()));
    }
    let shortest = x.len().min(y.len());
    if window > shortest {
        return Err(Error::WindowTooLarge {
            window,
            length: shortest,
        });
    }
    let na = x.len() - window + 1;
    let nb = y.len() - window + 1;
    let mut pab = vec![f64::INFINITY; na];
    let mut pba = vec![f64::INFINITY; nb];

    match metric {
        SubsequenceMetric::Euclidean => scan_euclidean(x, y, window, &mut pab, &mut pba),
        SubsequenceMetric::ZNormalizedEuclidean => scan_znorm(x, y, window, &mut pab, &mut pba),
    }
    pab.extend(pba);
    Ok(pab)
}

/// Start points `(i, j)` of every diagonal of an `na × nb` grid.
fn diagonals(na: usize, nb: usize) -> impl Iterator<Item = (usize, usize)> {
    (1..na).rev().map(|i| (i, 0)).chain((0..nb).map(|j| (0, j)))
}

fn scan_euclidean(x: &[f64], y: &[f64], window: usize, pab: &mut [f64], pba: &mut [f64]) {
    let (na, nb) = (pab.len(), pba.len());
    for (i0, j0) in diagonals(na, nb) {
        let steps = (na - i0).min(nb - j0);
        let mut sum = 0.0;
        for t in 0..steps {
            let (i, j) = (i0 + t, j0 + t);
            if t % window == 0 {
                sum = x[i..i + window]
                    .iter()
                    .zip(&y[j..j + window])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
            } else {
                let out = x[i - 1] - y[j - 1];
                let inn = x[i + window - 1] - y[j + window - 1];
                sum += inn * inn - out * out;
            }
            let d = sum.max(0.0).sqrt();
            if d < pab[i] {
                pab[i] = d;
            }
            if d < pba[j] {
                pba[j] = d;
            }
        }
    }
}

fn window_stats(s: &[f64], window: usize) -> (Vec<f64>, Vec<f64>) {
    let count = s.len() - window + 1;
    let l = window as f64;
    let mut means = Vec::with_capacity(count);
    let mut stds = Vec::with_capacity(count);
    for w in s.windows(window) {
        let mean = w.iter().sum::<f64>() / l;
        let var = w.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / l;
        means.push(mean);
        stds.push(var.sqrt());
    }
    (means, stds)
}

fn scan_znorm(x: &[f64], y: &[f64], window: usize, pab: &mut [f64], pba: &mut [f64]) {
    const FLAT: f64 = 1e-12;
    let (na, nb) = (pab.len(), pba.len());
    let l = window as f64;
    let (mx, sx) = window_stats(x, window);
    let (my, sy) = window_stats(y, window);
    for (i0, j0) in diagonals(na, nb) {
        let steps = (na - i0).min(nb - j0);
        let mut dot = 0.0;
        for t in 0..steps {
            let (i, j) = (i0 + t, j0 + t);
            if t % window == 0 {
                dot = x[i..i + window]
                    .iter()
                    .zip(&y[j..j + window])
                    .map(|(a, b)| a * b)
                    .sum();
            } else {
                dot += x[i + window - 1] * y[j + window - 1] - x[i - 1] * y[j - 1];
            }
            let d = match (sx[i] < FLAT, sy[j] < FLAT) {
                (true, true) => 0.0,
                (true, false) | (false, true) => l.sqrt(),
                (false, false) => {
                    let corr = ((dot - l * mx[i] * my[j]) / (l * sx[i] * sy[j])).clamp(-1.0, 1.0);
                    (2.0 * l * (1.0 - corr)).max(0.0).sqrt()
                }
            };
            if d < pab[i] {
                pab[i] = d;
            }
            if d < pba[j] {
                pba[j] = d;
            }
        }
    }
}

/// Window length and rank used by MPdist for two series lengths:
/// `L = max(2, ⌊window_fraction · min(len)⌋)` and
/// `k = max(1, ⌊k_fraction · (len(x) + len(y))⌋)`, with `k` clamped to the
/// profile size.
pub fn mpdist_parameters(
    len_x: usize,
    len_y: usize,
    window_fraction: f64,
    k_fraction: f64,
) -> Result<(usize, usize)> {
    if !(window_fraction > 0.0 && window_fraction <= 1.0)
        || !(k_fraction > 0.0 && k_fraction <= 1.0)
    {
        return Err(Error::Parameter(format!(
            "MPdist fractions must lie in (0, 1], got window {window_fraction}, k {k_fraction}"
        )));
    }
    let shortest = len_x.min(len_y);
    let window = ((window_fraction * shortest as f64).floor() as usize).max(2);
    if window > shortest {
        return Err(Error::WindowTooLarge {
            window,
            length: shortest,
        });
    }
    let profile_len = (len_x - window + 1) + (len_y - window + 1);
    let k = ((k_fraction * (len_x + len_y) as f64).floor() as usize)
        .max(1)
        .min(profile_len);
    Ok((window, k))
}

/// The k-th smallest entry of the plain-Euclidean matrix profile.
pub fn mpdist(x: &[f64], y: &[f64], window_fraction: f64, k_fraction: f64) -> Result<f64> {
    mpdist_with(
        x,
        y,
        window_fraction,
        k_fraction,
        SubsequenceMetric::Euclidean,
    )
}

pub fn mpdist_with(
    x: &[f64],
    y: &[f64],
    window_fraction: f64,
    k_fraction: f64,
    metric: SubsequenceMetric,
) -> Result<f64> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptySeries);
    }
    let (window, k) = mpdist_parameters(x.len(), y.len(), window_fraction, k_fraction)?;
    let mut profile = matrix_profile_with(x, y, window, metric)?;
    let (_, kth, _) = profile.select_nth_unstable_by(k - 1, f64::total_cmp);
    Ok(*kth)
}

#[cfg(test)]
mod tests {
    use super::*;

    const ALT: [f64; 6] = [0.0, 1.0, 0.0, 1.0, 0.0, 1.0];
    const FIVES: [f64; 6] = [5.0; 6];

    #[test]
    fn self_profile_is_zero() {
        let x = [0.2, 1.4, -0.3, 2.2, 0.0, 0.9, 1.1];
        for window in 1..=x.len() {
            let p = matrix_profile(&x, &x, window).unwrap();
            assert_eq!(p.len(), 2 * (x.len() - window + 1));
            assert!(p.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn alternating_vs_constant() {
        let mut p = matrix_profile(&ALT, &FIVES, 3).unwrap();
        assert_eq!(p.len(), 8);
        p.sort_by(f64::total_cmp);
        let (r57, r66) = (57f64.sqrt(), 66f64.sqrt());
        for v in &p[..6] {
            assert!((v - r57).abs() < 1e-12);
        }
        for v in &p[6..] {
            assert!((v - r66).abs() < 1e-12);
        }
    }

    #[test]
    fn mpdist_hand_example() {
        let d = mpdist(&ALT, &FIVES, 0.5, 0.05).unwrap();
        assert_eq!(d, 57f64.sqrt());
        assert!((d - 7.5498).abs() < 1e-4);
        assert_eq!(mpdist(&ALT, &ALT, 0.5, 0.05).unwrap(), 0.0);
    }

    #[test]
    fn parameters_clamp() {
        assert_eq!(mpdist_parameters(6, 6, 0.5, 0.05).unwrap(), (3, 1));
        // floor(0.1 · 3) = 0 → window raised to 2
        assert_eq!(mpdist_parameters(3, 10, 0.1, 0.05).unwrap(), (2, 1));
        // k larger than the profile gets clamped
        assert_eq!(mpdist_parameters(4, 4, 1.0, 1.0).unwrap(), (4, 2));
        assert!(matches!(
            mpdist_parameters(1, 5, 0.5, 0.05),
            Err(Error::WindowTooLarge {
                window: 2,
                length: 1
            })
        ));
    }

    #[test]
    fn window_too_large() {
        assert!(matches!(
            matrix_profile(&[1.0, 2.0], &[1.0, 2.0, 3.0], 3),
            Err(Error::WindowTooLarge {
                window: 3,
                length: 2
            })
        ));
    }

    #[test]
    fn znormalized_ignores_offset_and_scale() {
        let x: Vec<f64> = (0..40).map(|i| (i as f64 * 0.4).sin()).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v + 10.0).collect();
        let d = mpdist_with(&x, &y, 0.5, 0.05, SubsequenceMetric::ZNormalizedEuclidean).unwrap();
        assert!(d < 1e-6, "{d}");
        let plain = mpdist(&x, &y, 0.5, 0.05).unwrap();
        assert!(plain > 1.0);
    }

    #[test]
    fn znormalized_flat_windows() {
        let flat = [2.0; 8];
        let p =
            matrix_profile_with(&flat, &flat, 4, SubsequenceMetric::ZNormalizedEuclidean).unwrap();
        assert!(p.iter().all(|&v| v == 0.0));
        let wave = [0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0];
        let p =
            matrix_profile_with(&flat, &wave, 4, SubsequenceMetric::ZNormalizedEuclidean).unwrap();
        assert!(p.iter().all(|&v| (v - 2.0).abs() < 1e-12));
    }

    #[test]
    fn drift_stays_small_on_long_series() {
        // values far from zero stress the running-sum update
        let x: Vec<f64> = (0..600).map(|i| 1e3 + (i as f64 * 0.37).sin()).collect();
        let y: Vec<f64> = (0..500).map(|i| 1e3 + (i as f64 * 0.21).cos()).collect();
        let window = 200;
        let p = matrix_profile(&x, &y, window).unwrap();
        let naive_first: f64 = (0..y.len() - window + 1)
            .map(|j| {
                x[..window]
                    .iter()
                    .zip(&y[j..j + window])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(f64::INFINITY, f64::min);
        assert!((p[0] - naive_first).abs() < 1e-9);
    }
}
