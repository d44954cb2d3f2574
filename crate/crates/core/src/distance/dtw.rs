//! Dynamic time warping and its soft relaxation.
//!
//! Both use the local cost `C[i][j] = |x[i] − y[j]|` and fill the
//! accumulated-cost table one row at a time, so memory is `O(len(y))`.

use crate::error::{Error, Result};

fn check_nonempty(x: &[f64], y: &[f64]) -> Result<()> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptySeries);
    }
    Ok(())
}

/// Minimum total cost over all warping paths from `(0, 0)` to the last
/// index pair, with unit right, down and diagonal steps.
pub fn dtw_distance(x: &[f64], y: &[f64]) -> Result<f64> {
    check_nonempty(x, y)?;
    let width = y.len() + 1;
    let mut prev = vec![f64::INFINITY; width];
    let mut curr = vec![f64::INFINITY; width];
    prev[0] = 0.0;
    for &xi in x {
        curr[0] = f64::INFINITY;
        for j in 1..width {
            let best = prev[j].min(curr[j - 1]).min(prev[j - 1]);
            curr[j] = (xi - y[j - 1]).abs() + best;
        }
        std::mem::swap(&mut prev, &mut curr);
        prev[0] = f64::INFINITY;
    }
    Ok(prev[width - 1])
}

/// `−γ · ln Σ exp(−vᵢ/γ)`, shifted by the minimum so that no term
/// overflows. Infinite entries contribute nothing.
pub fn soft_min(values: &[f64], gamma: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Parameter("soft-min of an empty set".into()));
    }
    check_gamma(gamma)?;
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if min == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    // The minimum itself contributes exp(0) = 1.
    let rest: f64 = values
        .iter()
        .map(|&v| (-(v - min) / gamma).exp())
        .sum::<f64>()
        - 1.0;
    Ok(min - gamma * rest.ln_1p())
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "gamma must be positive, got {gamma}"
        )))
    }
}

#[inline]
fn soft_min3(a: f64, b: f64, c: f64, gamma: f64) -> f64 {
    let min = a.min(b).min(c);
    if min == f64::INFINITY {
        return min;
    }
    let sum = (-(a - min) / gamma).exp() + (-(b - min) / gamma).exp() + (-(c - min) / gamma).exp();
    min - gamma * (sum - 1.0).ln_1p()
}

/// Soft-DTW value: the soft minimum of the alignment costs over all
/// monotone alignments, evaluated by the soft Bellman recursion
/// `r(i, j) = C[i][j] + softmin(r(i−1, j), r(i, j−1), r(i−1, j−1))`.
///
/// Unlike DTW this can be negative.
pub fn soft_dtw(x: &[f64], y: &[f64], gamma: f64) -> Result<f64> {
    check_nonempty(x, y)?;
    check_gamma(gamma)?;
    let width = y.len() + 1;
    let mut prev = vec![f64::INFINITY; width];
    let mut curr = vec![f64::INFINITY; width];
    prev[0] = 0.0;
    for &xi in x {
        curr[0] = f64::INFINITY;
        for j in 1..width {
            curr[j] = (xi - y[j - 1]).abs() + soft_min3(prev[j], curr[j - 1], prev[j - 1], gamma);
        }
        std::mem::swap(&mut prev, &mut curr);
        prev[0] = f64::INFINITY;
    }
    Ok(prev[width - 1])
}

/// `SDTW(x, y) − ½ (SDTW(x, x) + SDTW(y, y))`. Zero for identical inputs.
pub fn soft_dtw_divergence(x: &[f64], y: &[f64], gamma: f64) -> Result<f64> {
    let xy = soft_dtw(x, y, gamma)?;
    let xx = soft_dtw(x, x, gamma)?;
    let yy = soft_dtw(y, y, gamma)?;
    Ok(xy - 0.5 * (xx + yy))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dtw_hand_examples() {
        assert_eq!(dtw_distance(&[1.0, 2.0, 3.0], &[2.0, 3.0]).unwrap(), 1.0);
        assert_eq!(dtw_distance(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 2.0);
        let x = [0.3, -1.0, 2.5, 2.5];
        assert_eq!(dtw_distance(&x, &x).unwrap(), 0.0);
    }

    #[test]
    fn dtw_single_points() {
        assert_eq!(dtw_distance(&[4.0], &[1.0]).unwrap(), 3.0);
        // one-element series against three: every step visits the single point
        assert_eq!(dtw_distance(&[0.0], &[1.0, 2.0, 3.0]).unwrap(), 6.0);
    }

    #[test]
    fn empty_series_rejected() {
        assert!(matches!(dtw_distance(&[], &[1.0]), Err(Error::EmptySeries)));
        assert!(matches!(
            soft_dtw(&[1.0], &[], 1.0),
            Err(Error::EmptySeries)
        ));
    }

    #[test]
    fn soft_min_examples() {
        assert_eq!(soft_min(&[2.5], 0.7).unwrap(), 2.5);
        let v = soft_min(&[1.0, 1.0, 1.0], 1.0).unwrap();
        assert!((v - (1.0 - 3f64.ln())).abs() < 1e-15);
        assert!((v - -0.09861228866810978).abs() < 1e-15);
        let v = soft_min(&[0.0, 1000.0], 1.0).unwrap();
        assert!(v.is_finite() && v.abs() <= 1e-300);
        assert!(soft_min(&[], 1.0).is_err());
        assert!(soft_min(&[1.0], 0.0).is_err());
    }

    #[test]
    fn soft_min_ignores_infinity() {
        assert_eq!(soft_min(&[f64::INFINITY, 3.0], 1.0).unwrap(), 3.0);
        assert_eq!(soft_min(&[f64::INFINITY], 1.0).unwrap(), f64::INFINITY);
        assert_eq!(soft_min3(f64::INFINITY, f64::INFINITY, 0.0, 0.5), 0.0);
    }

    #[test]
    fn soft_dtw_hand_examples() {
        assert_eq!(soft_dtw(&[1.0], &[1.0], 0.3).unwrap(), 0.0);
        let v = soft_dtw(&[1.0, 2.0], &[1.0, 2.0], 1.0).unwrap();
        assert!((v - -0.5514447139320511).abs() < 1e-14);
    }

    #[test]
    fn soft_dtw_small_gamma_approaches_dtw() {
        let x = [0.0, 1.5, 2.0, -1.0];
        let y = [0.5, 2.0, -0.5];
        let hard = dtw_distance(&x, &y).unwrap();
        let soft = soft_dtw(&x, &y, 1e-6).unwrap();
        assert!((hard - soft).abs() < 1e-4);
    }

    #[test]
    fn divergence_examples() {
        assert_eq!(
            soft_dtw_divergence(&[1.0, 2.0], &[1.0, 2.0], 1.0).unwrap(),
            0.0
        );
        // −ln(e⁻² + 2e⁻³) + ln 3: one diagonal path of cost 2, two of cost 3,
        // and three zero-cost alignments for each self term.
        let v = soft_dtw_divergence(&[0.0, 0.0], &[1.0, 1.0], 1.0).unwrap();
        assert!((v - 2.5471675747360587).abs() < 1e-13);
    }
}
