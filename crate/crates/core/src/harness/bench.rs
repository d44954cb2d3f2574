use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::distance::DistanceKind;
use crate::error::{Error, Result};

/// Median time of one distance evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchEntry {
    pub distance: &'static str,
    pub length: usize,
    pub median_s: f64,
}

/// Random walks of the requested length.
fn synthetic_pair(length: usize, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    let mut walk = || {
        let mut level = 0.0;
        (0..length)
            .map(|_| {
                level += rng.random_range(-1.0..1.0);
                level
            })
            .collect::<Vec<f64>>()
    };
    (walk(), walk())
}

/// Times each of the four default measures on one synthetic pair per length.
pub fn bench_distances(lengths: &[usize], repeats: usize) -> Result<Vec<BenchEntry>> {
    if repeats == 0 {
        return Err(Error::Parameter("repeats must be positive".into()));
    }
    if let Some(&bad) = lengths.iter().find(|&&l| l < 2) {
        return Err(Error::Parameter(format!("series length {bad} is below 2")));
    }
    let kinds = [
        DistanceKind::Euclidean,
        DistanceKind::Dtw,
        DistanceKind::soft_dtw_default(),
        DistanceKind::mpdist_default(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut entries = Vec::with_capacity(lengths.len() * kinds.len());
    for &length in lengths {
        let (x, y) = synthetic_pair(length, &mut rng);
        for kind in kinds {
            let mut times: Vec<f64> = (0..repeats)
                .map(|_| {
                    let start = Instant::now();
                    let d = kind.distance(&x, &y);
                    let elapsed = start.elapsed().as_secs_f64();
                    std::hint::black_box(d).map(|_| elapsed)
                })
                .collect::<Result<_>>()?;
            times.sort_by(f64::total_cmp);
            let mid = times.len() / 2;
            let median_s = if times.len() % 2 == 1 {
                times[mid]
            } else {
                0.5 * (times[mid - 1] + times[mid])
            };
            entries.push(BenchEntry {
                distance: kind.name(),
                length,
                median_s,
            });
        }
    }
    Ok(entries)
}

/// `distance,length,median_s` CSV.
pub fn format_bench(entries: &[BenchEntry]) -> String {
    let mut out = String::from("distance,length,median_s\n");
    for e in entries {
        let _ = writeln!(out, "{},{},{:e}", e.distance, e.length, e.median_s);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_entry_per_measure() {
        let entries = bench_distances(&[10], 3).unwrap();
        let names: Vec<&str> = entries.iter().map(|e| e.distance).collect();
        assert_eq!(names, vec!["euclidean", "dtw", "sdtw", "mpdist"]);
        assert!(entries.iter().all(|e| e.length == 10 && e.median_s >= 0.0));
        assert_eq!(format_bench(&entries).lines().count(), 5);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(bench_distances(&[1], 3).is_err());
        assert!(bench_distances(&[10], 0).is_err());
    }
}
