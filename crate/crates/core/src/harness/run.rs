use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::accuracy;
use super::cache::{CacheStats, DistanceCache};
use super::results::{sort_results, ExperimentResult};
use super::spec::{load_dataset, ExperimentSpec, Method, SplitMode};
use crate::dataset::{random_split, Dataset, LabeledSplit};
use crate::distance::{DistanceKind, DistanceMatrix};
use crate::error::{Error, Result};
use crate::graph::{
    knn_sparsify, self_tuned_graph, sym_normalized_laplacian, NormalizedLaplacian, SimilarityGraph,
};
use crate::solvers::{
    allen_cahn_classify, gcn_train_and_classify, linear_system_classify, one_nn_classify,
    GcnFeatures, GcnParams, LabelVector,
};
use crate::spectral::{smallest_eigenpairs, SpectralBasis};

/// Rows of a finished grid plus how the distance matrices were obtained.
#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub results: Vec<ExperimentResult>,
    pub cache: CacheStats,
}

impl ExperimentReport {
    /// Cells that recorded an error.
    pub fn failures(&self) -> impl Iterator<Item = &ExperimentResult> {
        self.results.iter().filter(|r| r.error.is_some())
    }
}

type Stage<T> = std::result::Result<T, String>;

/// Everything derived from one `(dataset, distance)` pair that the methods
/// share. A stage that failed keeps its message so that every cell that
/// needs it can report it.
struct Bundle {
    distances: Stage<Arc<DistanceMatrix>>,
    graph: Stage<SimilarityGraph>,
    laplacian: Stage<NormalizedLaplacian>,
    basis: Stage<SpectralBasis>,
    sparse: Stage<SimilarityGraph>,
}

fn skipped<T>() -> Stage<T> {
    Err("not requested".to_string())
}

fn stage<T>(r: Result<T>) -> Stage<T> {
    r.map_err(|e| e.to_string())
}

fn build_bundle(
    dataset: &Dataset,
    kind: DistanceKind,
    spec: &ExperimentSpec,
    cache: &DistanceCache,
) -> Bundle {
    let needs = |m: Method| spec.methods.contains(&m);
    let distances = stage(cache.get_or_compute(dataset, kind));
    let graph = distances
        .as_ref()
        .map_err(Clone::clone)
        .and_then(|d| stage(self_tuned_graph(d, spec.self_tuning_k)));
    let laplacian = if needs(Method::AllenCahn) || needs(Method::LinearSystem) {
        graph
            .as_ref()
            .map_err(Clone::clone)
            .and_then(|g| stage(sym_normalized_laplacian(g)))
    } else {
        skipped()
    };
    let basis = if needs(Method::AllenCahn) {
        laplacian
            .as_ref()
            .map_err(Clone::clone)
            .and_then(|l| stage(smallest_eigenpairs(l, spec.allen_cahn.m_e)))
    } else {
        skipped()
    };
    let sparse = if needs(Method::Gcn) {
        graph
            .as_ref()
            .map_err(Clone::clone)
            .and_then(|g| stage(knn_sparsify(g, spec.gcn.knn)))
    } else {
        skipped()
    };
    Bundle {
        distances,
        graph,
        laplacian,
        basis,
        sparse,
    }
}

struct CellOutcome {
    labels: Vec<crate::dataset::Label>,
    converged: bool,
}

fn run_method(
    method: Method,
    bundle: &Bundle,
    f: &LabelVector,
    split_seed: u64,
    spec: &ExperimentSpec,
) -> Stage<CellOutcome> {
    match method {
        Method::AllenCahn => {
            let basis = bundle.basis.as_ref().map_err(Clone::clone)?;
            let out = stage(allen_cahn_classify(basis, f, &spec.allen_cahn))?;
            Ok(CellOutcome {
                labels: out.labels,
                converged: out.converged,
            })
        }
        Method::LinearSystem => {
            let lap = bundle.laplacian.as_ref().map_err(Clone::clone)?;
            let out = stage(linear_system_classify(lap, f, &spec.linear_system))?;
            Ok(CellOutcome {
                labels: out.labels,
                converged: true,
            })
        }
        Method::Gcn => {
            let sparse = bundle.sparse.as_ref().map_err(Clone::clone)?;
            let n = sparse.n();
            let features = match spec.gcn_features {
                GcnFeatures::GaussianRows => bundle
                    .graph
                    .as_ref()
                    .map_err(Clone::clone)?
                    .weights()
                    .clone(),
                GcnFeatures::Identity => DMatrix::identity(n, n),
            };
            let params = GcnParams {
                seed: spec.gcn.seed.wrapping_add(split_seed),
                ..spec.gcn
            };
            let out = stage(gcn_train_and_classify(sparse, &features, f, &params))?;
            Ok(CellOutcome {
                labels: out.labels,
                converged: true,
            })
        }
        Method::OneNn => {
            let d = bundle.distances.as_ref().map_err(Clone::clone)?;
            let out = stage(one_nn_classify(d, f))?;
            Ok(CellOutcome {
                labels: out.labels,
                converged: true,
            })
        }
    }
}

struct LoadedDataset {
    name: String,
    data: Stage<Dataset>,
    /// `(fraction, seed, split)`; a split that could not be drawn keeps
    /// its error.
    splits: Vec<(f64, Option<u64>, Stage<LabeledSplit>)>,
}

fn display_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .map(|s| s.trim_end_matches("_TRAIN").to_string())
        .unwrap_or_else(|| path.display().to_string())
}

fn load(path: &Path, spec: &ExperimentSpec) -> LoadedDataset {
    let data = stage(load_dataset(path)).map(|d| {
        if spec.z_normalize {
            d.z_normalized()
        } else {
            d
        }
    });
    let name = data
        .as_ref()
        .map_or_else(|_| display_name(path), |d| d.name().to_string());
    let splits = match (&spec.split, &data) {
        (SplitMode::FixedArchiveTrain, Ok(d)) => {
            let fraction = d
                .archive_train_len()
                .map_or(f64::NAN, |t| t as f64 / d.len() as f64);
            vec![(fraction, None, stage(LabeledSplit::archive_train(d)))]
        }
        (SplitMode::FixedArchiveTrain, Err(e)) => vec![(f64::NAN, None, Err(e.clone()))],
        (
            SplitMode::Random {
                fractions,
                repeats,
                base_seed,
            },
            data,
        ) => fractions
            .iter()
            .flat_map(|&f| {
                (0..*repeats as u64).map(move |r| {
                    let seed = base_seed.wrapping_add(r);
                    let split = match data {
                        Ok(d) => stage(random_split(d, f, seed)),
                        Err(e) => Err(e.clone()),
                    };
                    (f, Some(seed), split)
                })
            })
            .collect(),
    };
    LoadedDataset { name, data, splits }
}

fn run_cell(
    dataset: &LoadedDataset,
    distance: DistanceKind,
    bundle: &Bundle,
    method: Method,
    split: &(f64, Option<u64>, Stage<LabeledSplit>),
    spec: &ExperimentSpec,
) -> ExperimentResult {
    let (fraction, seed, split) = split;
    let mut result = ExperimentResult {
        dataset: dataset.name.clone(),
        distance: distance.name().to_string(),
        method,
        fraction: *fraction,
        seed: *seed,
        accuracy_unlabeled: None,
        accuracy_all: None,
        wall_time_s: 0.0,
        converged: false,
        error: None,
    };
    let mut attempt = || -> Stage<()> {
        let data = dataset.data.as_ref().map_err(Clone::clone)?;
        let split = split.as_ref().map_err(Clone::clone)?;
        let f = LabelVector::from_split(data, split);
        let start = Instant::now();
        let out = run_method(method, bundle, &f, seed.unwrap_or(0), spec)?;
        result.wall_time_s = start.elapsed().as_secs_f64();
        let truth = data.labels();
        let n = data.len();
        let hidden = split.complement(n);
        if !hidden.is_empty() {
            result.accuracy_unlabeled = Some(stage(accuracy(&out.labels, &truth, &hidden))?);
        }
        let everyone: Vec<usize> = (0..n).collect();
        result.accuracy_all = Some(stage(accuracy(&out.labels, &truth, &everyone))?);
        result.converged = out.converged;
        Ok(())
    };
    if let Err(message) = attempt() {
        result.accuracy_unlabeled = None;
        result.accuracy_all = None;
        result.converged = false;
        result.error = Some(message);
    }
    result
}

/// Runs the whole grid with a fresh cache rooted at `spec.cache_dir`.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    let cache = match &spec.cache_dir {
        Some(dir) => DistanceCache::on_disk(dir),
        None => DistanceCache::in_memory(),
    };
    run_experiment_with_cache(spec, &cache)
}

/// Runs the grid on a bounded worker pool.
///
/// Only an invalid spec is an error. A dataset that does not load, a split
/// that cannot be drawn or a solver that fails turns into rows with an
/// `error` and empty accuracies. Rows come back sorted, and everything but
/// the timings is a function of the spec alone.
pub fn run_experiment_with_cache(
    spec: &ExperimentSpec,
    cache: &DistanceCache,
) -> Result<ExperimentReport> {
    spec.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let before = cache.stats();
    let results = pool.install(|| {
        let loaded: Vec<LoadedDataset> = spec.datasets.par_iter().map(|p| load(p, spec)).collect();
        let datasets = &loaded;
        let pairs: Vec<(usize, DistanceKind)> = (0..datasets.len())
            .flat_map(|d| spec.distances.iter().map(move |&k| (d, k)))
            .collect();
        let bundles: Vec<Bundle> = pairs
            .par_iter()
            .map(|&(d, kind)| match &datasets[d].data {
                Ok(data) => build_bundle(data, kind, spec, cache),
                Err(e) => Bundle {
                    distances: Err(e.clone()),
                    graph: Err(e.clone()),
                    laplacian: Err(e.clone()),
                    basis: Err(e.clone()),
                    sparse: Err(e.clone()),
                },
            })
            .collect();
        let cells: Vec<(usize, Method, usize)> = pairs
            .iter()
            .enumerate()
            .flat_map(|(p, &(d, _))| {
                spec.methods
                    .iter()
                    .flat_map(move |&m| (0..datasets[d].splits.len()).map(move |s| (p, m, s)))
            })
            .collect();
        cells
            .par_iter()
            .map(|&(p, method, s)| {
                let (d, kind) = pairs[p];
                run_cell(
                    &datasets[d],
                    kind,
                    &bundles[p],
                    method,
                    &datasets[d].splits[s],
                    spec,
                )
            })
            .collect::<Vec<_>>()
    });
    let mut results = results;
    sort_results(&mut results);
    let after = cache.stats();
    Ok(ExperimentReport {
        results,
        cache: CacheStats {
            memory_hits: after.memory_hits - before.memory_hits,
            disk_hits: after.disk_hits - before.disk_hits,
            computed: after.computed - before.computed,
            write_failures: after.write_failures - before.write_failures,
        },
    })
}
