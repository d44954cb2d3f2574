use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex, PoisonError};

use crate::dataset::Dataset;
use crate::distance::{
    pairwise_distance_matrix, read_cache, write_cache, DistanceKind, DistanceMatrix,
};
use crate::error::Result;

/// Counters describing how distance matrices were obtained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CacheStats {
    /// Served from this cache's memory.
    pub memory_hits: usize,
    /// Read back from a cache file.
    pub disk_hits: usize,
    /// Computed from the series.
    pub computed: usize,
    /// Cache files that could not be written. The matrix is still used.
    pub write_failures: usize,
}

type Slot = Arc<Mutex<Option<Arc<DistanceMatrix>>>>;

/// Distance matrices keyed by dataset content and distance parameters.
///
/// Each matrix is computed at most once per cache, even under concurrent
/// requests: later callers for the same key wait for the first one. With a
/// directory attached, matrices are also written to and read from one
/// binary file per key.
#[derive(Debug, Default)]
pub struct DistanceCache {
    dir: Option<PathBuf>,
    slots: Mutex<HashMap<String, Slot>>,
    memory_hits: AtomicUsize,
    disk_hits: AtomicUsize,
    computed: AtomicUsize,
    write_failures: AtomicUsize,
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

impl DistanceCache {
    pub fn in_memory() -> Self {
        Self::default()
    }

    pub fn on_disk(dir: impl Into<PathBuf>) -> Self {
        DistanceCache {
            dir: Some(dir.into()),
            ..Self::default()
        }
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    fn key(fingerprint: &str, kind: &DistanceKind) -> String {
        format!(
            "{}-{}",
            &fingerprint[..fingerprint.len().min(16)],
            kind.slug()
        )
    }

    /// File that holds the matrix of `dataset` under `kind`.
    pub fn path_for(&self, dataset: &Dataset, kind: &DistanceKind) -> Option<PathBuf> {
        let key = Self::key(&dataset.fingerprint(), kind);
        self.dir
            .as_ref()
            .map(|d| d.join(format!("{}-{key}.tsgd", sanitize(dataset.name()))))
    }

    pub fn get_or_compute(
        &self,
        dataset: &Dataset,
        kind: DistanceKind,
    ) -> Result<Arc<DistanceMatrix>> {
        let fingerprint = dataset.fingerprint();
        let slot = {
            let mut slots = self.slots.lock().unwrap_or_else(PoisonError::into_inner);
            slots
                .entry(Self::key(&fingerprint, &kind))
                .or_default()
                .clone()
        };
        let mut guard = slot.lock().unwrap_or_else(PoisonError::into_inner);
        if let Some(matrix) = guard.as_ref() {
            self.memory_hits.fetch_add(1, Ordering::Relaxed);
            return Ok(matrix.clone());
        }
        let path = self.path_for(dataset, &kind);
        if let Some(path) = path.as_ref().filter(|p| p.is_file()) {
            // an unreadable or mismatching file is simply recomputed
            if let Ok(matrix) = read_cache(path, &fingerprint) {
                if matrix.kind() == kind && matrix.n() == dataset.len() {
                    self.disk_hits.fetch_add(1, Ordering::Relaxed);
                    let matrix = Arc::new(matrix);
                    *guard = Some(matrix.clone());
                    return Ok(matrix);
                }
            }
        }
        let matrix = Arc::new(pairwise_distance_matrix(dataset, kind)?);
        self.computed.fetch_add(1, Ordering::Relaxed);
        if let Some(path) = path {
            let written = path
                .parent()
                .map_or(Ok(()), std::fs::create_dir_all)
                .map_err(Into::into)
                .and_then(|()| write_cache(&path, &matrix));
            if written.is_err() {
                self.write_failures.fetch_add(1, Ordering::Relaxed);
            }
        }
        *guard = Some(matrix.clone());
        Ok(matrix)
    }

    pub fn stats(&self) -> CacheStats {
        CacheStats {
            memory_hits: self.memory_hits.load(Ordering::Relaxed),
            disk_hits: self.disk_hits.load(Ordering::Relaxed),
            computed: self.computed.load(Ordering::Relaxed),
            write_failures: self.write_failures.load(Ordering::Relaxed),
        }
    }
}
