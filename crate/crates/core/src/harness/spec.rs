use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::dataset::{load_ucr_train_test, load_ucr_tsv, Dataset};
use crate::distance::{DistanceKind, DEFAULT_GAMMA, DEFAULT_K_FRACTION, DEFAULT_WINDOW_FRACTION};
use crate::error::{Error, Result};
use crate::graph::DEFAULT_SELF_TUNING_K;
use crate::solvers::{AllenCahnParams, GcnFeatures, GcnParams, LinearSystemParams};

/// Fractions used by the training-split study when none are given.
pub const DEFAULT_FRACTIONS: [f64; 4] = [0.01, 0.05, 0.1, 0.2];
pub const DEFAULT_REPEATS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    AllenCahn,
    LinearSystem,
    Gcn,
    OneNn,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::AllenCahn,
        Method::LinearSystem,
        Method::Gcn,
        Method::OneNn,
    ];

    /// Name written to result files.
    pub fn name(self) -> &'static str {
        match self {
            Method::AllenCahn => "allen_cahn",
            Method::LinearSystem => "linear_system",
            Method::Gcn => "gcn",
            Method::OneNn => "one_nn",
        }
    }

    /// Accepts both the short command-line names and the result-file names.
    pub fn from_name(name: &str) -> Result<Self> {
        match name.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "ac" | "allen_cahn" => Ok(Method::AllenCahn),
            "ls" | "linear_system" | "linear" => Ok(Method::LinearSystem),
            "gcn" => Ok(Method::Gcn),
            "1nn" | "one_nn" | "onenn" => Ok(Method::OneNn),
            other => Err(Error::Parameter(format!("unknown method {other:?}"))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How labeled sets are chosen.
#[derive(Clone, Debug, PartialEq)]
pub enum SplitMode {
    /// The archive TRAIN file is labeled, the TEST file is not.
    FixedArchiveTrain,
    /// `repeats` stratified random splits per fraction, repeat `r` seeded
    /// with `base_seed + r`.
    Random {
        fractions: Vec<f64>,
        repeats: usize,
        base_seed: u64,
    },
}

impl Default for SplitMode {
    fn default() -> Self {
        SplitMode::Random {
            fractions: DEFAULT_FRACTIONS.to_vec(),
            repeats: DEFAULT_REPEATS,
            base_seed: 0,
        }
    }
}

/// One experiment grid: datasets × distances × methods × splits.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub datasets: Vec<PathBuf>,
    pub distances: Vec<DistanceKind>,
    pub methods: Vec<Method>,
    pub self_tuning_k: usize,
    pub split: SplitMode,
    /// Z-normalize every series after loading.
    pub z_normalize: bool,
    /// Where distance matrices are cached; `None` keeps them in memory only.
    pub cache_dir: Option<PathBuf>,
    /// Result CSV path, used by the command-line driver.
    pub out: Option<PathBuf>,
    /// Worker threads; 0 picks one per core.
    pub workers: usize,
    pub allen_cahn: AllenCahnParams,
    pub linear_system: LinearSystemParams,
    pub gcn: GcnParams,
    pub gcn_features: GcnFeatures,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            datasets: Vec::new(),
            distances: vec![
                DistanceKind::Euclidean,
                DistanceKind::Dtw,
                DistanceKind::soft_dtw_default(),
                DistanceKind::mpdist_default(),
            ],
            methods: Method::ALL.to_vec(),
            self_tuning_k: DEFAULT_SELF_TUNING_K,
            split: SplitMode::default(),
            z_normalize: false,
            cache_dir: None,
            out: None,
            workers: 0,
            allen_cahn: AllenCahnParams::default(),
            linear_system: LinearSystemParams::default(),
            gcn: GcnParams::default(),
            gcn_features: GcnFeatures::default(),
        }
    }
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawSpec {
    datasets: Vec<PathBuf>,
    distances: Option<Vec<String>>,
    methods: Option<Vec<String>>,
    self_tuning_k: usize,
    z_normalize: bool,
    cache_dir: Option<PathBuf>,
    out: Option<PathBuf>,
    workers: usize,
    split: RawSplit,
    distance: RawDistance,
    allen_cahn: AllenCahnParams,
    linear_system: LinearSystemParams,
    gcn: GcnParams,
    gcn_features: GcnFeatures,
}

impl Default for RawSpec {
    fn default() -> Self {
        RawSpec {
            datasets: Vec::new(),
            distances: None,
            methods: None,
            self_tuning_k: DEFAULT_SELF_TUNING_K,
            z_normalize: false,
            cache_dir: None,
            out: None,
            workers: 0,
            split: RawSplit::default(),
            distance: RawDistance::default(),
            allen_cahn: AllenCahnParams::default(),
            linear_system: LinearSystemParams::default(),
            gcn: GcnParams::default(),
            gcn_features: GcnFeatures::default(),
        }
    }
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawSplit {
    mode: String,
    fractions: Vec<f64>,
    repeats: usize,
    base_seed: u64,
}

impl Default for RawSplit {
    fn default() -> Self {
        RawSplit {
            mode: "random".into(),
            fractions: DEFAULT_FRACTIONS.to_vec(),
            repeats: DEFAULT_REPEATS,
            base_seed: 0,
        }
    }
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawDistance {
    gamma: f64,
    window_fraction: f64,
    k_fraction: f64,
    mpdist_z_normalized: bool,
}

impl Default for RawDistance {
    fn default() -> Self {
        RawDistance {
            gamma: DEFAULT_GAMMA,
            window_fraction: DEFAULT_WINDOW_FRACTION,
            k_fraction: DEFAULT_K_FRACTION,
            mpdist_z_normalized: false,
        }
    }
}

impl RawDistance {
    fn kind(&self, name: &str) -> Result<DistanceKind> {
        let kind = match DistanceKind::from_name(name)? {
            DistanceKind::SoftDtwDivergence { .. } => {
                DistanceKind::SoftDtwDivergence { gamma: self.gamma }
            }
            DistanceKind::MpDist { .. } => DistanceKind::MpDist {
                window_fraction: self.window_fraction,
                k_fraction: self.k_fraction,
                z_normalized: self.mpdist_z_normalized,
            },
            other => other,
        };
        kind.validate()?;
        Ok(kind)
    }
}

impl ExperimentSpec {
    /// Parses a TOML experiment file. Relative paths are taken relative to
    /// `base_dir`.
    ///
    /// ```
    /// use tsgraph::harness::{ExperimentSpec, Method, SplitMode};
    ///
    /// let spec = ExperimentSpec::from_toml_str(
    ///     r#"
    ///     datasets = ["ECG200"]
    ///     distances = ["sdtw"]
    ///     methods = ["ac", "1nn"]
    ///
    ///     [split]
    ///     mode = "fixed_archive_train"
    ///
    ///     [allen_cahn]
    ///     m_e = 30
    ///     "#,
    ///     "/data".as_ref(),
    /// )?;
    /// assert_eq!(spec.datasets[0], std::path::Path::new("/data/ECG200"));
    /// assert_eq!(spec.methods, vec![Method::AllenCahn, Method::OneNn]);
    /// assert_eq!(spec.split, SplitMode::FixedArchiveTrain);
    /// assert_eq!(spec.allen_cahn.m_e, 30);
    /// assert_eq!(spec.self_tuning_k, 7);
    /// # Ok::<(), tsgraph::Error>(())
    /// ```
    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self> {
        let raw: RawSpec = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let resolve = |p: PathBuf| if p.is_absolute() { p } else { base_dir.join(p) };
        let defaults = ExperimentSpec::default();
        let distances = match raw.distances {
            Some(names) => names
                .iter()
                .map(|n| raw.distance.kind(n))
                .collect::<Result<_>>()?,
            None => defaults
                .distances
                .iter()
                .map(|k| raw.distance.kind(k.name()))
                .collect::<Result<_>>()?,
        };
        let methods = match raw.methods {
            Some(names) => names
                .iter()
                .map(|n| Method::from_name(n))
                .collect::<Result<_>>()?,
            None => defaults.methods,
        };
        let split = match raw.split.mode.as_str() {
            "random" => SplitMode::Random {
                fractions: raw.split.fractions,
                repeats: raw.split.repeats,
                base_seed: raw.split.base_seed,
            },
            "fixed_archive_train" | "fixed" => SplitMode::FixedArchiveTrain,
            other => return Err(Error::Config(format!("unknown split mode {other:?}"))),
        };
        let spec = ExperimentSpec {
            datasets: raw.datasets.into_iter().map(resolve).collect(),
            distances,
            methods,
            self_tuning_k: raw.self_tuning_k,
            split,
            z_normalize: raw.z_normalize,
            cache_dir: raw.cache_dir.map(resolve),
            out: raw.out.map(resolve),
            workers: raw.workers,
            allen_cahn: raw.allen_cahn,
            linear_system: raw.linear_system,
            gcn: raw.gcn,
            gcn_features: raw.gcn_features,
        };
        spec.validate_fields()?;
        Ok(spec)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::from_toml_str(&text, base).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    fn validate_fields(&self) -> Result<()> {
        if self.self_tuning_k == 0 {
            return Err(Error::Config("self_tuning_k must be positive".into()));
        }
        if let SplitMode::Random {
            fractions, repeats, ..
        } = &self.split
        {
            if *repeats == 0 {
                return Err(Error::Config("repeats must be at least 1".into()));
            }
            if fractions.is_empty() {
                return Err(Error::Config("no split fractions given".into()));
            }
            if let Some(f) = fractions.iter().find(|f| !(**f > 0.0 && **f <= 1.0)) {
                return Err(Error::Config(format!("fraction {f} outside (0, 1]")));
            }
        }
        for kind in &self.distances {
            kind.validate()?;
        }
        Ok(())
    }

    /// Checks everything a run needs, including that the grid is not empty.
    pub fn validate(&self) -> Result<()> {
        self.validate_fields()?;
        if self.datasets.is_empty() {
            return Err(Error::Config("no datasets given".into()));
        }
        if self.distances.is_empty() || self.methods.is_empty() {
            return Err(Error::Config(
                "need at least one distance and one method".into(),
            ));
        }
        Ok(())
    }
}

const EXTENSIONS: [&str; 4] = ["tsv", "csv", "txt", ""];

fn with_suffix(dir: &Path, stem: &str, ext: &str) -> PathBuf {
    if ext.is_empty() {
        dir.join(stem)
    } else {
        dir.join(format!("{stem}.{ext}"))
    }
}

/// Loads a dataset given as
///
/// * a directory `NAME/` holding `NAME_TRAIN.tsv` and `NAME_TEST.tsv`
///   (`.csv`, `.txt` or no extension also work),
/// * a `NAME_TRAIN.*` file, paired with `NAME_TEST.*` next to it when that
///   exists, or
/// * any other single file.
pub fn load_dataset(path: &Path) -> Result<Dataset> {
    if path.is_dir() {
        let name = path
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        for ext in EXTENSIONS {
            let train = with_suffix(path, &format!("{name}_TRAIN"), ext);
            let test = with_suffix(path, &format!("{name}_TEST"), ext);
            if train.is_file() && test.is_file() {
                return load_ucr_train_test(train, test);
            }
        }
        return Err(Error::Data(format!(
            "{} holds no {name}_TRAIN/{name}_TEST pair",
            path.display()
        )));
    }
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    if let Some(base) = stem.strip_suffix("_TRAIN") {
        let ext = path
            .extension()
            .map(|e| e.to_string_lossy().into_owned())
            .unwrap_or_default();
        let dir = path.parent().unwrap_or_else(|| Path::new("."));
        let test = with_suffix(dir, &format!("{base}_TEST"), &ext);
        if test.is_file() {
            return load_ucr_train_test(path, test);
        }
    }
    load_ucr_tsv(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_names() {
        for m in Method::ALL {
            assert_eq!(Method::from_name(m.name()).unwrap(), m);
        }
        assert_eq!(Method::from_name("1nn").unwrap(), Method::OneNn);
        assert_eq!(Method::from_name("LS").unwrap(), Method::LinearSystem);
        assert!(Method::from_name("svm").is_err());
    }

    #[test]
    fn empty_config_uses_defaults() {
        let spec = ExperimentSpec::from_toml_str("", Path::new(".")).unwrap();
        assert_eq!(spec.distances.len(), 4);
        assert_eq!(spec.methods, Method::ALL.to_vec());
        assert_eq!(spec.split, SplitMode::default());
        assert!(spec.validate().is_err());
    }

    #[test]
    fn distance_parameters_apply() {
        let spec = ExperimentSpec::from_toml_str(
            "distances = [\"sdtw\", \"mpdist\"]\n[distance]\ngamma = 0.5\nwindow_fraction = 0.25\n",
            Path::new("."),
        )
        .unwrap();
        assert_eq!(
            spec.distances[0],
            DistanceKind::SoftDtwDivergence { gamma: 0.5 }
        );
        assert!(matches!(
            spec.distances[1],
            DistanceKind::MpDist { window_fraction, .. } if window_fraction == 0.25
        ));
    }

    #[test]
    fn rejects_bad_configs() {
        let base = Path::new(".");
        assert!(ExperimentSpec::from_toml_str("bogus = 1", base).is_err());
        assert!(ExperimentSpec::from_toml_str("[split]\nrepeats = 0", base).is_err());
        assert!(ExperimentSpec::from_toml_str("[split]\nfractions = [0.0]", base).is_err());
        assert!(ExperimentSpec::from_toml_str("[split]\nmode = \"kfold\"", base).is_err());
        assert!(ExperimentSpec::from_toml_str("[gcn]\nlayers = 3", base).is_err());
        assert!(ExperimentSpec::from_toml_str("[distance]\ngamma = -1", base).is_err());
    }

    #[test]
    fn loads_directory_and_train_file() {
        let dir = tempfile::tempdir().unwrap();
        let data = dir.path().join("Toy");
        fs::create_dir(&data).unwrap();
        fs::write(data.join("Toy_TRAIN.tsv"), "1\t0.0\t1.0\n2\t1.0\t0.0\n").unwrap();
        fs::write(
            data.join("Toy_TEST.tsv"),
            "1\t0.1\t1.0\n2\t1.0\t0.1\n2\t0.9\t0.0\n",
        )
        .unwrap();
        let a = load_dataset(&data).unwrap();
        assert_eq!(a.len(), 5);
        assert_eq!(a.archive_train_len(), Some(2));
        assert_eq!(a.name(), "Toy");
        let b = load_dataset(&data.join("Toy_TRAIN.tsv")).unwrap();
        assert_eq!(b.fingerprint(), a.fingerprint());
        let c = load_dataset(&data.join("Toy_TEST.tsv")).unwrap();
        assert_eq!(c.len(), 3);
        assert!(load_dataset(dir.path()).is_err());
    }
}
