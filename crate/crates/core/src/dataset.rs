//! Binary-labeled time-series collections in the UCR archive layout.
//!
//! A UCR file holds one series per line: a class token followed by the
//! values, separated by tabs or commas. The two raw class tokens are mapped
//! onto [`Label::Negative`] and [`Label::Positive`] in lexicographic order,
//! so `-1`/`1` and `1`/`2` both come out as negative/positive without any
//! configuration.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// One of the two classes of a binary problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    /// `-1.0` or `+1.0`.
    pub fn sign(self) -> f64 {
        match self {
            Label::Negative => -1.0,
            Label::Positive => 1.0,
        }
    }

    /// Thresholds a real value at zero. Zero itself maps to `Positive`.
    pub fn from_value(value: f64) -> Label {
        if value >= 0.0 {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    pub fn opposite(self) -> Label {
        match self {
            Label::Negative => Label::Positive,
            Label::Positive => Label::Negative,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
    label: Option<Label>,
}

impl TimeSeries {
    /// Rejects empty sequences and non-finite values.
    pub fn new(values: Vec<f64>, label: Option<Label>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySeries);
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!(
                "non-finite value {} at position {pos}",
                values[pos]
            )));
        }
        Ok(TimeSeries { values, label })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn label(&self) -> Option<Label> {
        self.label
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Zero mean, unit (population) standard deviation. Constant series
    /// become all zeros.
    pub fn z_normalized(&self) -> TimeSeries {
        let n = self.values.len() as f64;
        let mean = self.values.iter().sum::<f64>() / n;
        let var = self.values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let std = var.sqrt();
        let values = if std > 0.0 {
            self.values.iter().map(|v| (v - mean) / std).collect()
        } else {
            vec![0.0; self.values.len()]
        };
        TimeSeries {
            values,
            label: self.label,
        }
    }
}

/// A labeled pool of series with exactly two classes.
#[derive(Clone, Debug)]
pub struct Dataset {
    name: String,
    series: Vec<TimeSeries>,
    class_values: [String; 2],
    archive_train_len: Option<usize>,
}

impl Dataset {
    /// Builds a dataset from `(class token, values)` records.
    pub fn from_records<I>(name: impl Into<String>, records: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, Vec<f64>)>,
    {
        let records: Vec<(String, Vec<f64>)> = records.into_iter().collect();
        let mut tokens: Vec<&str> = records.iter().map(|(t, _)| t.as_str()).collect();
        tokens.sort_unstable();
        tokens.dedup();
        if tokens.len() != 2 {
            return Err(Error::UnsupportedDataset(format!(
                "expected exactly two classes, found {} ({})",
                tokens.len(),
                tokens.join(", ")
            )));
        }
        let class_values = [tokens[0].to_string(), tokens[1].to_string()];
        let series = records
            .into_iter()
            .map(|(token, values)| {
                let label = if token == class_values[0] {
                    Label::Negative
                } else {
                    Label::Positive
                };
                TimeSeries::new(values, Some(label))
            })
            .collect::<Result<Vec<_>>>()?;
        if series.len() < 2 {
            return Err(Error::UnsupportedDataset(
                "a dataset needs at least two series".into(),
            ));
        }
        Ok(Dataset {
            name: name.into(),
            series,
            class_values,
            archive_train_len: None,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn series(&self) -> &[TimeSeries] {
        &self.series
    }

    pub fn len(&self) -> usize {
        self.series.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }

    /// The raw class tokens mapped to negative and positive, in that order.
    pub fn class_values(&self) -> &[String; 2] {
        &self.class_values
    }

    /// Number of leading series that came from an archive TRAIN file, if the
    /// dataset was assembled by [`load_ucr_train_test`].
    pub fn archive_train_len(&self) -> Option<usize> {
        self.archive_train_len
    }

    /// Ground-truth labels. Every series loaded from a file carries one.
    pub fn labels(&self) -> Vec<Label> {
        self.series
            .iter()
            .map(|s| s.label().expect("dataset series are labeled"))
            .collect()
    }

    pub fn class_indices(&self, label: Label) -> Vec<usize> {
        self.series
            .iter()
            .enumerate()
            .filter(|(_, s)| s.label() == Some(label))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn has_uniform_length(&self) -> bool {
        let first = self.series[0].len();
        self.series.iter().all(|s| s.len() == first)
    }

    pub fn min_length(&self) -> usize {
        self.series.iter().map(TimeSeries::len).min().unwrap_or(0)
    }

    pub fn z_normalized(&self) -> Dataset {
        Dataset {
            series: self.series.iter().map(TimeSeries::z_normalized).collect(),
            ..self.clone()
        }
    }

    /// SHA-256 over the parsed content (lengths, values and labels). Two
    /// files that parse to the same numbers share a fingerprint.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update((self.series.len() as u64).to_le_bytes());
        for s in &self.series {
            let tag: u8 = match s.label() {
                None => 0,
                Some(Label::Negative) => 1,
                Some(Label::Positive) => 2,
            };
            hasher.update([tag]);
            hasher.update((s.len() as u64).to_le_bytes());
            for v in s.values() {
                hasher.update(v.to_le_bytes());
            }
        }
        hasher
            .finalize()
            .iter()
            .fold(String::with_capacity(64), |mut out, b| {
                let _ = write!(out, "{b:02x}");
                out
            })
    }

    /// Tab-separated UCR text. Values use the shortest representation that
    /// parses back to the same `f64`.
    pub fn to_ucr_tsv(&self) -> String {
        let mut out = String::new();
        for s in &self.series {
            let token = match s.label() {
                Some(Label::Negative) => &self.class_values[0],
                _ => &self.class_values[1],
            };
            out.push_str(token);
            for v in s.values() {
                let _ = write!(out, "\t{v}");
            }
            out.push('\n');
        }
        out
    }
}

fn parse_records(path: &Path, text: &str) -> Result<Vec<(String, Vec<f64>)>> {
    let mut records = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: lineno + 1,
            message,
        };
        let mut fields = line.split(['\t', ',']).map(str::trim);
        let token = match fields.next() {
            Some(t) if !t.is_empty() => t.to_string(),
            _ => return Err(parse_err("missing class token".into())),
        };
        let mut values = Vec::new();
        for field in fields.filter(|f| !f.is_empty()) {
            let v: f64 = field
                .parse()
                .map_err(|_| parse_err(format!("not a number: {field:?}")))?;
            if !v.is_finite() {
                return Err(Error::Data(format!(
                    "{}:{}: non-finite value {field:?}",
                    path.display(),
                    lineno + 1
                )));
            }
            values.push(v);
        }
        if values.is_empty() {
            return Err(parse_err("no values after the class token".into()));
        }
        records.push((token, values));
    }
    Ok(records)
}

fn dataset_name(path: &Path) -> String {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    stem.trim_end_matches("_TRAIN")
        .trim_end_matches("_TEST")
        .to_string()
}

/// Loads one UCR TSV/CSV file.
pub fn load_ucr_tsv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let records = parse_records(path, &text)?;
    Dataset::from_records(dataset_name(path), records)
}

/// Concatenates an archive TRAIN file and its TEST file into one pool. The
/// TRAIN series come first, and their count is kept for the fixed archive
/// split.
pub fn load_ucr_train_test(train: impl AsRef<Path>, test: impl AsRef<Path>) -> Result<Dataset> {
    let (train, test) = (train.as_ref(), test.as_ref());
    let mut records = parse_records(train, &fs::read_to_string(train)?)?;
    let train_len = records.len();
    records.extend(parse_records(test, &fs::read_to_string(test)?)?);
    let mut dataset = Dataset::from_records(dataset_name(train), records)?;
    dataset.archive_train_len = Some(train_len);
    Ok(dataset)
}

/// The indices whose labels are revealed to a classifier.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledSplit {
    indices: Vec<usize>,
    seed: Option<u64>,
    fraction: f64,
}

impl LabeledSplit {
    /// Validates and sorts `indices`. Both classes must be present.
    pub fn from_indices(dataset: &Dataset, mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        let before = indices.len();
        indices.dedup();
        if indices.len() != before {
            return Err(Error::Split("duplicate indices".into()));
        }
        if let Some(&last) = indices.last() {
            if last >= dataset.len() {
                return Err(Error::Split(format!(
                    "index {last} out of range for {} series",
                    dataset.len()
                )));
            }
        }
        let labels = dataset.labels();
        for class in [Label::Negative, Label::Positive] {
            if !indices.iter().any(|&i| labels[i] == class) {
                return Err(Error::Split(format!(
                    "no labeled series of class {class:?}"
                )));
            }
        }
        let fraction = indices.len() as f64 / dataset.len() as f64;
        Ok(LabeledSplit {
            indices,
            seed: None,
            fraction,
        })
    }

    /// The archive's own TRAIN part as the labeled set.
    pub fn archive_train(dataset: &Dataset) -> Result<Self> {
        let train_len = dataset.archive_train_len().ok_or_else(|| {
            Error::Split(format!(
                "dataset {} was not loaded from a TRAIN/TEST pair",
                dataset.name()
            ))
        })?;
        Self::from_indices(dataset, (0..train_len).collect())
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn fraction(&self) -> f64 {
        self.fraction
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// `mask[i]` is true when series `i` is labeled.
    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut mask = vec![false; n];
        for &i in &self.indices {
            mask[i] = true;
        }
        mask
    }

    /// Indices not in the labeled set.
    pub fn complement(&self, n: usize) -> Vec<usize> {
        let mask = self.mask(n);
        (0..n).filter(|&i| !mask[i]).collect()
    }
}

/// Number of labeled series for a fraction: `n * fraction` rounded half up,
/// clamped to `[2, n]`.
pub fn split_size(n: usize, fraction: f64) -> Result<usize> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Split(format!("fraction {fraction} outside (0, 1]")));
    }
    let raw = (n as f64 * fraction + 0.5).floor() as usize;
    if raw == 0 {
        return Err(Error::Split(format!(
            "fraction {fraction} of {n} series labels nothing"
        )));
    }
    Ok(raw.clamp(2, n))
}

/// Stratified random labeled set, reproducible for a fixed
/// `(dataset, fraction, seed)`.
///
/// Each class receives a share proportional to its frequency and at least
/// one index; the majority class gives one up when rounding would leave a
/// class empty.
pub fn random_split(dataset: &Dataset, fraction: f64, seed: u64) -> Result<LabeledSplit> {
    let n = dataset.len();
    let size = split_size(n, fraction)?;
    let negatives = dataset.class_indices(Label::Negative);
    let positives = dataset.class_indices(Label::Positive);

    let share = size as f64 * positives.len() as f64 / n as f64;
    let mut take_pos = ((share + 0.5).floor() as usize).clamp(1, positives.len().min(size - 1));
    let mut take_neg = size - take_pos;
    if take_neg > negatives.len() {
        take_neg = negatives.len();
        take_pos = size - take_neg;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut indices: Vec<usize> = index::sample(&mut rng, negatives.len(), take_neg)
        .into_iter()
        .map(|k| negatives[k])
        .collect();
    indices.extend(
        index::sample(&mut rng, positives.len(), take_pos)
            .into_iter()
            .map(|k| positives[k]),
    );
    indices.sort_unstable();
    Ok(LabeledSplit {
        indices,
        seed: Some(seed),
        fraction,
    })
}
