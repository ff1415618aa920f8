//! Dataset ingestion, class selection, PCA compression, label bit coding,
//! splits, and samplers.

pub mod cifar;
pub mod idx;
pub mod pca;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeding::stream_rng;

pub use cifar::load_cifar10;
pub use idx::load_idx;
pub use pca::{fit_pca, PcaModel};

/// Width of the amplitude register every encoded row is padded to
/// (5 qubits).
pub const REGISTER_DIM: usize = 32;

/// Default number of PCA features.
pub const PCA_COMPONENTS: usize = 32;

/// Raw pixel data: row-major `num_samples x raw_dim` scaled to [0, 1], with
/// source labels.
#[derive(Debug, Clone)]
pub struct RawDataset {
    pub images: Vec<f64>,
    pub labels: Vec<u8>,
    pub raw_dim: usize,
    pub num_samples: usize,
}

impl RawDataset {
    pub fn new(images: Vec<f64>, labels: Vec<u8>, raw_dim: usize) -> Result<Self> {
        if raw_dim == 0 || !images.len().is_multiple_of(raw_dim) {
            return Err(Error::InvalidArgument(format!(
                "pixel buffer of {} values is not a multiple of raw_dim {raw_dim}",
                images.len()
            )));
        }
        let num_samples = images.len() / raw_dim;
        if labels.len() != num_samples {
            return Err(Error::InvalidArgument(format!(
                "{} labels for {num_samples} rows",
                labels.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l > 9) {
            return Err(Error::InvalidArgument(format!(
                "source label {bad} outside the 0..=9 range"
            )));
        }
        Ok(RawDataset {
            images,
            labels,
            raw_dim,
            num_samples,
        })
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.images[i * self.raw_dim..(i + 1) * self.raw_dim]
    }
}

/// Ordered list of source classes defining a task; position in the list is
/// the task label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassMap {
    classes: Vec<u8>,
}

impl ClassMap {
    pub fn new(classes: Vec<u8>) -> Result<Self> {
        let k = classes.len();
        if !(k == 2 || k == 4 || k == 8) {
            return Err(Error::InvalidArgument(format!(
                "a task needs 2, 4, or 8 classes, got {k}"
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for &c in &classes {
            if !seen.insert(c) {
                return Err(Error::InvalidArgument(format!(
                    "duplicate class {c} in task definition"
                )));
            }
        }
        Ok(ClassMap { classes })
    }

    pub fn classes(&self) -> &[u8] {
        &self.classes
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn num_bits(&self) -> usize {
        self.classes.len().trailing_zeros() as usize
    }

    /// Task label for a source label, if the class is part of the task.
    pub fn task_label(&self, source: u8) -> Option<usize> {
        self.classes.iter().position(|&c| c == source)
    }
}

/// Source class lists for the named tasks. The 2- and 4-class tasks are
/// prefixes of the 8-class list.
pub fn task_preset(name: &str) -> Result<(String, ClassMap)> {
    let (dataset, k) = name
        .rsplit_once('-')
        .ok_or_else(|| Error::InvalidArgument(format!("task {name:?} is not <dataset>-<classes>")))?;
    let k: usize = k
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("bad class count in task {name:?}")))?;
    let full: [u8; 8] = match dataset {
        "mnist" => [0, 1, 6, 7, 2, 3, 4, 5],
        // t-shirt/top, trouser, pullover, dress, coat, sandal, shirt, sneaker
        "fashion" | "fashion-mnist" => [0, 1, 2, 3, 4, 5, 6, 7],
        // airplane, automobile, bird, cat, deer, dog, frog, horse
        "cifar" | "cifar10" => [0, 1, 2, 3, 4, 5, 6, 7],
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown dataset {other:?} (expected mnist, fashion, or cifar)"
            )))
        }
    };
    if !(k == 2 || k == 4 || k == 8) {
        return Err(Error::InvalidArgument(format!(
            "task {name:?} must select 2, 4, or 8 classes"
        )));
    }
    Ok((dataset.to_string(), ClassMap::new(full[..k].to_vec())?))
}

/// Bit signs for a task label, MSB first: bit value 1 maps to +1, 0 to -1.
pub fn class_to_bit_signs(task_label: usize, num_bits: usize) -> Vec<f64> {
    (0..num_bits)
        .map(|b| {
            if task_label >> (num_bits - 1 - b) & 1 == 1 {
                1.0
            } else {
                -1.0
            }
        })
        .collect()
}

/// PCA-compressed, L2-normalized feature rows with task and bit labels and
/// a train/test split.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EncodedDataset {
    /// Rows of length [`REGISTER_DIM`], unit norm.
    pub features: Vec<Vec<f64>>,
    pub task_labels: Vec<usize>,
    /// Rows of width `num_bits` with entries in {-1, +1}.
    pub bit_labels: Vec<Vec<f64>>,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub num_bits: usize,
    pub num_classes: usize,
}

impl EncodedDataset {
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    /// Check the structural invariants: unit norms, consistent labels, and a
    /// disjoint, exhaustive split.
    pub fn validate(&self) -> Result<()> {
        if self.task_labels.len() != self.len() || self.bit_labels.len() != self.len() {
            return Err(Error::Data("label rows do not match feature rows".into()));
        }
        for (i, row) in self.features.iter().enumerate() {
            let norm: f64 = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-9 {
                return Err(Error::Data(format!("row {i} has norm {norm}")));
            }
        }
        for (i, (&label, bits)) in self.task_labels.iter().zip(&self.bit_labels).enumerate() {
            if label >= self.num_classes {
                return Err(Error::Data(format!("row {i} has task label {label}")));
            }
            if *bits != class_to_bit_signs(label, self.num_bits) {
                return Err(Error::Data(format!("row {i} bit labels disagree with task label")));
            }
        }
        let mut seen = vec![false; self.len()];
        for &i in self.train.iter().chain(&self.test) {
            if i >= self.len() || seen[i] {
                return Err(Error::Data("split is not a disjoint cover".into()));
            }
            seen[i] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Data("split does not cover every row".into()));
        }
        Ok(())
    }

    /// Uniform sample of `size` training rows, with replacement.
    pub fn sample_batch<R: Rng>(&self, size: usize, rng: &mut R) -> Result<Vec<usize>> {
        if self.train.is_empty() {
            return Err(Error::InvalidArgument("train split is empty".into()));
        }
        Ok((0..size)
            .map(|_| self.train[rng.gen_range(0..self.train.len())])
            .collect())
    }

    /// Binary membership view for one class over the training split:
    /// in-class rows keep the -1 sign, an equally sized uniform sample of
    /// the remaining classes gets +1.
    pub fn balanced_binary_view<R: Rng>(&self, target_class: usize, rng: &mut R) -> Result<EncodedDataset> {
        if target_class >= self.num_classes {
            return Err(Error::InvalidArgument(format!(
                "class {target_class} outside 0..{}",
                self.num_classes
            )));
        }
        let in_class: Vec<usize> = self
            .train
            .iter()
            .copied()
            .filter(|&i| self.task_labels[i] == target_class)
            .collect();
        if in_class.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "class {target_class} absent from the train split"
            )));
        }
        let mut others: Vec<usize> = self
            .train
            .iter()
            .copied()
            .filter(|&i| self.task_labels[i] != target_class)
            .collect();
        let group = in_class.len().min(others.len());
        others.shuffle(rng);
        others.truncate(group);
        let mut kept = in_class;
        kept.truncate(group);
        kept.extend(others);

        let features: Vec<Vec<f64>> = kept.iter().map(|&i| self.features[i].clone()).collect();
        let task_labels: Vec<usize> = kept
            .iter()
            .map(|&i| usize::from(self.task_labels[i] != target_class))
            .collect();
        let bit_labels: Vec<Vec<f64>> = task_labels
            .iter()
            .map(|&l| class_to_bit_signs(l, 1))
            .collect();
        let train = (0..kept.len()).collect();
        Ok(EncodedDataset {
            features,
            task_labels,
            bit_labels,
            train,
            test: Vec::new(),
            num_bits: 1,
            num_classes: 2,
        })
    }

    /// Two-class view over the training split for the pair `(lo, hi)`:
    /// `lo` gets the -1 sign, `hi` gets +1.
    pub fn pair_view(&self, lo: usize, hi: usize) -> Result<EncodedDataset> {
        if lo >= hi || hi >= self.num_classes {
            return Err(Error::InvalidArgument(format!(
                "bad class pair ({lo}, {hi}) for {} classes",
                self.num_classes
            )));
        }
        let kept: Vec<usize> = self
            .train
            .iter()
            .copied()
            .filter(|&i| self.task_labels[i] == lo || self.task_labels[i] == hi)
            .collect();
        if kept.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "classes {lo} and {hi} absent from the train split"
            )));
        }
        let features: Vec<Vec<f64>> = kept.iter().map(|&i| self.features[i].clone()).collect();
        let task_labels: Vec<usize> = kept
            .iter()
            .map(|&i| usize::from(self.task_labels[i] == hi))
            .collect();
        let bit_labels: Vec<Vec<f64>> = task_labels
            .iter()
            .map(|&l| class_to_bit_signs(l, 1))
            .collect();
        let train = (0..kept.len()).collect();
        Ok(EncodedDataset {
            features,
            task_labels,
            bit_labels,
            train,
            test: Vec::new(),
            num_bits: 1,
            num_classes: 2,
        })
    }
}

/// Shuffled 80/20 (by default) split of `0..n`.
pub fn split_indices(n: usize, train_fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = stream_rng(seed, "split");
    order.shuffle(&mut rng);
    let cut = ((n as f64) * train_fraction).round() as usize;
    let cut = cut.min(n);
    let test = order.split_off(cut);
    (order, test)
}

fn project_rows(
    raw: &RawDataset,
    rows: &[usize],
    task_labels: &[usize],
    pca: &PcaModel,
    num_bits: usize,
    num_classes: usize,
    split: (Vec<usize>, Vec<usize>),
) -> Result<EncodedDataset> {
    let (train, test) = split;
    if pca.num_components > REGISTER_DIM {
        return Err(Error::InvalidArgument(format!(
            "{} PCA components exceed the {REGISTER_DIM}-amplitude register",
            pca.num_components
        )));
    }
    let mut features = Vec::with_capacity(rows.len());
    for (pos, &r) in rows.iter().enumerate() {
        let projected = pca.project(raw.row(r))?;
        let norm: f64 = projected.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return Err(Error::Data(format!(
                "sample {pos} (source row {r}) projects to the zero vector and cannot be embedded"
            )));
        }
        let mut padded = vec![0.0; REGISTER_DIM];
        for (dst, x) in padded.iter_mut().zip(&projected) {
            *dst = x / norm;
        }
        features.push(padded);
    }
    let bit_labels = task_labels
        .iter()
        .map(|&l| class_to_bit_signs(l, num_bits))
        .collect();
    let ds = EncodedDataset {
        features,
        task_labels: task_labels.to_vec(),
        bit_labels,
        train,
        test,
        num_bits,
        num_classes,
    };
    ds.validate()?;
    Ok(ds)
}

/// Filter `raw` to the task's classes, project through a fitted PCA basis,
/// normalize, attach bit labels, and split 80/20 under `seed`.
pub fn encode(raw: &RawDataset, map: &ClassMap, pca: &PcaModel, seed: u64) -> Result<EncodedDataset> {
    let mut rows = Vec::new();
    let mut task_labels = Vec::new();
    for i in 0..raw.num_samples {
        if let Some(t) = map.task_label(raw.labels[i]) {
            rows.push(i);
            task_labels.push(t);
        }
    }
    let split = split_indices(rows.len(), 0.8, seed);
    project_rows(raw, &rows, &task_labels, pca, map.num_bits(), map.num_classes(), split)
}

/// End-to-end preparation knobs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PrepareOptions {
    pub seed: u64,
    /// Optional cap on the number of task rows (uniform subsample).
    pub limit: Option<usize>,
    pub pca_components: usize,
    /// Fit the PCA basis on all task rows instead of the train split only.
    pub pca_on_all: bool,
    pub train_fraction: f64,
}

impl Default for PrepareOptions {
    fn default() -> Self {
        PrepareOptions {
            seed: 0,
            limit: None,
            pca_components: PCA_COMPONENTS,
            pca_on_all: false,
            train_fraction: 0.8,
        }
    }
}

/// A fitted dataset ready for training, bundled with its PCA basis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PreparedDataset {
    pub encoded: EncodedDataset,
    pub pca: PcaModel,
    pub class_map: ClassMap,
    pub seed: u64,
}

/// Filter, subsample, split, fit PCA (train rows only unless `pca_on_all`),
/// and encode.
pub fn prepare_dataset(raw: &RawDataset, map: &ClassMap, opts: &PrepareOptions) -> Result<PreparedDataset> {
    let mut rows = Vec::new();
    let mut task_labels = Vec::new();
    for i in 0..raw.num_samples {
        if let Some(t) = map.task_label(raw.labels[i]) {
            rows.push(i);
            task_labels.push(t);
        }
    }
    if rows.is_empty() {
        return Err(Error::Data("no rows match the task's classes".into()));
    }
    if let Some(limit) = opts.limit {
        if limit < rows.len() {
            let mut order: Vec<usize> = (0..rows.len()).collect();
            order.shuffle(&mut stream_rng(opts.seed, "subsample"));
            order.truncate(limit);
            order.sort_unstable();
            rows = order.iter().map(|&i| rows[i]).collect();
            task_labels = order.iter().map(|&i| task_labels[i]).collect();
        }
    }
    let (train, test) = split_indices(rows.len(), opts.train_fraction, opts.seed);

    let fit_rows: Vec<usize> = if opts.pca_on_all {
        rows.clone()
    } else {
        train.iter().map(|&i| rows[i]).collect()
    };
    let split = (train, test);
    let mut buffer = Vec::with_capacity(fit_rows.len() * raw.raw_dim);
    for &r in &fit_rows {
        buffer.extend_from_slice(raw.row(r));
    }
    let pca = fit_pca(&buffer, fit_rows.len(), raw.raw_dim, opts.pca_components)?;

    let encoded = project_rows(
        raw,
        &rows,
        &task_labels,
        &pca,
        map.num_bits(),
        map.num_classes(),
        split,
    )?;
    Ok(PreparedDataset {
        encoded,
        pca,
        class_map: map.clone(),
        seed: opts.seed,
    })
}

pub const DATASET_FORMAT: &str = "quilt-dataset";
pub const DATASET_VERSION: u32 = 1;

/// On-disk wrapper for a prepared dataset, with a leading format tag.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetFile {
    pub format: String,
    pub version: u32,
    pub source: String,
    pub task: String,
    pub prepared: PreparedDataset,
}

/// Write a prepared dataset to a versioned JSON file.
pub fn save_prepared(path: &std::path::Path, prepared: &PreparedDataset, source: &str, task: &str) -> Result<()> {
    let file = DatasetFile {
        format: DATASET_FORMAT.to_string(),
        version: DATASET_VERSION,
        source: source.to_string(),
        task: task.to_string(),
        prepared: prepared.clone(),
    };
    std::fs::write(path, serde_json::to_string(&file)?)?;
    Ok(())
}

/// Read a prepared dataset back, checking the format tag and version.
pub fn load_prepared(path: &std::path::Path) -> Result<DatasetFile> {
    let text = std::fs::read_to_string(path)?;
    let file: DatasetFile = serde_json::from_str(&text).map_err(|e| Error::Incompatible(format!(
        "{} is not a readable dataset file: {e}",
        path.display()
    )))?;
    if file.format != DATASET_FORMAT {
        return Err(Error::Incompatible(format!(
            "{} has format tag {:?}, expected {DATASET_FORMAT:?}",
            path.display(),
            file.format
        )));
    }
    if file.version != DATASET_VERSION {
        return Err(Error::Incompatible(format!(
            "dataset version {} is not supported (this build reads version {DATASET_VERSION})",
            file.version
        )));
    }
    file.prepared.encoded.validate()?;
    Ok(file)
}
