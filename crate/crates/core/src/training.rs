//! Training orchestration: per-variant core training, membership and
//! pairwise classifier training, accuracy weighting, running-best
//! checkpointing, gate calibration, and metrics.

use serde::{Deserialize, Serialize};

use crate::adam::AdamState;
use crate::circuits::{build_core_variant, build_onevsall, evaluate_batch, CircuitSpec, VariantId};
use crate::data::EncodedDataset;
use crate::ensemble::{
    calibrate_gamma, decode_bits, predict_onevsone, predict_plain_ensemble, sign, ClassifierModel,
    EnsembleModel, Prediction, Role,
};
use crate::error::{Error, Result};
use crate::gradient::{loss_gradient, squared_loss};
use crate::parallel;
use crate::seeding::stream_rng;
use crate::statevector::NoiseModel;

/// Knobs shared by every training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub num_blocks: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 100,
            batch_size: 50,
            learning_rate: 0.05,
            num_blocks: 2,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::InvalidArgument("epochs must be >= 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidArgument("batch_size must be >= 1".into()));
        }
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(Error::InvalidArgument("learning_rate must be > 0".into()));
        }
        if self.num_blocks == 0 {
            return Err(Error::InvalidArgument("num_blocks must be >= 1".into()));
        }
        Ok(())
    }
}

/// One line of the per-epoch training log. `loss` and `batch_accuracy` are
/// measured on the epoch's batch at the pre-step parameters, reusing the
/// outputs the gradient computation already produced.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss: f64,
    pub batch_accuracy: f64,
}

/// A trained circuit with its training history.
#[derive(Debug, Clone)]
pub struct TrainedUnit {
    /// Identifies the model's RNG stream ("core:V1", "ova:3", ...).
    pub label: String,
    pub model: ClassifierModel,
    pub best_loss: f64,
    pub log: Vec<EpochRecord>,
    /// Every observed batch loss: one per epoch plus the post-training
    /// evaluation of the final parameters. `best_loss` is its minimum.
    pub loss_trace: Vec<f64>,
}

fn gather(ds: &EncodedDataset, idx: &[usize]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<usize>) {
    let feats = idx.iter().map(|&i| ds.features[i].clone()).collect();
    let bits = idx.iter().map(|&i| ds.bit_labels[i].clone()).collect();
    let tasks = idx.iter().map(|&i| ds.task_labels[i]).collect();
    (feats, bits, tasks)
}

fn decode_predictions(predictions: &[Vec<f64>]) -> Vec<usize> {
    predictions
        .iter()
        .map(|p| decode_bits(&p.iter().map(|&x| sign(x)).collect::<Vec<_>>()))
        .collect()
}

fn accuracy_against(predicted: &[usize], labels: &[usize]) -> f64 {
    if predicted.is_empty() {
        return 0.0;
    }
    let hits = predicted.iter().zip(labels).filter(|(p, l)| p == l).count();
    hits as f64 / predicted.len() as f64
}

/// Full-task accuracy of one circuit on the given rows: decode the signs of
/// its significant outputs and compare to the task labels.
fn circuit_task_accuracy(
    spec: &CircuitSpec,
    params: &[f64],
    ds: &EncodedDataset,
    rows: &[usize],
) -> Result<f64> {
    let (feats, _, tasks) = gather(ds, rows);
    let readout: Vec<usize> = (0..ds.num_bits).collect();
    let preds = evaluate_batch(spec, params, &feats, NoiseModel::NOISELESS, &readout)?;
    Ok(accuracy_against(&decode_predictions(&preds), &tasks))
}

/// The shared loop: uniform batches, parameter-shift gradients on the
/// significant qubits, Adam steps, and running-best parameter tracking.
/// The best parameters are whichever scored the lowest observed batch loss,
/// including the final post-step parameters.
fn run_training(
    spec: CircuitSpec,
    ds: &EncodedDataset,
    cfg: &TrainConfig,
    label: &str,
    role: Role,
) -> Result<TrainedUnit> {
    cfg.validate()?;
    if ds.num_bits > spec.readout.len() {
        return Err(Error::InvalidArgument(format!(
            "{} significant bits exceed the circuit's {} readouts",
            ds.num_bits,
            spec.readout.len()
        )));
    }
    let mut rng = stream_rng(cfg.seed, label);
    let mut params: Vec<f64> = (0..spec.num_params).map(|_| rand::Rng::gen::<f64>(&mut rng)).collect();
    let loss_readout: Vec<usize> = (0..ds.num_bits).collect();

    let mut adam = AdamState::new(spec.num_params, cfg.learning_rate);
    let mut best_params = params.clone();
    let mut best_loss = f64::INFINITY;
    let mut log = Vec::with_capacity(cfg.epochs);
    let mut loss_trace = Vec::with_capacity(cfg.epochs + 1);

    for epoch in 1..=cfg.epochs {
        let batch = ds.sample_batch(cfg.batch_size, &mut rng)?;
        let (feats, bits, tasks) = gather(ds, &batch);
        let eval = loss_gradient(&spec, &params, &feats, &bits, &loss_readout)?;
        if !eval.loss.is_finite() {
            return Err(Error::Training {
                epoch,
                message: format!("non-finite loss {}", eval.loss),
            });
        }
        let batch_accuracy = accuracy_against(&decode_predictions(&eval.predictions), &tasks);
        log.push(EpochRecord {
            epoch,
            loss: eval.loss,
            batch_accuracy,
        });
        loss_trace.push(eval.loss);
        if eval.loss < best_loss {
            best_loss = eval.loss;
            best_params.copy_from_slice(&params);
        }
        adam.step(&mut params, &eval.gradient)?;
    }

    // Score the post-step parameters too, so a final improving step is kept.
    let batch = ds.sample_batch(cfg.batch_size, &mut rng)?;
    let (feats, bits, _) = gather(ds, &batch);
    let preds = evaluate_batch(&spec, &params, &feats, NoiseModel::NOISELESS, &loss_readout)?;
    let final_loss = squared_loss(&preds, &bits)?;
    if !final_loss.is_finite() {
        return Err(Error::Training {
            epoch: cfg.epochs,
            message: format!("non-finite loss {final_loss} after the final step"),
        });
    }
    loss_trace.push(final_loss);
    if final_loss < best_loss {
        best_loss = final_loss;
        best_params.copy_from_slice(&params);
    }

    let model = ClassifierModel::new(spec, best_params, 0.0, role)?;
    Ok(TrainedUnit {
        label: label.to_string(),
        model,
        best_loss,
        log,
        loss_trace,
    })
}

/// Train one core-classifier variant and weight it by its full
/// training-split accuracy.
pub fn train_core(variant: VariantId, ds: &EncodedDataset, cfg: &TrainConfig) -> Result<TrainedUnit> {
    let spec = build_core_variant(variant, cfg.num_blocks)?;
    let label = format!("core:{variant}");
    let mut unit = run_training(spec, ds, cfg, &label, Role::Core(variant))?;
    unit.model.accuracy_weight =
        circuit_task_accuracy(&unit.model.spec, &unit.model.params, ds, &ds.train)?;
    Ok(unit)
}

/// Train the membership classifier for one class on a balanced binary view
/// of the training split (in-class rows carry the -1 sign).
pub fn train_onevsall(class: usize, ds: &EncodedDataset, cfg: &TrainConfig) -> Result<TrainedUnit> {
    let mut view_rng = stream_rng(cfg.seed, &format!("ova-view:{class}"));
    let view = ds.balanced_binary_view(class, &mut view_rng)?;
    let spec = build_onevsall(cfg.num_blocks)?;
    let label = format!("ova:{class}");
    let mut unit = run_training(spec, &view, cfg, &label, Role::OneVsAll { class })?;
    unit.model.accuracy_weight =
        circuit_task_accuracy(&unit.model.spec, &unit.model.params, &view, &view.train)?;
    Ok(unit)
}

/// Train the pairwise classifier for classes `(lo, hi)`.
pub fn train_pair(lo: usize, hi: usize, ds: &EncodedDataset, cfg: &TrainConfig) -> Result<TrainedUnit> {
    let view = ds.pair_view(lo, hi)?;
    let spec = build_onevsall(cfg.num_blocks)?;
    let label = format!("pair:{lo}-{hi}");
    let mut unit = run_training(spec, &view, cfg, &label, Role::OneVsOne { lo, hi })?;
    unit.model.accuracy_weight =
        circuit_task_accuracy(&unit.model.spec, &unit.model.params, &view, &view.train)?;
    Ok(unit)
}

/// A trained ensemble plus per-model training records.
#[derive(Debug, Clone)]
pub struct QuiltOutcome {
    pub ensemble: EnsembleModel,
    pub units: Vec<TrainedUnit>,
}

/// Train the full ensemble: the five core variants and one membership
/// classifier per class (all independent jobs, fanned out over the worker
/// pool), then calibrate the confidence gate on the training split.
pub fn train_quilt(ds: &EncodedDataset, cfg: &TrainConfig) -> Result<QuiltOutcome> {
    cfg.validate()?;
    enum Job {
        Core(VariantId),
        Ova(usize),
    }
    let mut jobs: Vec<Job> = VariantId::ALL.iter().map(|&v| Job::Core(v)).collect();
    jobs.extend((0..ds.num_classes).map(Job::Ova));
    let units: Vec<TrainedUnit> = parallel::map_slice(&jobs, |job| match job {
        Job::Core(v) => train_core(*v, ds, cfg),
        Job::Ova(c) => train_onevsall(*c, ds, cfg),
    })
    .into_iter()
    .collect::<Result<_>>()?;

    let cores: Vec<ClassifierModel> = units[..5].iter().map(|u| u.model.clone()).collect();
    let ova: Vec<ClassifierModel> = units[5..].iter().map(|u| u.model.clone()).collect();
    let mut ensemble = EnsembleModel::new(cores, ova, 0.0, ds.num_bits)?;

    let calibration: Vec<Vec<f64>> = ds.train.iter().map(|&i| ds.features[i].clone()).collect();
    ensemble.gamma = calibrate_gamma(&ensemble, &calibration)?;
    Ok(QuiltOutcome { ensemble, units })
}

/// Train the one-vs-one baseline: one binary classifier per unordered class
/// pair.
pub fn train_onevsone(ds: &EncodedDataset, cfg: &TrainConfig) -> Result<Vec<TrainedUnit>> {
    cfg.validate()?;
    let pairs: Vec<(usize, usize)> = (0..ds.num_classes)
        .flat_map(|a| ((a + 1)..ds.num_classes).map(move |b| (a, b)))
        .collect();
    parallel::map_slice(&pairs, |&(lo, hi)| train_pair(lo, hi, ds, cfg))
        .into_iter()
        .collect()
}

/// Train the plain-majority baseline: five instances of one variant that
/// differ only in their initial weights.
pub fn train_plain_ensemble(
    variant: VariantId,
    ds: &EncodedDataset,
    cfg: &TrainConfig,
) -> Result<Vec<TrainedUnit>> {
    cfg.validate()?;
    let instances: Vec<usize> = (0..5).collect();
    let units: Vec<TrainedUnit> = parallel::map_slice(&instances, |&i| {
        let spec = build_core_variant(variant, cfg.num_blocks)?;
        let label = format!("plain:{variant}:{i}");
        let mut unit = run_training(spec, ds, cfg, &label, Role::Core(variant))?;
        unit.model.accuracy_weight =
            circuit_task_accuracy(&unit.model.spec, &unit.model.params, ds, &ds.train)?;
        Ok(unit)
    })
    .into_iter()
    .collect::<Result<_>>()?;
    Ok(units)
}

/// Which classification method a set of trained circuits implements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Quilt,
    OneVsOne,
    Ensemble,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "quilt" => Ok(Method::Quilt),
            "onevsone" => Ok(Method::OneVsOne),
            "ensemble" => Ok(Method::Ensemble),
            other => Err(Error::InvalidArgument(format!(
                "unknown method {other:?} (expected quilt, onevsone, or ensemble)"
            ))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Method::Quilt => "quilt",
            Method::OneVsOne => "onevsone",
            Method::Ensemble => "ensemble",
        };
        write!(f, "{s}")
    }
}

/// A trained classifier of any method, ready for inference.
#[derive(Debug, Clone)]
pub enum RuntimeModel {
    Quilt(EnsembleModel),
    OneVsOne {
        models: Vec<ClassifierModel>,
        num_classes: usize,
    },
    PlainEnsemble {
        members: Vec<ClassifierModel>,
        num_bits: usize,
        num_classes: usize,
    },
}

impl RuntimeModel {
    pub fn method(&self) -> Method {
        match self {
            RuntimeModel::Quilt(_) => Method::Quilt,
            RuntimeModel::OneVsOne { .. } => Method::OneVsOne,
            RuntimeModel::PlainEnsemble { .. } => Method::Ensemble,
        }
    }

    pub fn num_classes(&self) -> usize {
        match self {
            RuntimeModel::Quilt(e) => e.num_classes,
            RuntimeModel::OneVsOne { num_classes, .. } => *num_classes,
            RuntimeModel::PlainEnsemble { num_classes, .. } => *num_classes,
        }
    }

    pub fn num_models(&self) -> usize {
        match self {
            RuntimeModel::Quilt(e) => e.num_circuits(),
            RuntimeModel::OneVsOne { models, .. } => models.len(),
            RuntimeModel::PlainEnsemble { members, .. } => members.len(),
        }
    }

    pub fn predict(&self, features: &[f64], noise: NoiseModel) -> Result<Prediction> {
        match self {
            RuntimeModel::Quilt(e) => e.predict(features, noise),
            RuntimeModel::OneVsOne { models, num_classes } => {
                predict_onevsone(models, *num_classes, features, noise)
            }
            RuntimeModel::PlainEnsemble { members, num_bits, .. } => {
                predict_plain_ensemble(members, *num_bits, features, noise)
            }
        }
    }
}

/// Default noise-sweep endpoint: representative near-term gate error
/// magnitudes (single-qubit, two-qubit).
pub const DEFAULT_SWEEP_MAX: (f64, f64) = (1e-3, 1e-2);

/// Default number of interpolated noise levels from (0, 0) to
/// [`DEFAULT_SWEEP_MAX`], endpoints included.
pub const DEFAULT_SWEEP_STEPS: usize = 5;

/// Which rows of a dataset to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl std::str::FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            other => Err(Error::InvalidArgument(format!(
                "unknown split {other:?} (expected train or test)"
            ))),
        }
    }
}

/// Aggregate classification quality over one split.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub num_samples: usize,
    pub num_classes: usize,
    pub per_class_accuracy: Vec<f64>,
    pub per_class_counts: Vec<usize>,
    /// `confusion[true_class][predicted_class]`.
    pub confusion: Vec<Vec<usize>>,
    /// Fraction of samples whose weakest bit was arbitrated.
    pub correction_trigger_fraction: f64,
    pub circuit_evaluations: u64,
}

/// Classify every row of the chosen split (in parallel) and aggregate.
pub fn evaluate_model(
    model: &RuntimeModel,
    ds: &EncodedDataset,
    split: Split,
    noise: NoiseModel,
) -> Result<Metrics> {
    let rows: &[usize] = match split {
        Split::Train => &ds.train,
        Split::Test => &ds.test,
    };
    if rows.is_empty() {
        return Err(Error::InvalidArgument(format!("{split:?} split is empty")));
    }
    let predictions: Vec<Prediction> = parallel::map_slice(rows, |&i| {
        model.predict(&ds.features[i], noise)
    })
    .into_iter()
    .collect::<Result<_>>()?;

    let k = ds.num_classes;
    let mut confusion = vec![vec![0usize; k]; k];
    let mut triggered = 0usize;
    let mut evals = 0u64;
    for (&i, pred) in rows.iter().zip(&predictions) {
        confusion[ds.task_labels[i]][pred.class] += 1;
        if pred.correction_triggered {
            triggered += 1;
        }
        evals += pred.circuit_evals;
    }
    let per_class_counts: Vec<usize> = confusion.iter().map(|row| row.iter().sum()).collect();
    let per_class_accuracy: Vec<f64> = confusion
        .iter()
        .zip(&per_class_counts)
        .enumerate()
        .map(|(c, (row, &count))| if count == 0 { 0.0 } else { row[c] as f64 / count as f64 })
        .collect();
    let correct: usize = (0..k).map(|c| confusion[c][c]).sum();
    Ok(Metrics {
        accuracy: correct as f64 / rows.len() as f64,
        num_samples: rows.len(),
        num_classes: k,
        per_class_accuracy,
        per_class_counts,
        confusion,
        correction_trigger_fraction: triggered as f64 / rows.len() as f64,
        circuit_evaluations: evals,
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::data::{class_to_bit_signs, EncodedDataset};
    use crate::seeding::stream_rng;
    use rand::Rng;

    /// Two well-separated clusters on the feature sphere: class 0 lives on
    /// the first half of the register, class 1 on the second half, so the
    /// sign of qubit 0 separates them linearly.
    pub(crate) fn blob_dataset(per_class: usize, num_classes: usize, seed: u64) -> EncodedDataset {
        let mut rng = stream_rng(seed, "blobs");
        let mut features = Vec::new();
        let mut task_labels = Vec::new();
        let num_bits = num_classes.trailing_zeros() as usize;
        let stride = 32 / num_classes;
        for c in 0..num_classes {
            for _ in 0..per_class {
                let mut row = vec![0.0f64; 32];
                for (j, x) in row.iter_mut().enumerate() {
                    let base = if j / stride == c { 1.0 } else { 0.0 };
                    *x = base + rng.gen::<f64>() * 0.15;
                }
                let norm: f64 = row.iter().map(|x| x * x).sum::<f64>().sqrt();
                for x in &mut row {
                    *x /= norm;
                }
                features.push(row);
                task_labels.push(c);
            }
        }
        let n = features.len();
        let (train, test) = crate::data::split_indices(n, 0.8, seed);
        let bit_labels = task_labels
            .iter()
            .map(|&l| class_to_bit_signs(l, num_bits))
            .collect();
        let ds = EncodedDataset {
            features,
            task_labels,
            bit_labels,
            train,
            test,
            num_bits,
            num_classes,
        };
        ds.validate().unwrap();
        ds
    }

    fn quick_cfg(epochs: usize, seed: u64) -> TrainConfig {
        TrainConfig {
            epochs,
            batch_size: 20,
            seed,
            ..Default::default()
        }
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig { epochs: 0, ..Default::default() }.validate().is_err());
        assert!(TrainConfig { batch_size: 0, ..Default::default() }.validate().is_err());
        assert!(TrainConfig { learning_rate: 0.0, ..Default::default() }.validate().is_err());
        assert!(TrainConfig::default().validate().is_ok());
    }

    #[test]
    fn single_epoch_keeps_the_better_of_initial_and_stepped() {
        let ds = blob_dataset(30, 2, 1);
        let unit = train_core(VariantId::V1, &ds, &quick_cfg(1, 2)).unwrap();
        assert_eq!(unit.loss_trace.len(), 2);
        assert_eq!(
            unit.best_loss,
            unit.loss_trace.iter().cloned().fold(f64::INFINITY, f64::min)
        );
    }

    #[test]
    fn running_best_is_the_trace_minimum() {
        let ds = blob_dataset(30, 2, 3);
        let unit = train_core(VariantId::V2, &ds, &quick_cfg(12, 4)).unwrap();
        let min = unit.loss_trace.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(unit.best_loss, min);
        // Best-so-far trace is monotone non-increasing.
        let mut best = f64::INFINITY;
        for &l in &unit.loss_trace {
            best = best.min(l);
            assert!(best <= l);
        }
        assert_eq!(unit.log.len(), 12);
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let ds = blob_dataset(25, 2, 5);
        let a = train_core(VariantId::V3, &ds, &quick_cfg(6, 9)).unwrap();
        let b = train_core(VariantId::V3, &ds, &quick_cfg(6, 9)).unwrap();
        assert_eq!(a.model.params, b.model.params);
        assert_eq!(a.best_loss, b.best_loss);
        let c = train_core(VariantId::V3, &ds, &quick_cfg(6, 10)).unwrap();
        assert_ne!(a.model.params, c.model.params);
    }

    #[test]
    fn separable_blobs_train_to_high_accuracy() {
        let ds = blob_dataset(60, 2, 7);
        let cfg = TrainConfig {
            epochs: 100,
            batch_size: 50,
            seed: 11,
            ..Default::default()
        };
        let unit = train_core(VariantId::V1, &ds, &cfg).unwrap();
        assert!(
            unit.model.accuracy_weight >= 0.95,
            "train accuracy {} below 0.95",
            unit.model.accuracy_weight
        );
    }

    #[test]
    fn loss_ignores_insignificant_qubits() {
        // Loss on n significant qubits must not depend on readouts beyond n:
        // the loss path only consumes the first num_bits outputs.
        let ds = blob_dataset(20, 4, 8);
        let (feats, bits, _) = gather(&ds, &ds.train[..8]);
        let spec = build_core_variant(VariantId::V1, 2).unwrap();
        let params: Vec<f64> = (0..spec.num_params).map(|i| i as f64 * 0.1).collect();
        let narrow: Vec<usize> = (0..ds.num_bits).collect();
        let preds =
            evaluate_batch(&spec, &params, &feats, NoiseModel::NOISELESS, &narrow).unwrap();
        let wide =
            evaluate_batch(&spec, &params, &feats, NoiseModel::NOISELESS, &[0, 1, 2, 3, 4])
                .unwrap();
        let loss_narrow = squared_loss(&preds, &bits).unwrap();
        let truncated: Vec<Vec<f64>> = wide.iter().map(|r| r[..ds.num_bits].to_vec()).collect();
        let loss_wide = squared_loss(&truncated, &bits).unwrap();
        assert_eq!(loss_narrow, loss_wide);
    }

    #[test]
    fn onevsall_converges_to_membership_sign() {
        let ds = blob_dataset(40, 2, 12);
        let cfg = TrainConfig {
            epochs: 60,
            batch_size: 30,
            seed: 13,
            ..Default::default()
        };
        let unit = train_onevsall(0, &ds, &cfg).unwrap();
        // Mean output over in-class training rows is negative at convergence.
        let mut view_rng = stream_rng(cfg.seed, "ova-view:0");
        let view = ds.balanced_binary_view(0, &mut view_rng).unwrap();
        let mut in_class_sum = 0.0;
        let mut count = 0;
        for (i, &label) in view.task_labels.iter().enumerate() {
            if label == 0 {
                in_class_sum += unit
                    .model
                    .scalar_output(&view.features[i], NoiseModel::NOISELESS)
                    .unwrap();
                count += 1;
            }
        }
        assert!(count > 0);
        assert!(in_class_sum / (count as f64) < 0.0);
    }

    #[test]
    fn quilt_model_counts_scale_linearly() {
        let cfg = quick_cfg(1, 20);
        for num_classes in [2usize, 4] {
            let ds = blob_dataset(30, num_classes, 21);
            let outcome = train_quilt(&ds, &cfg).unwrap();
            assert_eq!(outcome.ensemble.num_circuits(), 5 + num_classes);
            assert_eq!(outcome.units.len(), 5 + num_classes);
        }
    }

    #[test]
    fn onevsone_model_counts_scale_quadratically() {
        let cfg = quick_cfg(1, 22);
        let ds = blob_dataset(20, 4, 23);
        let units = train_onevsone(&ds, &cfg).unwrap();
        assert_eq!(units.len(), 6);
    }

    #[test]
    fn evaluate_model_on_a_perfect_predictor() {
        // Plain ensemble of identical well-trained members on easy blobs.
        let ds = blob_dataset(60, 2, 24);
        let cfg = TrainConfig {
            epochs: 80,
            batch_size: 40,
            seed: 25,
            ..Default::default()
        };
        let units = train_plain_ensemble(VariantId::V1, &ds, &cfg).unwrap();
        let model = RuntimeModel::PlainEnsemble {
            members: units.into_iter().map(|u| u.model).collect(),
            num_bits: ds.num_bits,
            num_classes: ds.num_classes,
        };
        let metrics = evaluate_model(&model, &ds, Split::Test, NoiseModel::NOISELESS).unwrap();
        assert!(metrics.accuracy > 0.9, "accuracy {}", metrics.accuracy);
        let diag: usize = (0..2).map(|c| metrics.confusion[c][c]).sum();
        let correct = (metrics.accuracy * metrics.num_samples as f64).round() as usize;
        assert_eq!(diag, correct);
        assert_eq!(metrics.circuit_evaluations, 5 * metrics.num_samples as u64);
    }

    #[test]
    fn gamma_calibration_triggers_near_ten_percent() {
        let ds = blob_dataset(40, 4, 26);
        let cfg = TrainConfig {
            epochs: 15,
            batch_size: 25,
            seed: 27,
            ..Default::default()
        };
        let outcome = train_quilt(&ds, &cfg).unwrap();
        let model = RuntimeModel::Quilt(outcome.ensemble);
        let metrics = evaluate_model(&model, &ds, Split::Train, NoiseModel::NOISELESS).unwrap();
        assert!(
            (0.05..=0.15).contains(&metrics.correction_trigger_fraction),
            "trigger fraction {}",
            metrics.correction_trigger_fraction
        );
    }

    #[test]
    fn noiseless_noise_model_matches_pure_metrics() {
        let ds = blob_dataset(20, 2, 28);
        let cfg = quick_cfg(3, 29);
        let outcome = train_quilt(&ds, &cfg).unwrap();
        let model = RuntimeModel::Quilt(outcome.ensemble);
        let pure = evaluate_model(&model, &ds, Split::Test, NoiseModel::NOISELESS).unwrap();
        let zero_noise =
            evaluate_model(&model, &ds, Split::Test, NoiseModel::new(0.0, 0.0).unwrap()).unwrap();
        assert_eq!(pure.accuracy, zero_noise.accuracy);
        assert_eq!(pure.confusion, zero_noise.confusion);
    }
}
