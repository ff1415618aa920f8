//! The ensemble decision engine: accuracy-weighted bitwise voting with
//! confidence-gated arbitration by per-class membership classifiers, plus
//! the one-vs-one and plain-majority baselines.
//!
//! Every classifier emits per-qubit outputs in [-1, 1]; the sign of output
//! `b` is bit `b` of the predicted class, MSB first. Core outputs are
//! combined per bit as `s_b = Σ_e a_e q_be / Σ_e a_e`. A sample whose
//! smallest |s_b| falls strictly below the gate `gamma` has that weakest
//! bit arbitrated: the two candidate classes' membership classifiers are
//! evaluated and the bit is overridden only when both agree.

use serde::{Deserialize, Serialize};

use crate::circuits::{evaluate, CircuitSpec, VariantId};
use crate::error::{Error, Result};
use crate::parallel;
use crate::statevector::NoiseModel;

/// What a trained circuit is for.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    /// Multi-class core classifier of the given architecture variant.
    Core(VariantId),
    /// Membership classifier for one class (output < 0 means "in class").
    OneVsAll { class: usize },
    /// Pairwise classifier: output < 0 votes `lo`, otherwise `hi`.
    OneVsOne { lo: usize, hi: usize },
}

/// A circuit with trained parameters, its accuracy weight, and its role.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassifierModel {
    pub spec: CircuitSpec,
    pub params: Vec<f64>,
    pub accuracy_weight: f64,
    pub role: Role,
}

impl ClassifierModel {
    pub fn new(spec: CircuitSpec, params: Vec<f64>, accuracy_weight: f64, role: Role) -> Result<Self> {
        if params.len() != spec.num_params {
            return Err(Error::InvalidArgument(format!(
                "{} parameters for a spec expecting {}",
                params.len(),
                spec.num_params
            )));
        }
        if !(0.0..=1.0).contains(&accuracy_weight) {
            return Err(Error::InvalidArgument(format!(
                "accuracy weight {accuracy_weight} outside [0, 1]"
            )));
        }
        Ok(ClassifierModel {
            spec,
            params,
            accuracy_weight,
            role,
        })
    }

    /// Run the circuit on one sample with its own readout set.
    pub fn outputs(&self, features: &[f64], noise: NoiseModel) -> Result<Vec<f64>> {
        evaluate(&self.spec, &self.params, features, noise, &self.spec.readout)
    }

    /// Scalar output of a single-readout (binary) classifier.
    pub fn scalar_output(&self, features: &[f64], noise: NoiseModel) -> Result<f64> {
        let out = self.outputs(features, noise)?;
        out.first().copied().ok_or_else(|| {
            Error::Config("binary classifier has an empty readout set".into())
        })
    }
}

/// Sign with the zero tie resolved to +1 (bit value 1), keeping decoding
/// deterministic.
pub fn sign(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Decode per-bit signs (MSB first) into a class index.
pub fn decode_bits(signs: &[f64]) -> usize {
    let n = signs.len();
    signs
        .iter()
        .enumerate()
        .map(|(b, &s)| if sign(s) > 0.0 { 1 << (n - 1 - b) } else { 0 })
        .sum()
}

/// Accuracy-weighted per-bit sums: `s_b = Σ_e a_e q_be / Σ_e a_e`, each in
/// [-1, 1]. `outputs[e]` must provide at least `num_bits` entries.
pub fn weighted_bit_sums(outputs: &[Vec<f64>], weights: &[f64], num_bits: usize) -> Result<Vec<f64>> {
    if outputs.len() != weights.len() {
        return Err(Error::InvalidArgument(format!(
            "{} output rows vs {} weights",
            outputs.len(),
            weights.len()
        )));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::Config(
            "all accuracy weights are zero; the ensemble cannot vote".into(),
        ));
    }
    let mut sums = vec![0.0; num_bits];
    for (out, &w) in outputs.iter().zip(weights) {
        if out.len() < num_bits {
            return Err(Error::InvalidArgument(format!(
                "member produced {} outputs but {num_bits} bits are required",
                out.len()
            )));
        }
        for b in 0..num_bits {
            sums[b] += w * out[b];
        }
    }
    for s in &mut sums {
        *s /= total;
    }
    Ok(sums)
}

/// Per-bit vote result for one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct BitConfidence {
    /// Weighted sums `s_b`, one per significant bit.
    pub sums: Vec<f64>,
    /// True when `min_b |s_b| < gamma`.
    pub flagged: bool,
    /// `argmin_b |s_b|` (lowest index on ties).
    pub weakest_bit: usize,
}

impl BitConfidence {
    fn from_sums(sums: Vec<f64>, gamma: f64) -> Self {
        let mut weakest_bit = 0;
        let mut min = f64::INFINITY;
        for (b, &s) in sums.iter().enumerate() {
            if s.abs() < min {
                min = s.abs();
                weakest_bit = b;
            }
        }
        BitConfidence {
            flagged: min < gamma,
            weakest_bit,
            sums,
        }
    }

    pub fn min_confidence(&self) -> f64 {
        self.sums.iter().fold(f64::INFINITY, |m, s| m.min(s.abs()))
    }

    /// Voted sign per bit.
    pub fn voted_signs(&self) -> Vec<f64> {
        self.sums.iter().map(|&s| sign(s)).collect()
    }
}

/// The candidate classes a weak bit leaves open: all other bits keep their
/// voted sign, the weak bit is 0 for the first candidate and 1 for the
/// second.
pub fn candidate_classes(sums: &[f64], weakest_bit: usize) -> (usize, usize) {
    let n = sums.len();
    let mut signs: Vec<f64> = sums.iter().map(|&s| sign(s)).collect();
    signs[weakest_bit] = -1.0;
    let c0 = decode_bits(&signs);
    signs[weakest_bit] = 1.0;
    let c1 = decode_bits(&signs);
    debug_assert_eq!(c1, c0 | (1 << (n - 1 - weakest_bit)));
    (c0, c1)
}

/// Arbitration of one weak bit by the two candidate membership classifiers.
/// `c0_output` belongs to the candidate with bit 0, `c1_output` to the
/// candidate with bit 1; a negative output claims membership. The bit is
/// overridden only when exactly one classifier claims the sample.
pub fn arbitrate_bit(voted_sign: f64, c0_output: f64, c1_output: f64) -> f64 {
    if c0_output < 0.0 && c1_output > 0.0 {
        -1.0
    } else if c0_output > 0.0 && c1_output < 0.0 {
        1.0
    } else {
        voted_sign
    }
}

/// One classification outcome plus its evaluation cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Prediction {
    pub class: usize,
    pub correction_triggered: bool,
    pub circuit_evals: u64,
}

/// Full ensemble: five heterogeneous cores, one membership classifier per
/// class, and the confidence gate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleModel {
    pub cores: Vec<ClassifierModel>,
    /// Indexed by class.
    pub ova: Vec<ClassifierModel>,
    pub gamma: f64,
    pub num_bits: usize,
    pub num_classes: usize,
}

impl EnsembleModel {
    pub fn new(
        cores: Vec<ClassifierModel>,
        ova: Vec<ClassifierModel>,
        gamma: f64,
        num_bits: usize,
    ) -> Result<Self> {
        if cores.len() != 5 {
            return Err(Error::Config(format!(
                "the ensemble takes exactly 5 core classifiers, got {}",
                cores.len()
            )));
        }
        let mut variants = std::collections::HashSet::new();
        for core in &cores {
            match core.role {
                Role::Core(v) => {
                    if !variants.insert(v) {
                        return Err(Error::Config(format!("duplicate core variant {v}")));
                    }
                }
                ref other => {
                    return Err(Error::Config(format!(
                        "core slot holds a {other:?} classifier"
                    )))
                }
            }
        }
        let num_classes = 1usize << num_bits;
        if ova.len() != num_classes {
            return Err(Error::Config(format!(
                "{} membership classifiers for {num_classes} classes",
                ova.len()
            )));
        }
        for (c, model) in ova.iter().enumerate() {
            if model.role != (Role::OneVsAll { class: c }) {
                return Err(Error::Config(format!(
                    "membership slot {c} holds a {:?} classifier",
                    model.role
                )));
            }
        }
        if !gamma.is_finite() || gamma < 0.0 {
            return Err(Error::Config(format!("gamma must be >= 0, got {gamma}")));
        }
        Ok(EnsembleModel {
            cores,
            ova,
            gamma,
            num_bits,
            num_classes,
        })
    }

    /// Total circuits the ensemble carries: 5 cores + one per class.
    pub fn num_circuits(&self) -> usize {
        self.cores.len() + self.ova.len()
    }

    /// Evaluate every core and combine the first `num_bits` outputs into
    /// weighted per-bit sums.
    pub fn weighted_bit_vote(&self, features: &[f64], noise: NoiseModel) -> Result<BitConfidence> {
        let outputs: Vec<Vec<f64>> = self
            .cores
            .iter()
            .map(|c| c.outputs(features, noise))
            .collect::<Result<_>>()?;
        let weights: Vec<f64> = self.cores.iter().map(|c| c.accuracy_weight).collect();
        let sums = weighted_bit_sums(&outputs, &weights, self.num_bits)?;
        Ok(BitConfidence::from_sums(sums, self.gamma))
    }

    /// Arbitrate the weakest bit of a flagged sample. Returns the corrected
    /// signs; only `conf.weakest_bit` may differ from the voted signs.
    pub fn error_correct(
        &self,
        conf: &BitConfidence,
        features: &[f64],
        noise: NoiseModel,
    ) -> Result<Vec<f64>> {
        let (c0, c1) = candidate_classes(&conf.sums, conf.weakest_bit);
        let c0_output = self.ova[c0].scalar_output(features, noise)?;
        let c1_output = self.ova[c1].scalar_output(features, noise)?;
        let mut signs = conf.voted_signs();
        signs[conf.weakest_bit] =
            arbitrate_bit(signs[conf.weakest_bit], c0_output, c1_output);
        Ok(signs)
    }

    /// Classify one sample: vote, arbitrate when flagged, decode.
    pub fn predict(&self, features: &[f64], noise: NoiseModel) -> Result<Prediction> {
        let conf = self.weighted_bit_vote(features, noise)?;
        let mut evals = self.cores.len() as u64;
        let signs = if conf.flagged {
            evals += 2;
            self.error_correct(&conf, features, noise)?
        } else {
            conf.voted_signs()
        };
        Ok(Prediction {
            class: decode_bits(&signs),
            correction_triggered: conf.flagged,
            circuit_evals: evals,
        })
    }
}

/// The gate value at which roughly 10% of samples fall strictly below:
/// the 10th-percentile entry of the sorted minimum confidences.
pub fn percentile_gamma(min_confidences: &[f64]) -> Result<f64> {
    if min_confidences.len() < 10 {
        return Err(Error::InvalidArgument(format!(
            "gamma calibration needs at least 10 samples, got {}",
            min_confidences.len()
        )));
    }
    let mut sorted = min_confidences.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let idx = ((sorted.len() as f64) * 0.10).round() as usize;
    Ok(sorted[idx.min(sorted.len() - 1)])
}

/// Calibrate the confidence gate on a sample set (noise-free evaluation):
/// returns the 10th-percentile minimum per-bit confidence.
pub fn calibrate_gamma(ens: &EnsembleModel, samples: &[Vec<f64>]) -> Result<f64> {
    let confs: Vec<f64> = parallel::map_slice(samples, |row| {
        ens.weighted_bit_vote(row, NoiseModel::NOISELESS)
            .map(|c| c.min_confidence())
    })
    .into_iter()
    .collect::<Result<_>>()?;
    percentile_gamma(&confs)
}

/// Plurality winner of pairwise votes; ties break to the lowest class
/// index. Each entry is `((lo, hi), output)` and must cover every unordered
/// pair exactly once.
pub fn tally_pairwise_votes(pair_outputs: &[((usize, usize), f64)], num_classes: usize) -> Result<usize> {
    let expected = num_classes * (num_classes - 1) / 2;
    let mut seen = std::collections::HashSet::new();
    let mut votes = vec![0usize; num_classes];
    for &((lo, hi), output) in pair_outputs {
        if lo >= hi || hi >= num_classes {
            return Err(Error::Config(format!("bad class pair ({lo}, {hi})")));
        }
        if !seen.insert((lo, hi)) {
            return Err(Error::Config(format!("duplicate class pair ({lo}, {hi})")));
        }
        let winner = if sign(output) < 0.0 { lo } else { hi };
        votes[winner] += 1;
    }
    if seen.len() != expected {
        return Err(Error::Config(format!(
            "pair coverage incomplete: {} of {expected} pair classifiers present",
            seen.len()
        )));
    }
    let best = *votes.iter().max().unwrap();
    Ok(votes.iter().position(|&v| v == best).unwrap())
}

/// One-vs-one baseline: every pair classifier votes, plurality wins.
pub fn predict_onevsone(
    models: &[ClassifierModel],
    num_classes: usize,
    features: &[f64],
    noise: NoiseModel,
) -> Result<Prediction> {
    let pair_outputs: Vec<((usize, usize), f64)> = models
        .iter()
        .map(|m| match m.role {
            Role::OneVsOne { lo, hi } => Ok(((lo, hi), m.scalar_output(features, noise)?)),
            ref other => Err(Error::Config(format!(
                "one-vs-one slot holds a {other:?} classifier"
            ))),
        })
        .collect::<Result<_>>()?;
    Ok(Prediction {
        class: tally_pairwise_votes(&pair_outputs, num_classes)?,
        correction_triggered: false,
        circuit_evals: models.len() as u64,
    })
}

/// Plain ensemble baseline: five instances of one variant, per-bit sign of
/// the unweighted output sum, no arbitration.
pub fn predict_plain_ensemble(
    members: &[ClassifierModel],
    num_bits: usize,
    features: &[f64],
    noise: NoiseModel,
) -> Result<Prediction> {
    if members.len() != 5 {
        return Err(Error::Config(format!(
            "the plain ensemble takes exactly 5 members, got {}",
            members.len()
        )));
    }
    let variant = match members[0].role {
        Role::Core(v) => v,
        ref other => return Err(Error::Config(format!("plain member is a {other:?}"))),
    };
    for m in &members[1..] {
        if m.role != Role::Core(variant) {
            return Err(Error::Config(
                "plain ensemble members must share one variant".into(),
            ));
        }
    }
    let mut sums = vec![0.0; num_bits];
    for m in members {
        let out = m.outputs(features, noise)?;
        for b in 0..num_bits {
            sums[b] += out[b];
        }
    }
    let signs: Vec<f64> = sums.iter().map(|&s| sign(s)).collect();
    Ok(Prediction {
        class: decode_bits(&signs),
        correction_triggered: false,
        circuit_evals: members.len() as u64,
    })
}
