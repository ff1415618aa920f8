//! Versioned checkpoint files.
//!
//! Checkpoints are JSON with a leading format tag. Floating-point values
//! round-trip exactly (shortest representation that parses back to the same
//! bits), so a reloaded model reproduces identical predictions.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::ClassMap;
use crate::ensemble::{ClassifierModel, EnsembleModel, Role};
use crate::error::{Error, Result};
use crate::training::{Method, QuiltOutcome, RuntimeModel, TrainConfig, TrainedUnit};

pub const CHECKPOINT_FORMAT: &str = "quilt-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

/// One trained circuit as persisted.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SavedModel {
    pub role: Role,
    pub spec: crate::circuits::CircuitSpec,
    pub params: Vec<f64>,
    pub best_loss: f64,
    pub train_accuracy: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub method: Method,
    pub seed: u64,
    pub num_bits: usize,
    pub num_classes: usize,
    /// Confidence gate; present for the quilt method only.
    pub gamma: Option<f64>,
    pub config: TrainConfig,
    /// Source classes of the task, in task-label order.
    pub class_map: Option<Vec<u8>>,
    pub models: Vec<SavedModel>,
}

fn saved(unit: &TrainedUnit) -> SavedModel {
    SavedModel {
        role: unit.model.role.clone(),
        spec: unit.model.spec.clone(),
        params: unit.model.params.clone(),
        best_loss: unit.best_loss,
        train_accuracy: unit.model.accuracy_weight,
    }
}

impl Checkpoint {
    pub fn from_quilt(
        outcome: &QuiltOutcome,
        cfg: &TrainConfig,
        class_map: Option<&ClassMap>,
    ) -> Self {
        Checkpoint {
            format: CHECKPOINT_FORMAT.to_string(),
            version: CHECKPOINT_VERSION,
            method: Method::Quilt,
            seed: cfg.seed,
            num_bits: outcome.ensemble.num_bits,
            num_classes: outcome.ensemble.num_classes,
            gamma: Some(outcome.ensemble.gamma),
            config: cfg.clone(),
            class_map: class_map.map(|m| m.classes().to_vec()),
            models: outcome.units.iter().map(saved).collect(),
        }
    }

    pub fn from_units(
        method: Method,
        units: &[TrainedUnit],
        cfg: &TrainConfig,
        num_bits: usize,
        num_classes: usize,
        class_map: Option<&ClassMap>,
    ) -> Self {
        Checkpoint {
            format: CHECKPOINT_FORMAT.to_string(),
            version: CHECKPOINT_VERSION,
            method,
            seed: cfg.seed,
            num_bits,
            num_classes,
            gamma: None,
            config: cfg.clone(),
            class_map: class_map.map(|m| m.classes().to_vec()),
            models: units.iter().map(saved).collect(),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let ckpt: Checkpoint = serde_json::from_str(&text).map_err(|e| Error::Incompatible(format!(
            "{} is not a readable checkpoint: {e}",
            path.display()
        )))?;
        if ckpt.format != CHECKPOINT_FORMAT {
            return Err(Error::Incompatible(format!(
                "{} has format tag {:?}, expected {CHECKPOINT_FORMAT:?}",
                path.display(),
                ckpt.format
            )));
        }
        if ckpt.version != CHECKPOINT_VERSION {
            return Err(Error::Incompatible(format!(
                "checkpoint version {} is not supported (this build reads version {CHECKPOINT_VERSION})",
                ckpt.version
            )));
        }
        Ok(ckpt)
    }

    fn classifier(&self, m: &SavedModel) -> Result<ClassifierModel> {
        ClassifierModel::new(m.spec.clone(), m.params.clone(), m.train_accuracy, m.role.clone())
    }

    /// Reassemble the runtime model the checkpoint describes.
    pub fn to_runtime(&self) -> Result<RuntimeModel> {
        match self.method {
            Method::Quilt => {
                let mut cores = Vec::new();
                let mut ova: Vec<Option<ClassifierModel>> = vec![None; self.num_classes];
                for m in &self.models {
                    match m.role {
                        Role::Core(_) => cores.push(self.classifier(m)?),
                        Role::OneVsAll { class } => {
                            if class >= self.num_classes {
                                return Err(Error::Incompatible(format!(
                                    "membership classifier for class {class} of {}",
                                    self.num_classes
                                )));
                            }
                            ova[class] = Some(self.classifier(m)?);
                        }
                        ref other => {
                            return Err(Error::Incompatible(format!(
                                "unexpected {other:?} model in a quilt checkpoint"
                            )))
                        }
                    }
                }
                let ova: Vec<ClassifierModel> = ova
                    .into_iter()
                    .enumerate()
                    .map(|(c, m)| {
                        m.ok_or_else(|| {
                            Error::Incompatible(format!("missing membership classifier for class {c}"))
                        })
                    })
                    .collect::<Result<_>>()?;
                let gamma = self.gamma.ok_or_else(|| {
                    Error::Incompatible("quilt checkpoint is missing gamma".into())
                })?;
                Ok(RuntimeModel::Quilt(EnsembleModel::new(
                    cores,
                    ova,
                    gamma,
                    self.num_bits,
                )?))
            }
            Method::OneVsOne => {
                let models = self
                    .models
                    .iter()
                    .map(|m| self.classifier(m))
                    .collect::<Result<_>>()?;
                Ok(RuntimeModel::OneVsOne {
                    models,
                    num_classes: self.num_classes,
                })
            }
            Method::Ensemble => {
                let members = self
                    .models
                    .iter()
                    .map(|m| self.classifier(m))
                    .collect::<Result<_>>()?;
                Ok(RuntimeModel::PlainEnsemble {
                    members,
                    num_bits: self.num_bits,
                    num_classes: self.num_classes,
                })
            }
        }
    }
}
