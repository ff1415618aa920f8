//! Optional TOML config file. Every field mirrors a flag and acts as its
//! default; unknown keys are rejected.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

pub const CONFIG_FORMAT: &str = "quilt-config";
pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    /// Leading format tag; must be "quilt-config" when present in a file.
    pub format: Option<String>,
    pub version: Option<u32>,

    pub task: Option<String>,
    pub method: Option<String>,
    pub data_dir: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub limit: Option<usize>,
    pub workers: Option<usize>,

    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub learning_rate: Option<f64>,
    pub blocks: Option<usize>,
    pub variant: Option<String>,

    pub pca_components: Option<usize>,
    pub pca_on_all: Option<bool>,
    pub train_fraction: Option<f64>,

    pub split: Option<String>,
    pub p1: Option<f64>,
    pub p2: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let cfg: FileConfig = toml::from_str(&text)
            .with_context(|| format!("cannot parse config {}", path.display()))?;
        match cfg.format.as_deref() {
            Some(CONFIG_FORMAT) | None => {}
            Some(other) => bail!(
                "{} has format tag {other:?}, expected {CONFIG_FORMAT:?}",
                path.display()
            ),
        }
        match cfg.version {
            Some(CONFIG_VERSION) | None => {}
            Some(other) => bail!("config version {other} is not supported"),
        }
        Ok(cfg)
    }
}
