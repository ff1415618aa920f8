//! CIFAR-10 binary batch parsing.
//!
//! Each record is 3073 bytes: one label byte followed by a 32x32 RGB image
//! stored as three 1024-byte planes.

use std::path::Path;

use crate::error::{Error, Result};

use super::RawDataset;

pub const CIFAR_RECORD_BYTES: usize = 3073;
pub const CIFAR_PIXELS: usize = 3072;

/// Load one or more CIFAR-10 binary batch files into a single dataset.
pub fn load_cifar10(batch_paths: &[impl AsRef<Path>]) -> Result<RawDataset> {
    if batch_paths.is_empty() {
        return Err(Error::InvalidArgument("no CIFAR batch files given".into()));
    }
    let mut images = Vec::new();
    let mut labels = Vec::new();
    for path in batch_paths {
        let path = path.as_ref();
        let bytes = std::fs::read(path)?;
        if bytes.len() % CIFAR_RECORD_BYTES != 0 {
            return Err(Error::Format {
                path: path.display().to_string(),
                offset: (bytes.len() - bytes.len() % CIFAR_RECORD_BYTES) as u64,
                message: format!(
                    "file size {} is not a multiple of the {CIFAR_RECORD_BYTES}-byte record",
                    bytes.len()
                ),
            });
        }
        for record in bytes.chunks_exact(CIFAR_RECORD_BYTES) {
            labels.push(record[0]);
            images.extend(record[1..].iter().map(|&b| b as f64 / 255.0));
        }
    }
    RawDataset::new(images, labels, CIFAR_PIXELS)
}
