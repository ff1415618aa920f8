//! IDX image/label file parsing (the MNIST and Fashion-MNIST container
//! format), with transparent gzip decompression.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use flate2::read::GzDecoder;

use crate::error::{Error, Result};

use super::RawDataset;

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

/// Byte cursor that remembers its position for error reporting.
struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: String,
}

impl<'a> Cursor<'a> {
    fn new(bytes: &'a [u8], path: &Path) -> Self {
        Cursor {
            bytes,
            pos: 0,
            path: path.display().to_string(),
        }
    }

    fn fail(&self, message: impl Into<String>) -> Error {
        Error::Format {
            path: self.path.clone(),
            offset: self.pos as u64,
            message: message.into(),
        }
    }

    fn read_u32(&mut self) -> Result<u32> {
        if self.pos + 4 > self.bytes.len() {
            return Err(self.fail("truncated while reading a 32-bit field"));
        }
        let v = u32::from_be_bytes(self.bytes[self.pos..self.pos + 4].try_into().unwrap());
        self.pos += 4;
        Ok(v)
    }

    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        if self.pos + len > self.bytes.len() {
            return Err(self.fail(format!(
                "truncated: need {len} more bytes, have {}",
                self.bytes.len() - self.pos
            )));
        }
        let s = &self.bytes[self.pos..self.pos + len];
        self.pos += len;
        Ok(s)
    }
}

/// Read a file fully, decompressing when the gzip magic is present.
fn read_maybe_gzip(path: &Path) -> Result<Vec<u8>> {
    let mut raw = Vec::new();
    File::open(path)?.read_to_end(&mut raw)?;
    if raw.len() >= 2 && raw[0] == 0x1f && raw[1] == 0x8b {
        let mut out = Vec::new();
        GzDecoder::new(&raw[..]).read_to_end(&mut out).map_err(|e| Error::Format {
            path: path.display().to_string(),
            offset: 0,
            message: format!("gzip decompression failed: {e}"),
        })?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

/// Parse an IDX images file into row-major pixels scaled to [0, 1].
pub fn read_idx_images(path: &Path) -> Result<(Vec<f64>, usize, usize)> {
    let bytes = read_maybe_gzip(path)?;
    let mut cur = Cursor::new(&bytes, path);
    let magic = cur.read_u32()?;
    if magic != IMAGES_MAGIC {
        cur.pos = 0;
        return Err(cur.fail(format!(
            "bad magic {magic:#010x}, expected {IMAGES_MAGIC:#010x} for an images file"
        )));
    }
    let count = cur.read_u32()? as usize;
    let rows = cur.read_u32()? as usize;
    let cols = cur.read_u32()? as usize;
    let dim = rows * cols;
    let data = cur.take(count * dim)?;
    if cur.pos != bytes.len() {
        return Err(cur.fail(format!("{} trailing bytes", bytes.len() - cur.pos)));
    }
    let pixels = data.iter().map(|&b| b as f64 / 255.0).collect();
    Ok((pixels, count, dim))
}

/// Parse an IDX labels file.
pub fn read_idx_labels(path: &Path) -> Result<Vec<u8>> {
    let bytes = read_maybe_gzip(path)?;
    let mut cur = Cursor::new(&bytes, path);
    let magic = cur.read_u32()?;
    if magic != LABELS_MAGIC {
        cur.pos = 0;
        return Err(cur.fail(format!(
            "bad magic {magic:#010x}, expected {LABELS_MAGIC:#010x} for a labels file"
        )));
    }
    let count = cur.read_u32()? as usize;
    let data = cur.take(count)?;
    if cur.pos != bytes.len() {
        return Err(cur.fail(format!("{} trailing bytes", bytes.len() - cur.pos)));
    }
    Ok(data.to_vec())
}

/// Load a paired IDX images/labels set.
pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<RawDataset> {
    let (pixels, count, dim) = read_idx_images(images_path)?;
    let labels = read_idx_labels(labels_path)?;
    if labels.len() != count {
        return Err(Error::Format {
            path: labels_path.display().to_string(),
            offset: 4,
            message: format!("{} labels for {count} images", labels.len()),
        });
    }
    RawDataset::new(pixels, labels, dim)
}

/// Write an IDX images file (uncompressed). Useful for exporting subsets
/// and for building fixtures.
pub fn write_idx_images(path: &Path, images: &[u8], count: usize, rows: usize, cols: usize) -> Result<()> {
    if images.len() != count * rows * cols {
        return Err(Error::InvalidArgument(format!(
            "pixel buffer of {} bytes does not match {count}x{rows}x{cols}",
            images.len()
        )));
    }
    let mut out = Vec::with_capacity(16 + images.len());
    out.extend_from_slice(&IMAGES_MAGIC.to_be_bytes());
    out.extend_from_slice(&(count as u32).to_be_bytes());
    out.extend_from_slice(&(rows as u32).to_be_bytes());
    out.extend_from_slice(&(cols as u32).to_be_bytes());
    out.extend_from_slice(images);
    std::fs::write(path, out)?;
    Ok(())
}

/// Write an IDX labels file (uncompressed).
pub fn write_idx_labels(path: &Path, labels: &[u8]) -> Result<()> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    std::fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use flate2::write::GzEncoder;
    use flate2::Compression;
    use std::io::Write;

    fn fixture(dir: &Path, n: usize) -> (std::path::PathBuf, std::path::PathBuf) {
        let images: Vec<u8> = (0..n * 4).map(|i| (i % 251) as u8).collect();
        let labels: Vec<u8> = (0..n).map(|i| (i % 10) as u8).collect();
        let ip = dir.join("img.idx");
        let lp = dir.join("lab.idx");
        write_idx_images(&ip, &images, n, 2, 2).unwrap();
        write_idx_labels(&lp, &labels).unwrap();
        (ip, lp)
    }

    #[test]
    fn round_trips_written_files() {
        let dir = tempfile::tempdir().unwrap();
        let (ip, lp) = fixture(dir.path(), 7);
        let ds = load_idx(&ip, &lp).unwrap();
        assert_eq!(ds.num_samples, 7);
        assert_eq!(ds.raw_dim, 4);
        assert_eq!(ds.labels[3], 3);
        assert!((ds.images[1] - 1.0 / 255.0).abs() < 1e-12);
    }

    #[test]
    fn gzip_and_raw_agree() {
        let dir = tempfile::tempdir().unwrap();
        let (ip, lp) = fixture(dir.path(), 5);
        let gz = dir.path().join("img.idx.gz");
        let mut enc = GzEncoder::new(std::fs::File::create(&gz).unwrap(), Compression::default());
        enc.write_all(&std::fs::read(&ip).unwrap()).unwrap();
        enc.finish().unwrap();
        let a = load_idx(&ip, &lp).unwrap();
        let b = load_idx(&gz, &lp).unwrap();
        assert_eq!(a.images, b.images);
        assert_eq!(a.labels, b.labels);
    }

    #[test]
    fn rejects_swapped_magic() {
        let dir = tempfile::tempdir().unwrap();
        let (ip, lp) = fixture(dir.path(), 5);
        let err = load_idx(&lp, &ip).unwrap_err();
        match err {
            Error::Format { offset, message, .. } => {
                assert_eq!(offset, 0);
                assert!(message.contains("magic"));
            }
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_count_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let (ip, _) = fixture(dir.path(), 5);
        let lp = dir.path().join("short.idx");
        write_idx_labels(&lp, &[1, 2, 3]).unwrap();
        assert!(matches!(load_idx(&ip, &lp), Err(Error::Format { .. })));
    }

    #[test]
    fn rejects_truncation_with_offset() {
        let dir = tempfile::tempdir().unwrap();
        let (ip, _) = fixture(dir.path(), 5);
        let mut bytes = std::fs::read(&ip).unwrap();
        bytes.truncate(bytes.len() - 3);
        let cut = dir.path().join("cut.idx");
        std::fs::write(&cut, &bytes).unwrap();
        match read_idx_images(&cut).unwrap_err() {
            Error::Format { offset, .. } => assert_eq!(offset, 16),
            other => panic!("expected format error, got {other:?}"),
        }
    }
}
