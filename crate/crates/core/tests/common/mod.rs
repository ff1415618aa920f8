//! Shared fixtures for the integration and acceptance suites: an
//! implementation-independent dense-matrix simulator oracle, synthetic
//! datasets, and MNIST discovery.

// Each test binary uses a different subset of these helpers.
#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::path::{Path, PathBuf};

use quilt_core::data::{class_to_bit_signs, idx, EncodedDataset, RawDataset};
use quilt_core::statevector::{Angle, GateOp};

/// Dense complex matrix, row-major.
#[derive(Clone)]
pub struct CMat {
    pub dim: usize,
    pub entries: Vec<Complex64>,
}

impl CMat {
    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        CMat { dim, entries }
    }

    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.dim + j]
    }

    pub fn matmul(&self, other: &CMat) -> CMat {
        assert_eq!(self.dim, other.dim);
        let d = self.dim;
        let mut out = vec![Complex64::new(0.0, 0.0); d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.at(i, k);
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..d {
                    out[i * d + j] += a * other.at(k, j);
                }
            }
        }
        CMat { dim: d, entries: out }
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.dim, v.len());
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.at(i, j) * v[j]).sum())
            .collect()
    }
}

/// Kronecker product (left factor is the most significant subsystem).
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let d = a.dim * b.dim;
    let mut entries = vec![Complex64::new(0.0, 0.0); d * d];
    for ia in 0..a.dim {
        for ja in 0..a.dim {
            for ib in 0..b.dim {
                for jb in 0..b.dim {
                    entries[(ia * b.dim + ib) * d + (ja * b.dim + jb)] = a.at(ia, ja) * b.at(ib, jb);
                }
            }
        }
    }
    CMat { dim: d, entries }
}

fn two_by_two(m: [[Complex64; 2]; 2]) -> CMat {
    CMat {
        dim: 2,
        entries: vec![m[0][0], m[0][1], m[1][0], m[1][1]],
    }
}

/// Three-angle rotation built explicitly as the product of the elementary
/// Rz, Ry, Rz matrices (independent of the library's closed form).
pub fn oracle_rotation3(a: f64, b: f64, c: f64) -> CMat {
    let i = Complex64::i();
    let rz = |t: f64| {
        two_by_two([
            [(-i * t / 2.0).exp(), Complex64::new(0.0, 0.0)],
            [Complex64::new(0.0, 0.0), (i * t / 2.0).exp()],
        ])
    };
    let ry = |t: f64| {
        two_by_two([
            [
                Complex64::new((t / 2.0).cos(), 0.0),
                Complex64::new(-(t / 2.0).sin(), 0.0),
            ],
            [
                Complex64::new((t / 2.0).sin(), 0.0),
                Complex64::new((t / 2.0).cos(), 0.0),
            ],
        ])
    };
    rz(a).matmul(&ry(b)).matmul(&rz(c))
}

/// Lift a single-qubit matrix to the full register (qubit 0 is the most
/// significant factor).
pub fn embed_single(num_qubits: usize, qubit: usize, m: &CMat) -> CMat {
    let mut full = CMat::identity(1);
    for q in 0..num_qubits {
        let factor = if q == qubit { m.clone() } else { CMat::identity(2) };
        full = kron(&full, &factor);
    }
    full
}

/// Full-register CNOT built from its truth table on basis states.
pub fn oracle_cnot(num_qubits: usize, control: usize, target: usize) -> CMat {
    let dim = 1 << num_qubits;
    let cmask = 1 << (num_qubits - 1 - control);
    let tmask = 1 << (num_qubits - 1 - target);
    let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
    for input in 0..dim {
        let output = if input & cmask != 0 { input ^ tmask } else { input };
        entries[output * dim + input] = Complex64::new(1.0, 0.0);
    }
    CMat { dim, entries }
}

/// Full-register matrix for one gate with resolved parameters.
pub fn oracle_gate_matrix(num_qubits: usize, gate: &GateOp, params: &[f64]) -> CMat {
    match gate {
        GateOp::Rotation3 { target, angles } => {
            let resolve = |a: &Angle| match *a {
                Angle::Fixed(v) => v,
                Angle::Slot(i) => params[i],
            };
            embed_single(
                num_qubits,
                *target,
                &oracle_rotation3(resolve(&angles[0]), resolve(&angles[1]), resolve(&angles[2])),
            )
        }
        GateOp::Cnot { control, target } => oracle_cnot(num_qubits, *control, *target),
    }
}

/// A random gate on `num_qubits` qubits with literal angles.
pub fn random_gate(rng: &mut ChaCha8Rng, num_qubits: usize) -> GateOp {
    if num_qubits >= 2 && rng.gen::<f64>() < 0.4 {
        let control = rng.gen_range(0..num_qubits);
        let mut target = rng.gen_range(0..num_qubits);
        while target == control {
            target = rng.gen_range(0..num_qubits);
        }
        GateOp::cnot(control, target).unwrap()
    } else {
        let angles = [
            Angle::Fixed(rng.gen::<f64>() * 12.0 - 6.0),
            Angle::Fixed(rng.gen::<f64>() * 12.0 - 6.0),
            Angle::Fixed(rng.gen::<f64>() * 12.0 - 6.0),
        ];
        GateOp::rotation3(rng.gen_range(0..num_qubits), angles)
    }
}

pub fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>() - 0.5).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in &mut v {
        *x /= norm;
    }
    v
}

/// Synthetic clustered dataset already in encoded form: class c concentrates
/// its amplitude mass on its own block of the register.
pub fn blob_dataset(per_class: usize, num_classes: usize, seed: u64) -> EncodedDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
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
    let (train, test) = quilt_core::data::split_indices(n, 0.8, seed);
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

/// Locate the MNIST IDX training files: `$QUILT_DATA_DIR` first, then the
/// workspace-level `data/` directory. Accepts gzipped or raw names.
pub fn mnist_files() -> Option<(PathBuf, PathBuf)> {
    let mut candidates: Vec<PathBuf> = Vec::new();
    if let Ok(dir) = std::env::var("QUILT_DATA_DIR") {
        candidates.push(PathBuf::from(dir));
    }
    candidates.push(
        Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("..")
            .join("..")
            .join("data"),
    );
    for dir in candidates {
        for (img, lab) in [
            ("train-images-idx3-ubyte.gz", "train-labels-idx1-ubyte.gz"),
            ("train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
        ] {
            let ip = dir.join(img);
            let lp = dir.join(lab);
            if ip.exists() && lp.exists() {
                return Some((ip, lp));
            }
        }
    }
    None
}

/// Load the MNIST training rows when present.
pub fn load_mnist() -> Option<RawDataset> {
    let (ip, lp) = mnist_files()?;
    idx::load_idx(&ip, &lp).ok()
}
