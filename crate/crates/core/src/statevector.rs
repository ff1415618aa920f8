//! Exact simulation of small qubit registers.
//!
//! Two representations are supported: a pure state (dense complex amplitude
//! vector of length 2^n) for noise-free evolution, and a density matrix
//! (2^n x 2^n) for evolution under depolarizing noise. Qubit 0 is the most
//! significant bit of the basis-state index, so `|10⟩` on two qubits is
//! amplitude index 2.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest register the dense simulator accepts.
pub const MAX_QUBITS: usize = 12;

/// Per-gate symmetric depolarizing noise strengths.
///
/// `p1` applies after every single-qubit gate, `p2` after every two-qubit
/// gate. With probability `p` the gate's support is replaced by the
/// maximally mixed state; noise therefore only acts on the density-matrix
/// representation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub p1: f64,
    pub p2: f64,
}

impl NoiseModel {
    pub const NOISELESS: NoiseModel = NoiseModel { p1: 0.0, p2: 0.0 };

    pub fn new(p1: f64, p2: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p1) || !(0.0..=1.0).contains(&p2) {
            return Err(Error::InvalidArgument(format!(
                "depolarizing probabilities must lie in [0, 1], got p1={p1}, p2={p2}"
            )));
        }
        Ok(NoiseModel { p1, p2 })
    }

    pub fn is_noiseless(&self) -> bool {
        self.p1 == 0.0 && self.p2 == 0.0
    }
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel::NOISELESS
    }
}

/// An angle fed to a parameterized gate: either an index into the parameter
/// vector or a fixed literal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Angle {
    Slot(usize),
    Fixed(f64),
}

impl Angle {
    fn resolve(&self, params: &[f64]) -> Result<f64> {
        match *self {
            Angle::Fixed(v) => Ok(v),
            Angle::Slot(i) => params.get(i).copied().ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "parameter slot {i} out of range for vector of length {}",
                    params.len()
                ))
            }),
        }
    }
}

/// A single circuit operation.
///
/// `Rotation3` is the general single-qubit rotation with three Euler angles,
/// realized as `Rz(a) · Ry(b) · Rz(c)`; `Cnot` is the controlled-NOT.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GateOp {
    Rotation3 { target: usize, angles: [Angle; 3] },
    Cnot { control: usize, target: usize },
}

impl GateOp {
    pub fn rotation3(target: usize, angles: [Angle; 3]) -> Self {
        GateOp::Rotation3 { target, angles }
    }

    pub fn cnot(control: usize, target: usize) -> Result<Self> {
        if control == target {
            return Err(Error::InvalidArgument(format!(
                "cnot control and target must differ, both are {control}"
            )));
        }
        Ok(GateOp::Cnot { control, target })
    }

    /// Highest qubit index the gate touches.
    pub fn max_qubit(&self) -> usize {
        match *self {
            GateOp::Rotation3 { target, .. } => target,
            GateOp::Cnot { control, target } => control.max(target),
        }
    }
}

/// 2x2 unitary for `Rz(a) · Ry(b) · Rz(c)`.
pub fn rotation3_matrix(a: f64, b: f64, c: f64) -> [[Complex64; 2]; 2] {
    let cos = (b / 2.0).cos();
    let sin = (b / 2.0).sin();
    let sum = Complex64::from_polar(1.0, -(a + c) / 2.0);
    let diff = Complex64::from_polar(1.0, -(a - c) / 2.0);
    [
        [sum * cos, -diff * sin],
        [diff.conj() * sin, sum.conj() * cos],
    ]
}

/// Dense quantum state of up to [`MAX_QUBITS`] qubits.
#[derive(Debug, Clone)]
pub enum QuantumState {
    Pure {
        num_qubits: usize,
        amps: Vec<Complex64>,
    },
    Mixed {
        num_qubits: usize,
        /// Row-major 2^n x 2^n density matrix.
        rho: Vec<Complex64>,
    },
}

/// `|0…0⟩` on `num_qubits` qubits.
pub fn ground_state(num_qubits: usize) -> Result<QuantumState> {
    if num_qubits == 0 || num_qubits > MAX_QUBITS {
        return Err(Error::InvalidArgument(format!(
            "num_qubits must lie in 1..={MAX_QUBITS}, got {num_qubits}"
        )));
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
    amps[0] = Complex64::new(1.0, 0.0);
    Ok(QuantumState::Pure { num_qubits, amps })
}

impl QuantumState {
    pub fn num_qubits(&self) -> usize {
        match *self {
            QuantumState::Pure { num_qubits, .. } | QuantumState::Mixed { num_qubits, .. } => {
                num_qubits
            }
        }
    }

    pub fn dim(&self) -> usize {
        1 << self.num_qubits()
    }

    pub fn is_pure(&self) -> bool {
        matches!(self, QuantumState::Pure { .. })
    }

    /// Squared norm of a pure state, or the trace of a density matrix.
    pub fn norm_or_trace(&self) -> f64 {
        match self {
            QuantumState::Pure { amps, .. } => amps.iter().map(|a| a.norm_sqr()).sum(),
            QuantumState::Mixed { num_qubits, rho } => {
                let dim = 1 << num_qubits;
                (0..dim).map(|i| rho[i * dim + i].re).sum()
            }
        }
    }

    /// Convert to the density-matrix representation (outer product for pure
    /// states; a no-op if already mixed).
    pub fn into_mixed(self) -> QuantumState {
        match self {
            QuantumState::Mixed { .. } => self,
            QuantumState::Pure { num_qubits, amps } => {
                let dim = amps.len();
                let mut rho = vec![Complex64::new(0.0, 0.0); dim * dim];
                for i in 0..dim {
                    for j in 0..dim {
                        rho[i * dim + j] = amps[i] * amps[j].conj();
                    }
                }
                QuantumState::Mixed { num_qubits, rho }
            }
        }
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.num_qubits() {
            return Err(Error::InvalidArgument(format!(
                "qubit index {qubit} out of range for {}-qubit register",
                self.num_qubits()
            )));
        }
        Ok(())
    }
}

/// Load a normalized feature vector as the amplitudes of a ground-state
/// register.
pub fn amplitude_embed(state: &QuantumState, features: &[f64]) -> Result<QuantumState> {
    let n = state.num_qubits();
    let dim = 1 << n;
    match state {
        QuantumState::Pure { amps, .. }
            if amps[0] == Complex64::new(1.0, 0.0)
                && amps[1..].iter().all(|a| *a == Complex64::new(0.0, 0.0)) => {}
        _ => {
            return Err(Error::InvalidArgument(
                "amplitude embedding requires a pure ground state".into(),
            ))
        }
    }
    if features.len() != dim {
        return Err(Error::InvalidArgument(format!(
            "feature vector length {} does not match register dimension {dim}",
            features.len()
        )));
    }
    let norm_sqr: f64 = features.iter().map(|f| f * f).sum();
    if (norm_sqr.sqrt() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "feature vector must be L2-normalized, got norm {}",
            norm_sqr.sqrt()
        )));
    }
    Ok(QuantumState::Pure {
        num_qubits: n,
        amps: features.iter().map(|&f| Complex64::new(f, 0.0)).collect(),
    })
}

/// Apply one gate, attaching depolarizing noise on its support when the
/// state is (or becomes) a density matrix.
///
/// A pure state with a nonzero applicable noise probability is promoted to
/// the density-matrix representation first, since a pure vector cannot
/// express the depolarized output.
pub fn apply_gate(
    state: &mut QuantumState,
    gate: &GateOp,
    params: &[f64],
    noise: NoiseModel,
) -> Result<()> {
    let n = state.num_qubits();
    if gate.max_qubit() >= n {
        return Err(Error::InvalidArgument(format!(
            "gate acts on qubit {} but register has {n} qubits",
            gate.max_qubit()
        )));
    }
    match gate {
        GateOp::Rotation3 { target, angles } => {
            let m = rotation3_matrix(
                angles[0].resolve(params)?,
                angles[1].resolve(params)?,
                angles[2].resolve(params)?,
            );
            if state.is_pure() && noise.p1 > 0.0 {
                let owned = std::mem::replace(state, QuantumState::Pure {
                    num_qubits: n,
                    amps: Vec::new(),
                });
                *state = owned.into_mixed();
            }
            match state {
                QuantumState::Pure { amps, .. } => apply_single_pure(amps, n, *target, &m),
                QuantumState::Mixed { rho, .. } => {
                    apply_single_mixed(rho, n, *target, &m);
                    if noise.p1 > 0.0 {
                        depolarize(rho, n, &[*target], noise.p1);
                    }
                }
            }
        }
        GateOp::Cnot { control, target } => {
            if state.is_pure() && noise.p2 > 0.0 {
                let owned = std::mem::replace(state, QuantumState::Pure {
                    num_qubits: n,
                    amps: Vec::new(),
                });
                *state = owned.into_mixed();
            }
            match state {
                QuantumState::Pure { amps, .. } => apply_cnot_pure(amps, n, *control, *target),
                QuantumState::Mixed { rho, .. } => {
                    apply_cnot_mixed(rho, n, *control, *target);
                    if noise.p2 > 0.0 {
                        depolarize(rho, n, &[*control, *target], noise.p2);
                    }
                }
            }
        }
    }
    debug_assert!((state.norm_or_trace() - 1.0).abs() < 1e-9);
    Ok(())
}

/// Pauli-Z expectation of one qubit, in [-1, 1].
pub fn expect_z(state: &QuantumState, qubit: usize) -> Result<f64> {
    state.check_qubit(qubit)?;
    let n = state.num_qubits();
    let mask = qubit_mask(n, qubit);
    let value = match state {
        QuantumState::Pure { amps, .. } => amps
            .iter()
            .enumerate()
            .map(|(i, a)| zsign(i, mask) * a.norm_sqr())
            .sum(),
        QuantumState::Mixed { rho, .. } => {
            let dim = 1 << n;
            (0..dim).map(|i| zsign(i, mask) * rho[i * dim + i].re).sum()
        }
    };
    Ok(value)
}

/// Shot-based estimate of `⟨Z⟩`: samples `shots` projective measurements of
/// the qubit and returns the empirical expectation. Exact expectations via
/// [`expect_z`] are the default everywhere; this exists for realism studies.
pub fn expect_z_sampled<R: rand::Rng>(
    state: &QuantumState,
    qubit: usize,
    shots: usize,
    rng: &mut R,
) -> Result<f64> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be positive".into()));
    }
    let z = expect_z(state, qubit)?;
    let p_one = ((1.0 - z) / 2.0).clamp(0.0, 1.0);
    let ones = (0..shots).filter(|_| rng.gen::<f64>() < p_one).count();
    Ok(1.0 - 2.0 * ones as f64 / shots as f64)
}

#[inline]
fn qubit_mask(n: usize, qubit: usize) -> usize {
    1 << (n - 1 - qubit)
}

#[inline]
fn zsign(index: usize, mask: usize) -> f64 {
    if index & mask == 0 {
        1.0
    } else {
        -1.0
    }
}

fn apply_single_pure(amps: &mut [Complex64], n: usize, qubit: usize, m: &[[Complex64; 2]; 2]) {
    let mask = qubit_mask(n, qubit);
    for i in 0..amps.len() {
        if i & mask == 0 {
            let j = i | mask;
            let a0 = amps[i];
            let a1 = amps[j];
            amps[i] = m[0][0] * a0 + m[0][1] * a1;
            amps[j] = m[1][0] * a0 + m[1][1] * a1;
        }
    }
}

fn apply_cnot_pure(amps: &mut [Complex64], n: usize, control: usize, target: usize) {
    let cmask = qubit_mask(n, control);
    let tmask = qubit_mask(n, target);
    for i in 0..amps.len() {
        if i & cmask != 0 && i & tmask == 0 {
            amps.swap(i, i | tmask);
        }
    }
}

/// `rho <- G rho G†` for a single-qubit gate.
fn apply_single_mixed(rho: &mut [Complex64], n: usize, qubit: usize, m: &[[Complex64; 2]; 2]) {
    let dim = 1usize << n;
    let mask = qubit_mask(n, qubit);
    // Left multiply by G: mix row pairs within each column.
    for j in 0..dim {
        for i in 0..dim {
            if i & mask == 0 {
                let k = i | mask;
                let r0 = rho[i * dim + j];
                let r1 = rho[k * dim + j];
                rho[i * dim + j] = m[0][0] * r0 + m[0][1] * r1;
                rho[k * dim + j] = m[1][0] * r0 + m[1][1] * r1;
            }
        }
    }
    // Right multiply by G†: mix column pairs within each row.
    for i in 0..dim {
        for j in 0..dim {
            if j & mask == 0 {
                let k = j | mask;
                let r0 = rho[i * dim + j];
                let r1 = rho[i * dim + k];
                rho[i * dim + j] = r0 * m[0][0].conj() + r1 * m[0][1].conj();
                rho[i * dim + k] = r0 * m[1][0].conj() + r1 * m[1][1].conj();
            }
        }
    }
}

fn apply_cnot_mixed(rho: &mut [Complex64], n: usize, control: usize, target: usize) {
    let dim = 1usize << n;
    let cmask = qubit_mask(n, control);
    let tmask = qubit_mask(n, target);
    // Permutation conjugation: swap rows, then columns.
    for i in 0..dim {
        if i & cmask != 0 && i & tmask == 0 {
            let k = i | tmask;
            for j in 0..dim {
                rho.swap(i * dim + j, k * dim + j);
            }
        }
    }
    for j in 0..dim {
        if j & cmask != 0 && j & tmask == 0 {
            let k = j | tmask;
            for i in 0..dim {
                rho.swap(i * dim + j, i * dim + k);
            }
        }
    }
}

/// Symmetric depolarizing channel on `support`:
/// `rho <- (1-p) rho + p * (I/2^k ⊗ Tr_support(rho))`.
fn depolarize(rho: &mut [Complex64], n: usize, support: &[usize], p: f64) {
    let dim = 1usize << n;
    let smask: usize = support.iter().map(|&q| qubit_mask(n, q)).sum();
    let k = support.len();
    let weight = p / (1 << k) as f64;
    let assignments: Vec<usize> = subset_assignments(n, support);
    let mut out = vec![Complex64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            let mut v = rho[i * dim + j] * (1.0 - p);
            if i & smask == j & smask {
                let ibase = i & !smask;
                let jbase = j & !smask;
                let mut traced = Complex64::new(0.0, 0.0);
                for &b in &assignments {
                    traced += rho[(ibase | b) * dim + (jbase | b)];
                }
                v += traced * weight;
            }
            out[i * dim + j] = v;
        }
    }
    rho.copy_from_slice(&out);
}

/// All bit patterns on the masks of `support`, e.g. for two support qubits
/// the four joint assignments of their index bits.
fn subset_assignments(n: usize, support: &[usize]) -> Vec<usize> {
    let masks: Vec<usize> = support.iter().map(|&q| qubit_mask(n, q)).collect();
    (0..(1usize << masks.len()))
        .map(|bits| {
            masks
                .iter()
                .enumerate()
                .filter(|(b, _)| bits & (1 << b) != 0)
                .map(|(_, m)| m)
                .sum()
        })
        .collect()
}
