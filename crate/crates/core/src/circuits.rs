//! Parameterized classifier circuit families.
//!
//! Every circuit is built from repeated blocks: one three-angle rotation per
//! qubit followed by an entangling CNOT pattern. The five core variants
//! share this layout but differ in their CNOT topology, which gives the
//! ensemble members distinct optimization landscapes. The binary
//! (single-readout) circuit reuses the ring topology and reads out qubit 0
//! only.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::parallel;
use crate::statevector::{
    amplitude_embed, apply_gate, expect_z, ground_state, Angle, GateOp, NoiseModel, MAX_QUBITS,
};

/// Register width of every classifier circuit.
pub const CORE_QUBITS: usize = 5;

/// The five core-classifier entanglement topologies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VariantId {
    /// Linear chain 0→1→2→3→4.
    V1,
    /// Ring: chain plus 4→0.
    V2,
    /// Ring plus skip connections 0→2 and 2→4.
    V3,
    /// Star: qubit 0 controls every other qubit.
    V4,
    /// Ring on even blocks, reversed chain on odd blocks.
    V5,
}

impl VariantId {
    pub const ALL: [VariantId; 5] = [
        VariantId::V1,
        VariantId::V2,
        VariantId::V3,
        VariantId::V4,
        VariantId::V5,
    ];
}

impl fmt::Display for VariantId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            VariantId::V1 => "V1",
            VariantId::V2 => "V2",
            VariantId::V3 => "V3",
            VariantId::V4 => "V4",
            VariantId::V5 => "V5",
        };
        write!(f, "{s}")
    }
}

impl FromStr for VariantId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "V1" => Ok(VariantId::V1),
            "V2" => Ok(VariantId::V2),
            "V3" => Ok(VariantId::V3),
            "V4" => Ok(VariantId::V4),
            "V5" => Ok(VariantId::V5),
            other => Err(Error::InvalidArgument(format!(
                "unknown circuit variant {other:?} (expected V1..V5)"
            ))),
        }
    }
}

fn chain() -> Vec<(usize, usize)> {
    vec![(0, 1), (1, 2), (2, 3), (3, 4)]
}

fn ring() -> Vec<(usize, usize)> {
    let mut p = chain();
    p.push((4, 0));
    p
}

/// CNOT pairs a variant applies in a given block.
pub fn variant_cnot_pattern(variant: VariantId, block: usize) -> Vec<(usize, usize)> {
    match variant {
        VariantId::V1 => chain(),
        VariantId::V2 => ring(),
        VariantId::V3 => {
            let mut p = ring();
            p.push((0, 2));
            p.push((2, 4));
            p
        }
        VariantId::V4 => vec![(0, 1), (0, 2), (0, 3), (0, 4)],
        VariantId::V5 => {
            if block.is_multiple_of(2) {
                ring()
            } else {
                vec![(4, 3), (3, 2), (2, 1), (1, 0)]
            }
        }
    }
}

/// A fixed circuit layout: embedding slot, rotation/entangling blocks, and
/// the default readout set. Parameters are indexed block-major, three per
/// qubit per block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitSpec {
    pub num_qubits: usize,
    pub num_blocks: usize,
    pub num_params: usize,
    pub variant: Option<VariantId>,
    pub readout: Vec<usize>,
    gates: Vec<GateOp>,
}

impl CircuitSpec {
    /// Build a spec from per-block CNOT patterns. Each block contributes one
    /// three-angle rotation per qubit (consecutive parameter slots) followed
    /// by its CNOT pairs.
    pub fn from_blocks(
        num_qubits: usize,
        patterns: &[Vec<(usize, usize)>],
        variant: Option<VariantId>,
        readout: Vec<usize>,
    ) -> Result<Self> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(Error::InvalidArgument(format!(
                "num_qubits must lie in 1..={MAX_QUBITS}, got {num_qubits}"
            )));
        }
        if patterns.is_empty() {
            return Err(Error::InvalidArgument(
                "a circuit needs at least one block".into(),
            ));
        }
        if readout.iter().any(|&q| q >= num_qubits) {
            return Err(Error::InvalidArgument(
                "readout qubit out of range".into(),
            ));
        }
        let mut gates = Vec::new();
        let mut slot = 0;
        for pattern in patterns {
            for q in 0..num_qubits {
                gates.push(GateOp::rotation3(
                    q,
                    [Angle::Slot(slot), Angle::Slot(slot + 1), Angle::Slot(slot + 2)],
                ));
                slot += 3;
            }
            let mut seen = std::collections::HashSet::new();
            for &(c, t) in pattern {
                if c >= num_qubits || t >= num_qubits {
                    return Err(Error::InvalidArgument(format!(
                        "cnot ({c}, {t}) out of range for {num_qubits} qubits"
                    )));
                }
                if !seen.insert((c, t)) {
                    return Err(Error::InvalidArgument(format!(
                        "duplicate cnot ({c}, {t}) within a block"
                    )));
                }
                gates.push(GateOp::cnot(c, t)?);
            }
        }
        Ok(CircuitSpec {
            num_qubits,
            num_blocks: patterns.len(),
            num_params: slot,
            variant,
            readout,
            gates,
        })
    }

    pub fn gates(&self) -> &[GateOp] {
        &self.gates
    }

    /// Count of two-qubit gates, for circuit-cost reporting.
    pub fn num_cnots(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| matches!(g, GateOp::Cnot { .. }))
            .count()
    }
}

/// Build one of the five 5-qubit core classifier circuits.
pub fn build_core_variant(variant: VariantId, num_blocks: usize) -> Result<CircuitSpec> {
    if num_blocks == 0 {
        return Err(Error::InvalidArgument("num_blocks must be >= 1".into()));
    }
    let patterns: Vec<_> = (0..num_blocks)
        .map(|b| variant_cnot_pattern(variant, b))
        .collect();
    CircuitSpec::from_blocks(
        CORE_QUBITS,
        &patterns,
        Some(variant),
        (0..CORE_QUBITS).collect(),
    )
}

/// Build the binary (membership) classifier circuit: 5 qubits, ring
/// entanglement, readout on qubit 0 only.
pub fn build_onevsall(num_blocks: usize) -> Result<CircuitSpec> {
    if num_blocks == 0 {
        return Err(Error::InvalidArgument("num_blocks must be >= 1".into()));
    }
    let patterns: Vec<_> = (0..num_blocks).map(|_| ring()).collect();
    CircuitSpec::from_blocks(CORE_QUBITS, &patterns, None, vec![0])
}

/// Embed `features`, run the circuit, and return `⟨Z⟩` for each readout
/// qubit. Gradient-free evaluation path shared by training and inference.
pub fn evaluate(
    spec: &CircuitSpec,
    params: &[f64],
    features: &[f64],
    noise: NoiseModel,
    readout: &[usize],
) -> Result<Vec<f64>> {
    if params.len() != spec.num_params {
        return Err(Error::InvalidArgument(format!(
            "expected {} parameters, got {}",
            spec.num_params,
            params.len()
        )));
    }
    let mut state = amplitude_embed(&ground_state(spec.num_qubits)?, features)?;
    if !noise.is_noiseless() {
        state = state.into_mixed();
    }
    for gate in &spec.gates {
        apply_gate(&mut state, gate, params, noise)?;
    }
    readout.iter().map(|&q| expect_z(&state, q)).collect()
}

/// Evaluate a batch of feature rows, fanning out across the worker pool.
pub fn evaluate_batch(
    spec: &CircuitSpec,
    params: &[f64],
    features: &[Vec<f64>],
    noise: NoiseModel,
    readout: &[usize],
) -> Result<Vec<Vec<f64>>> {
    parallel::map_slice(features, |row| evaluate(spec, params, row, noise, readout))
        .into_iter()
        .collect()
}

/// Sequential reference implementation of [`evaluate_batch`].
pub fn evaluate_batch_seq(
    spec: &CircuitSpec,
    params: &[f64],
    features: &[Vec<f64>],
    noise: NoiseModel,
    readout: &[usize],
) -> Result<Vec<Vec<f64>>> {
    parallel::map_slice_seq(features, |row| evaluate(spec, params, row, noise, readout))
        .into_iter()
        .collect()
}
