//! Cross-checks of the simulator against an independent dense-matrix oracle
//! plus randomized conservation properties.

mod common;

use common::{oracle_gate_matrix, random_gate, random_unit};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use quilt_core::statevector::{
    amplitude_embed, apply_gate, expect_z, ground_state, Angle, GateOp, NoiseModel, QuantumState,
};

fn embedded(num_qubits: usize, features: &[f64]) -> QuantumState {
    amplitude_embed(&ground_state(num_qubits).unwrap(), features).unwrap()
}

fn pure_amps(state: &QuantumState) -> Vec<Complex64> {
    match state {
        QuantumState::Pure { amps, .. } => amps.clone(),
        QuantumState::Mixed { .. } => panic!("expected pure state"),
    }
}

#[test]
fn gate_application_matches_kronecker_oracle() {
    for num_qubits in 1..=3usize {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + num_qubits as u64);
        for _ in 0..60 {
            let dim = 1 << num_qubits;
            let features = random_unit(&mut rng, dim);
            let mut state = embedded(num_qubits, &features);
            let mut reference: Vec<Complex64> =
                features.iter().map(|&f| Complex64::new(f, 0.0)).collect();
            for _ in 0..12 {
                let gate = random_gate(&mut rng, num_qubits);
                apply_gate(&mut state, &gate, &[], NoiseModel::NOISELESS).unwrap();
                reference = oracle_gate_matrix(num_qubits, &gate, &[]).matvec(&reference);
            }
            let amps = pure_amps(&state);
            for (a, r) in amps.iter().zip(&reference) {
                assert!(
                    (a - r).norm() < 1e-12,
                    "{num_qubits} qubits: {a} vs oracle {r}"
                );
            }
        }
    }
}

#[test]
fn circuit_evaluation_matches_kronecker_oracle() {
    // Full-path check through CircuitSpec: slot-resolved parameters,
    // embedding, block structure, and per-qubit readout.
    use quilt_core::circuits::{evaluate, CircuitSpec};

    let mut rng = ChaCha8Rng::seed_from_u64(150);
    let patterns = vec![vec![(0usize, 1usize), (1, 2)], vec![(2, 0)]];
    let spec = CircuitSpec::from_blocks(3, &patterns, None, vec![0, 1, 2]).unwrap();
    for _ in 0..25 {
        let params: Vec<f64> = (0..spec.num_params)
            .map(|_| rng.gen::<f64>() * 8.0 - 4.0)
            .collect();
        let features = random_unit(&mut rng, 8);
        let outputs = evaluate(&spec, &params, &features, NoiseModel::NOISELESS, &spec.readout)
            .unwrap();

        let mut reference: Vec<Complex64> =
            features.iter().map(|&f| Complex64::new(f, 0.0)).collect();
        for gate in spec.gates() {
            reference = oracle_gate_matrix(3, gate, &params).matvec(&reference);
        }
        for (q, &z) in outputs.iter().enumerate() {
            let expected: f64 = reference
                .iter()
                .enumerate()
                .map(|(i, a)| {
                    let bit = (i >> (2 - q)) & 1;
                    if bit ==  0 { a.norm_sqr() } else { -a.norm_sqr() }
                })
                .sum();
            assert!((z - expected).abs() < 1e-12, "qubit {q}: {z} vs {expected}");
        }
    }
}

#[test]
fn norm_preserved_over_thousand_gate_sequences() {
    for num_qubits in [2usize, 4, 6] {
        let mut rng = ChaCha8Rng::seed_from_u64(200 + num_qubits as u64);
        let features = random_unit(&mut rng, 1 << num_qubits);
        let mut state = embedded(num_qubits, &features);
        for _ in 0..1000 {
            let gate = random_gate(&mut rng, num_qubits);
            apply_gate(&mut state, &gate, &[], NoiseModel::NOISELESS).unwrap();
        }
        let deviation = (state.norm_or_trace() - 1.0).abs();
        assert!(deviation < 1e-10, "{num_qubits} qubits drifted by {deviation}");
    }
}

#[test]
fn trace_preserved_under_noisy_evolution() {
    let mut rng = ChaCha8Rng::seed_from_u64(300);
    let noise = NoiseModel::new(0.01, 0.05).unwrap();
    for _ in 0..5 {
        let features = random_unit(&mut rng, 8);
        let mut state = embedded(3, &features).into_mixed();
        for _ in 0..200 {
            let gate = random_gate(&mut rng, 3);
            apply_gate(&mut state, &gate, &[], noise).unwrap();
        }
        assert!((state.norm_or_trace() - 1.0).abs() < 1e-10);
        if let QuantumState::Mixed { rho, .. } = &state {
            // Hermiticity survives the channel applications.
            for i in 0..8 {
                for j in 0..8 {
                    let d = (rho[i * 8 + j] - rho[j * 8 + i].conj()).norm();
                    assert!(d < 1e-10);
                }
            }
            // Positive semidefinite up to rounding.
            let m = nalgebra::DMatrix::from_fn(8, 8, |i, j| rho[i * 8 + j]);
            let eigenvalues = m.symmetric_eigen().eigenvalues;
            for lambda in eigenvalues.iter() {
                assert!(*lambda >= -1e-9, "negative eigenvalue {lambda}");
            }
        }
    }
}

#[test]
fn zero_noise_density_equals_pure_outer_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(350);
    for _ in 0..10 {
        let features = random_unit(&mut rng, 8);
        let gates: Vec<GateOp> = (0..20).map(|_| random_gate(&mut rng, 3)).collect();
        let mut pure = embedded(3, &features);
        let mut mixed = embedded(3, &features).into_mixed();
        let zero = NoiseModel::new(0.0, 0.0).unwrap();
        for gate in &gates {
            apply_gate(&mut pure, gate, &[], zero).unwrap();
            apply_gate(&mut mixed, gate, &[], zero).unwrap();
        }
        let amps = pure_amps(&pure);
        if let QuantumState::Mixed { rho, .. } = &mixed {
            for i in 0..8 {
                for j in 0..8 {
                    let expected = amps[i] * amps[j].conj();
                    assert!((rho[i * 8 + j] - expected).norm() < 1e-9);
                }
            }
        }
    }
}

#[test]
fn density_backend_matches_pure_at_zero_noise() {
    let mut rng = ChaCha8Rng::seed_from_u64(400);
    for num_qubits in 1..=4usize {
        for _ in 0..20 {
            let features = random_unit(&mut rng, 1 << num_qubits);
            let gates: Vec<GateOp> = (0..15).map(|_| random_gate(&mut rng, num_qubits)).collect();

            let mut pure = embedded(num_qubits, &features);
            let mut mixed = embedded(num_qubits, &features).into_mixed();
            for gate in &gates {
                apply_gate(&mut pure, gate, &[], NoiseModel::NOISELESS).unwrap();
                apply_gate(&mut mixed, gate, &[], NoiseModel::NOISELESS).unwrap();
            }
            for q in 0..num_qubits {
                let zp = expect_z(&pure, q).unwrap();
                let zm = expect_z(&mixed, q).unwrap();
                assert!((zp - zm).abs() < 1e-9, "qubit {q}: {zp} vs {zm}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn expectations_stay_bounded(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let num_qubits = rng.gen_range(1..=4usize);
        let features = random_unit(&mut rng, 1 << num_qubits);
        let mut state = embedded(num_qubits, &features);
        for _ in 0..20 {
            let gate = random_gate(&mut rng, num_qubits);
            apply_gate(&mut state, &gate, &[], NoiseModel::NOISELESS).unwrap();
        }
        for q in 0..num_qubits {
            let z = expect_z(&state, q).unwrap();
            prop_assert!(z.abs() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn single_gate_norm_is_exact(a in -6.0..6.0f64, b in -6.0..6.0f64, c in -6.0..6.0f64) {
        let features = vec![0.5; 4];
        let mut state = embedded(2, &features);
        let gate = GateOp::rotation3(0, [Angle::Fixed(a), Angle::Fixed(b), Angle::Fixed(c)]);
        apply_gate(&mut state, &gate, &[], NoiseModel::NOISELESS).unwrap();
        prop_assert!((state.norm_or_trace() - 1.0).abs() < 1e-12);
    }
}
