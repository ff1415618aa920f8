//! Multi-class image classification with ensembles of small variational
//! quantum circuits, simulated exactly.
//!
//! The crate provides:
//! - a dense statevector / density-matrix simulator for registers of up to
//!   12 qubits, with per-gate depolarizing noise ([`statevector`]);
//! - the five heterogeneous core-classifier circuit variants and the binary
//!   membership circuit ([`circuits`]);
//! - parameter-shift gradients and Adam ([`gradient`], [`adam`]);
//! - dataset ingestion, PCA compression to the 32-amplitude register, and
//!   label bit coding ([`data`]);
//! - the accuracy-weighted bitwise ensemble with confidence-gated error
//!   correction, plus one-vs-one and plain-majority baselines ([`ensemble`]);
//! - training orchestration, metrics, and checkpointing ([`training`],
//!   [`checkpoint`]).
//!
//! Data-parallel inner loops run on rayon when the default `parallel`
//! feature is enabled and fall back to sequential execution otherwise; the
//! `*_seq` variants expose the sequential path directly for benchmarking.

pub mod adam;
pub mod checkpoint;
pub mod circuits;
pub mod data;
pub mod ensemble;
pub mod error;
pub mod gradient;
pub mod parallel;
pub mod seeding;
pub mod statevector;
pub mod training;

pub use error::{Error, Result};
