//! Stabilizer Rényi entropies and related magic monotones for dense
//! few-qubit states.
//!
//! The crate covers Pauli-string algebra, a stabilizer engine (tableaux,
//! exactly uniform Clifford sampling, exhaustive stabilizer-state
//! enumeration), dense simulation of T-doped Clifford circuits, random-basis
//! rotations and GUE evolution, fast Pauli spectra, closed-form entropy
//! formulas, brute-force monotone oracles, Pauli-sampling fidelity
//! certification and finite-size scaling analysis.

pub mod certification;
pub mod error;
pub mod evolution;
pub mod experiments;
pub mod lp;
pub mod models;
pub mod oracles;
pub mod pauli;
pub mod rng;
pub mod spectrum;
pub mod sre;
pub mod stabilizer;
pub mod statevector;

pub use certification::{CertificationOutcome, CertificationPlan, Noise, NoisyState};
pub use error::{Error, Result};
pub use evolution::{evolve, sample_gue, Hamiltonian, Propagator};
pub use experiments::{
    CollapseReport, CollapseRule, CrossingReport, Curve, ModelComparison, SweepConfig, SweepResult,
    SweepRow,
};
pub use models::{EvolutionRecord, GueInstance, Model};
pub use oracles::{BoundsReport, Measure, OracleResult, Witness};
pub use pauli::PauliString;
pub use spectrum::{pauli_spectrum, PauliSpectrum, SpectrumHistogram, TwoPeakSummary};
pub use sre::{CriticalPoint, SreValue};
pub use stabilizer::{CliffordCircuit, Gate, StabilizerStateDescriptor, Tableau};
pub use statevector::StateVector;
