//! Stabilizer formalism: Clifford circuits, tableaux, uniform Clifford
//! sampling and exhaustive enumeration of pure stabilizer states.

mod circuit;
pub(crate) mod enumerate;
mod random;
mod tableau;

pub use circuit::{CliffordCircuit, Gate};
pub use enumerate::{
    enumerate_stabilizer_states, stabilizer_state_count, StabilizerEnumeration,
    StabilizerStateDescriptor, MAX_ENUMERATION_QUBITS,
};
pub use random::{random_pauli_layer, sample_random_clifford};
pub use tableau::{Tableau, MAX_GROUP_QUBITS};
