//! Circuit intermediate representation.

mod circuit;
mod instruction;
mod unitary;

pub use circuit::{compose, compose_reusing, reuse_map, Circuit, CircuitStats, QubitMap};
pub use instruction::{Detector, Instruction, Kind, Observable, QubitId, QubitRole, RecordId, RoleKind};
pub use unitary::{phase_insensitive_fidelity, unitary_of, DenseMatrix, MAX_UNITARY_QUBITS};
