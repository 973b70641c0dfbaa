//! Stabilizer simulation and Pauli-frame fault propagation for Clifford circuits.

mod clifford;
mod frame;
mod tableau;

pub use clifford::{lower, lower_circuit, Step};
pub use frame::{Bits, Effect, EndChecks, Frame, FrameProgram};
pub use tableau::{noiseless_tableau, tableau_simulate_shot, Tableau, MAX_TABLEAU_QUBITS};
