//! Dense state-vector simulation.

mod engine;
mod oracle;
mod state;

pub use engine::{evaluate, uniform, Branch, Injections, Program, BRANCH_EPS};
pub use oracle::{
    accepted_branch_state, accepted_branches, accepted_map_fidelity, apply_pauli_rotation, basis_inputs, embed, encode,
    encoded_basis_state, encoded_plus, extract, first_order_acceptance, injections_for, input_qubits,
    logical_infidelity, output_qubits, project_code, projected_overlap, rotation_fidelity, run_noiseless,
    run_noisy_shot, run_noisy_shot_with_state, sample_injections, AcceptedBranches, IdealRotation, MapFidelity,
    ShotResult, BRANCH_CAP,
};
pub use state::{cis, i_pow, StateVector, C64, MAX_QUBITS};
