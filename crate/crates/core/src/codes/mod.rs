//! Iceberg and Steane codes with their preparation, extraction and readout circuits.

mod circuits;
mod spec;

pub use circuits::{
    append_flagged_check, bare_syndrome_extraction, destructive_measure, flagged_syndrome_extraction,
    flagged_z_syndrome_extraction, ft_plus_prep, qed_round, Basis,
};
pub use spec::{
    iceberg_code, steane_code, CodeFamily, CodeSpec, LogicalWord, STEANE_CHECKS, STEANE_LOGICAL_X, STEANE_LOGICAL_Z,
};
