use alloc::format;
use alloc::vec::Vec;

use super::spec::{CodeFamily, CodeSpec, STEANE_LOGICAL_X};
use crate::error::{Error, Result};
use crate::ir::{Circuit, QubitId, RoleKind};
use crate::pauli::PauliString;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Basis {
    X,
    Z,
}

/// Verified preparation of `|+...+>` in the code.
///
/// Iceberg: `q_b` in `|0>`, the rest in `|+>`, parity fanned into `q_b`, then `X_b X_1`
/// is measured with one ancilla. Steane: a CNOT encoder followed by a measurement of
/// the logical `X = X1 X4 X6`.
pub fn ft_plus_prep(code: &CodeSpec) -> Result<Circuit> {
    let mut c = Circuit::for_code(code);
    let v = c.add_qubit(RoleKind::Flag, "v");
    match code.family() {
        CodeFamily::Iceberg => {
            let b = code.named("b").expect("iceberg base qubit");
            c.prep_z(b);
            for q in 0..code.n {
                if q != b {
                    c.prep_x(q);
                }
            }
            for q in 1..code.n {
                c.cx(q, b);
            }
            c.prep_x(v);
            c.cx(v, b);
            c.cx(v, 1);
        }
        CodeFamily::Steane => {
            for q in 0..4 {
                c.prep_x(q);
            }
            for q in 4..7 {
                c.prep_z(q);
            }
            for (ctl, tgt) in [(0, 5), (0, 6), (1, 4), (1, 6), (2, 4), (2, 5), (3, 4), (3, 5), (3, 6)] {
                c.cx(ctl, tgt);
            }
            c.prep_x(v);
            for q in STEANE_LOGICAL_X {
                c.cx(v, q);
            }
        }
        CodeFamily::Other => return Err(Error::InvalidArgument(format!("no preparation for code {}", code.name))),
    }
    let r = c.measure_x(v);
    c.add_detector(&[r]);
    Ok(c)
}

/// Measures each stabilizer of the given type with one syndrome ancilla and one flag.
/// The flag couples after the first and before the last data CX; both outcomes are detectors.
pub fn flagged_syndrome_extraction(code: &CodeSpec, basis: Basis) -> Circuit {
    let mut c = Circuit::for_code(code);
    let tag = match basis {
        Basis::Z => "z",
        Basis::X => "x",
    };
    let s = c.add_qubit(RoleKind::Flag, format!("s_{tag}"));
    let f = c.add_qubit(RoleKind::Flag, format!("sf_{tag}"));
    let stabs = match basis {
        Basis::Z => &code.z_stabilizers,
        Basis::X => &code.x_stabilizers,
    };
    for stab in stabs {
        append_flagged_check(&mut c, stab, basis, s, f);
    }
    c
}

pub fn flagged_z_syndrome_extraction(code: &CodeSpec) -> Circuit {
    flagged_syndrome_extraction(code, Basis::Z)
}

/// Appends one flagged check of `stab` (a pure X- or Z-type string) to `c`.
pub fn append_flagged_check(c: &mut Circuit, stab: &PauliString, basis: Basis, s: QubitId, f: QubitId) {
    let support = stab.support();
    let w = support.len();
    match basis {
        Basis::Z => {
            c.prep_z(s);
            c.prep_x(f);
        }
        Basis::X => {
            c.prep_x(s);
            c.prep_z(f);
        }
    }
    for (j, &q) in support.iter().enumerate() {
        if w > 2 && (j == 1 || j == w - 1) {
            match basis {
                Basis::Z => c.cx(f, s),
                Basis::X => c.cx(s, f),
            }
        }
        match basis {
            Basis::Z => c.cx(q, s),
            Basis::X => c.cx(s, q),
        }
    }
    let (rs, rf) = match basis {
        Basis::Z => (c.measure_z(s), c.measure_x(f)),
        Basis::X => (c.measure_x(s), c.measure_z(f)),
    };
    c.add_detector(&[rs]);
    c.add_detector(&[rf]);
}

/// Unflagged extraction of the stabilizers of one type, one fresh ancilla per check.
pub fn bare_syndrome_extraction(code: &CodeSpec, basis: Basis) -> Circuit {
    let mut c = Circuit::for_code(code);
    let stabs = match basis {
        Basis::Z => &code.z_stabilizers,
        Basis::X => &code.x_stabilizers,
    };
    for (j, stab) in stabs.iter().enumerate() {
        let s = c.add_qubit(RoleKind::Flag, format!("s_{j}"));
        let r = match basis {
            Basis::Z => {
                c.prep_z(s);
                for q in stab.support() {
                    c.cx(q, s);
                }
                c.measure_z(s)
            }
            Basis::X => {
                c.prep_x(s);
                for q in stab.support() {
                    c.cx(s, q);
                }
                c.measure_x(s)
            }
        };
        c.add_detector(&[r]);
    }
    c
}

/// Flagged Z-type then X-type extraction: one round of error detection.
pub fn qed_round(code: &CodeSpec) -> Result<Circuit> {
    let z = flagged_syndrome_extraction(code, Basis::Z);
    let x = flagged_syndrome_extraction(code, Basis::X);
    crate::ir::compose_reusing(&[&z, &x])
}

/// Transversal single-qubit readout of all data qubits. Detectors are the stabilizers of
/// that basis, observables the logical operators of that basis (named `X1`, `Z1`, ...).
pub fn destructive_measure(code: &CodeSpec, basis: Basis) -> Circuit {
    let mut c = Circuit::for_code(code);
    let records: Vec<usize> = (0..code.n)
        .map(|q| match basis {
            Basis::X => c.measure_x(q),
            Basis::Z => c.measure_z(q),
        })
        .collect();
    let (stabs, logicals, letter) = match basis {
        Basis::X => (&code.x_stabilizers, &code.logical_x, 'X'),
        Basis::Z => (&code.z_stabilizers, &code.logical_z, 'Z'),
    };
    for s in stabs {
        let r: Vec<usize> = s.support().iter().map(|&q| records[q]).collect();
        c.add_detector(&r);
    }
    for (i, l) in logicals.iter().enumerate() {
        let r: Vec<usize> = l.support().iter().map(|&q| records[q]).collect();
        c.add_observable(format!("{letter}{}", i + 1), &r);
    }
    c
}
