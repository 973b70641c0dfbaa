//! Circuit-level noise model and fault locations.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::angle::DyadicAngle;
use crate::error::{Error, Result};
use crate::ir::{Circuit, Kind, QubitId};
use crate::pauli::{Pauli, PauliString};

/// How 3-qubit gates are treated by the noise model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Arity3Policy {
    /// 3-qubit depolarizing with strength `p` after the gate.
    Depolarize,
    /// Rewrite into 1- and 2-qubit gates first, then apply 2-qubit noise.
    Decompose,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseModel {
    pub p: f64,
    pub arity3: Arity3Policy,
    /// Whether readout of data qubits is also subject to record flips.
    pub flip_data_measurements: bool,
}

impl NoiseModel {
    pub fn new(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!("noise strength {p} outside [0, 1]")));
        }
        Ok(NoiseModel { p, arity3: Arity3Policy::Depolarize, flip_data_measurements: true })
    }

    pub fn noiseless() -> Self {
        NoiseModel { p: 0.0, arity3: Arity3Policy::Depolarize, flip_data_measurements: true }
    }

    /// The circuit actually simulated under this model.
    pub fn prepare(&self, c: &Circuit) -> Circuit {
        match self.arity3 {
            Arity3Policy::Depolarize => c.clone(),
            Arity3Policy::Decompose => decompose_three_qubit_gates(c),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Position {
    Before,
    After,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FaultError {
    /// Letter `j` acts on target `j` of the instruction.
    Pauli(PauliString),
    /// `X` after `PrepZ`, `Z` after `PrepX`.
    PrepFlip,
    MeasurementFlip,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FaultSite {
    pub instruction: usize,
    pub position: Position,
    pub error: FaultError,
}

impl FaultSite {
    /// Physical Pauli action on the register, or `None` for a record flip.
    pub fn physical(&self, c: &Circuit) -> Option<Vec<(QubitId, Pauli)>> {
        let ins = &c.instructions()[self.instruction];
        match &self.error {
            FaultError::Pauli(p) => Some(
                ins.targets.iter().zip(p.letters()).filter(|(_, &l)| l != Pauli::I).map(|(&q, &l)| (q, l)).collect(),
            ),
            FaultError::PrepFlip => {
                Some(alloc::vec![(ins.targets[0], if ins.kind == Kind::PrepZ { Pauli::X } else { Pauli::Z })])
            }
            FaultError::MeasurementFlip => None,
        }
    }

    /// Index of the flipped record, for measurement flips.
    pub fn flipped_record(&self, c: &Circuit) -> Option<usize> {
        match self.error {
            FaultError::MeasurementFlip => {
                Some(c.instructions()[..self.instruction].iter().filter(|i| i.kind.is_measurement()).count())
            }
            _ => None,
        }
    }

    pub fn describe(&self, c: &Circuit) -> String {
        let ins = &c.instructions()[self.instruction];
        let pos = match self.position {
            Position::Before => "before",
            Position::After => "after",
        };
        match &self.error {
            FaultError::Pauli(p) => {
                let mut s = String::new();
                for (q, l) in ins.targets.iter().zip(p.letters()) {
                    if *l != Pauli::I {
                        s.push_str(&format!("{}{} ", l.as_char(), c.role(*q).label));
                    }
                }
                format!("{}{pos} #{} ({ins})", s, self.instruction)
            }
            FaultError::PrepFlip => format!("prep flip {pos} #{} ({ins})", self.instruction),
            FaultError::MeasurementFlip => format!("record flip at #{} ({ins})", self.instruction),
        }
    }
}

impl fmt::Display for FaultSite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.error {
            FaultError::Pauli(p) => write!(f, "{} after #{}", p, self.instruction),
            FaultError::PrepFlip => write!(f, "prep flip at #{}", self.instruction),
            FaultError::MeasurementFlip => write!(f, "record flip at #{}", self.instruction),
        }
    }
}

/// All non-identity Paulis on `w` qubits in base-4 order (`X = 1, Y = 2, Z = 3`, first target lowest).
pub fn nontrivial_paulis(w: usize) -> Vec<PauliString> {
    (1..(1usize << (2 * w)))
        .map(|code| PauliString::from_letters((0..w).map(|j| Pauli::from_index(code >> (2 * j))).collect()))
        .collect()
}

/// One fault family after every instruction: all Paulis on unitary supports, one flip per
/// preparation and one flip per measurement.
pub fn enumerate_fault_sites(c: &Circuit) -> Vec<FaultSite> {
    let mut out = Vec::new();
    for (i, ins) in c.instructions().iter().enumerate() {
        if ins.kind.is_prep() {
            out.push(FaultSite { instruction: i, position: Position::After, error: FaultError::PrepFlip });
        } else if ins.kind.is_measurement() {
            out.push(FaultSite { instruction: i, position: Position::After, error: FaultError::MeasurementFlip });
        } else {
            for p in nontrivial_paulis(ins.targets.len()) {
                out.push(FaultSite { instruction: i, position: Position::After, error: FaultError::Pauli(p) });
            }
        }
    }
    out
}

/// Closed form for `enumerate_fault_sites(c).len()`.
pub fn expected_fault_site_count(c: &Circuit) -> usize {
    c.instructions()
        .iter()
        .map(|ins| if ins.kind.is_unitary() { (1usize << (2 * ins.targets.len())) - 1 } else { 1 })
        .sum()
}

/// Rewrites CCX, CCZ and CRZZ into 1- and 2-qubit native gates with the same unitary up to global phase.
pub fn decompose_three_qubit_gates(c: &Circuit) -> Circuit {
    let mut out = Circuit::new();
    for r in c.qubits() {
        out.add_qubit(r.kind, r.label.clone());
    }
    out.set_code(c.code().cloned());
    let t = DyadicAngle::pi_over_pow2(2);
    for ins in c.instructions() {
        let q = &ins.targets;
        match ins.kind {
            Kind::CCX | Kind::CCZ => {
                let (a, b, x) = (q[0], q[1], q[2]);
                if ins.kind == Kind::CCX {
                    out.gate1(Kind::H, x);
                }
                out.cx(b, x);
                out.rz(-t, x);
                out.cx(a, x);
                out.rz(t, x);
                out.cx(b, x);
                out.rz(-t, x);
                out.cx(a, x);
                out.rz(t, b);
                out.rz(t, x);
                out.cx(a, b);
                out.rz(t, a);
                out.rz(-t, b);
                out.cx(a, b);
                if ins.kind == Kind::CCX {
                    out.gate1(Kind::H, x);
                }
            }
            Kind::CRZZ(a) => {
                out.cx(q[1], q[2]);
                out.crz(a, q[0], q[2]);
                out.cx(q[1], q[2]);
            }
            k => {
                out.push(k, q);
            }
        }
    }
    for d in c.detectors() {
        out.add_detector(&d.records);
    }
    for o in c.observables() {
        out.add_observable(o.name.clone(), &o.records);
    }
    out
}
