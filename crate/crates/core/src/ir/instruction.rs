use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::angle::DyadicAngle;

pub type QubitId = usize;
pub type RecordId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RoleKind {
    Data,
    Flag,
    Garbage,
    CatAncilla,
    LogicalAncilla,
}

impl RoleKind {
    pub const ALL: [RoleKind; 5] =
        [RoleKind::Data, RoleKind::Flag, RoleKind::Garbage, RoleKind::CatAncilla, RoleKind::LogicalAncilla];

    pub fn as_str(self) -> &'static str {
        match self {
            RoleKind::Data => "data",
            RoleKind::Flag => "flag",
            RoleKind::Garbage => "garbage",
            RoleKind::CatAncilla => "cat_ancilla",
            RoleKind::LogicalAncilla => "logical_ancilla",
        }
    }
}

impl FromStr for RoleKind {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        RoleKind::ALL.into_iter().find(|r| r.as_str() == s).ok_or(())
    }
}

impl fmt::Display for RoleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Role tag plus a human label such as `q_b`, `a_0` or `g_1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QubitRole {
    pub kind: RoleKind,
    pub label: String,
}

impl QubitRole {
    pub fn new(kind: RoleKind, label: impl Into<String>) -> Self {
        QubitRole { kind, label: label.into() }
    }
}

/// Native instruction set. For controlled kinds the controls come first in the target list.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    PrepZ,
    PrepX,
    MeasZ,
    MeasX,
    X,
    Y,
    Z,
    H,
    S,
    Sdg,
    CX,
    CZ,
    CCX,
    CCZ,
    RZ(DyadicAngle),
    RZZ(DyadicAngle),
    CRZ(DyadicAngle),
    CRZZ(DyadicAngle),
}

impl Kind {
    pub fn arity(self) -> usize {
        use Kind::*;
        match self {
            PrepZ | PrepX | MeasZ | MeasX | X | Y | Z | H | S | Sdg | RZ(_) => 1,
            CX | CZ | RZZ(_) | CRZ(_) => 2,
            CCX | CCZ | CRZZ(_) => 3,
        }
    }

    pub fn name(self) -> &'static str {
        use Kind::*;
        match self {
            PrepZ => "PrepZ",
            PrepX => "PrepX",
            MeasZ => "MeasZ",
            MeasX => "MeasX",
            X => "X",
            Y => "Y",
            Z => "Z",
            H => "H",
            S => "S",
            Sdg => "Sdg",
            CX => "CX",
            CZ => "CZ",
            CCX => "CCX",
            CCZ => "CCZ",
            RZ(_) => "RZ",
            RZZ(_) => "RZZ",
            CRZ(_) => "CRZ",
            CRZZ(_) => "CRZZ",
        }
    }

    /// Parses a kind name; rotation kinds need the angle supplied separately.
    pub fn from_name(name: &str, angle: Option<DyadicAngle>) -> Option<Kind> {
        use Kind::*;
        Some(match (name, angle) {
            ("PrepZ", None) => PrepZ,
            ("PrepX", None) => PrepX,
            ("MeasZ", None) => MeasZ,
            ("MeasX", None) => MeasX,
            ("X", None) => X,
            ("Y", None) => Y,
            ("Z", None) => Z,
            ("H", None) => H,
            ("S", None) => S,
            ("Sdg", None) => Sdg,
            ("CX", None) => CX,
            ("CZ", None) => CZ,
            ("CCX", None) => CCX,
            ("CCZ", None) => CCZ,
            ("RZ", Some(a)) => RZ(a),
            ("RZZ", Some(a)) => RZZ(a),
            ("CRZ", Some(a)) => CRZ(a),
            ("CRZZ", Some(a)) => CRZZ(a),
            _ => return None,
        })
    }

    pub fn is_rotation_name(name: &str) -> bool {
        matches!(name, "RZ" | "RZZ" | "CRZ" | "CRZZ")
    }

    pub fn angle(self) -> Option<DyadicAngle> {
        match self {
            Kind::RZ(a) | Kind::RZZ(a) | Kind::CRZ(a) | Kind::CRZZ(a) => Some(a),
            _ => None,
        }
    }

    pub fn is_prep(self) -> bool {
        matches!(self, Kind::PrepZ | Kind::PrepX)
    }

    pub fn is_measurement(self) -> bool {
        matches!(self, Kind::MeasZ | Kind::MeasX)
    }

    pub fn is_unitary(self) -> bool {
        !self.is_prep() && !self.is_measurement()
    }

    /// Clifford as a gate in its own right (global phase ignored).
    pub fn is_clifford(self) -> bool {
        use Kind::*;
        match self {
            CCX | CCZ => false,
            RZ(a) | RZZ(a) => a.is_clifford(),
            CRZ(a) | CRZZ(a) => a.log2_denom() == 0,
            _ => true,
        }
    }

    /// Adjoint kind for unitary instructions.
    pub fn inverse(self) -> Option<Kind> {
        use Kind::*;
        Some(match self {
            S => Sdg,
            Sdg => S,
            RZ(a) => RZ(-a),
            RZZ(a) => RZZ(-a),
            CRZ(a) => CRZ(-a),
            CRZZ(a) => CRZZ(-a),
            k if k.is_unitary() => k,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Instruction {
    pub kind: Kind,
    pub targets: Vec<QubitId>,
}

impl Instruction {
    pub fn new(kind: Kind, targets: &[QubitId]) -> Self {
        Instruction { kind, targets: targets.to_vec() }
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.kind.name())?;
        if let Some(a) = self.kind.angle() {
            write!(f, " {a}")?;
        }
        for q in &self.targets {
            write!(f, " q{q}")?;
        }
        Ok(())
    }
}

/// Parity of measurement records that is 0 in every noiseless run.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Detector {
    pub records: Vec<RecordId>,
}

/// Parity of measurement records reporting a logical Pauli outcome.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Observable {
    pub name: String,
    pub records: Vec<RecordId>,
}
