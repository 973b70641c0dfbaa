use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::ir::{Circuit, Kind, QubitId};

/// Elementary Clifford steps that every Clifford instruction lowers to, up to global phase.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Step {
    H(QubitId),
    S(QubitId),
    Sdg(QubitId),
    X(QubitId),
    Y(QubitId),
    Z(QubitId),
    CX(QubitId, QubitId),
    CZ(QubitId, QubitId),
}

/// Quarter turns of `theta` modulo 4, or `None` if `theta` is not a multiple of `pi/2`.
fn quarter_turns(kind: Kind) -> Option<i64> {
    let a = kind.angle()?;
    match a.log2_denom() {
        0 => Some((2 * a.numerator()).rem_euclid(4)),
        1 => Some(a.numerator().rem_euclid(4)),
        _ => None,
    }
}

/// Lowers one instruction. Preparations and measurements yield an empty list.
pub fn lower(kind: Kind, t: &[QubitId], index: usize) -> Result<Vec<Step>> {
    use Step::*;
    let non_clifford = || Error::NonClifford { index, kind: format!("{}", kind.name()) };
    let s = match kind {
        Kind::PrepZ | Kind::PrepX | Kind::MeasZ | Kind::MeasX => Vec::new(),
        Kind::X => alloc::vec![X(t[0])],
        Kind::Y => alloc::vec![Y(t[0])],
        Kind::Z => alloc::vec![Z(t[0])],
        Kind::H => alloc::vec![H(t[0])],
        Kind::S => alloc::vec![S(t[0])],
        Kind::Sdg => alloc::vec![Sdg(t[0])],
        Kind::CX => alloc::vec![CX(t[0], t[1])],
        Kind::CZ => alloc::vec![CZ(t[0], t[1])],
        Kind::CCX | Kind::CCZ => return Err(non_clifford()),
        Kind::RZ(_) => match quarter_turns(kind).ok_or_else(non_clifford)? {
            0 => Vec::new(),
            1 => alloc::vec![S(t[0])],
            2 => alloc::vec![Z(t[0])],
            _ => alloc::vec![Sdg(t[0])],
        },
        Kind::RZZ(_) => match quarter_turns(kind).ok_or_else(non_clifford)? {
            0 => Vec::new(),
            1 => alloc::vec![CX(t[0], t[1]), S(t[1]), CX(t[0], t[1])],
            2 => alloc::vec![Z(t[0]), Z(t[1])],
            _ => alloc::vec![CX(t[0], t[1]), Sdg(t[1]), CX(t[0], t[1])],
        },
        // controlled R(n pi): n odd gives C(-+iP), n = 2 mod 4 gives C(-I)
        Kind::CRZ(_) | Kind::CRZZ(_) => {
            let q = quarter_turns(kind).ok_or_else(non_clifford)?;
            if q % 2 == 1 {
                return Err(non_clifford());
            }
            let turns = (kind.angle().unwrap().numerator()).rem_euclid(4);
            let mut v = Vec::new();
            match turns {
                0 => {}
                2 => v.push(Z(t[0])),
                n => {
                    for &x in &t[1..] {
                        v.push(CZ(t[0], x));
                    }
                    v.push(if n == 1 { Sdg(t[0]) } else { S(t[0]) });
                }
            }
            v
        }
    };
    Ok(s)
}

/// Lowers every instruction of a Clifford circuit; `out[i]` are the steps of instruction `i`.
pub fn lower_circuit(c: &Circuit) -> Result<Vec<Vec<Step>>> {
    c.instructions().iter().enumerate().map(|(i, ins)| lower(ins.kind, &ins.targets, i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angle::DyadicAngle;
    use crate::ir::{phase_insensitive_fidelity, unitary_of, RoleKind};

    fn as_circuit(n: usize, steps: &[Step]) -> Circuit {
        let mut c = Circuit::new();
        for j in 0..n {
            c.add_qubit(RoleKind::Data, alloc::format!("d{j}"));
        }
        for s in steps {
            match *s {
                Step::H(q) => c.gate1(Kind::H, q),
                Step::S(q) => c.gate1(Kind::S, q),
                Step::Sdg(q) => c.gate1(Kind::Sdg, q),
                Step::X(q) => c.gate1(Kind::X, q),
                Step::Y(q) => c.gate1(Kind::Y, q),
                Step::Z(q) => c.gate1(Kind::Z, q),
                Step::CX(a, b) => c.cx(a, b),
                Step::CZ(a, b) => c.cz(a, b),
            }
        }
        c
    }

    #[test]
    fn lowering_matches_unitaries() {
        let mut kinds = Vec::new();
        for n in -8..8 {
            kinds.push((Kind::RZ(DyadicAngle::new(n, 1)), alloc::vec![0]));
            kinds.push((Kind::RZZ(DyadicAngle::new(n, 1)), alloc::vec![0, 1]));
            kinds.push((Kind::CRZ(DyadicAngle::new(n, 0)), alloc::vec![2, 0]));
            kinds.push((Kind::CRZZ(DyadicAngle::new(n, 0)), alloc::vec![2, 0, 1]));
        }
        for (k, t) in kinds {
            let steps = lower(k, &t, 0).unwrap();
            let mut c = as_circuit(3, &[]);
            c.push(k, &t);
            let f = phase_insensitive_fidelity(&unitary_of(&c).unwrap(), &unitary_of(&as_circuit(3, &steps)).unwrap());
            assert!((f - 1.0).abs() < 1e-12, "{k:?}: {f}");
        }
        assert!(lower(Kind::CCX, &[0, 1, 2], 4).is_err());
        assert!(lower(Kind::RZ(DyadicAngle::new(1, 2)), &[0], 0).is_err());
        assert!(lower(Kind::CRZ(DyadicAngle::new(1, 1)), &[0, 1], 0).is_err());
    }
}
