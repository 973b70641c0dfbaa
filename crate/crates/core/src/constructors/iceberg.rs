use alloc::format;
use alloc::vec::Vec;

use super::{GadgetReport, Recipe, RotationSpec, RotationTarget};
use crate::angle::DyadicAngle;
use crate::codes::{Basis, CodeFamily, CodeSpec, LogicalWord};
use crate::error::{Error, Result};
use crate::ir::{Circuit, Kind, QubitId, RoleKind};
use crate::pauli::Pauli;

fn check_iceberg(code: &CodeSpec) -> Result<()> {
    if code.family() != CodeFamily::Iceberg {
        return Err(Error::InvalidArgument(format!("{} is not an iceberg code", code.name)));
    }
    Ok(())
}

fn check_logical(code: &CodeSpec, i: usize) -> Result<()> {
    if i == 0 || i > code.k {
        return Err(Error::InvalidArgument(format!("logical qubit {i} out of range 1..={}", code.k)));
    }
    Ok(())
}

/// `C_controls R_ZZ(theta)` on `(a, b)` with `ZZ` errors flagged, one level per halving of the angle.
///
/// Level `l` opens a flag `a_j` with `CX(a_j, a)`, applies the rotation, recurses on
/// `C_{controls, a_j} R_ZZ(-2 theta)` and closes the flag. At `l = 1` the doubled rotation is an
/// integer multiple of `pi` and splits into single-qubit controlled operators.
pub(super) fn ft_czz_ops(
    r: &mut Recipe,
    controls: &[QubitId],
    a: QubitId,
    b: QubitId,
    theta: DyadicAngle,
    depth: usize,
) {
    let l = theta.log2_denom();
    if l == 0 {
        r.controlled_rzz_pi(controls, theta.numerator(), a, b);
        return;
    }
    let f = r.qubit(RoleKind::Flag, format!("a_{depth}"));
    r.native(Kind::PrepX, &[f]);
    // a flag that controls deeper levels is itself watched for bit flips
    let watch = (l > 1).then(|| {
        let w = r.qubit(RoleKind::Flag, format!("f_{depth}"));
        r.native(Kind::PrepZ, &[w]);
        r.native(Kind::CX, &[f, w]);
        w
    });
    r.native(Kind::CX, &[f, a]);
    r.controlled(controls, Kind::RZZ(theta), &[a, b]);
    let mut inner = controls.to_vec();
    inner.push(f);
    let doubled = -theta.double();
    if l == 1 {
        r.controlled_rzz_pi(&inner, doubled.numerator(), a, b);
    } else {
        ft_czz_ops(r, &inner, a, b, doubled, depth + 1);
    }
    r.native(Kind::CX, &[f, a]);
    if let Some(w) = watch {
        r.native(Kind::CX, &[f, w]);
        r.measure(Basis::Z, w);
    }
    r.measure(Basis::X, f);
}

fn external_controls(r: &mut Recipe, m: usize) -> Vec<QubitId> {
    (0..m).map(|j| r.qubit(RoleKind::LogicalAncilla, format!("c_{j}"))).collect()
}

/// Flagged `C_{c_{m-1}..c_0} R_ZZ(angle)` on `(q_i, q_b)`; the target must be a single logical qubit.
pub fn iceberg_ft_czz(spec: &RotationSpec) -> Result<GadgetReport> {
    check_iceberg(&spec.code)?;
    let RotationTarget::Single(i) = spec.target else {
        return Err(Error::InvalidArgument("the ZZ gadget targets one logical qubit".into()));
    };
    check_logical(&spec.code, i)?;
    if spec.angle.log2_denom() == 0 {
        return Err(Error::InvalidArgument("angle must be pi/2^l with l >= 1".into()));
    }
    let b = spec.code.named("b").expect("iceberg base");
    let mut r = Recipe::new(Circuit::for_code(&spec.code));
    let controls = external_controls(&mut r, spec.num_external_controls);
    ft_czz_ops(&mut r, &controls, i, b, spec.angle, 0);
    GadgetReport::from_recipe(r, LogicalWord::single(i, Pauli::Z), spec.angle, controls, spec.use_ladder)
}

/// The ZZ gadget on `(a, b)` inside an `a_z` check: `CX(a, a_z)` opened first and closed last,
/// so any `X` on `a` during the gadget flips `a_z`.
fn with_x_check(spec: &RotationSpec, a: QubitId, b: QubitId, word: LogicalWord) -> Result<GadgetReport> {
    let mut r = Recipe::new(Circuit::for_code(&spec.code));
    let controls = external_controls(&mut r, spec.num_external_controls);
    let az = r.qubit(RoleKind::Flag, "a_z");
    r.native(Kind::PrepZ, &[az]);
    r.native(Kind::CX, &[a, az]);
    ft_czz_ops(&mut r, &controls, a, b, spec.angle, 0);
    r.native(Kind::CX, &[a, az]);
    r.measure(Basis::Z, az);
    GadgetReport::from_recipe(r, word, spec.angle, controls, spec.use_ladder)
}

/// Fault-tolerant `R_Z(angle)` on logical qubit `i` (or `R_{Z_i Z_j}` for a pair).
pub fn iceberg_rotation(spec: &RotationSpec) -> Result<GadgetReport> {
    check_iceberg(&spec.code)?;
    let b = spec.code.named("b").expect("iceberg base");
    match spec.target {
        RotationTarget::Single(i) => {
            check_logical(&spec.code, i)?;
            with_x_check(spec, i, b, LogicalWord::single(i, Pauli::Z))
        }
        RotationTarget::Pair(i, j) => {
            check_logical(&spec.code, i)?;
            check_logical(&spec.code, j)?;
            if i == j {
                return Err(Error::InvalidArgument(format!("pair rotation needs two distinct qubits, got {i} twice")));
            }
            with_x_check(spec, i, j, LogicalWord::new(alloc::vec![(i, Pauli::Z), (j, Pauli::Z)])?)
        }
        RotationTarget::Word(ref w) => {
            let z = iceberg_rotation(&RotationSpec { target: RotationTarget::Single(1), ..spec.clone() })?;
            super::relabel_pauli_basis(&z, w)
        }
    }
}

/// `exp(-i pi/2^(l+1) sign Z_i)` with `ZZ`, `XX` and `YY` gadget errors flagged.
pub fn iceberg_logical_rz(i: usize, l: u32, negative: bool, code: &CodeSpec) -> Result<GadgetReport> {
    if l == 0 {
        return Err(Error::InvalidArgument("l must be at least 1".into()));
    }
    let angle = DyadicAngle::pi_over_pow2(l);
    let angle = if negative { -angle } else { angle };
    iceberg_rotation(&RotationSpec::new(code.clone(), RotationTarget::Single(i), angle))
}

/// `exp(-i pi/2^(l+1) sign Z_i Z_j)` on the physical pair `(q_i, q_j)`.
pub fn iceberg_pair_rotation(i: usize, j: usize, l: u32, negative: bool, code: &CodeSpec) -> Result<GadgetReport> {
    if l == 0 {
        return Err(Error::InvalidArgument("l must be at least 1".into()));
    }
    let angle = DyadicAngle::pi_over_pow2(l);
    let angle = if negative { -angle } else { angle };
    iceberg_rotation(&RotationSpec::new(code.clone(), RotationTarget::Pair(i, j), angle))
}

/// `R_Z(pi x_0.x_1...x_l)` on logical qubit `i`; each level of the recursion drops one digit.
pub fn iceberg_binary_rotation(bits: &[bool], i: usize, code: &CodeSpec) -> Result<GadgetReport> {
    if !bits.iter().any(|&b| b) {
        return Err(Error::InvalidArgument("binary fraction has no set digit".into()));
    }
    let angle = DyadicAngle::from_binary_fraction(bits);
    iceberg_rotation(&RotationSpec::new(code.clone(), RotationTarget::Single(i), angle))
}

/// The bare two-qubit `R_ZZ(angle)` on `(q_i, q_b)`.
pub fn nonft_rzz(code: &CodeSpec, i: usize, angle: DyadicAngle) -> Result<GadgetReport> {
    check_iceberg(code)?;
    check_logical(code, i)?;
    let mut c = Circuit::for_code(code);
    c.rzz(angle, i, code.named("b").expect("iceberg base"));
    Ok(GadgetReport::from_circuit(c, LogicalWord::single(i, Pauli::Z), angle, Vec::new(), None, false))
}
