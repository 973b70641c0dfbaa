use alloc::format;
use alloc::vec::Vec;

use super::{GadgetReport, Recipe};
use crate::angle::DyadicAngle;
use crate::codes::{
    flagged_z_syndrome_extraction, ft_plus_prep, qed_round, steane_code, Basis, CodeSpec, LogicalWord,
    STEANE_LOGICAL_X, STEANE_LOGICAL_Z,
};
use crate::error::{Error, Result};
use crate::ir::{compose_reusing, Circuit, Kind, QubitId, RoleKind};
use crate::pauli::Pauli;

/// `C_controls R_Zbar(angle)` by a CNOT fan-in onto the first qubit of the logical `Z` support.
pub fn nonft_logical_rz_ladder(code: &CodeSpec, angle: DyadicAngle, m: usize) -> Result<Circuit> {
    let mut r = Recipe::new(Circuit::for_code(code));
    let controls: Vec<QubitId> = (0..m).map(|j| r.qubit(RoleKind::LogicalAncilla, format!("c_{j}"))).collect();
    if angle != DyadicAngle::ZERO {
        let support = code.logical_z[0].support();
        ladder_ops(&mut r, &controls, &support, angle);
    }
    r.lower()
}

fn ladder_ops(r: &mut Recipe, controls: &[QubitId], support: &[QubitId], angle: DyadicAngle) {
    let (root, rest) = support.split_first().expect("nonempty logical");
    for &q in rest {
        r.native(Kind::CX, &[q, *root]);
    }
    r.controlled(controls, Kind::RZ(angle), &[*root]);
    for &q in rest.iter().rev() {
        r.native(Kind::CX, &[q, *root]);
    }
}

/// `G(A, theta)`: `C_A R_Zbar(theta)`. At `pi/2` and coarser the rotation is the transversal
/// `R_Z(-theta)`; finer angles store `Xbar` in a Bell pair, rotate without protection and
/// correct with the controlled rotation by `-2 theta`.
fn steane_rz_ops(r: &mut Recipe, controls: &[QubitId], theta: DyadicAngle, depth: usize) {
    if theta.log2_denom() <= 1 {
        for q in 0..7 {
            r.controlled(controls, Kind::RZ(-theta), &[q]);
        }
        return;
    }
    let a = r.qubit(RoleKind::CatAncilla, format!("a_{depth}"));
    let b = r.qubit(RoleKind::CatAncilla, format!("a'_{depth}"));
    r.native(Kind::PrepX, &[a]);
    r.native(Kind::PrepZ, &[b]);
    r.native(Kind::CX, &[a, b]);
    let [x0, x1, x2] = STEANE_LOGICAL_X;
    let fan = [(a, x0), (b, x1), (b, x2)];
    for &(c, q) in &fan {
        r.native(Kind::CX, &[c, q]);
    }
    ladder_ops(r, controls, &STEANE_LOGICAL_Z, theta);
    let mut inner = controls.to_vec();
    inner.push(a);
    steane_rz_ops(r, &inner, -theta.double(), depth + 1);
    for &(c, q) in fan.iter().rev() {
        r.native(Kind::CX, &[c, q]);
    }
    r.native(Kind::CX, &[a, b]);
    r.measure(Basis::X, a);
    r.measure(Basis::Z, b);
}

/// Flagged `R_Zbar(pi/2^l)` on the Steane code.
pub fn steane_ft_rz(l: u32) -> Result<GadgetReport> {
    if l == 0 {
        return Err(Error::InvalidArgument("l must be at least 1".into()));
    }
    let code = steane_code();
    let angle = DyadicAngle::pi_over_pow2(l);
    let mut r = Recipe::new(Circuit::for_code(&code));
    steane_rz_ops(&mut r, &[], angle, 0);
    GadgetReport::from_recipe(r, LogicalWord::single(1, Pauli::Z), angle, Vec::new(), true)
}

/// Verified `|+>`, the rotation, then one flagged round of error detection: `R_Zbar(pi/2^l)|+>`.
pub fn steane_state_prep(l: u32) -> Result<Circuit> {
    let code = steane_code();
    let prep = ft_plus_prep(&code)?;
    let rot = steane_ft_rz(l)?.circuit;
    let qed = qed_round(&code)?;
    compose_reusing(&[&prep, &rot, &qed])
}

const CAT: usize = 3;

struct Cat {
    qubits: [QubitId; CAT],
}

impl Cat {
    fn new(c: &mut Circuit, tag: usize) -> Self {
        let qubits = core::array::from_fn(|j| c.add_qubit(RoleKind::CatAncilla, format!("c{tag}_{j}")));
        Cat { qubits }
    }

    fn prepare(&self, c: &mut Circuit) {
        let [h, u, v] = self.qubits;
        c.prep_x(h);
        c.prep_z(u);
        c.prep_z(v);
        c.cx(h, u);
        c.cx(u, v);
    }

    /// `Xbar` on the code when the cat is `|111>`.
    fn store(&self, c: &mut Circuit) {
        for (&a, q) in self.qubits.iter().zip(STEANE_LOGICAL_X) {
            c.cx(a, q);
        }
    }

    /// `Zbar` when the cat is `|111>`, and `phase` on that branch.
    fn phase(&self, c: &mut Circuit, phase: Kind) {
        for (&a, q) in self.qubits.iter().zip(STEANE_LOGICAL_Z) {
            c.cz(a, q);
        }
        c.gate1(phase, self.qubits[0]);
    }

    /// Unencodes and checks the `X` parity and both `Z` parities.
    fn close(&self, c: &mut Circuit) {
        let [h, u, v] = self.qubits;
        c.cx(u, v);
        c.cx(h, u);
        let rh = c.measure_x(h);
        let ru = c.measure_z(u);
        let rv = c.measure_z(v);
        for r in [rh, ru, rv] {
            c.add_detector(&[r]);
        }
    }
}

/// The CNOT-ladder `R_Zbar(pi/2)` with each ladder control watched by a flag for the span in which
/// an `X` on it would spread to the root.
fn flagged_pi2_ladder(code: &CodeSpec) -> Circuit {
    let mut c = Circuit::for_code(code);
    let [root, rest @ ..] = STEANE_LOGICAL_Z;
    let flags: Vec<QubitId> = rest.iter().map(|q| c.add_qubit(RoleKind::Flag, format!("f_{q}"))).collect();
    for (&f, &q) in flags.iter().zip(&rest) {
        c.prep_z(f);
        c.cx(q, f);
        c.cx(q, root);
    }
    c.rz(DyadicAngle::PI_2, root);
    for (&f, &q) in flags.iter().zip(&rest).rev() {
        c.cx(q, root);
        c.cx(q, f);
        let r = c.measure_z(f);
        c.add_detector(&[r]);
    }
    c
}

fn pi2_d3(rounds: [bool; 2]) -> Result<Circuit> {
    let code = steane_code();
    let mut c = Circuit::for_code(&code);
    let cats = [Cat::new(&mut c, 1), Cat::new(&mut c, 2)];
    for cat in &cats {
        cat.prepare(&mut c);
    }
    for cat in &cats {
        cat.store(&mut c);
    }
    let se = flagged_z_syndrome_extraction(&code);
    let ladder = flagged_pi2_ladder(&code);
    let mut parts = Vec::new();
    if rounds[0] {
        parts.push(&se);
    }
    parts.push(&ladder);
    if rounds[1] {
        parts.push(&se);
    }
    for p in parts {
        c = compose_reusing(&[&c, p])?;
    }
    // the first cat's correction inside the second cat's span picks up the (-1)^{c1 c2} cross term
    cats[0].phase(&mut c, Kind::S);
    for cat in cats.iter().rev() {
        cat.store(&mut c);
    }
    cats[1].phase(&mut c, Kind::Sdg);
    for cat in &cats {
        cat.close(&mut c);
    }
    Ok(c)
}

/// Distance-3 `R_Zbar(pi/2)`: `Xbar` stored in two cats around an unprotected rotation,
/// with `Z` syndrome extraction on both sides of it.
pub fn steane_pi2_d3() -> Result<Circuit> {
    pi2_d3([true, true])
}

/// [`steane_pi2_d3`] without the extraction round that precedes the rotation.
pub fn steane_pi2_d3_ablated() -> Result<Circuit> {
    pi2_d3([false, true])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::faults::{fault_distance, CheckMode, DenseChecker, DenseThresholds, Engine};
    use crate::ir::{phase_insensitive_fidelity, unitary_of};
    use crate::sv::{accepted_branches, encoded_plus, input_qubits, logical_infidelity, StateVector};

    #[test]
    fn ladder_matches_dense_rotation() {
        let code = steane_code();
        let c = nonft_logical_rz_ladder(&code, DyadicAngle::new(1, 2), 0).unwrap();
        let u = unitary_of(&c).unwrap();
        let mut z = crate::ir::DenseMatrix::identity(1 << 7);
        let p = code.logical_z[0].clone();
        for j in 0..1usize << 7 {
            let mut s = StateVector::basis(7, j).unwrap();
            crate::sv::apply_pauli_rotation(&mut s, &(0..7).collect::<Vec<_>>(), &p, DyadicAngle::new(1, 2));
            z.set_column(j, s.amplitudes());
        }
        assert!((phase_insensitive_fidelity(&u, &z) - 1.0).abs() < 1e-12);
        assert!(nonft_logical_rz_ladder(&code, DyadicAngle::ZERO, 0).unwrap().instructions().is_empty());
        let bare = nonft_logical_rz_ladder(&code, DyadicAngle::PI_2, 0).unwrap();
        let r = fault_distance(&bare, 1, Engine::Clifford, CheckMode::Full).unwrap();
        assert_eq!(r.distance, Some(1));
    }

    #[test]
    fn recursion_is_exact() {
        for l in 1..=3 {
            let g = steane_ft_rz(l).unwrap();
            let m = g.verify().unwrap();
            assert!(m.fidelity > 1.0 - 1e-10, "l={l} fidelity {}", m.fidelity);
            assert!(m.acceptance > 1.0 - 1e-10);
        }
        let g = steane_ft_rz(3).unwrap();
        assert_eq!(g.ancilla_count(), 5);
    }

    #[test]
    fn single_faults_are_caught() {
        for l in 1..=3 {
            let c = steane_state_prep(l).unwrap();
            let checker = DenseChecker::new(&c, CheckMode::Full, DenseThresholds::default()).unwrap();
            let reports: Vec<_> =
                crate::noise::enumerate_fault_sites(&c).iter().map(|f| checker.classify(f).unwrap()).collect();
            let d = checker.distance_from(reports);
            assert_eq!(d.distance, None, "l={l}: {:?}", d.witness());
        }
    }

    #[test]
    fn prepared_state_is_exact() {
        let c = steane_state_prep(3).unwrap();
        assert!(input_qubits(&c).is_empty());
        let a = accepted_branches(&c, &StateVector::zero(0).unwrap(), &crate::sv::Injections::none()).unwrap();
        assert!((a.acceptance - 1.0).abs() < 1e-10);
        let code = steane_code();
        let mut ideal = encoded_plus(&code).unwrap();
        crate::sv::apply_pauli_rotation(
            &mut ideal,
            &(0..7).collect::<Vec<_>>(),
            &code.logical_z[0],
            DyadicAngle::new(1, 3),
        );
        for (_, s) in &a.branches {
            let mut s = s.clone();
            s.normalize().unwrap();
            assert!(logical_infidelity(&s, &code, &ideal).unwrap() < 1e-10);
        }
    }

    #[test]
    fn pi2_d3_is_exact() {
        let c = steane_pi2_d3().unwrap();
        assert!(c.is_clifford());
        let g =
            GadgetReport::from_circuit(c, LogicalWord::single(1, Pauli::Z), DyadicAngle::PI_2, Vec::new(), None, false);
        let m = g.verify().unwrap();
        assert!(m.fidelity > 1.0 - 1e-10, "fidelity {}", m.fidelity);
    }

    #[test]
    fn pi2_d3_has_distance_three() {
        let r = fault_distance(&steane_pi2_d3().unwrap(), 2, Engine::Clifford, CheckMode::Full).unwrap();
        assert_eq!(r.distance, None, "{:?}", r.witness());
        let r = fault_distance(&steane_pi2_d3_ablated().unwrap(), 2, Engine::Clifford, CheckMode::Full).unwrap();
        assert_eq!(r.distance, Some(2));
    }
}
