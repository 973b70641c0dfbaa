//! Flag-gadget constructors for small-angle logical rotations.
//!
//! Gadgets are first built as a [`Recipe`]: native instructions plus rotations controlled on any
//! number of qubits. Lowering turns each multi-controlled rotation into a singly-controlled one by
//! computing the AND of its controls into garbage qubits, either per gate or, with the Toffoli
//! ladder, once for a whole nested run of rotations.

mod iceberg;
mod steane;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::angle::DyadicAngle;
use crate::codes::{Basis, CodeSpec, LogicalWord};
use crate::error::{Error, Result};
use crate::ir::{Circuit, Kind, QubitId, RoleKind};
use crate::pauli::{Pauli, PauliString};
use crate::sv::{rotation_fidelity, IdealRotation, Injections, MapFidelity};

pub use iceberg::{
    iceberg_binary_rotation, iceberg_ft_czz, iceberg_logical_rz, iceberg_pair_rotation, iceberg_rotation, nonft_rzz,
};
pub use steane::{nonft_logical_rz_ladder, steane_ft_rz, steane_pi2_d3, steane_pi2_d3_ablated, steane_state_prep};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Op {
    Native(Kind, Vec<QubitId>),
    /// `kind` (one of `X`, `Z`, `RZ`, `RZZ`) on `targets`, applied when every control is 1.
    Controlled {
        controls: Vec<QubitId>,
        kind: Kind,
        targets: Vec<QubitId>,
    },
    Measure {
        basis: Basis,
        qubit: QubitId,
        detector: bool,
    },
}

impl Op {
    fn qubits(&self) -> Vec<QubitId> {
        match self {
            Op::Native(_, t) => t.clone(),
            Op::Controlled { controls, targets, .. } => controls.iter().chain(targets).copied().collect(),
            Op::Measure { qubit, .. } => alloc::vec![*qubit],
        }
    }
}

/// Unlowered gadget: a qubit table (with code) and its operations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Recipe {
    pub base: Circuit,
    pub ops: Vec<Op>,
}

impl Recipe {
    pub fn new(base: Circuit) -> Self {
        Recipe { base, ops: Vec::new() }
    }

    pub fn qubit(&mut self, kind: RoleKind, label: impl Into<alloc::string::String>) -> QubitId {
        self.base.add_qubit(kind, label)
    }

    pub fn native(&mut self, kind: Kind, targets: &[QubitId]) {
        self.ops.push(Op::Native(kind, targets.to_vec()));
    }

    pub fn controlled(&mut self, controls: &[QubitId], kind: Kind, targets: &[QubitId]) {
        if controls.is_empty() {
            self.native(kind, targets);
        } else {
            self.ops.push(Op::Controlled { controls: controls.to_vec(), kind, targets: targets.to_vec() });
        }
    }

    pub fn measure(&mut self, basis: Basis, qubit: QubitId) {
        self.ops.push(Op::Measure { basis, qubit, detector: true });
    }

    /// Applies `R_{ZZ}(n pi)` on `(a, b)` controlled on `controls`, as `Z` on `b` and `R_Z(n pi)` on `a`.
    pub fn controlled_rzz_pi(&mut self, controls: &[QubitId], n: i64, a: QubitId, b: QubitId) {
        match n.rem_euclid(4) {
            0 => {}
            2 => self.controlled_minus_one(controls),
            _ => {
                self.controlled(controls, Kind::Z, &[b]);
                self.controlled(controls, Kind::RZ(DyadicAngle::new(n, 0)), &[a]);
            }
        }
    }

    /// A `-1` phase when every control is 1; a global phase without controls.
    fn controlled_minus_one(&mut self, controls: &[QubitId]) {
        if let Some((&last, rest)) = controls.split_last() {
            self.controlled(rest, Kind::Z, &[last]);
        }
    }

    /// Lowers with one AND chain per multi-controlled rotation.
    pub fn lower(&self) -> Result<Circuit> {
        Lowerer::run(self, false)
    }

    /// Lowers with a shared Toffoli ladder over nested control sets.
    pub fn lower_with_ladder(&self) -> Result<Circuit> {
        Lowerer::run(self, true)
    }

    /// Relabels qubits by `perm` (entry `q` is the new index of qubit `q`); the qubit table is unchanged.
    fn permuted(&self, perm: &[QubitId]) -> Recipe {
        let map = |v: &[QubitId]| v.iter().map(|&q| perm[q]).collect::<Vec<_>>();
        let ops = self
            .ops
            .iter()
            .map(|op| match op {
                Op::Native(k, t) => Op::Native(*k, map(t)),
                Op::Controlled { controls, kind, targets } => {
                    Op::Controlled { controls: map(controls), kind: *kind, targets: map(targets) }
                }
                Op::Measure { basis, qubit, detector } => {
                    Op::Measure { basis: *basis, qubit: perm[*qubit], detector: *detector }
                }
            })
            .collect();
        Recipe { base: self.base.clone(), ops }
    }
}

struct Lowerer {
    c: Circuit,
    ladder: bool,
    pool: Vec<QubitId>,
    /// Controls whose running AND sits in `pool[0..chain.len()-1]`.
    chain: Vec<QubitId>,
}

impl Lowerer {
    fn run(r: &Recipe, ladder: bool) -> Result<Circuit> {
        let mut l = Lowerer { c: r.base.clone(), ladder, pool: Vec::new(), chain: Vec::new() };
        for op in &r.ops {
            if let Op::Controlled { controls, kind, targets } = op {
                if controls.len() >= 2 {
                    l.multi(controls, *kind, targets)?;
                    continue;
                }
            }
            let qs = op.qubits();
            let touched: Vec<QubitId> = l.chain.iter().chain(&l.pool).copied().collect();
            if qs.iter().any(|q| touched.contains(q)) {
                l.release();
            }
            match op {
                Op::Native(k, t) => {
                    l.c.try_push(*k, t)?;
                }
                Op::Controlled { controls, kind, targets } => l.single(controls[0], *kind, targets)?,
                Op::Measure { basis, qubit, detector } => {
                    let rec = match basis {
                        Basis::Z => l.c.measure_z(*qubit),
                        Basis::X => l.c.measure_x(*qubit),
                    };
                    if *detector {
                        l.c.add_detector(&[rec]);
                    }
                }
            }
        }
        l.release();
        Ok(l.c)
    }

    fn garbage(&mut self, j: usize) -> QubitId {
        while self.pool.len() <= j {
            let g = self.c.add_qubit(RoleKind::Garbage, format!("g_{}", self.pool.len()));
            self.pool.push(g);
        }
        self.pool[j]
    }

    fn single(&mut self, ctl: QubitId, kind: Kind, t: &[QubitId]) -> Result<()> {
        let mut targets = alloc::vec![ctl];
        targets.extend_from_slice(t);
        let k = match kind {
            Kind::X => Kind::CX,
            Kind::Z => Kind::CZ,
            Kind::RZ(a) => Kind::CRZ(a),
            Kind::RZZ(a) => Kind::CRZZ(a),
            other => return Err(Error::InvalidArgument(format!("cannot control {}", other.name()))),
        };
        self.c.try_push(k, &targets)?;
        Ok(())
    }

    /// Extends the chain so that it starts with `controls`; returns the qubit holding their AND.
    fn compute(&mut self, controls: &[QubitId]) -> Result<QubitId> {
        let shared = self.chain.iter().zip(controls).take_while(|(a, b)| a == b).count();
        if shared < self.chain.len() && shared < controls.len() {
            if self.ladder && self.chain.len() >= 2 {
                return Err(Error::InvalidArgument(
                    "controls are not nested; the Toffoli ladder needs a recursive gadget".into(),
                ));
            }
            self.release();
            return self.compute(controls);
        }
        if shared == 0 {
            self.chain = alloc::vec![controls[0]];
        }
        while self.chain.len() < controls.len() {
            let next = controls[self.chain.len()];
            let prev = if self.chain.len() == 1 { self.chain[0] } else { self.pool[self.chain.len() - 2] };
            let g = self.garbage(self.chain.len() - 1);
            self.c.prep_z(g);
            self.c.ccx(prev, next, g);
            self.chain.push(next);
        }
        Ok(self.pool[controls.len() - 2])
    }

    fn multi(&mut self, controls: &[QubitId], kind: Kind, targets: &[QubitId]) -> Result<()> {
        if targets.iter().any(|t| self.pool.contains(t) || controls.contains(t)) {
            return Err(Error::InvalidArgument("controlled operation targets one of its controls".into()));
        }
        if !self.ladder || targets.iter().any(|t| self.chain.contains(t)) {
            self.release();
        }
        let g = self.compute(controls)?;
        self.single(g, kind, targets)?;
        if !self.ladder {
            self.release();
        }
        Ok(())
    }

    /// Uncomputes the chain and checks every garbage qubit in `Z`.
    fn release(&mut self) {
        if self.chain.len() < 2 {
            self.chain.clear();
            return;
        }
        let used = self.chain.len() - 1;
        for j in (0..used).rev() {
            let prev = if j == 0 { self.chain[0] } else { self.pool[j - 1] };
            self.c.ccx(prev, self.chain[j + 1], self.pool[j]);
        }
        for j in 0..used {
            let r = self.c.measure_z(self.pool[j]);
            self.c.add_detector(&[r]);
        }
        self.chain.clear();
    }
}

/// Logical operand of a rotation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RotationTarget {
    Single(usize),
    Pair(usize, usize),
    Word(LogicalWord),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RotationSpec {
    pub angle: DyadicAngle,
    pub target: RotationTarget,
    pub code: CodeSpec,
    pub num_external_controls: usize,
    pub use_ladder: bool,
}

impl RotationSpec {
    pub fn new(code: CodeSpec, target: RotationTarget, angle: DyadicAngle) -> Self {
        RotationSpec { angle, target, code, num_external_controls: 0, use_ladder: false }
    }

    pub fn word(&self) -> Result<LogicalWord> {
        match &self.target {
            RotationTarget::Single(i) => Ok(LogicalWord::single(*i, Pauli::Z)),
            RotationTarget::Pair(i, j) => LogicalWord::new(alloc::vec![(*i, Pauli::Z), (*j, Pauli::Z)]),
            RotationTarget::Word(w) => Ok(w.clone()),
        }
    }
}

/// A built gadget and what it should do.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GadgetReport {
    pub circuit: Circuit,
    /// Ideal action `exp(-i angle/2 word)`, controlled on `controls`.
    pub word: LogicalWord,
    pub angle: DyadicAngle,
    pub controls: Vec<QubitId>,
    pub flag_detectors: Vec<usize>,
    pub ancillas: BTreeMap<RoleKind, usize>,
    pub recipe: Option<Recipe>,
    pub laddered: bool,
}

impl GadgetReport {
    fn from_recipe(
        recipe: Recipe,
        word: LogicalWord,
        angle: DyadicAngle,
        controls: Vec<QubitId>,
        ladder: bool,
    ) -> Result<Self> {
        let circuit = if ladder { recipe.lower_with_ladder()? } else { recipe.lower()? };
        Ok(Self::from_circuit(circuit, word, angle, controls, Some(recipe), ladder))
    }

    fn from_circuit(
        circuit: Circuit,
        word: LogicalWord,
        angle: DyadicAngle,
        controls: Vec<QubitId>,
        recipe: Option<Recipe>,
        laddered: bool,
    ) -> Self {
        let flag_detectors = (0..circuit.detectors().len()).collect();
        let mut ancillas = circuit.stats().num_qubits_by_role;
        ancillas.remove(&RoleKind::Data);
        GadgetReport { circuit, word, angle, controls, flag_detectors, ancillas, recipe, laddered }
    }

    pub fn ancilla_count(&self) -> usize {
        self.ancillas.values().sum()
    }

    /// The ideal operator as a dense-oracle rotation over the whole register.
    pub fn ideal(&self) -> Result<IdealRotation> {
        let code = self.circuit.code().ok_or_else(|| Error::InvalidCircuit("gadget has no code".into()))?;
        Ok(IdealRotation {
            pauli: self.word.to_physical(code)?,
            pauli_qubits: (0..code.n).collect(),
            angle: self.angle,
            controls: self.controls.clone(),
        })
    }

    /// Noiseless accepted-map fidelity against the ideal rotation.
    pub fn verify(&self) -> Result<MapFidelity> {
        rotation_fidelity(&self.circuit, &self.ideal()?, &Injections::none())
    }
}

/// Re-lowers a recursive gadget with the Toffoli ladder.
pub fn apply_toffoli_ladder(g: &GadgetReport) -> Result<GadgetReport> {
    let recipe =
        g.recipe.clone().ok_or_else(|| Error::InvalidArgument("gadget has no recursive form to ladder".into()))?;
    GadgetReport::from_recipe(recipe, g.word.clone(), g.angle, g.controls.clone(), true)
}

/// Physical representative of `word` with the given weight, among its products with stabilizers.
fn representative_of_weight(code: &CodeSpec, word: &LogicalWord, weight: usize) -> Result<PauliString> {
    let base = word.to_physical(code)?;
    let stabs: Vec<&PauliString> = code.stabilizers().collect();
    let mut best: Option<PauliString> = None;
    for m in 0..1usize << stabs.len() {
        let mut p = base.clone();
        for (j, s) in stabs.iter().enumerate() {
            if (m >> j) & 1 == 1 {
                p = &p * s;
            }
        }
        if p.weight() == weight && best.as_ref().is_none_or(|b| p.support() < b.support()) {
            best = Some(p);
        }
    }
    best.ok_or_else(|| Error::InvalidArgument(format!("{word} has no representative of weight {weight}")))
}

/// Re-targets a `Z`-type gadget to another logical Pauli word by permuting data qubits and
/// conjugating with single-qubit Cliffords on the new support.
pub fn relabel_pauli_basis(g: &GadgetReport, word: &LogicalWord) -> Result<GadgetReport> {
    if *word == g.word {
        return Ok(g.clone());
    }
    let code = g.circuit.code().ok_or_else(|| Error::InvalidCircuit("gadget has no code".into()))?.clone();
    let src = g.word.to_physical(&code)?;
    if !src.letters().iter().all(|&l| l == Pauli::I || l == Pauli::Z) || src.phase() != 0 {
        return Err(Error::InvalidArgument(format!("gadget word {} is not a positive Z-type operator", g.word)));
    }
    let from = src.support();
    let tgt = representative_of_weight(&code, word, from.len())?;
    let to = tgt.support();
    // permutation of data qubits sending `from[j]` to `to[j]`
    let n_all = g.circuit.num_qubits();
    let mut perm: Vec<Option<QubitId>> = alloc::vec![None; n_all];
    for (&f, &t) in from.iter().zip(&to) {
        perm[f] = Some(t);
    }
    let mut free: Vec<QubitId> = (0..code.n).filter(|q| !to.contains(q)).collect();
    free.reverse();
    for (q, slot) in perm.iter_mut().enumerate() {
        if slot.is_none() {
            *slot = Some(if q < code.n { free.pop().expect("bijection") } else { q });
        }
    }
    let perm: Vec<QubitId> = perm.into_iter().map(|q| q.unwrap()).collect();

    let mut pre = Vec::new();
    for &q in &to {
        match tgt.get(q) {
            Pauli::X => pre.push(Op::Native(Kind::H, alloc::vec![q])),
            Pauli::Y => {
                pre.push(Op::Native(Kind::Sdg, alloc::vec![q]));
                pre.push(Op::Native(Kind::H, alloc::vec![q]));
            }
            _ => {}
        }
    }
    // a negative representative flips the rotation: conjugate by X on one support qubit
    if tgt.phase() == 2 {
        pre.push(Op::Native(Kind::X, alloc::vec![to[0]]));
    }
    let post: Vec<Op> = pre
        .iter()
        .rev()
        .map(|op| match op {
            Op::Native(Kind::Sdg, t) => Op::Native(Kind::S, t.clone()),
            other => other.clone(),
        })
        .collect();
    let wrap = |body: Vec<Op>| {
        let mut ops = pre.clone();
        ops.extend(body);
        ops.extend(post.iter().cloned());
        ops
    };
    let recipe = match &g.recipe {
        Some(r) => {
            let mut p = r.permuted(&perm);
            p.ops = wrap(p.ops);
            Some(p)
        }
        None => None,
    };
    let circuit = match &recipe {
        Some(r) if g.laddered => r.lower_with_ladder()?,
        Some(r) => r.lower()?,
        None => {
            let mut c = Circuit::new();
            for role in g.circuit.qubits() {
                c.add_qubit(role.kind, role.label.clone());
            }
            c.set_code(Some(code.clone()));
            let body: Vec<Op> = g
                .circuit
                .instructions()
                .iter()
                .map(|i| Op::Native(i.kind, i.targets.iter().map(|&q| perm[q]).collect()))
                .collect();
            let mut r = Recipe::new(c);
            r.ops = wrap(body);
            let mut out = r.lower()?;
            for d in g.circuit.detectors() {
                out.add_detector(&d.records);
            }
            for o in g.circuit.observables() {
                out.add_observable(o.name.clone(), &o.records);
            }
            out
        }
    };
    let controls = g.controls.iter().map(|&q| perm[q]).collect();
    Ok(GadgetReport::from_circuit(circuit, word.clone(), g.angle, controls, recipe, g.laddered))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{phase_insensitive_fidelity, unitary_of};

    fn nested_recipe() -> Recipe {
        let mut base = Circuit::new();
        for j in 0..5 {
            base.add_qubit(RoleKind::Flag, format!("c{j}"));
        }
        let mut r = Recipe::new(base);
        let t = DyadicAngle::new(1, 3);
        r.controlled(&[0, 1], Kind::RZ(t), &[4]);
        r.controlled(&[0, 1, 2], Kind::RZZ(-t), &[3, 4]);
        r.controlled(&[0, 1, 2, 3], Kind::X, &[4]);
        r
    }

    #[test]
    fn ladder_and_chain_lowerings_agree() {
        let r = nested_recipe();
        let a = r.lower().unwrap();
        let b = r.lower_with_ladder().unwrap();
        assert!(b.instructions().len() < a.instructions().len());
        assert_eq!(a.num_qubits(), b.num_qubits());
        // both return garbage to |0>, so compare the accepted maps on the first 5 qubits
        for j in 0..32 {
            let input = crate::sv::StateVector::basis(5, j).unwrap();
            let fa = crate::sv::accepted_branches(&a, &input, &Injections::none()).unwrap();
            let fb = crate::sv::accepted_branches(&b, &input, &Injections::none()).unwrap();
            let (sa, sb) = (fa.summed(5), fb.summed(5));
            assert!((sa.inner(&sb).norm() - 1.0).abs() < 1e-12, "input {j}");
            assert!((fa.acceptance - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn single_control_lowers_natively() {
        let mut base = Circuit::new();
        base.add_qubit(RoleKind::Flag, "c");
        base.add_qubit(RoleKind::Data, "d");
        base.add_qubit(RoleKind::Data, "e");
        let mut r = Recipe::new(base);
        r.controlled(&[0], Kind::RZZ(DyadicAngle::new(1, 2)), &[1, 2]);
        r.controlled_rzz_pi(&[0], 1, 1, 2);
        let c = r.lower().unwrap();
        assert_eq!(c.num_qubits(), 3);
        let mut d = Circuit::new();
        d.add_qubit(RoleKind::Flag, "c");
        d.add_qubit(RoleKind::Data, "d");
        d.add_qubit(RoleKind::Data, "e");
        d.crzz(DyadicAngle::new(1, 2), 0, 1, 2);
        d.crzz(DyadicAngle::PI, 0, 1, 2);
        let f = phase_insensitive_fidelity(&unitary_of(&c).unwrap(), &unitary_of(&d).unwrap());
        assert!((f - 1.0).abs() < 1e-12);
    }
}
