use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::instruction::*;
use crate::angle::DyadicAngle;
use crate::codes::CodeSpec;
use crate::error::{Error, Result};

/// Ordered instructions over role-tagged qubits with detector/observable annotations.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Circuit {
    qubits: Vec<QubitRole>,
    instructions: Vec<Instruction>,
    detectors: Vec<Detector>,
    observables: Vec<Observable>,
    num_records: usize,
    code: Option<CodeSpec>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CircuitStats {
    pub num_qubits_by_role: BTreeMap<RoleKind, usize>,
    pub gate_count: usize,
    pub two_plus_qubit_gate_count: usize,
    pub depth: usize,
}

impl CircuitStats {
    pub fn num_qubits(&self) -> usize {
        self.num_qubits_by_role.values().sum()
    }

    pub fn ancilla_count(&self) -> usize {
        self.num_qubits() - self.num_qubits_by_role.get(&RoleKind::Data).copied().unwrap_or(0)
    }
}

/// Where each qubit of the second circuit lands in [`compose`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum QubitMap {
    /// Qubit `j` of `b` is qubit `j` of `a`, appending any qubits `a` lacks.
    Identity,
    /// Entry `j` is the target in `a` for qubit `j` of `b`; `None` appends a fresh qubit.
    Explicit(Vec<Option<QubitId>>),
}

impl Circuit {
    pub fn new() -> Self {
        Self::default()
    }

    /// Circuit whose first `code.n` qubits are the code's data qubits.
    pub fn for_code(code: &CodeSpec) -> Self {
        let mut c = Self::new();
        for j in 0..code.n {
            c.add_qubit(RoleKind::Data, code.qubit_label(j));
        }
        c.code = Some(code.clone());
        c
    }

    pub fn add_qubit(&mut self, kind: RoleKind, label: impl Into<String>) -> QubitId {
        self.qubits.push(QubitRole::new(kind, label));
        self.qubits.len() - 1
    }

    pub fn num_qubits(&self) -> usize {
        self.qubits.len()
    }

    pub fn qubits(&self) -> &[QubitRole] {
        &self.qubits
    }

    pub fn role(&self, q: QubitId) -> &QubitRole {
        &self.qubits[q]
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    pub fn detectors(&self) -> &[Detector] {
        &self.detectors
    }

    pub fn observables(&self) -> &[Observable] {
        &self.observables
    }

    pub fn num_records(&self) -> usize {
        self.num_records
    }

    pub fn code(&self) -> Option<&CodeSpec> {
        self.code.as_ref()
    }

    pub fn set_code(&mut self, code: Option<CodeSpec>) {
        self.code = code;
    }

    pub fn qubits_with_role(&self, kind: RoleKind) -> Vec<QubitId> {
        (0..self.qubits.len()).filter(|&q| self.qubits[q].kind == kind).collect()
    }

    pub fn data_qubits(&self) -> Vec<QubitId> {
        self.qubits_with_role(RoleKind::Data)
    }

    pub fn find_label(&self, label: &str) -> Option<QubitId> {
        self.qubits.iter().position(|r| r.label == label)
    }

    /// Validates and appends an instruction; returns the record index for measurements.
    pub fn try_push(&mut self, kind: Kind, targets: &[QubitId]) -> Result<Option<RecordId>> {
        if targets.len() != kind.arity() {
            return Err(Error::InvalidCircuit(format!(
                "{} takes {} qubits, got {}",
                kind.name(),
                kind.arity(),
                targets.len()
            )));
        }
        for (i, &q) in targets.iter().enumerate() {
            if q >= self.qubits.len() {
                return Err(Error::InvalidCircuit(format!("qubit q{q} not declared")));
            }
            if targets[..i].contains(&q) {
                return Err(Error::InvalidCircuit(format!("{} repeats qubit q{q}", kind.name())));
            }
        }
        self.instructions.push(Instruction::new(kind, targets));
        if kind.is_measurement() {
            self.num_records += 1;
            Ok(Some(self.num_records - 1))
        } else {
            Ok(None)
        }
    }

    pub fn push(&mut self, kind: Kind, targets: &[QubitId]) -> Option<RecordId> {
        self.try_push(kind, targets).expect("invalid instruction")
    }

    pub fn prep_z(&mut self, q: QubitId) {
        self.push(Kind::PrepZ, &[q]);
    }

    pub fn prep_x(&mut self, q: QubitId) {
        self.push(Kind::PrepX, &[q]);
    }

    pub fn measure_z(&mut self, q: QubitId) -> RecordId {
        self.push(Kind::MeasZ, &[q]).unwrap()
    }

    pub fn measure_x(&mut self, q: QubitId) -> RecordId {
        self.push(Kind::MeasX, &[q]).unwrap()
    }

    pub fn gate1(&mut self, kind: Kind, q: QubitId) {
        self.push(kind, &[q]);
    }

    pub fn cx(&mut self, c: QubitId, t: QubitId) {
        self.push(Kind::CX, &[c, t]);
    }

    pub fn cz(&mut self, a: QubitId, b: QubitId) {
        self.push(Kind::CZ, &[a, b]);
    }

    pub fn ccx(&mut self, c0: QubitId, c1: QubitId, t: QubitId) {
        self.push(Kind::CCX, &[c0, c1, t]);
    }

    pub fn rz(&mut self, angle: DyadicAngle, q: QubitId) {
        self.push(Kind::RZ(angle), &[q]);
    }

    pub fn rzz(&mut self, angle: DyadicAngle, a: QubitId, b: QubitId) {
        self.push(Kind::RZZ(angle), &[a, b]);
    }

    pub fn crz(&mut self, angle: DyadicAngle, c: QubitId, t: QubitId) {
        self.push(Kind::CRZ(angle), &[c, t]);
    }

    pub fn crzz(&mut self, angle: DyadicAngle, c: QubitId, a: QubitId, b: QubitId) {
        self.push(Kind::CRZZ(angle), &[c, a, b]);
    }

    fn check_records(&self, records: &[RecordId]) -> Result<()> {
        match records.iter().find(|&&r| r >= self.num_records) {
            Some(r) => Err(Error::InvalidCircuit(format!("record r{r} does not exist yet"))),
            None => Ok(()),
        }
    }

    pub fn try_add_detector(&mut self, records: &[RecordId]) -> Result<usize> {
        self.check_records(records)?;
        self.detectors.push(Detector { records: records.to_vec() });
        Ok(self.detectors.len() - 1)
    }

    pub fn add_detector(&mut self, records: &[RecordId]) -> usize {
        self.try_add_detector(records).expect("invalid detector")
    }

    pub fn try_add_observable(&mut self, name: impl Into<String>, records: &[RecordId]) -> Result<usize> {
        self.check_records(records)?;
        self.observables.push(Observable { name: name.into(), records: records.to_vec() });
        Ok(self.observables.len() - 1)
    }

    pub fn add_observable(&mut self, name: impl Into<String>, records: &[RecordId]) -> usize {
        self.try_add_observable(name, records).expect("invalid observable")
    }

    /// Instruction index of every measurement record.
    pub fn record_instructions(&self) -> Vec<usize> {
        (0..self.instructions.len()).filter(|&i| self.instructions[i].kind.is_measurement()).collect()
    }

    /// Qubits whose final instruction is a measurement.
    pub fn measured_at_end(&self) -> Vec<bool> {
        let mut last = alloc::vec![false; self.qubits.len()];
        for ins in &self.instructions {
            for &q in &ins.targets {
                last[q] = ins.kind.is_measurement();
            }
        }
        last
    }

    pub fn is_unitary(&self) -> bool {
        self.instructions.iter().all(|i| i.kind.is_unitary())
    }

    pub fn is_clifford(&self) -> bool {
        self.instructions.iter().all(|i| i.kind.is_clifford())
    }

    /// Reversed circuit with adjoint gates.
    pub fn invert(&self) -> Result<Circuit> {
        let mut out = Circuit { qubits: self.qubits.clone(), code: self.code.clone(), ..Default::default() };
        for (index, ins) in self.instructions.iter().enumerate().rev() {
            let kind = ins.kind.inverse().ok_or_else(|| Error::NonUnitary { index, kind: ins.kind.name().into() })?;
            out.instructions.push(Instruction { kind, targets: ins.targets.clone() });
        }
        Ok(out)
    }

    pub fn stats(&self) -> CircuitStats {
        let mut by_role = BTreeMap::new();
        for r in &self.qubits {
            *by_role.entry(r.kind).or_insert(0) += 1;
        }
        let mut level = alloc::vec![0usize; self.qubits.len()];
        let mut depth = 0;
        let mut gates = 0;
        let mut multi = 0;
        for ins in &self.instructions {
            if ins.kind.is_unitary() {
                gates += 1;
                if ins.targets.len() >= 2 {
                    multi += 1;
                }
            }
            let d = ins.targets.iter().map(|&q| level[q]).max().unwrap_or(0) + 1;
            for &q in &ins.targets {
                level[q] = d;
            }
            depth = depth.max(d);
        }
        CircuitStats { num_qubits_by_role: by_role, gate_count: gates, two_plus_qubit_gate_count: multi, depth }
    }

    /// Appends `other`'s annotations and instructions after remapping; used by [`compose`].
    fn append_mapped(&mut self, other: &Circuit, map: &[QubitId]) {
        let offset = self.num_records;
        for ins in &other.instructions {
            let targets = ins.targets.iter().map(|&q| map[q]).collect();
            self.instructions.push(Instruction { kind: ins.kind, targets });
        }
        self.num_records += other.num_records;
        for d in &other.detectors {
            self.detectors.push(Detector { records: d.records.iter().map(|r| r + offset).collect() });
        }
        for o in &other.observables {
            self.observables
                .push(Observable { name: o.name.clone(), records: o.records.iter().map(|r| r + offset).collect() });
        }
    }
}

/// `b` after `a`. Record indices of `b` shift by `a.num_records()`.
pub fn compose(a: &Circuit, b: &Circuit, map: &QubitMap) -> Result<Circuit> {
    let mut out = a.clone();
    let explicit: Vec<Option<QubitId>> = match map {
        QubitMap::Identity => (0..b.num_qubits()).map(|j| (j < a.num_qubits()).then_some(j)).collect(),
        QubitMap::Explicit(v) => {
            if v.len() != b.num_qubits() {
                return Err(Error::InvalidArgument(format!(
                    "qubit map has {} entries for {} qubits",
                    v.len(),
                    b.num_qubits()
                )));
            }
            v.clone()
        }
    };
    let mut resolved = Vec::with_capacity(b.num_qubits());
    for (j, target) in explicit.iter().enumerate() {
        let role = &b.qubits[j];
        match target {
            Some(q) => {
                let q = *q;
                if q >= out.num_qubits() {
                    return Err(Error::InvalidArgument(format!("qubit map target q{q} out of range")));
                }
                if out.qubits[q].kind != role.kind {
                    return Err(Error::RoleConflict {
                        qubit: q,
                        detail: format!("{} qubit mapped onto {} qubit", role.kind, out.qubits[q].kind),
                    });
                }
                if resolved.contains(&q) {
                    return Err(Error::InvalidArgument(format!("qubit map is not injective at q{q}")));
                }
                resolved.push(q);
            }
            None => resolved.push(out.add_qubit(role.kind, role.label.clone())),
        }
    }
    out.append_mapped(b, &resolved);
    if out.code.is_none() {
        out.code = b.code.clone();
    }
    Ok(out)
}

/// Maps `b` onto `a`, sharing data qubits by label and reusing ancillas of the same role
/// that `a` has already measured, provided `b` starts them with a preparation.
pub fn reuse_map(a: &Circuit, b: &Circuit) -> QubitMap {
    let measured = a.measured_at_end();
    let mut first_is_prep = alloc::vec![None; b.num_qubits()];
    for ins in &b.instructions {
        for &q in &ins.targets {
            if first_is_prep[q].is_none() {
                first_is_prep[q] = Some(ins.kind.is_prep());
            }
        }
    }
    let mut used = alloc::vec![false; a.num_qubits()];
    let mut map = Vec::with_capacity(b.num_qubits());
    for (j, role) in b.qubits.iter().enumerate() {
        let target = if role.kind == RoleKind::Data {
            (0..a.num_qubits())
                .find(|&q| !used[q] && a.qubits[q].kind == RoleKind::Data && a.qubits[q].label == role.label)
        } else if first_is_prep[j] != Some(false) {
            (0..a.num_qubits()).find(|&q| !used[q] && a.qubits[q].kind == role.kind && measured[q])
        } else {
            None
        };
        if let Some(q) = target {
            used[q] = true;
        }
        map.push(target);
    }
    QubitMap::Explicit(map)
}

/// Composes a sequence left to right with [`reuse_map`].
pub fn compose_reusing(parts: &[&Circuit]) -> Result<Circuit> {
    let mut out = Circuit::new();
    for (n, part) in parts.iter().enumerate() {
        out = if n == 0 { (*part).clone() } else { compose(&out, part, &reuse_map(&out, part))? };
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Circuit {
        let mut c = Circuit::new();
        let q0 = c.add_qubit(RoleKind::Data, "d0");
        let a = c.add_qubit(RoleKind::Flag, "a");
        c.prep_x(a);
        c.cx(a, q0);
        let r = c.measure_x(a);
        c.add_detector(&[r]);
        c
    }

    #[test]
    fn records_and_validation() {
        let mut c = sample();
        assert_eq!(c.num_records(), 1);
        assert!(c.try_add_detector(&[1]).is_err());
        assert!(c.try_push(Kind::CX, &[0, 0]).is_err());
        assert!(c.try_push(Kind::CX, &[0]).is_err());
        assert!(c.try_push(Kind::H, &[5]).is_err());
        assert_eq!(c.push(Kind::MeasZ, &[0]), Some(1));
    }

    #[test]
    fn compose_shifts_records() {
        let a = sample();
        let b = sample();
        let c = compose(&a, &b, &QubitMap::Identity).unwrap();
        assert_eq!(c.num_records(), 2);
        assert_eq!(c.detectors()[1].records, [1]);
        assert_eq!(c.num_qubits(), 2);
        let empty = Circuit::new();
        assert_eq!(compose(&empty, &a, &QubitMap::Identity).unwrap(), a);
        assert_eq!(compose(&a, &empty, &QubitMap::Identity).unwrap(), a);
    }

    #[test]
    fn compose_rejects_role_conflict() {
        let a = sample();
        let mut b = Circuit::new();
        b.add_qubit(RoleKind::Garbage, "g");
        assert!(matches!(compose(&a, &b, &QubitMap::Identity), Err(Error::RoleConflict { .. })));
    }

    #[test]
    fn reuse_map_shares_measured_ancillas() {
        let a = sample();
        let b = sample();
        let c = compose_reusing(&[&a, &b]).unwrap();
        assert_eq!(c.num_qubits(), 2);
        let mut fresh = Circuit::new();
        fresh.add_qubit(RoleKind::Data, "d0");
        let f = fresh.add_qubit(RoleKind::Flag, "a");
        fresh.cx(0, f);
        let c = compose_reusing(&[&a, &fresh]).unwrap();
        assert_eq!(c.num_qubits(), 3);
    }

    #[test]
    fn invert_reverses_and_adjoints() {
        let mut c = Circuit::new();
        c.add_qubit(RoleKind::Data, "a");
        c.add_qubit(RoleKind::Data, "b");
        c.cx(0, 1);
        c.gate1(Kind::S, 1);
        c.rzz(DyadicAngle::new(1, 2), 0, 1);
        let inv = c.invert().unwrap();
        let kinds: Vec<Kind> = inv.instructions().iter().map(|i| i.kind).collect();
        assert_eq!(kinds, [Kind::RZZ(DyadicAngle::new(-1, 2)), Kind::Sdg, Kind::CX]);
        assert_eq!(inv.invert().unwrap(), c);
        assert!(sample().invert().is_err());
    }

    #[test]
    fn stats_counts() {
        assert_eq!(Circuit::new().stats(), CircuitStats::default());
        let s = sample().stats();
        assert_eq!(s.gate_count, 1);
        assert_eq!(s.two_plus_qubit_gate_count, 1);
        assert_eq!(s.depth, 3);
        assert_eq!(s.num_qubits_by_role[&RoleKind::Flag], 1);
    }
}
