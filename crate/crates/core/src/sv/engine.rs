use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand_core::RngCore;

use super::state::StateVector;
use crate::error::{Error, Result};
use crate::ir::{Circuit, Kind, QubitId};
use crate::pauli::Pauli;

/// Branch weights below this are treated as impossible.
pub const BRANCH_EPS: f64 = 1e-13;

/// Paulis applied right after given instructions, and record flips.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Injections {
    /// `(instruction, qubit, letter)`, sorted by instruction.
    pub paulis: Vec<(usize, QubitId, Pauli)>,
    /// Sorted record indices to flip.
    pub flips: Vec<usize>,
}

impl Injections {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn add_pauli(&mut self, instruction: usize, q: QubitId, p: Pauli) {
        self.paulis.push((instruction, q, p));
        self.paulis.sort_by_key(|e| e.0);
    }

    pub fn add_flip(&mut self, record: usize) {
        if let Err(pos) = self.flips.binary_search(&record) {
            self.flips.insert(pos, record);
        } else {
            self.flips.retain(|&r| r != record);
        }
    }
}

/// One term of the branch expansion: an unnormalized state and its record.
#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    pub state: StateVector,
    pub records: Vec<bool>,
}

impl Branch {
    pub fn weight(&self) -> f64 {
        self.state.norm_sqr()
    }
}

/// Per-circuit precomputation shared by the dense routines.
#[derive(Clone, Debug)]
pub struct Program<'c> {
    pub circuit: &'c Circuit,
    /// Detectors whose largest record index is `r`.
    completes: Vec<Vec<usize>>,
    record_of_instruction: Vec<Option<usize>>,
    /// For `MeasX`: whether the qubit is touched again without a reset, so the
    /// post-measurement `|+->` state must be restored. Otherwise it is left as `|b>`.
    restore_x: Vec<bool>,
}

impl<'c> Program<'c> {
    pub fn new(circuit: &'c Circuit) -> Result<Self> {
        if circuit.num_qubits() > super::MAX_QUBITS {
            return Err(Error::ResourceLimit(format!(
                "{} qubits exceeds the dense limit of {}",
                circuit.num_qubits(),
                super::MAX_QUBITS
            )));
        }
        let mut completes = vec![Vec::new(); circuit.num_records()];
        for (d, det) in circuit.detectors().iter().enumerate() {
            if let Some(&last) = det.records.iter().max() {
                completes[last].push(d);
            }
        }
        let mut r = 0;
        let record_of_instruction = circuit
            .instructions()
            .iter()
            .map(|i| {
                i.kind.is_measurement().then(|| {
                    r += 1;
                    r - 1
                })
            })
            .collect();
        let ins = circuit.instructions();
        let restore_x = ins
            .iter()
            .enumerate()
            .map(|(i, m)| {
                m.kind == Kind::MeasX
                    && ins[i + 1..]
                        .iter()
                        .find(|l| l.targets.contains(&m.targets[0]))
                        .is_some_and(|l| !l.kind.is_prep())
            })
            .collect();
        Ok(Program { circuit, completes, record_of_instruction, restore_x })
    }

    pub fn num_instructions(&self) -> usize {
        self.circuit.instructions().len()
    }

    pub fn record_of(&self, instruction: usize) -> Option<usize> {
        self.record_of_instruction[instruction]
    }

    fn detector_fires(&self, d: usize, records: &[bool]) -> bool {
        self.circuit.detectors()[d].records.iter().fold(false, |acc, &r| acc ^ records[r])
    }

    fn violated(&self, record: usize, records: &[bool]) -> Option<usize> {
        self.completes[record].iter().copied().find(|&d| self.detector_fires(d, records))
    }

    fn inject(state: &mut StateVector, inj: &Injections, cursor: &mut usize, instruction: usize) {
        while *cursor < inj.paulis.len() && inj.paulis[*cursor].0 < instruction {
            *cursor += 1;
        }
        while *cursor < inj.paulis.len() && inj.paulis[*cursor].0 == instruction {
            let (_, q, p) = inj.paulis[*cursor];
            state.apply_pauli(q, p);
            *cursor += 1;
        }
    }

    /// Exact expansion over measurement outcomes from instruction `start`.
    /// With `prune`, branches violating a detector are dropped as soon as it completes.
    /// Fails with a resource error if more than `cap` branches are alive.
    pub fn run_branches(
        &self,
        init: Vec<Branch>,
        start: usize,
        inj: &Injections,
        prune: bool,
        cap: usize,
    ) -> Result<Vec<Branch>> {
        self.run_branches_until(init, start, self.num_instructions(), inj, prune, cap, &mut Vec::new())
    }

    /// [`Program::run_branches`] over instructions `start..end`, recording in `fired` every
    /// detector that pruned a branch.
    #[allow(clippy::too_many_arguments)]
    pub fn run_branches_until(
        &self,
        init: Vec<Branch>,
        start: usize,
        end: usize,
        inj: &Injections,
        prune: bool,
        cap: usize,
        fired: &mut Vec<usize>,
    ) -> Result<Vec<Branch>> {
        let mut branches = init;
        let mut cursor = 0;
        for (i, ins) in self.circuit.instructions().iter().enumerate().take(end).skip(start) {
            let q = ins.targets[0];
            match ins.kind {
                Kind::PrepZ | Kind::PrepX => {
                    let mut next = Vec::with_capacity(branches.len());
                    for mut b in branches {
                        let w1 = b.state.weight_one(q);
                        let w = b.state.norm_sqr();
                        if w1 <= BRANCH_EPS * w.max(1e-300) {
                            next.push(b);
                        } else if w - w1 <= BRANCH_EPS * w {
                            b.state.apply_x(q);
                            next.push(b);
                        } else {
                            let mut one = b.clone();
                            one.state.project(q, true);
                            one.state.apply_x(q);
                            b.state.project(q, false);
                            next.push(b);
                            next.push(one);
                        }
                    }
                    branches = next;
                    for b in &mut branches {
                        if ins.kind == Kind::PrepX {
                            b.state.apply_h(q);
                        }
                    }
                }
                Kind::MeasZ | Kind::MeasX => {
                    let r = self.record_of(i).unwrap();
                    let flip = inj.flips.binary_search(&r).is_ok();
                    let mut next = Vec::with_capacity(branches.len() * 2);
                    for mut b in branches {
                        if ins.kind == Kind::MeasX {
                            b.state.apply_h(q);
                        }
                        let w1 = b.state.weight_one(q);
                        let w0 = b.state.norm_sqr() - w1;
                        let mut outcomes = Vec::with_capacity(2);
                        if w0 > BRANCH_EPS {
                            outcomes.push(false);
                        }
                        if w1 > BRANCH_EPS {
                            outcomes.push(true);
                        }
                        let n_out = outcomes.len();
                        for (k, bit) in outcomes.into_iter().enumerate() {
                            let mut child =
                                if k + 1 == n_out { core::mem::replace(&mut b, dummy()) } else { b.clone() };
                            if n_out > 1 {
                                child.state.project(q, bit);
                            }
                            if self.restore_x[i] {
                                child.state.apply_h(q);
                            }
                            child.records.push(bit ^ flip);
                            if prune {
                                if let Some(d) = self.violated(r, &child.records) {
                                    if !fired.contains(&d) {
                                        fired.push(d);
                                    }
                                    continue;
                                }
                            }
                            next.push(child);
                        }
                    }
                    branches = next;
                    if branches.len() > cap {
                        return Err(Error::ResourceLimit(format!("more than {cap} live branches")));
                    }
                }
                kind => {
                    for b in &mut branches {
                        b.state.apply(kind, &ins.targets);
                    }
                }
            }
            let saved = cursor;
            for b in &mut branches {
                cursor = saved;
                Self::inject(&mut b.state, inj, &mut cursor, i);
            }
            if branches.is_empty() {
                break;
            }
        }
        Ok(branches)
    }

    /// One Born-rule trajectory from instruction `start`; the state stays normalized.
    pub fn run_sampled<R: RngCore + ?Sized>(
        &self,
        state: &mut StateVector,
        records: &mut Vec<bool>,
        start: usize,
        inj: &Injections,
        rng: &mut R,
    ) {
        let mut cursor = 0;
        for (i, ins) in self.circuit.instructions().iter().enumerate().skip(start) {
            let q: QubitId = ins.targets[0];
            match ins.kind {
                Kind::PrepZ | Kind::PrepX => {
                    let w1 = state.weight_one(q);
                    if w1 > BRANCH_EPS {
                        let one = if w1 >= 1.0 - BRANCH_EPS { true } else { uniform(rng) < w1 };
                        collapse(state, q, one, if one { w1 } else { 1.0 - w1 });
                        if one {
                            state.apply_x(q);
                        }
                    }
                    if ins.kind == Kind::PrepX {
                        state.apply_h(q);
                    }
                }
                Kind::MeasZ | Kind::MeasX => {
                    let r = self.record_of(i).unwrap();
                    if ins.kind == Kind::MeasX {
                        state.apply_h(q);
                    }
                    let w1 = state.weight_one(q);
                    let bit = if w1 <= BRANCH_EPS {
                        false
                    } else if w1 >= 1.0 - BRANCH_EPS {
                        true
                    } else {
                        uniform(rng) < w1
                    };
                    collapse(state, q, bit, if bit { w1 } else { 1.0 - w1 });
                    if self.restore_x[i] {
                        state.apply_h(q);
                    }
                    let flip = inj.flips.binary_search(&r).is_ok();
                    records.push(bit ^ flip);
                }
                kind => state.apply(kind, &ins.targets),
            }
            Self::inject(state, inj, &mut cursor, i);
        }
    }
}

fn dummy() -> Branch {
    Branch { state: StateVector::from_amplitudes(0, vec![super::C64::new(0.0, 0.0)]), records: Vec::new() }
}

fn collapse(state: &mut StateVector, q: QubitId, bit: bool, w: f64) {
    state.project(q, bit);
    if w > 0.0 && (w - 1.0).abs() > 1e-15 {
        state.scale(super::C64::new(1.0 / libm::sqrt(w), 0.0));
    }
}

/// Uniform draw in `[0, 1)` with 53 random bits.
pub fn uniform<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Parities of the circuit's detectors and observables for a record.
pub fn evaluate(c: &Circuit, records: &[bool]) -> (Vec<bool>, Vec<bool>) {
    let parity = |rs: &[usize]| rs.iter().fold(false, |a, &r| a ^ records[r]);
    (
        c.detectors().iter().map(|d| parity(&d.records)).collect(),
        c.observables().iter().map(|o| parity(&o.records)).collect(),
    )
}
