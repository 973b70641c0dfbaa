use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::clifford::{lower_circuit, Step};
use crate::error::{Error, Result};
use crate::ir::{Circuit, Kind, QubitId};
use crate::noise::FaultSite;
use crate::pauli::Pauli;

/// Small fixed-width bit set.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bits(pub Vec<u64>);

impl Bits {
    pub fn zeros(len: usize) -> Self {
        Bits(vec![0; len.div_ceil(64).max(1)])
    }

    pub fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i / 64] ^= 1 << (i % 64);
    }

    pub fn get(&self, i: usize) -> bool {
        (self.0[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn xor_with(&mut self, o: &Bits) {
        for (a, b) in self.0.iter_mut().zip(&o.0) {
            *a ^= b;
        }
    }

    pub fn xor(&self, o: &Bits) -> Bits {
        let mut b = self.clone();
        b.xor_with(o);
        b
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    pub fn ones(&self) -> Vec<usize> {
        let mut v = Vec::new();
        for (k, &w) in self.0.iter().enumerate() {
            let mut w = w;
            while w != 0 {
                let t = w.trailing_zeros() as usize;
                v.push(64 * k + t);
                w &= w - 1;
            }
        }
        v
    }
}

/// A Pauli frame over at most 64 qubits.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Frame {
    pub x: u64,
    pub z: u64,
}

impl Frame {
    pub fn add(&mut self, q: QubitId, p: Pauli) {
        if p.x_bit() {
            self.x ^= 1 << q;
        }
        if p.z_bit() {
            self.z ^= 1 << q;
        }
    }

    pub fn anticommutes(&self, x: u64, z: u64) -> bool {
        ((self.x & z) ^ (self.z & x)).count_ones() % 2 == 1
    }

    fn step(&mut self, s: Step) {
        let b = |w: u64, q: usize| (w >> q) & 1;
        match s {
            Step::H(a) => {
                let (xa, za) = (b(self.x, a), b(self.z, a));
                self.x = (self.x & !(1 << a)) | (za << a);
                self.z = (self.z & !(1 << a)) | (xa << a);
            }
            Step::S(a) | Step::Sdg(a) => self.z ^= b(self.x, a) << a,
            Step::X(_) | Step::Y(_) | Step::Z(_) => {}
            Step::CX(c, t) => {
                self.x ^= b(self.x, c) << t;
                self.z ^= b(self.z, t) << c;
            }
            Step::CZ(p, q) => {
                self.z ^= b(self.x, q) << p;
                self.z ^= b(self.x, p) << q;
            }
        }
    }
}

/// Pauli checks evaluated on the residual frame at the end of the circuit.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EndChecks {
    /// `(x mask, z mask)`; a check flips when the frame anticommutes with it.
    pub detectors: Vec<(u64, u64)>,
    pub observables: Vec<(u64, u64)>,
}

/// Effect of a fault set: flipped detectors and observables, circuit ones first, then end checks.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Effect {
    pub detectors: Bits,
    pub observables: Bits,
}

impl Effect {
    pub fn xor(&self, o: &Effect) -> Effect {
        Effect { detectors: self.detectors.xor(&o.detectors), observables: self.observables.xor(&o.observables) }
    }
}

/// A Clifford circuit compiled for repeated frame propagation.
#[derive(Clone, Debug)]
pub struct FrameProgram<'c> {
    circuit: &'c Circuit,
    steps: Vec<Vec<Step>>,
    record_of: Vec<Option<usize>>,
    record_detectors: Vec<Bits>,
    record_observables: Vec<Bits>,
    checks: EndChecks,
    num_detectors: usize,
    num_observables: usize,
}

impl<'c> FrameProgram<'c> {
    pub fn new(circuit: &'c Circuit, checks: EndChecks) -> Result<Self> {
        if circuit.num_qubits() > 64 {
            return Err(Error::ResourceLimit(format!("{} qubits exceeds the frame limit of 64", circuit.num_qubits())));
        }
        let steps = lower_circuit(circuit)?;
        let nd = circuit.detectors().len() + checks.detectors.len();
        let no = circuit.observables().len() + checks.observables.len();
        let mut record_detectors = vec![Bits::zeros(nd); circuit.num_records()];
        let mut record_observables = vec![Bits::zeros(no); circuit.num_records()];
        for (d, det) in circuit.detectors().iter().enumerate() {
            for &r in &det.records {
                record_detectors[r].flip(d);
            }
        }
        for (o, obs) in circuit.observables().iter().enumerate() {
            for &r in &obs.records {
                record_observables[r].flip(o);
            }
        }
        let mut r = 0;
        let record_of = circuit
            .instructions()
            .iter()
            .map(|i| {
                i.kind.is_measurement().then(|| {
                    r += 1;
                    r - 1
                })
            })
            .collect();
        Ok(FrameProgram {
            circuit,
            steps,
            record_of,
            record_detectors,
            record_observables,
            checks,
            num_detectors: nd,
            num_observables: no,
        })
    }

    pub fn num_detectors(&self) -> usize {
        self.num_detectors
    }

    pub fn num_observables(&self) -> usize {
        self.num_observables
    }

    pub fn zero_effect(&self) -> Effect {
        Effect { detectors: Bits::zeros(self.num_detectors), observables: Bits::zeros(self.num_observables) }
    }

    /// Propagates `frame`, present right after instruction `after` (or from the start if `None`),
    /// to the end, accumulating record flips into `effect`.
    pub fn propagate(&self, mut frame: Frame, after: Option<usize>, effect: &mut Effect) {
        let start = after.map_or(0, |i| i + 1);
        for (i, ins) in self.circuit.instructions().iter().enumerate().skip(start) {
            let q = ins.targets[0];
            match ins.kind {
                Kind::PrepZ | Kind::PrepX => {
                    frame.x &= !(1 << q);
                    frame.z &= !(1 << q);
                }
                Kind::MeasZ | Kind::MeasX => {
                    let flipped = if ins.kind == Kind::MeasZ { (frame.x >> q) & 1 } else { (frame.z >> q) & 1 };
                    if flipped == 1 {
                        let r = self.record_of[i].unwrap();
                        effect.detectors.xor_with(&self.record_detectors[r]);
                        effect.observables.xor_with(&self.record_observables[r]);
                    }
                    if ins.kind == Kind::MeasZ {
                        frame.z &= !(1 << q);
                    } else {
                        frame.x &= !(1 << q);
                    }
                }
                _ => {
                    for &s in &self.steps[i] {
                        frame.step(s);
                    }
                }
            }
        }
        let nd = self.circuit.detectors().len();
        let no = self.circuit.observables().len();
        for (k, &(x, z)) in self.checks.detectors.iter().enumerate() {
            if frame.anticommutes(x, z) {
                effect.detectors.flip(nd + k);
            }
        }
        for (k, &(x, z)) in self.checks.observables.iter().enumerate() {
            if frame.anticommutes(x, z) {
                effect.observables.flip(no + k);
            }
        }
    }

    /// Effect of one fault site.
    pub fn effect_of(&self, f: &FaultSite) -> Effect {
        let mut e = self.zero_effect();
        if let Some(r) = f.flipped_record(self.circuit) {
            e.detectors.xor_with(&self.record_detectors[r]);
            e.observables.xor_with(&self.record_observables[r]);
        }
        if let Some(ps) = f.physical(self.circuit) {
            let mut frame = Frame::default();
            for (q, p) in ps {
                frame.add(q, p);
            }
            let after = match f.position {
                crate::noise::Position::After => Some(f.instruction),
                crate::noise::Position::Before => f.instruction.checked_sub(1),
            };
            self.propagate(frame, after, &mut e);
        }
        e
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::RoleKind;
    use crate::noise::{enumerate_fault_sites, FaultError, Position};

    #[test]
    fn bits_roundtrip() {
        let mut b = Bits::zeros(130);
        b.set(3);
        b.set(129);
        assert_eq!(b.ones(), [3, 129]);
        b.flip(3);
        assert_eq!(b.ones(), [129]);
        assert!(b.xor(&b).is_zero());
    }

    #[test]
    fn measurement_flip_hits_only_its_detector() {
        let mut c = Circuit::new();
        let a = c.add_qubit(RoleKind::Flag, "a");
        let f = c.add_qubit(RoleKind::Flag, "f");
        c.prep_z(a);
        c.prep_x(f);
        c.cx(f, a);
        c.cx(f, a);
        let ra = c.measure_z(a);
        let rf = c.measure_x(f);
        c.add_detector(&[ra]);
        c.add_detector(&[rf]);
        let p = FrameProgram::new(&c, EndChecks::default()).unwrap();
        let site = FaultSite { instruction: 5, position: Position::After, error: FaultError::MeasurementFlip };
        assert_eq!(p.effect_of(&site).detectors.ones(), [1]);
        // X on the flag between the CXs reaches `a` once and is invisible to MeasX
        let x =
            FaultSite { instruction: 2, position: Position::After, error: FaultError::Pauli("+XI".parse().unwrap()) };
        assert_eq!(p.effect_of(&x).detectors.ones(), [0]);
        assert_eq!(enumerate_fault_sites(&c).len(), 1 + 1 + 15 + 15 + 1 + 1);
    }
}
