use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use super::clifford::{lower_circuit, Step};
use crate::error::{Error, Result};
use crate::ir::{Circuit, Kind, QubitId};
use crate::noise::NoiseModel;
use crate::pauli::Pauli;
use crate::sv::{sample_injections, ShotResult};

/// Largest register the bit-packed tableau supports.
pub const MAX_TABLEAU_QUBITS: usize = 64;

/// Destabilizer/stabilizer tableau (Aaronson-Gottesman), one `u64` per row half.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tableau {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    r: Vec<bool>,
}

fn bit(w: u64, q: usize) -> bool {
    (w >> q) & 1 == 1
}

impl Tableau {
    /// `|0...0>` on `n` qubits.
    pub fn new(n: usize) -> Result<Self> {
        if n > MAX_TABLEAU_QUBITS {
            return Err(Error::ResourceLimit(format!("{n} qubits exceeds the tableau limit of {MAX_TABLEAU_QUBITS}")));
        }
        let rows = 2 * n + 1;
        let mut t = Tableau { n, x: vec![0; rows], z: vec![0; rows], r: vec![false; rows] };
        for i in 0..n {
            t.x[i] = 1 << i;
            t.z[n + i] = 1 << i;
        }
        Ok(t)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    /// Stabilizer generator `i` as `(x mask, z mask, negative sign)`.
    pub fn stabilizer(&self, i: usize) -> (u64, u64, bool) {
        (self.x[self.n + i], self.z[self.n + i], self.r[self.n + i])
    }

    pub fn h(&mut self, a: usize) {
        for i in 0..2 * self.n {
            let (xa, za) = (bit(self.x[i], a), bit(self.z[i], a));
            self.r[i] ^= xa & za;
            if xa != za {
                self.x[i] ^= 1 << a;
                self.z[i] ^= 1 << a;
            }
        }
    }

    pub fn s(&mut self, a: usize) {
        for i in 0..2 * self.n {
            let (xa, za) = (bit(self.x[i], a), bit(self.z[i], a));
            self.r[i] ^= xa & za;
            if xa {
                self.z[i] ^= 1 << a;
            }
        }
    }

    pub fn cx(&mut self, a: usize, b: usize) {
        for i in 0..2 * self.n {
            let (xa, za, xb, zb) = (bit(self.x[i], a), bit(self.z[i], a), bit(self.x[i], b), bit(self.z[i], b));
            self.r[i] ^= xa & zb & !(xb ^ za);
            if xa {
                self.x[i] ^= 1 << b;
            }
            if zb {
                self.z[i] ^= 1 << a;
            }
        }
    }

    pub fn pauli(&mut self, a: usize, p: Pauli) {
        for i in 0..2 * self.n {
            let (xa, za) = (bit(self.x[i], a), bit(self.z[i], a));
            self.r[i] ^= match p {
                Pauli::I => false,
                Pauli::X => za,
                Pauli::Z => xa,
                Pauli::Y => xa ^ za,
            };
        }
    }

    pub fn step(&mut self, s: Step) {
        match s {
            Step::H(a) => self.h(a),
            Step::S(a) => self.s(a),
            Step::Sdg(a) => {
                self.s(a);
                self.pauli(a, Pauli::Z);
            }
            Step::X(a) => self.pauli(a, Pauli::X),
            Step::Y(a) => self.pauli(a, Pauli::Y),
            Step::Z(a) => self.pauli(a, Pauli::Z),
            Step::CX(a, b) => self.cx(a, b),
            Step::CZ(a, b) => {
                self.h(b);
                self.cx(a, b);
                self.h(b);
            }
        }
    }

    fn rowsum(&mut self, h: usize, i: usize) {
        let mut total: i32 = 2 * (self.r[h] as i32) + 2 * (self.r[i] as i32);
        for j in 0..self.n {
            let (x1, z1) = (bit(self.x[i], j) as i32, bit(self.z[i], j) as i32);
            let (x2, z2) = (bit(self.x[h], j) as i32, bit(self.z[h], j) as i32);
            total += match (x1, z1) {
                (0, 0) => 0,
                (1, 1) => z2 - x2,
                (1, 0) => z2 * (2 * x2 - 1),
                _ => x2 * (1 - 2 * z2),
            };
        }
        self.r[h] = total.rem_euclid(4) == 2;
        self.x[h] ^= self.x[i];
        self.z[h] ^= self.z[i];
    }

    /// Whether a `Z` measurement of `a` has a determined outcome.
    pub fn is_deterministic(&self, a: usize) -> bool {
        (self.n..2 * self.n).all(|i| !bit(self.x[i], a))
    }

    /// Measures `Z_a`; `coin` supplies the outcome when it is random.
    pub fn measure(&mut self, a: usize, coin: impl FnOnce() -> bool) -> bool {
        let n = self.n;
        if let Some(p) = (n..2 * n).find(|&i| bit(self.x[i], a)) {
            for i in 0..2 * n {
                if i != p && bit(self.x[i], a) {
                    self.rowsum(i, p);
                }
            }
            self.x[p - n] = self.x[p];
            self.z[p - n] = self.z[p];
            self.r[p - n] = self.r[p];
            let outcome = coin();
            self.x[p] = 0;
            self.z[p] = 1 << a;
            self.r[p] = outcome;
            outcome
        } else {
            let s = 2 * n;
            self.x[s] = 0;
            self.z[s] = 0;
            self.r[s] = false;
            for i in 0..n {
                if bit(self.x[i], a) {
                    self.rowsum(s, i + n);
                }
            }
            self.r[s]
        }
    }

    /// Whether the Pauli with masks `(x, z)` has a definite value on the state.
    pub fn stabilizes(&self, x: u64, z: u64) -> bool {
        (self.n..2 * self.n).all(|i| ((x & self.z[i]) ^ (z & self.x[i])).count_ones() % 2 == 0)
    }
}

/// Runs a Clifford circuit with the dense engine's noise model on a tableau.
pub fn tableau_simulate_shot(c: &Circuit, noise: &NoiseModel, seed: u64) -> Result<ShotResult> {
    let steps = lower_circuit(c)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inj = sample_injections(c, noise, &mut rng);
    let (records, _) = run_tableau(c, &steps, &inj, &mut rng)?;
    Ok(ShotResult::from_records(c, records))
}

/// Final tableau and record of a noiseless run.
pub fn noiseless_tableau(c: &Circuit, seed: u64) -> Result<(Tableau, Vec<bool>)> {
    let steps = lower_circuit(c)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (records, t) = run_tableau(c, &steps, &crate::sv::Injections::none(), &mut rng)?;
    Ok((t, records))
}

fn run_tableau<R: RngCore>(
    c: &Circuit,
    steps: &[Vec<Step>],
    inj: &crate::sv::Injections,
    rng: &mut R,
) -> Result<(Vec<bool>, Tableau)> {
    let mut t = Tableau::new(c.num_qubits())?;
    let mut records = Vec::with_capacity(c.num_records());
    let mut cursor = 0;
    for (i, ins) in c.instructions().iter().enumerate() {
        let q: QubitId = ins.targets[0];
        match ins.kind {
            Kind::PrepZ | Kind::PrepX => {
                if t.measure(q, || rng.next_u32() & 1 == 1) {
                    t.pauli(q, Pauli::X);
                }
                if ins.kind == Kind::PrepX {
                    t.h(q);
                }
            }
            Kind::MeasZ | Kind::MeasX => {
                if ins.kind == Kind::MeasX {
                    t.h(q);
                }
                let b = t.measure(q, || rng.next_u32() & 1 == 1);
                if ins.kind == Kind::MeasX {
                    t.h(q);
                }
                let flip = inj.flips.binary_search(&records.len()).is_ok();
                records.push(b ^ flip);
            }
            _ => {
                for &s in &steps[i] {
                    t.step(s);
                }
            }
        }
        while cursor < inj.paulis.len() && inj.paulis[cursor].0 == i {
            let (_, q, p) = inj.paulis[cursor];
            t.pauli(q, p);
            cursor += 1;
        }
    }
    Ok((records, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::RoleKind;
    use crate::sv::run_noiseless;

    #[test]
    fn bell_pair_parities() {
        let mut c = Circuit::new();
        let a = c.add_qubit(RoleKind::Flag, "a");
        let b = c.add_qubit(RoleKind::Flag, "b");
        c.prep_x(a);
        c.prep_z(b);
        c.cx(a, b);
        let ra = c.measure_z(a);
        let rb = c.measure_z(b);
        c.add_detector(&[ra, rb]);
        let mut ones = 0;
        for seed in 0..400 {
            let s = tableau_simulate_shot(&c, &NoiseModel::noiseless(), seed).unwrap();
            assert!(s.accepted);
            ones += s.records[0] as usize;
        }
        assert!((150..250).contains(&ones), "{ones}");
    }

    #[test]
    fn deterministic_signs_match_dense() {
        let mut c = Circuit::new();
        for j in 0..3 {
            c.add_qubit(RoleKind::Data, alloc::format!("d{j}"));
        }
        c.prep_x(0);
        c.prep_z(1);
        c.prep_z(2);
        c.gate1(Kind::S, 0);
        c.gate1(Kind::S, 0);
        c.cx(0, 1);
        c.cz(1, 2);
        c.gate1(Kind::Y, 2);
        c.gate1(Kind::H, 1);
        c.cx(1, 0);
        c.measure_x(0);
        c.measure_z(2);
        c.measure_x(1);
        for seed in 0..32 {
            let t = tableau_simulate_shot(&c, &NoiseModel::noiseless(), seed).unwrap();
            let d = run_noiseless(&c, None, seed).unwrap().1;
            // qubit 2 is deterministic: |1> after Y
            assert_eq!(t.records[1], d.records[1]);
            assert!(t.records[1]);
        }
    }

    #[test]
    fn rejects_non_clifford() {
        let mut c = Circuit::new();
        c.add_qubit(RoleKind::Data, "d");
        c.rz(crate::angle::DyadicAngle::new(1, 2), 0);
        assert!(matches!(tableau_simulate_shot(&c, &NoiseModel::noiseless(), 0), Err(Error::NonClifford { .. })));
    }
}
