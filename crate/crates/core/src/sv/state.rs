use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::ir::{Kind, QubitId};
use crate::pauli::{Pauli, PauliString};

pub type C64 = Complex<f64>;

/// Largest register the dense engine accepts.
pub const MAX_QUBITS: usize = 16;

pub(crate) const I: C64 = C64 { re: 0.0, im: 1.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

pub fn cis(theta: f64) -> C64 {
    C64::new(libm::cos(theta), libm::sin(theta))
}

/// `i^k`.
pub fn i_pow(k: u8) -> C64 {
    [ONE, I, -ONE, -I][(k & 3) as usize]
}

/// Dense amplitudes, qubit 0 is the least significant bit of the index.
/// The norm is never renormalized implicitly.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<C64>,
}

impl StateVector {
    pub fn zero(n: usize) -> Result<Self> {
        Self::basis(n, 0)
    }

    pub fn basis(n: usize, index: usize) -> Result<Self> {
        if n > MAX_QUBITS {
            return Err(Error::ResourceLimit(format!("{n} qubits exceeds the dense limit of {MAX_QUBITS}")));
        }
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
        amps[index] = ONE;
        Ok(StateVector { n, amps })
    }

    pub fn from_amplitudes(n: usize, amps: Vec<C64>) -> Self {
        assert_eq!(amps.len(), 1 << n);
        StateVector { n, amps }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Rescales to unit norm and returns the previous squared norm.
    pub fn normalize(&mut self) -> Result<f64> {
        let w = self.norm_sqr();
        if w <= 0.0 {
            return Err(Error::ZeroNorm);
        }
        let s = 1.0 / libm::sqrt(w);
        self.amps.iter_mut().for_each(|a| *a *= s);
        Ok(w)
    }

    pub fn scale(&mut self, c: C64) {
        self.amps.iter_mut().for_each(|a| *a *= c);
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// Squared norm of the `bit = 1` half for qubit `q`.
    pub fn weight_one(&self, q: QubitId) -> f64 {
        let m = 1usize << q;
        self.amps.iter().enumerate().filter(|(i, _)| i & m != 0).map(|(_, a)| a.norm_sqr()).sum()
    }

    /// Zeroes every amplitude whose bit `q` differs from `bit`.
    pub fn project(&mut self, q: QubitId, bit: bool) {
        let m = 1usize << q;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if ((i & m) != 0) != bit {
                *a = C64::new(0.0, 0.0);
            }
        }
    }

    pub fn apply_x(&mut self, q: QubitId) {
        let m = 1usize << q;
        for i in 0..self.amps.len() {
            if i & m == 0 {
                self.amps.swap(i, i | m);
            }
        }
    }

    fn apply_2x2(&mut self, q: QubitId, u: [[C64; 2]; 2]) {
        let m = 1usize << q;
        for base in (0..self.amps.len()).step_by(2 * m) {
            for i in base..base + m {
                let (a, b) = (self.amps[i], self.amps[i | m]);
                self.amps[i] = u[0][0] * a + u[0][1] * b;
                self.amps[i | m] = u[1][0] * a + u[1][1] * b;
            }
        }
    }

    fn apply_phase_one(&mut self, q: QubitId, phase: C64) {
        let m = 1usize << q;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & m != 0 {
                *a *= phase;
            }
        }
    }

    pub fn apply_h(&mut self, q: QubitId) {
        let s = core::f64::consts::FRAC_1_SQRT_2;
        let h = C64::new(s, 0.0);
        self.apply_2x2(q, [[h, h], [h, -h]]);
    }

    pub fn apply_pauli(&mut self, q: QubitId, p: Pauli) {
        match p {
            Pauli::I => {}
            Pauli::X => self.apply_x(q),
            Pauli::Z => self.apply_phase_one(q, -ONE),
            Pauli::Y => {
                // Y = i X Z
                self.apply_phase_one(q, -ONE);
                self.apply_x(q);
                self.scale(I);
            }
        }
    }

    /// Applies the string including its phase; letter `j` acts on `qubits[j]`.
    pub fn apply_pauli_on(&mut self, qubits: &[QubitId], p: &PauliString) {
        for (j, &q) in qubits.iter().enumerate() {
            self.apply_pauli(q, p.get(j));
        }
        if p.phase() != 0 {
            self.scale(i_pow(p.phase()));
        }
    }

    /// `<psi|P|psi>` with letter `j` on `qubits[j]`.
    pub fn expectation_on(&self, qubits: &[QubitId], p: &PauliString) -> C64 {
        let mut t = self.clone();
        t.apply_pauli_on(qubits, p);
        self.inner(&t)
    }

    fn apply_diagonal(&mut self, f: impl Fn(usize) -> Option<C64>) {
        for (i, a) in self.amps.iter_mut().enumerate() {
            if let Some(ph) = f(i) {
                *a *= ph;
            }
        }
    }

    /// Applies a unitary instruction. Panics on preparations or measurements.
    pub fn apply(&mut self, kind: Kind, t: &[QubitId]) {
        let bit = |i: usize, q: QubitId| (i >> q) & 1 == 1;
        match kind {
            Kind::X => self.apply_x(t[0]),
            Kind::Y => self.apply_pauli(t[0], Pauli::Y),
            Kind::Z => self.apply_phase_one(t[0], -ONE),
            Kind::H => self.apply_h(t[0]),
            Kind::S => self.apply_phase_one(t[0], I),
            Kind::Sdg => self.apply_phase_one(t[0], -I),
            Kind::CX => {
                let (c, x) = (1usize << t[0], 1usize << t[1]);
                for i in 0..self.amps.len() {
                    if i & c != 0 && i & x == 0 {
                        self.amps.swap(i, i | x);
                    }
                }
            }
            Kind::CCX => {
                let (c0, c1, x) = (1usize << t[0], 1usize << t[1], 1usize << t[2]);
                for i in 0..self.amps.len() {
                    if i & c0 != 0 && i & c1 != 0 && i & x == 0 {
                        self.amps.swap(i, i | x);
                    }
                }
            }
            Kind::CZ => self.apply_diagonal(|i| (bit(i, t[0]) && bit(i, t[1])).then_some(-ONE)),
            Kind::CCZ => self.apply_diagonal(|i| (bit(i, t[0]) && bit(i, t[1]) && bit(i, t[2])).then_some(-ONE)),
            Kind::RZ(a) => {
                let (m, p) = (cis(-a.radians() / 2.0), cis(a.radians() / 2.0));
                self.apply_diagonal(|i| Some(if bit(i, t[0]) { p } else { m }))
            }
            Kind::RZZ(a) => {
                let (m, p) = (cis(-a.radians() / 2.0), cis(a.radians() / 2.0));
                self.apply_diagonal(|i| Some(if bit(i, t[0]) ^ bit(i, t[1]) { p } else { m }))
            }
            Kind::CRZ(a) => {
                let (m, p) = (cis(-a.radians() / 2.0), cis(a.radians() / 2.0));
                self.apply_diagonal(|i| bit(i, t[0]).then(|| if bit(i, t[1]) { p } else { m }))
            }
            Kind::CRZZ(a) => {
                let (m, p) = (cis(-a.radians() / 2.0), cis(a.radians() / 2.0));
                self.apply_diagonal(|i| bit(i, t[0]).then(|| if bit(i, t[1]) ^ bit(i, t[2]) { p } else { m }))
            }
            Kind::PrepZ | Kind::PrepX | Kind::MeasZ | Kind::MeasX => {
                panic!("{} is not unitary", kind.name())
            }
        }
    }

    /// Tensor product `self (x) other`, with `other` on the high qubits.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        let n = self.n + other.n;
        if n > MAX_QUBITS {
            return Err(Error::ResourceLimit(format!("{n} qubits exceeds the dense limit of {MAX_QUBITS}")));
        }
        let mut amps = Vec::with_capacity(1 << n);
        for b in &other.amps {
            for a in &self.amps {
                amps.push(a * b);
            }
        }
        Ok(StateVector { n, amps })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angle::DyadicAngle;

    fn close(a: C64, b: C64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn rotation_convention() {
        let mut s = StateVector::zero(2).unwrap();
        s.apply_h(0);
        s.apply_h(1);
        s.apply(Kind::RZZ(DyadicAngle::PI), &[0, 1]);
        // exp(-i pi/2 ZZ) = diag(-i, i, i, -i)
        let a = s.amplitudes();
        assert!(close(a[0], C64::new(0.0, -0.5)));
        assert!(close(a[1], C64::new(0.0, 0.5)));
        assert!(close(a[2], C64::new(0.0, 0.5)));
        assert!(close(a[3], C64::new(0.0, -0.5)));
    }

    #[test]
    fn y_matches_matrix() {
        let mut s = StateVector::zero(1).unwrap();
        s.apply(Kind::Y, &[0]);
        assert!(close(s.amplitudes()[1], I));
        s.apply(Kind::Y, &[0]);
        assert!(close(s.amplitudes()[0], ONE));
    }

    #[test]
    fn too_many_qubits() {
        assert!(matches!(StateVector::zero(17), Err(Error::ResourceLimit(_))));
    }
}
