//! Pauli strings with exact phase tracking.

use alloc::vec::Vec;
use core::fmt;
use core::ops::Mul;
use core::str::FromStr;

use crate::error::ParseError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_bits(x: bool, z: bool) -> Pauli {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn x_bit(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    pub fn z_bit(self) -> bool {
        matches!(self, Pauli::Z | Pauli::Y)
    }

    /// Letter from a base-4 digit, `0 = I, 1 = X, 2 = Y, 3 = Z`.
    pub fn from_index(i: usize) -> Pauli {
        [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][i & 3]
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Pauli> {
        Some(match c {
            'I' | '_' => Pauli::I,
            'X' => Pauli::X,
            'Y' => Pauli::Y,
            'Z' => Pauli::Z,
            _ => return None,
        })
    }

    /// `a * b = i^k c`, returns `(k, c)`.
    pub fn product(a: Pauli, b: Pauli) -> (u8, Pauli) {
        use Pauli::*;
        match (a, b) {
            (I, p) | (p, I) => (0, p),
            (X, X) | (Y, Y) | (Z, Z) => (0, I),
            (X, Y) => (1, Z),
            (Y, Z) => (1, X),
            (Z, X) => (1, Y),
            (Y, X) => (3, Z),
            (Z, Y) => (3, X),
            (X, Z) => (3, Y),
        }
    }
}

/// `i^phase * P_0 (x) P_1 (x) ...`, qubit `j` is letter `j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    phase: u8,
    letters: Vec<Pauli>,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        PauliString { phase: 0, letters: alloc::vec![Pauli::I; n] }
    }

    pub fn from_letters(letters: Vec<Pauli>) -> Self {
        PauliString { phase: 0, letters }
    }

    /// Same letter on every listed qubit.
    pub fn from_support(n: usize, support: &[usize], p: Pauli) -> Self {
        let mut s = Self::identity(n);
        for &q in support {
            s.letters[q] = p;
        }
        s
    }

    pub fn num_qubits(&self) -> usize {
        self.letters.len()
    }

    /// Exponent `k` of the phase `i^k`.
    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn with_phase(mut self, k: u8) -> Self {
        self.phase = k & 3;
        self
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn get(&self, q: usize) -> Pauli {
        self.letters[q]
    }

    pub fn set(&mut self, q: usize, p: Pauli) {
        self.letters[q] = p;
    }

    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&p| p != Pauli::I).count()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.letters.len()).filter(|&q| self.letters[q] != Pauli::I).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.weight() == 0
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        assert_eq!(self.num_qubits(), other.num_qubits());
        let anti = self
            .letters
            .iter()
            .zip(&other.letters)
            .filter(|(a, b)| {
                let (a, b) = (**a, **b);
                (a.x_bit() && b.z_bit()) ^ (a.z_bit() && b.x_bit())
            })
            .count();
        anti % 2 == 0
    }

    /// Hermitian strings carry phase `+-1`.
    pub fn is_hermitian(&self) -> bool {
        self.phase % 2 == 0
    }

    /// Letters only; phase dropped.
    pub fn unsigned(&self) -> PauliString {
        PauliString { phase: 0, letters: self.letters.clone() }
    }

    pub fn is_x_type(&self) -> bool {
        self.letters.iter().all(|&p| matches!(p, Pauli::I | Pauli::X))
    }

    pub fn is_z_type(&self) -> bool {
        self.letters.iter().all(|&p| matches!(p, Pauli::I | Pauli::Z))
    }
}

impl Mul for &PauliString {
    type Output = PauliString;
    fn mul(self, rhs: &PauliString) -> PauliString {
        assert_eq!(self.num_qubits(), rhs.num_qubits());
        let mut phase = self.phase + rhs.phase;
        let letters = self
            .letters
            .iter()
            .zip(&rhs.letters)
            .map(|(&a, &b)| {
                let (k, c) = Pauli::product(a, b);
                phase += k;
                c
            })
            .collect();
        PauliString { phase: phase & 3, letters }
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(["+", "+i", "-", "-i"][self.phase as usize])?;
        for p in &self.letters {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = ParseError;

    /// `[+|-][i]LETTERS`, e.g. `+XXXX`, `-iZIZ`.
    fn from_str(s: &str) -> Result<Self, ParseError> {
        let (mut phase, rest) = match s.as_bytes().first() {
            Some(b'+') => (0u8, &s[1..]),
            Some(b'-') => (2u8, &s[1..]),
            _ => (0u8, s),
        };
        let rest = match rest.strip_prefix('i') {
            Some(r) => {
                phase += 1;
                r
            }
            None => rest,
        };
        let letters = rest
            .chars()
            .map(|c| {
                Pauli::from_char(c).ok_or_else(|| ParseError::new(0, alloc::format!("bad Pauli letter `{c}` in `{s}`")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PauliString { phase: phase & 3, letters })
    }
}
