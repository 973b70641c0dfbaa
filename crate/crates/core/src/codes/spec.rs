use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, ParseError, Result};
use crate::pauli::{Pauli, PauliString};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CodeFamily {
    Iceberg,
    Steane,
    Other,
}

/// Stabilizer generators and chosen logical representatives.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeSpec {
    pub name: String,
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub x_stabilizers: Vec<PauliString>,
    pub z_stabilizers: Vec<PauliString>,
    pub logical_x: Vec<PauliString>,
    pub logical_z: Vec<PauliString>,
    /// Distinguished physical qubits, e.g. `b` and `t` for the iceberg code.
    pub named_qubits: Vec<(String, usize)>,
}

/// The `[[k+2, k, 2]]` iceberg code. Qubit 0 is `q_b`, qubits `1..=k` are `q_i`, qubit `k+1` is `q_t`.
pub fn iceberg_code(k: usize) -> Result<CodeSpec> {
    if k < 2 || k % 2 == 1 {
        return Err(Error::InvalidArgument(format!(
            "iceberg code needs even k >= 2 (X^n and Z^n anticommute for odd n), got k={k}"
        )));
    }
    let n = k + 2;
    let all: Vec<usize> = (0..n).collect();
    let (b, t) = (0, k + 1);
    Ok(CodeSpec {
        name: "iceberg".into(),
        n,
        k,
        d: 2,
        x_stabilizers: alloc::vec![PauliString::from_support(n, &all, Pauli::X)],
        z_stabilizers: alloc::vec![PauliString::from_support(n, &all, Pauli::Z)],
        logical_x: (1..=k).map(|i| PauliString::from_support(n, &[i, t], Pauli::X)).collect(),
        logical_z: (1..=k).map(|i| PauliString::from_support(n, &[i, b], Pauli::Z)).collect(),
        named_qubits: alloc::vec![("b".into(), b), ("t".into(), t)],
    })
}

/// Shared support of the X- and Z-type Steane generators.
pub const STEANE_CHECKS: [[usize; 4]; 3] = [[3, 4, 5, 6], [0, 2, 3, 5], [1, 2, 5, 6]];
pub const STEANE_LOGICAL_X: [usize; 3] = [1, 4, 6];
pub const STEANE_LOGICAL_Z: [usize; 3] = [0, 1, 2];

/// The `[[7,1,3]]` Steane code with `X = X1 X4 X6`, `Z = Z0 Z1 Z2`.
pub fn steane_code() -> CodeSpec {
    let n = 7;
    CodeSpec {
        name: "steane".into(),
        n,
        k: 1,
        d: 3,
        x_stabilizers: STEANE_CHECKS.iter().map(|s| PauliString::from_support(n, s, Pauli::X)).collect(),
        z_stabilizers: STEANE_CHECKS.iter().map(|s| PauliString::from_support(n, s, Pauli::Z)).collect(),
        logical_x: alloc::vec![PauliString::from_support(n, &STEANE_LOGICAL_X, Pauli::X)],
        logical_z: alloc::vec![PauliString::from_support(n, &STEANE_LOGICAL_Z, Pauli::Z)],
        named_qubits: Vec::new(),
    }
}

impl CodeSpec {
    pub fn family(&self) -> CodeFamily {
        match self.name.as_str() {
            "iceberg" => CodeFamily::Iceberg,
            "steane" => CodeFamily::Steane,
            _ => CodeFamily::Other,
        }
    }

    pub fn named(&self, name: &str) -> Option<usize> {
        self.named_qubits.iter().find(|(s, _)| s == name).map(|&(_, q)| q)
    }

    /// Label used for data qubit `j` in circuits: `q_b`, `q_t` or `q_j`.
    pub fn qubit_label(&self, j: usize) -> String {
        match self.named_qubits.iter().find(|&&(_, q)| q == j) {
            Some((s, _)) => format!("q_{s}"),
            None => format!("q_{j}"),
        }
    }

    pub fn stabilizers(&self) -> impl Iterator<Item = &PauliString> {
        self.x_stabilizers.iter().chain(&self.z_stabilizers)
    }

    /// Checks commutation relations of generators and logicals.
    pub fn validate(&self) -> Result<()> {
        let stabs: Vec<&PauliString> = self.stabilizers().collect();
        let bad = |m: String| Err(Error::InvalidArgument(format!("code {}: {m}", self.name)));
        for p in stabs.iter().copied().chain(&self.logical_x).chain(&self.logical_z) {
            if p.num_qubits() != self.n {
                return bad(format!("{p} has the wrong length"));
            }
        }
        for (a, s) in stabs.iter().enumerate() {
            for t in &stabs[a + 1..] {
                if !s.commutes_with(t) {
                    return bad(format!("stabilizers {s} and {t} anticommute"));
                }
            }
            for l in self.logical_x.iter().chain(&self.logical_z) {
                if !s.commutes_with(l) {
                    return bad(format!("logical {l} anticommutes with stabilizer {s}"));
                }
            }
        }
        if self.logical_x.len() != self.k || self.logical_z.len() != self.k {
            return bad("logical count differs from k".into());
        }
        for i in 0..self.k {
            for j in 0..self.k {
                let commute = self.logical_x[i].commutes_with(&self.logical_z[j]);
                if commute == (i == j) {
                    return bad(format!("logical X{} / Z{} relation broken", i + 1, j + 1));
                }
                if !self.logical_x[i].commutes_with(&self.logical_x[j])
                    || !self.logical_z[i].commutes_with(&self.logical_z[j])
                {
                    return bad("logicals of one type must commute".into());
                }
            }
        }
        Ok(())
    }
}

/// Product of single-qubit logical Paulis, indices 1-based: `Z1`, `Z1Z2`, `Y1Y2`, `X1`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct LogicalWord {
    factors: Vec<(usize, Pauli)>,
}

impl LogicalWord {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn single(i: usize, p: Pauli) -> Self {
        Self::new(alloc::vec![(i, p)]).expect("valid word")
    }

    pub fn new(mut factors: Vec<(usize, Pauli)>) -> Result<Self> {
        factors.retain(|&(_, p)| p != Pauli::I);
        factors.sort();
        for w in factors.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidArgument(format!("logical index {} repeated", w[0].0)));
            }
        }
        if factors.iter().any(|&(i, _)| i == 0) {
            return Err(Error::InvalidArgument("logical indices start at 1".into()));
        }
        Ok(LogicalWord { factors })
    }

    pub fn factors(&self) -> &[(usize, Pauli)] {
        &self.factors
    }

    pub fn is_identity(&self) -> bool {
        self.factors.is_empty()
    }

    /// Hermitian physical representative built from the code's logicals (`Y = i X Z`).
    pub fn to_physical(&self, code: &CodeSpec) -> Result<PauliString> {
        let mut out = PauliString::identity(code.n);
        for &(i, p) in &self.factors {
            if i > code.k {
                return Err(Error::InvalidArgument(format!("logical {i} out of range for k={}", code.k)));
            }
            let x = &code.logical_x[i - 1];
            let z = &code.logical_z[i - 1];
            let f = match p {
                Pauli::X => x.clone(),
                Pauli::Z => z.clone(),
                Pauli::Y => {
                    let xz = x * z;
                    let k = xz.phase() + 1;
                    xz.with_phase(k)
                }
                Pauli::I => continue,
            };
            out = &out * &f;
        }
        Ok(out)
    }
}

impl fmt::Display for LogicalWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return f.write_str("I");
        }
        for (i, p) in &self.factors {
            write!(f, "{}{}", p.as_char(), i)?;
        }
        Ok(())
    }
}

impl FromStr for LogicalWord {
    type Err = ParseError;
    fn from_str(s: &str) -> core::result::Result<Self, ParseError> {
        let s = s.trim();
        if s.is_empty() || s == "I" {
            return Ok(Self::identity());
        }
        let err = |m: &str| ParseError::new(0, format!("bad logical word `{s}`: {m}"));
        let mut factors = Vec::new();
        let mut chars = s.chars().peekable();
        while let Some(c) = chars.next() {
            let p = Pauli::from_char(c).ok_or_else(|| err("expected X, Y or Z"))?;
            let mut digits = String::new();
            while let Some(d) = chars.peek().filter(|d| d.is_ascii_digit()) {
                digits.push(*d);
                chars.next();
            }
            let i: usize = digits.parse().map_err(|_| err("missing index"))?;
            factors.push((i, p));
        }
        LogicalWord::new(factors).map_err(|e| err(&e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iceberg_parameters() {
        let c = iceberg_code(2).unwrap();
        assert_eq!((c.n, c.k, c.d), (4, 2, 2));
        c.validate().unwrap();
        iceberg_code(4).unwrap().validate().unwrap();
        assert!(iceberg_code(1).is_err());
        assert!(iceberg_code(3).is_err());
        assert_eq!(c.logical_z[0].to_string(), "+ZZII");
        assert_eq!(c.logical_x[0].to_string(), "+IXIX");
        assert_eq!(c.qubit_label(0), "q_b");
        assert_eq!(c.qubit_label(3), "q_t");
    }

    #[test]
    fn odd_iceberg_stabilizers_anticommute() {
        let n = 3;
        let all = [0, 1, 2];
        let x = PauliString::from_support(n, &all, Pauli::X);
        let z = PauliString::from_support(n, &all, Pauli::Z);
        assert!(!x.commutes_with(&z));
    }

    #[test]
    fn steane_parameters() {
        let c = steane_code();
        c.validate().unwrap();
        assert_eq!(c.logical_z[0].support(), [0, 1, 2]);
        assert_eq!(c.logical_x[0].support(), [1, 4, 6]);
        assert_eq!(c.stabilizers().count(), 6);
    }

    #[test]
    fn logical_words() {
        let c = iceberg_code(2).unwrap();
        let w: LogicalWord = "Z1Z2".parse().unwrap();
        assert_eq!(w.to_physical(&c).unwrap().to_string(), "+IZZI");
        let y: LogicalWord = "Y1Y2".parse().unwrap();
        assert_eq!(y.to_physical(&c).unwrap().to_string(), "+IYYI");
        let y1 = LogicalWord::single(1, Pauli::Y).to_physical(&c).unwrap();
        assert_eq!(y1.to_string(), "+ZYIX");
        assert!(y1.is_hermitian());
        assert_eq!("".parse::<LogicalWord>().unwrap(), LogicalWord::identity());
        assert!("Z3".parse::<LogicalWord>().unwrap().to_physical(&c).is_err());
        assert!("Z1Z1".parse::<LogicalWord>().is_err());
        assert!("Q1".parse::<LogicalWord>().is_err());
        assert_eq!(w.to_string(), "Z1Z2");
    }
}
