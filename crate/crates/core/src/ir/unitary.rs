use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::Circuit;
use crate::error::{Error, Result};
use crate::sv::{StateVector, C64};

/// Largest register [`unitary_of`] will expand.
pub const MAX_UNITARY_QUBITS: usize = 13;

/// Square complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl DenseMatrix {
    pub fn zeros(dim: usize) -> Self {
        DenseMatrix { dim, data: vec![C64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_diagonal(d: &[C64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m.data[i * d.len() + i] = v;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.dim + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        self.data[r * self.dim + c] = v;
    }

    pub fn column(&self, c: usize) -> Vec<C64> {
        (0..self.dim).map(|r| self.get(r, c)).collect()
    }

    pub fn set_column(&mut self, c: usize, col: &[C64]) {
        for (r, &v) in col.iter().enumerate() {
            self.set(r, c, v);
        }
    }

    pub fn mul(&self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> DenseMatrix {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    /// `tr(self^dagger other)`.
    pub fn hs_inner(&self, other: &DenseMatrix) -> C64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn frobenius_sqr(&self) -> f64 {
        self.data.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

/// `|tr(A^dagger B)|^2 / (||A||^2 ||B||^2)`: 1 exactly when `B` is a scalar multiple of `A`.
pub fn phase_insensitive_fidelity(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    let denom = a.frobenius_sqr() * b.frobenius_sqr();
    if denom == 0.0 {
        return 0.0;
    }
    a.hs_inner(b).norm_sqr() / denom
}

/// Dense matrix of a circuit with only unitary instructions, qubit 0 least significant.
pub fn unitary_of(c: &Circuit) -> Result<DenseMatrix> {
    let n = c.num_qubits();
    if n > MAX_UNITARY_QUBITS {
        return Err(Error::ResourceLimit(format!("{n} qubits exceeds the unitary limit of {MAX_UNITARY_QUBITS}")));
    }
    if let Some((index, ins)) = c.instructions().iter().enumerate().find(|(_, i)| !i.kind.is_unitary()) {
        return Err(Error::NonUnitary { index, kind: ins.kind.name().into() });
    }
    let dim = 1usize << n;
    let mut out = DenseMatrix::zeros(dim);
    for col in 0..dim {
        let mut s = StateVector::basis(n, col)?;
        for ins in c.instructions() {
            s.apply(ins.kind, &ins.targets);
        }
        out.set_column(col, s.amplitudes());
    }
    Ok(out)
}
