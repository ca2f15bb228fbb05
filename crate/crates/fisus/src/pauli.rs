//! Pauli strings and weighted Pauli-sum observables.
//!
//! An observable is a real-weighted sum of n-qubit Pauli strings. Each term
//! is tagged with the part of the Hamiltonian it belongs to: the
//! r-independent part H0 or the drive part H1 that enters as r * H1, so that
//! H(r) = H0 + r * H1. Qubit 0 is the most significant bit of a
//! computational-basis index throughout the crate.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PauliOp {
    I,
    X,
    Y,
    Z,
}

impl PauliOp {
    pub fn letter(self) -> char {
        match self {
            PauliOp::I => 'I',
            PauliOp::X => 'X',
            PauliOp::Y => 'Y',
            PauliOp::Z => 'Z',
        }
    }

    /// Action on a single basis bit: P|b> = phase * |b'>.
    fn apply_bit(self, bit: u8) -> (u8, Complex64) {
        match self {
            PauliOp::I => (bit, Complex64::new(1.0, 0.0)),
            PauliOp::X => (1 - bit, Complex64::new(1.0, 0.0)),
            PauliOp::Y => {
                if bit == 0 {
                    (1, Complex64::new(0.0, 1.0))
                } else {
                    (0, Complex64::new(0.0, -1.0))
                }
            }
            PauliOp::Z => (bit, Complex64::new(if bit == 0 { 1.0 } else { -1.0 }, 0.0)),
        }
    }
}

/// A fixed-width string of Pauli operators, one per qubit.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    ops: Vec<PauliOp>,
}

impl PauliString {
    pub fn new(ops: Vec<PauliOp>) -> Self {
        assert!(!ops.is_empty(), "a Pauli string needs at least one qubit");
        PauliString { ops }
    }

    pub fn identity(width: usize) -> Self {
        Self::new(vec![PauliOp::I; width])
    }

    /// Identity everywhere except `op` on `qubit`.
    pub fn single(width: usize, qubit: usize, op: PauliOp) -> Self {
        let mut ops = vec![PauliOp::I; width];
        ops[qubit] = op;
        Self::new(ops)
    }

    /// Identity everywhere except two specified positions.
    pub fn two(width: usize, qa: usize, a: PauliOp, qb: usize, b: PauliOp) -> Self {
        assert_ne!(qa, qb);
        let mut ops = vec![PauliOp::I; width];
        ops[qa] = a;
        ops[qb] = b;
        Self::new(ops)
    }

    pub fn width(&self) -> usize {
        self.ops.len()
    }

    pub fn ops(&self) -> &[PauliOp] {
        &self.ops
    }

    pub fn op(&self, qubit: usize) -> PauliOp {
        self.ops[qubit]
    }

    pub fn is_identity(&self) -> bool {
        self.ops.iter().all(|&op| op == PauliOp::I)
    }

    /// Qubits on which the string acts non-trivially.
    pub fn support(&self) -> Vec<usize> {
        self.ops
            .iter()
            .enumerate()
            .filter(|(_, &op)| op != PauliOp::I)
            .map(|(q, _)| q)
            .collect()
    }

    pub fn label(&self) -> String {
        self.ops.iter().map(|op| op.letter()).collect()
    }

    /// P|index> = phase * |out>, with qubit 0 as the most significant bit.
    pub fn apply_basis(&self, index: usize) -> (usize, Complex64) {
        let n = self.width();
        let mut out = index;
        let mut phase = Complex64::new(1.0, 0.0);
        for (q, &op) in self.ops.iter().enumerate() {
            let pos = n - 1 - q;
            let bit = ((index >> pos) & 1) as u8;
            let (new_bit, ph) = op.apply_bit(bit);
            if new_bit != bit {
                out ^= 1 << pos;
            }
            phase *= ph;
        }
        (out, phase)
    }

    /// Dense matrix, for oracle cross-checks and tests.
    pub fn matrix(&self) -> DMatrix<Complex64> {
        let dim = 1 << self.width();
        let mut m = DMatrix::zeros(dim, dim);
        for col in 0..dim {
            let (row, phase) = self.apply_basis(col);
            m[(row, col)] = phase;
        }
        m
    }
}

/// Which part of H(r) = H0 + r * H1 a term belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Part {
    H0,
    H1,
}

#[derive(Clone, Debug)]
pub struct PauliTerm {
    pub coeff: f64,
    pub string: PauliString,
    pub part: Part,
}

/// Real-weighted Pauli sum split into H0 and H1 parts.
#[derive(Clone, Debug)]
pub struct PauliObservable {
    width: usize,
    terms: Vec<PauliTerm>,
}

impl PauliObservable {
    pub fn new(width: usize) -> Self {
        PauliObservable {
            width,
            terms: Vec::new(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    /// Adds a term, merging coefficients of a string already present in the
    /// same part so no part holds duplicate strings.
    pub fn push(&mut self, coeff: f64, string: PauliString, part: Part) {
        assert_eq!(string.width(), self.width);
        assert!(coeff.is_finite());
        if let Some(term) = self
            .terms
            .iter_mut()
            .find(|t| t.part == part && t.string == string)
        {
            term.coeff += coeff;
        } else {
            self.terms.push(PauliTerm {
                coeff,
                string,
                part,
            });
        }
    }

    /// Flattened term list for the Hamiltonian evaluated at `r`.
    pub fn at(&self, r: f64) -> WeightedPaulis {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let c = match t.part {
                    Part::H0 => t.coeff,
                    Part::H1 => r * t.coeff,
                };
                (c, t.string.clone())
            })
            .collect();
        WeightedPaulis {
            width: self.width,
            terms,
        }
    }

    /// The H1 part alone with its raw coefficients.
    pub fn h1(&self) -> WeightedPaulis {
        let terms = self
            .terms
            .iter()
            .filter(|t| t.part == Part::H1)
            .map(|t| (t.coeff, t.string.clone()))
            .collect();
        WeightedPaulis {
            width: self.width,
            terms,
        }
    }

    /// Dense matrix of H(r), for oracle cross-checks.
    pub fn dense(&self, r: f64) -> DMatrix<f64> {
        let dim = 1 << self.width;
        let mut m = DMatrix::zeros(dim, dim);
        for (c, string) in &self.at(r).terms {
            for col in 0..dim {
                let (row, phase) = string.apply_basis(col);
                debug_assert!(phase.im.abs() < 1e-14 || phase.re.abs() < 1e-14);
                let entry = *c * phase.re;
                if entry != 0.0 {
                    m[(row, col)] += entry;
                }
            }
        }
        m
    }
}

/// A flat weighted Pauli sum, the form consumed by estimators and by the
/// shift-rule differentiation routines.
#[derive(Clone, Debug)]
pub struct WeightedPaulis {
    width: usize,
    pub terms: Vec<(f64, PauliString)>,
}

impl WeightedPaulis {
    pub fn new(width: usize, terms: Vec<(f64, PauliString)>) -> Self {
        for (c, s) in &terms {
            assert!(c.is_finite());
            assert_eq!(s.width(), width);
        }
        WeightedPaulis { width, terms }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn check_width(&self, circuit_width: usize) -> Result<()> {
        if self.width != circuit_width {
            return Err(Error::WidthMismatch {
                obs: self.width,
                circuit: circuit_width,
            });
        }
        Ok(())
    }

    pub fn dense(&self) -> DMatrix<f64> {
        let dim = 1 << self.width;
        let mut m = DMatrix::zeros(dim, dim);
        for (c, string) in &self.terms {
            for col in 0..dim {
                let (row, phase) = string.apply_basis(col);
                let entry = *c * phase.re;
                if entry != 0.0 {
                    m[(row, col)] += entry;
                }
            }
        }
        m
    }
}
