//! Parametrized circuits over a small fixed gate set.
//!
//! A rotation angle is either a bound constant or a reference
//! coeff * theta[k] + shift with coeff restricted to +1 or -1. Restricting
//! coefficients this way keeps every parametrized rotation compatible with
//! the two-term parameter-shift rule, and it is closed under taking the
//! adjoint of a circuit.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Angle {
    Bound(f64),
    Param { index: usize, coeff: f64, shift: f64 },
}

impl Angle {
    /// Fresh symbolic parameter with coefficient +1 and no shift.
    pub fn param(index: usize) -> Self {
        Angle::Param {
            index,
            coeff: 1.0,
            shift: 0.0,
        }
    }

    pub fn resolve(self, params: &[f64]) -> f64 {
        match self {
            Angle::Bound(a) => a,
            Angle::Param {
                index,
                coeff,
                shift,
            } => coeff * params[index] + shift,
        }
    }

    pub fn negate(self) -> Self {
        match self {
            Angle::Bound(a) => Angle::Bound(-a),
            Angle::Param {
                index,
                coeff,
                shift,
            } => Angle::Param {
                index,
                coeff: -coeff,
                shift: -shift,
            },
        }
    }

    pub fn param_index(self) -> Option<usize> {
        match self {
            Angle::Bound(_) => None,
            Angle::Param { index, .. } => Some(index),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Gate {
    Ry { qubit: usize, angle: Angle },
    Rx { qubit: usize, angle: Angle },
    Rz { qubit: usize, angle: Angle },
    H { qubit: usize },
    X { qubit: usize },
    Cnot { control: usize, target: usize },
    Swap { a: usize, b: usize },
    Cswap { control: usize, a: usize, b: usize },
    Cry { control: usize, target: usize, angle: Angle },
}

/// Up to three qubit indices without heap allocation.
#[derive(Clone, Copy, Debug)]
pub struct Qubits {
    buf: [usize; 3],
    len: usize,
}

impl Qubits {
    fn one(a: usize) -> Self {
        Qubits { buf: [a, 0, 0], len: 1 }
    }
    fn two(a: usize, b: usize) -> Self {
        Qubits { buf: [a, b, 0], len: 2 }
    }
    fn three(a: usize, b: usize, c: usize) -> Self {
        Qubits { buf: [a, b, c], len: 3 }
    }
    pub fn as_slice(&self) -> &[usize] {
        &self.buf[..self.len]
    }
    pub fn len(&self) -> usize {
        self.len
    }
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

impl Gate {
    pub fn qubits(&self) -> Qubits {
        match *self {
            Gate::Ry { qubit, .. }
            | Gate::Rx { qubit, .. }
            | Gate::Rz { qubit, .. }
            | Gate::H { qubit }
            | Gate::X { qubit } => Qubits::one(qubit),
            Gate::Cnot { control, target } => Qubits::two(control, target),
            Gate::Swap { a, b } => Qubits::two(a, b),
            Gate::Cry {
                control, target, ..
            } => Qubits::two(control, target),
            Gate::Cswap { control, a, b } => Qubits::three(control, a, b),
        }
    }

    pub fn angle(&self) -> Option<Angle> {
        match *self {
            Gate::Ry { angle, .. }
            | Gate::Rx { angle, .. }
            | Gate::Rz { angle, .. }
            | Gate::Cry { angle, .. } => Some(angle),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Gate::Ry { .. } => "RY",
            Gate::Rx { .. } => "RX",
            Gate::Rz { .. } => "RZ",
            Gate::H { .. } => "H",
            Gate::X { .. } => "X",
            Gate::Cnot { .. } => "CNOT",
            Gate::Swap { .. } => "SWAP",
            Gate::Cswap { .. } => "CSWAP",
            Gate::Cry { .. } => "CRY",
        }
    }

    /// Inverse gate. Rotations negate their angle; the rest are involutions.
    pub fn dagger(&self) -> Gate {
        match *self {
            Gate::Ry { qubit, angle } => Gate::Ry {
                qubit,
                angle: angle.negate(),
            },
            Gate::Rx { qubit, angle } => Gate::Rx {
                qubit,
                angle: angle.negate(),
            },
            Gate::Rz { qubit, angle } => Gate::Rz {
                qubit,
                angle: angle.negate(),
            },
            Gate::Cry {
                control,
                target,
                angle,
            } => Gate::Cry {
                control,
                target,
                angle: angle.negate(),
            },
            other => other,
        }
    }

    fn remapped(&self, offset: usize) -> Gate {
        let mut g = *self;
        match &mut g {
            Gate::Ry { qubit, .. }
            | Gate::Rx { qubit, .. }
            | Gate::Rz { qubit, .. }
            | Gate::H { qubit }
            | Gate::X { qubit } => *qubit += offset,
            Gate::Cnot { control, target } => {
                *control += offset;
                *target += offset;
            }
            Gate::Swap { a, b } => {
                *a += offset;
                *b += offset;
            }
            Gate::Cswap { control, a, b } => {
                *control += offset;
                *a += offset;
                *b += offset;
            }
            Gate::Cry {
                control, target, ..
            } => {
                *control += offset;
                *target += offset;
            }
        }
        g
    }
}

/// Ordered gate list on a fixed number of qubits.
#[derive(Clone, Debug)]
pub struct Circuit {
    width: usize,
    gates: Vec<Gate>,
    n_params: usize,
}

impl Circuit {
    pub fn new(width: usize) -> Self {
        assert!(width >= 1, "a circuit needs at least one qubit");
        Circuit {
            width,
            gates: Vec::new(),
            n_params: 0,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    /// Gates acting on two or more qubits.
    pub fn multi_qubit_gate_count(&self) -> usize {
        self.gates.iter().filter(|g| g.qubits().len() >= 2).count()
    }

    pub fn cnot_count(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| matches!(g, Gate::Cnot { .. }))
            .count()
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        let qs = gate.qubits();
        let qs = qs.as_slice();
        for &q in qs {
            if q >= self.width {
                return Err(Error::QubitOutOfRange {
                    qubit: q,
                    width: self.width,
                });
            }
        }
        for i in 0..qs.len() {
            for j in (i + 1)..qs.len() {
                if qs[i] == qs[j] {
                    return Err(Error::DuplicateQubit);
                }
            }
        }
        if let Some(Angle::Param { index, coeff, .. }) = gate.angle() {
            assert!(
                coeff == 1.0 || coeff == -1.0,
                "parameter coefficients are restricted to +1 and -1"
            );
            self.n_params = self.n_params.max(index + 1);
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn ry(&mut self, qubit: usize, angle: Angle) -> Result<()> {
        self.push(Gate::Ry { qubit, angle })
    }

    pub fn cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.push(Gate::Cnot { control, target })
    }

    pub fn h(&mut self, qubit: usize) -> Result<()> {
        self.push(Gate::H { qubit })
    }

    /// Adjoint circuit: gates reversed, every rotation angle negated.
    pub fn dagger(&self) -> Circuit {
        let mut out = Circuit::new(self.width);
        out.n_params = self.n_params;
        out.gates = self.gates.iter().rev().map(|g| g.dagger()).collect();
        out
    }

    /// Replaces every symbolic angle with its value under `params`.
    pub fn bind(&self, params: &[f64]) -> Result<Circuit> {
        if params.len() != self.n_params {
            return Err(Error::ParamLen {
                expected: self.n_params,
                got: params.len(),
            });
        }
        let mut out = Circuit::new(self.width);
        for g in &self.gates {
            let mut g = *g;
            match &mut g {
                Gate::Ry { angle, .. }
                | Gate::Rx { angle, .. }
                | Gate::Rz { angle, .. }
                | Gate::Cry { angle, .. } => *angle = Angle::Bound(angle.resolve(params)),
                _ => {}
            }
            out.gates.push(g);
        }
        Ok(out)
    }

    /// Appends another circuit of the same width.
    pub fn append(&mut self, other: &Circuit) -> Result<()> {
        if other.width != self.width {
            return Err(Error::OverlapWidthMismatch {
                left: self.width,
                right: other.width,
            });
        }
        for g in &other.gates {
            self.push(*g)?;
        }
        Ok(())
    }

    /// Copy of the circuit acting on qubits `offset..offset + width` of a
    /// wider register.
    pub fn embedded(&self, new_width: usize, offset: usize) -> Result<Circuit> {
        let mut out = Circuit::new(new_width);
        for g in &self.gates {
            out.push(g.remapped(offset))?;
        }
        Ok(out)
    }

    /// Verifies that every symbolic parameter sits in an RY gate, the
    /// structural condition for the two-term shift rules used here.
    pub fn check_shift_rules(&self) -> Result<()> {
        for g in &self.gates {
            if let Some(angle) = g.angle() {
                if let Some(index) = angle.param_index() {
                    if !matches!(g, Gate::Ry { .. }) {
                        return Err(Error::UnsupportedShiftGate { index });
                    }
                }
            }
        }
        Ok(())
    }
}
