//! Statevector and density-matrix execution of circuits.
//!
//! Noiseless and zero-strength runs keep a pure state of 2^n amplitudes. With
//! nonzero noise the register is tracked as a dense density matrix and a
//! depolarizing channel acts on the qubits touched by each gate. Qubit 0 is
//! the most significant bit of a basis index.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::circuit::{Angle, Circuit, Gate};
use crate::error::{Error, Result};
use crate::pauli::{PauliOp, PauliString, WeightedPaulis};

pub const MAX_QUBITS: usize = 7;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn cr(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Depolarizing-noise strengths applied after every gate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseModel {
    p1: f64,
    p2: f64,
}

impl NoiseModel {
    pub fn new(p1: f64, p2: f64) -> Result<Self> {
        for p in [p1, p2] {
            if !(0.0..=1.0).contains(&p) || p.is_nan() {
                return Err(Error::BadProbability { p });
            }
        }
        Ok(NoiseModel { p1, p2 })
    }

    /// Baseline hardware-like strengths: 2e-4 after one-qubit gates, 8e-3
    /// after wider gates.
    pub fn default_depolarizing() -> Self {
        NoiseModel {
            p1: 2e-4,
            p2: 8e-3,
        }
    }

    pub fn p1(&self) -> f64 {
        self.p1
    }

    pub fn p2(&self) -> f64 {
        self.p2
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        NoiseModel::new(self.p1 * factor, self.p2 * factor)
    }

    fn strength(&self, touched: usize) -> f64 {
        if touched <= 1 {
            self.p1
        } else {
            self.p2
        }
    }
}

/// A sample-based value with its estimated variance. `shots == 0` marks an
/// exact evaluation and implies zero variance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub variance: f64,
    pub shots: u64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate {
            value,
            variance: 0.0,
            shots: 0,
        }
    }

    pub fn std(&self) -> f64 {
        self.variance.sqrt()
    }
}

#[derive(Clone, Debug)]
pub enum QuantumState {
    /// 2^n amplitudes.
    Pure(Vec<Complex64>),
    /// Row-major 2^n by 2^n density matrix.
    Mixed(Vec<Complex64>),
}

impl QuantumState {
    pub fn zero_pure(width: usize) -> Self {
        let mut psi = vec![cr(0.0); 1 << width];
        psi[0] = cr(1.0);
        QuantumState::Pure(psi)
    }

    pub fn zero_mixed(width: usize) -> Self {
        let dim = 1usize << width;
        let mut rho = vec![cr(0.0); dim * dim];
        rho[0] = cr(1.0);
        QuantumState::Mixed(rho)
    }

    pub fn width(&self) -> usize {
        match self {
            QuantumState::Pure(v) => v.len().trailing_zeros() as usize,
            QuantumState::Mixed(v) => v.len().trailing_zeros() as usize / 2,
        }
    }

    pub fn is_pure(&self) -> bool {
        matches!(self, QuantumState::Pure(_))
    }

    pub fn amplitudes(&self) -> Option<&[Complex64]> {
        match self {
            QuantumState::Pure(v) => Some(v),
            QuantumState::Mixed(_) => None,
        }
    }

    pub fn probability(&self, index: usize) -> f64 {
        match self {
            QuantumState::Pure(v) => v[index].norm_sqr(),
            QuantumState::Mixed(v) => {
                let dim = 1usize << self.width();
                v[index * dim + index].re
            }
        }
    }

    pub fn trace(&self) -> f64 {
        match self {
            QuantumState::Pure(v) => v.iter().map(|a| a.norm_sqr()).sum(),
            QuantumState::Mixed(v) => {
                let dim = 1usize << self.width();
                (0..dim).map(|i| v[i * dim + i].re).sum()
            }
        }
    }

    /// Expectation of a single Pauli string, computed exactly from the state.
    pub fn pauli_expectation(&self, string: &PauliString) -> f64 {
        assert_eq!(string.width(), self.width(), "observable width mismatch");
        match self {
            QuantumState::Pure(v) => {
                let mut acc = c(0.0, 0.0);
                for (j, amp) in v.iter().enumerate() {
                    if amp.norm_sqr() == 0.0 {
                        continue;
                    }
                    let (tgt, phase) = string.apply_basis(j);
                    acc += v[tgt].conj() * phase * amp;
                }
                acc.re
            }
            QuantumState::Mixed(v) => {
                let dim = 1usize << self.width();
                let mut acc = c(0.0, 0.0);
                for i in 0..dim {
                    let (tgt, phase) = string.apply_basis(i);
                    acc += v[i * dim + tgt] * phase;
                }
                acc.re
            }
        }
    }

    fn apply_unitary(&mut self, u: &[Complex64], qubits: &[usize]) {
        let n = self.width();
        match self {
            QuantumState::Pure(v) => apply_to_vector(v, n, u, qubits, false),
            QuantumState::Mixed(v) => {
                let dim = 1usize << n;
                let mut col = vec![cr(0.0); dim];
                for cix in 0..dim {
                    for r in 0..dim {
                        col[r] = v[r * dim + cix];
                    }
                    apply_to_vector(&mut col, n, u, qubits, false);
                    for r in 0..dim {
                        v[r * dim + cix] = col[r];
                    }
                }
                for r in 0..dim {
                    let row = &mut v[r * dim..(r + 1) * dim];
                    apply_to_vector(row, n, u, qubits, true);
                }
            }
        }
    }

    /// Depolarizing channel of strength `p` on the listed qubits: with
    /// probability p their marginal is replaced by the maximally mixed state.
    fn depolarize(&mut self, qubits: &[usize], p: f64) {
        if p == 0.0 {
            return;
        }
        let n = self.width();
        let rho = match self {
            QuantumState::Mixed(v) => v,
            QuantumState::Pure(_) => panic!("noise channels need a density matrix"),
        };
        let dim = 1usize << n;
        let k = qubits.len();
        let sub = 1usize << k;
        let pos: Vec<usize> = qubits.iter().map(|&q| n - 1 - q).collect();
        let mask: usize = pos.iter().map(|&b| 1usize << b).sum();
        let insert = |local: usize| -> usize {
            let mut bits = 0usize;
            for (j, &b) in pos.iter().enumerate() {
                if (local >> (k - 1 - j)) & 1 == 1 {
                    bits |= 1 << b;
                }
            }
            bits
        };
        let old = rho.clone();
        let scale = p / sub as f64;
        for i in 0..dim {
            for j in 0..dim {
                let mut v = old[i * dim + j] * (1.0 - p);
                if i & mask == j & mask {
                    let i0 = i & !mask;
                    let j0 = j & !mask;
                    let mut tr = c(0.0, 0.0);
                    for t in 0..sub {
                        let bits = insert(t);
                        tr += old[(i0 | bits) * dim + (j0 | bits)];
                    }
                    v += tr * scale;
                }
                rho[i * dim + j] = v;
            }
        }
    }
}

/// Applies a 2^k by 2^k matrix to the amplitudes of `qubits` inside a vector
/// over n qubits. The first listed qubit is the most significant local bit.
/// With `conjugate` set the complex conjugate of the matrix is used.
fn apply_to_vector(
    v: &mut [Complex64],
    n: usize,
    u: &[Complex64],
    qubits: &[usize],
    conjugate: bool,
) {
    let k = qubits.len();
    let sub = 1usize << k;
    debug_assert_eq!(u.len(), sub * sub);
    let pos: Vec<usize> = qubits.iter().map(|&q| n - 1 - q).collect();
    let mask: usize = pos.iter().map(|&b| 1usize << b).sum();
    let offsets: Vec<usize> = (0..sub)
        .map(|local| {
            let mut bits = 0usize;
            for (j, &b) in pos.iter().enumerate() {
                if (local >> (k - 1 - j)) & 1 == 1 {
                    bits |= 1 << b;
                }
            }
            bits
        })
        .collect();
    let mut scratch = vec![cr(0.0); sub];
    for base in 0..(1usize << n) {
        if base & mask != 0 {
            continue;
        }
        for l in 0..sub {
            scratch[l] = v[base | offsets[l]];
        }
        for l in 0..sub {
            let mut acc = c(0.0, 0.0);
            for m in 0..sub {
                let e = u[l * sub + m];
                let e = if conjugate { e.conj() } else { e };
                acc += e * scratch[m];
            }
            v[base | offsets[l]] = acc;
        }
    }
}

fn bound_angle(angle: Option<Angle>) -> f64 {
    match angle {
        Some(Angle::Bound(a)) => a,
        _ => panic!("gate angle must be bound before execution"),
    }
}

fn gate_matrix(gate: &Gate) -> Vec<Complex64> {
    match gate {
        Gate::Ry { .. } => {
            let h = bound_angle(gate.angle()) / 2.0;
            vec![cr(h.cos()), cr(-h.sin()), cr(h.sin()), cr(h.cos())]
        }
        Gate::Rx { .. } => {
            let h = bound_angle(gate.angle()) / 2.0;
            vec![cr(h.cos()), c(0.0, -h.sin()), c(0.0, -h.sin()), cr(h.cos())]
        }
        Gate::Rz { .. } => {
            let h = bound_angle(gate.angle()) / 2.0;
            vec![
                c(h.cos(), -h.sin()),
                cr(0.0),
                cr(0.0),
                c(h.cos(), h.sin()),
            ]
        }
        Gate::H { .. } => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            vec![cr(s), cr(s), cr(s), cr(-s)]
        }
        Gate::X { .. } => vec![cr(0.0), cr(1.0), cr(1.0), cr(0.0)],
        Gate::Cnot { .. } => {
            let mut m = vec![cr(0.0); 16];
            for (row, col) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
                m[row * 4 + col] = cr(1.0);
            }
            m
        }
        Gate::Swap { .. } => {
            let mut m = vec![cr(0.0); 16];
            for (row, col) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
                m[row * 4 + col] = cr(1.0);
            }
            m
        }
        Gate::Cry { .. } => {
            let h = bound_angle(gate.angle()) / 2.0;
            let mut m = vec![cr(0.0); 16];
            m[0] = cr(1.0);
            m[5] = cr(1.0);
            m[2 * 4 + 2] = cr(h.cos());
            m[2 * 4 + 3] = cr(-h.sin());
            m[3 * 4 + 2] = cr(h.sin());
            m[3 * 4 + 3] = cr(h.cos());
            m
        }
        Gate::Cswap { .. } => {
            let mut m = vec![cr(0.0); 64];
            for (row, col) in [(0, 0), (1, 1), (2, 2), (3, 3), (4, 4), (5, 6), (6, 5), (7, 7)] {
                m[row * 8 + col] = cr(1.0);
            }
            m
        }
    }
}

fn prepare(circuit: &Circuit, params: &[f64]) -> Result<Circuit> {
    if circuit.width() > MAX_QUBITS {
        return Err(Error::WidthLimit {
            width: circuit.width(),
            max: MAX_QUBITS,
        });
    }
    circuit.bind(params)
}

/// Runs a circuit from the all-zeros state. A missing or zero-strength noise
/// model keeps the state pure; otherwise evolution switches to the density
/// matrix and each gate is followed by depolarizing noise on the qubits it
/// touched.
pub fn run(circuit: &Circuit, params: &[f64], noise: Option<&NoiseModel>) -> Result<QuantumState> {
    if let Some(model) = noise {
        if model.p1 > 0.0 || model.p2 > 0.0 {
            return run_mixed(circuit, params, model);
        }
    }
    let bound = prepare(circuit, params)?;
    let mut state = QuantumState::zero_pure(circuit.width());
    for gate in bound.gates() {
        let qs = gate.qubits();
        state.apply_unitary(&gate_matrix(gate), qs.as_slice());
        debug_assert!((state.trace() - 1.0).abs() < 1e-12);
    }
    Ok(state)
}

/// Density-matrix evolution regardless of the model's strength.
pub fn run_mixed(circuit: &Circuit, params: &[f64], noise: &NoiseModel) -> Result<QuantumState> {
    let bound = prepare(circuit, params)?;
    let mut state = QuantumState::zero_mixed(circuit.width());
    for gate in bound.gates() {
        let qs = gate.qubits();
        let qs = qs.as_slice();
        state.apply_unitary(&gate_matrix(gate), qs);
        state.depolarize(qs, noise.strength(qs.len()));
        debug_assert!((state.trace() - 1.0).abs() < 1e-12);
    }
    Ok(state)
}

/// Exact basis change sending each X or Y factor of the string onto Z, then
/// the parity expectation in the computational basis. Matches measuring the
/// string on hardware with noiseless pre-measurement rotations.
fn rotated_parity_expectation(state: &QuantumState, string: &PauliString) -> f64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let to_z_from_x = [cr(s), cr(s), cr(s), cr(-s)];
    let to_z_from_y = [c(s, 0.0), c(0.0, -s), c(s, 0.0), c(0.0, s)];
    let mut rotated = state.clone();
    let mut mask = 0usize;
    let n = string.width();
    for q in 0..n {
        match string.op(q) {
            PauliOp::I => continue,
            PauliOp::Z => {}
            PauliOp::X => rotated.apply_unitary(&to_z_from_x, &[q]),
            PauliOp::Y => rotated.apply_unitary(&to_z_from_y, &[q]),
        }
        mask |= 1 << (n - 1 - q);
    }
    let dim = 1usize << n;
    let mut acc = 0.0;
    for i in 0..dim {
        let sign = if (i & mask).count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        acc += sign * rotated.probability(i);
    }
    acc
}

/// Exact expectation value of a weighted Pauli sum.
pub fn expectation_exact(
    circuit: &Circuit,
    params: &[f64],
    observable: &WeightedPaulis,
    noise: Option<&NoiseModel>,
) -> Result<f64> {
    observable.check_width(circuit.width())?;
    let state = run(circuit, params, noise)?;
    let mut acc = 0.0;
    for (coeff, string) in &observable.terms {
        if string.is_identity() {
            acc += coeff;
        } else {
            acc += coeff * state.pauli_expectation(string);
        }
    }
    Ok(acc)
}

/// Shot-sampled expectation value. Each non-identity term is measured
/// independently with the full shot budget; outcomes are binomial draws from
/// the exact single-term distribution. The variance is the plug-in estimate
/// sum c_k^2 (1 - m_k^2) / shots.
pub fn expectation_sampled(
    circuit: &Circuit,
    params: &[f64],
    observable: &WeightedPaulis,
    noise: Option<&NoiseModel>,
    shots: u64,
    rng_seed: u64,
) -> Result<Estimate> {
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    observable.check_width(circuit.width())?;
    let state = run(circuit, params, noise)?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut value = 0.0;
    let mut variance = 0.0;
    let mut total = 0u64;
    for (coeff, string) in &observable.terms {
        if string.is_identity() {
            value += coeff;
            continue;
        }
        let mean = rotated_parity_expectation(&state, string);
        let p_plus = ((1.0 + mean) / 2.0).clamp(0.0, 1.0);
        let draw = Binomial::new(shots, p_plus)
            .expect("clamped probability")
            .sample(&mut rng);
        let m = 2.0 * draw as f64 / shots as f64 - 1.0;
        value += coeff * m;
        variance += coeff * coeff * (1.0 - m * m).max(0.0) / shots as f64;
        total += shots;
    }
    Ok(Estimate {
        value,
        variance,
        shots: total,
    })
}

/// Probability of reading the all-zeros bitstring. `shots == 0` returns the
/// exact value, otherwise a binomial draw with plug-in variance
/// p(1 - p) / shots.
pub fn probability_all_zeros(
    circuit: &Circuit,
    params: &[f64],
    noise: Option<&NoiseModel>,
    shots: u64,
    rng_seed: u64,
) -> Result<Estimate> {
    let state = run(circuit, params, noise)?;
    let p = state.probability(0).clamp(0.0, 1.0);
    if shots == 0 {
        return Ok(Estimate::exact(p));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let draw = Binomial::new(shots, p)
        .expect("clamped probability")
        .sample(&mut rng);
    let est = draw as f64 / shots as f64;
    Ok(Estimate {
        value: est,
        variance: est * (1.0 - est) / shots as f64,
        shots,
    })
}
