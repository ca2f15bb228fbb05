//! Real-amplitude variational circuits for the reduced chains.
//!
//! Both layouts use RY rotations and nearest-neighbor CNOTs only, so every
//! prepared state has real amplitudes and every parameter obeys the two-point
//! shift rule. Parameter counts match the dimension of the real unit sphere
//! in each register: 3 for two qubits, 7 for three.

use std::f64::consts::PI;

use nalgebra::Matrix2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{Angle, Circuit};
use crate::error::{Error, Result};
use crate::simulator::run;

/// Shape summary of a supported variational layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnsatzSpec {
    n_qubits: usize,
    n_params: usize,
    cnot_count: usize,
}

impl AnsatzSpec {
    pub fn for_qubits(n_qubits: usize) -> Result<Self> {
        match n_qubits {
            2 => Ok(Self {
                n_qubits,
                n_params: 3,
                cnot_count: 1,
            }),
            3 => Ok(Self {
                n_qubits,
                n_params: 7,
                cnot_count: 5,
            }),
            _ => Err(Error::UnsupportedAnsatz { n_qubits }),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn cnot_count(&self) -> usize {
        self.cnot_count
    }
}

/// Builds the variational circuit for a 2- or 3-qubit register. All
/// parameters at zero prepare the all-zeros state.
pub fn build_ansatz(n_qubits: usize) -> Result<Circuit> {
    let spec = AnsatzSpec::for_qubits(n_qubits)?;
    let mut c = Circuit::new(n_qubits);
    match n_qubits {
        2 => {
            c.ry(0, Angle::param(0))?;
            c.cnot(0, 1)?;
            c.ry(0, Angle::param(1))?;
            c.ry(1, Angle::param(2))?;
        }
        3 => {
            c.ry(0, Angle::param(0))?;
            c.ry(1, Angle::param(1))?;
            c.ry(2, Angle::param(2))?;
            c.cnot(0, 1)?;
            c.ry(1, Angle::param(3))?;
            c.cnot(1, 2)?;
            c.ry(2, Angle::param(4))?;
            c.cnot(0, 1)?;
            c.ry(1, Angle::param(5))?;
            c.cnot(2, 1)?;
            c.ry(0, Angle::param(6))?;
            c.cnot(1, 0)?;
        }
        _ => unreachable!(),
    }
    debug_assert_eq!(c.n_params(), spec.n_params());
    debug_assert_eq!(c.cnot_count(), spec.cnot_count());
    Ok(c)
}

/// Checks that a circuit keeps all amplitudes real: at the supplied
/// parameters and at 100 seeded random parameter vectors, every amplitude of
/// the noiseless output must have |Im| below 1e-10. Circuits that fail to
/// execute are reported as non-real.
pub fn amplitudes_real_check(circuit: &Circuit, params: &[f64]) -> bool {
    let real_at = |p: &[f64]| -> bool {
        match run(circuit, p, None) {
            Ok(state) => state
                .amplitudes()
                .expect("noiseless run is pure")
                .iter()
                .all(|a| a.im.abs() < 1e-10),
            Err(_) => false,
        }
    };
    if !real_at(params) {
        return false;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let random: Vec<f64> = (0..circuit.n_params())
            .map(|_| rng.random_range(-PI..PI))
            .collect();
        if !real_at(&random) {
            return false;
        }
    }
    true
}

/// Result of fitting the 2-qubit circuit to a target real state.
#[derive(Debug, Clone)]
pub struct StateFit {
    pub params: Vec<f64>,
    pub fidelity: f64,
}

fn fit_fidelity(circuit: &Circuit, params: &[f64], target: &[f64; 4]) -> f64 {
    let state = run(circuit, params, None).expect("2-qubit noiseless run");
    let overlap: f64 = state
        .amplitudes()
        .expect("noiseless run is pure")
        .iter()
        .zip(target.iter())
        .map(|(a, t)| a.re * t)
        .sum();
    overlap * overlap
}

/// Finds parameters of the 2-qubit circuit preparing the given real
/// 4-amplitude target, up to global sign. The target is normalized first;
/// a vector of zeros is rejected.
pub fn fit_two_qubit_state(target: &[f64; 4]) -> Result<StateFit> {
    let norm = target.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::ZeroTarget);
    }
    let t = [
        target[0] / norm,
        target[1] / norm,
        target[2] / norm,
        target[3] / norm,
    ];

    let m = Matrix2::new(t[0], t[1], t[2], t[3]);
    let svd = m.svd(true, true);
    let mut u = svd.u.expect("2x2 svd produces u");
    let mut v = svd.v_t.expect("2x2 svd produces v_t").transpose();
    let mut d = [svd.singular_values[0], svd.singular_values[1]];
    if u.determinant() < 0.0 {
        for r in 0..2 {
            u[(r, 1)] = -u[(r, 1)];
        }
        d[1] = -d[1];
    }
    if v.determinant() < 0.0 {
        for r in 0..2 {
            v[(r, 1)] = -v[(r, 1)];
        }
        d[1] = -d[1];
    }
    let mut params = vec![
        2.0 * d[1].atan2(d[0]),
        2.0 * u[(1, 0)].atan2(u[(0, 0)]),
        2.0 * v[(1, 0)].atan2(v[(0, 0)]),
    ];

    let circuit = build_ansatz(2)?;
    let mut fidelity = fit_fidelity(&circuit, &params, &t);
    let mut step = 0;
    while fidelity < 1.0 - 1e-9 && step < 50 {
        let h = 1e-5;
        let mut grad = [0.0; 3];
        for (i, g) in grad.iter_mut().enumerate() {
            let mut plus = params.clone();
            plus[i] += h;
            let mut minus = params.clone();
            minus[i] -= h;
            *g = (fit_fidelity(&circuit, &plus, &t) - fit_fidelity(&circuit, &minus, &t))
                / (2.0 * h);
        }
        for (p, g) in params.iter_mut().zip(grad.iter()) {
            *p += 0.5 * g;
        }
        fidelity = fit_fidelity(&circuit, &params, &t);
        step += 1;
    }
    Ok(StateFit { params, fidelity })
}
