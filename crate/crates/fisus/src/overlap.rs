//! Wave-function overlap circuits and their derivatives.
//!
//! Three measurement strategies are provided for the overlap between a fixed
//! prepared state and a variational one: running the variational circuit
//! backwards after the preparation and reading the all-zeros probability
//! (compute and uncompute), an ancilla-controlled interference circuit read
//! out in the X or Y basis for the real or imaginary part (Hadamard test),
//! and a controlled-swap comparison of two registers (swap test). Controlled
//! compilation for the Hadamard test maps RY onto CRY and CNOT onto the
//! six-CNOT Toffoli network. The ancilla expectation of the Hadamard test is
//! linear in the varied unitary, so its parameters carry half-integer
//! frequencies and get dedicated ±π shift rules here.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use nalgebra::DMatrix;

use crate::autodiff::{
    grad_expectation, grad_probability, hessian_expectation, hessian_probability,
    GradientResult, HessianResult,
};
use crate::circuit::{Angle, Circuit, Gate};
use crate::error::{Error, Result};
use crate::estimator::{mix_seed, Estimator, SampledEstimator};
use crate::pauli::{PauliOp, PauliString, WeightedPaulis};
use crate::simulator::{Estimate, NoiseModel};

/// Measurement strategy for the overlap of two prepared states.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OverlapMethod {
    ComputeUncompute,
    HadamardReal,
    HadamardImag,
    SwapTest,
}

impl OverlapMethod {
    pub fn label(self) -> &'static str {
        match self {
            OverlapMethod::ComputeUncompute => "compute_uncompute",
            OverlapMethod::HadamardReal => "hadamard_real",
            OverlapMethod::HadamardImag => "hadamard_imag",
            OverlapMethod::SwapTest => "swap_test",
        }
    }
}

/// A fixed state preparation, a variational circuit to compare against it,
/// and the measurement strategy. The preparation side must be fully bound.
#[derive(Debug, Clone)]
pub struct OverlapJob {
    prepare: Circuit,
    vary: Circuit,
    method: OverlapMethod,
}

impl OverlapJob {
    pub fn new(prepare: Circuit, vary: Circuit, method: OverlapMethod) -> Result<Self> {
        if prepare.width() != vary.width() {
            return Err(Error::OverlapWidthMismatch {
                left: prepare.width(),
                right: vary.width(),
            });
        }
        if prepare.n_params() != 0 {
            return Err(Error::UnboundPreparation);
        }
        Ok(OverlapJob {
            prepare,
            vary,
            method,
        })
    }

    pub fn prepare(&self) -> &Circuit {
        &self.prepare
    }

    pub fn vary(&self) -> &Circuit {
        &self.vary
    }

    pub fn method(&self) -> OverlapMethod {
        self.method
    }
}

fn push_toffoli(out: &mut Circuit, a: usize, b: usize, t: usize) -> Result<()> {
    let quarter = FRAC_PI_4;
    out.h(t)?;
    out.cnot(b, t)?;
    out.push(Gate::Rz {
        qubit: t,
        angle: Angle::Bound(-quarter),
    })?;
    out.cnot(a, t)?;
    out.push(Gate::Rz {
        qubit: t,
        angle: Angle::Bound(quarter),
    })?;
    out.cnot(b, t)?;
    out.push(Gate::Rz {
        qubit: t,
        angle: Angle::Bound(-quarter),
    })?;
    out.cnot(a, t)?;
    out.push(Gate::Rz {
        qubit: b,
        angle: Angle::Bound(quarter),
    })?;
    out.push(Gate::Rz {
        qubit: t,
        angle: Angle::Bound(quarter),
    })?;
    out.h(t)?;
    out.cnot(a, b)?;
    out.push(Gate::Rz {
        qubit: a,
        angle: Angle::Bound(quarter),
    })?;
    out.push(Gate::Rz {
        qubit: b,
        angle: Angle::Bound(-quarter),
    })?;
    out.cnot(a, b)?;
    Ok(())
}

/// Compiles a circuit into its ancilla-controlled version on a register one
/// qubit wider. The ancilla is qubit 0; system qubits shift up by one. Only
/// RY and CNOT have controlled forms here.
fn controlled(circuit: &Circuit, width: usize) -> Result<Circuit> {
    let mut out = Circuit::new(width);
    for gate in circuit.gates() {
        match gate {
            Gate::Ry { qubit, angle } => out.push(Gate::Cry {
                control: 0,
                target: qubit + 1,
                angle: *angle,
            })?,
            Gate::Cnot { control, target } => {
                push_toffoli(&mut out, 0, control + 1, target + 1)?
            }
            other => {
                return Err(Error::ControlledCompile { gate: other.name() });
            }
        }
    }
    Ok(out)
}

fn ancilla_z(width: usize) -> WeightedPaulis {
    WeightedPaulis::new(
        width,
        vec![(1.0, PauliString::single(width, 0, PauliOp::Z))],
    )
}

/// Builds the concrete measurement circuit for a job. Compute and uncompute
/// stays on the system register; the Hadamard test adds an ancilla and closes
/// with RY(−π/2) for the real part or RX(π/2) for the imaginary part; the
/// swap test lays both states side by side under one ancilla.
pub fn build_overlap_circuit(job: &OverlapJob) -> Result<Circuit> {
    let n = job.prepare.width();
    match job.method {
        OverlapMethod::ComputeUncompute => {
            let mut c = job.prepare.clone();
            c.append(&job.vary.dagger())?;
            Ok(c)
        }
        OverlapMethod::HadamardReal | OverlapMethod::HadamardImag => {
            let width = n + 1;
            let mut c = Circuit::new(width);
            c.h(0)?;
            c.append(&controlled(&job.prepare, width)?)?;
            c.append(&controlled(&job.vary.dagger(), width)?)?;
            let closing = match job.method {
                OverlapMethod::HadamardReal => Gate::Ry {
                    qubit: 0,
                    angle: Angle::Bound(-FRAC_PI_2),
                },
                _ => Gate::Rx {
                    qubit: 0,
                    angle: Angle::Bound(FRAC_PI_2),
                },
            };
            c.push(closing)?;
            Ok(c)
        }
        OverlapMethod::SwapTest => {
            let width = 2 * n + 1;
            let mut c = Circuit::new(width);
            c.append(&job.prepare.embedded(width, 1)?)?;
            c.append(&job.vary.embedded(width, n + 1)?)?;
            c.h(0)?;
            for q in 0..n {
                c.push(Gate::Cswap {
                    control: 0,
                    a: 1 + q,
                    b: n + 1 + q,
                })?;
            }
            c.h(0)?;
            Ok(c)
        }
    }
}

/// An overlap reading plus a flag for estimates outside their physical range.
/// Squared-overlap methods must land in [0, 1]; out-of-range values (possible
/// for the sampled swap test) are reported as-is rather than clipped.
#[derive(Debug, Clone, Copy)]
pub struct OverlapEstimate {
    pub estimate: Estimate,
    pub flagged: bool,
}

/// Runs a job once. Compute and uncompute and the swap test return the
/// squared overlap; the Hadamard variants return the real or imaginary part
/// of the overlap itself.
pub fn estimate_overlap<E: Estimator + ?Sized>(
    job: &OverlapJob,
    params: &[f64],
    estimator: &E,
) -> Result<OverlapEstimate> {
    let circuit = build_overlap_circuit(job)?;
    let estimate = match job.method {
        OverlapMethod::ComputeUncompute => estimator.zeros_probability(&circuit, params)?,
        _ => estimator.pauli_expectation(&circuit, params, &ancilla_z(circuit.width()))?,
    };
    let flagged = match job.method {
        OverlapMethod::ComputeUncompute | OverlapMethod::SwapTest => {
            !(0.0..=1.0).contains(&estimate.value)
        }
        _ => estimate.value.abs() > 1.0,
    };
    Ok(OverlapEstimate { estimate, flagged })
}

fn half_gradient<F>(n_params: usize, params: &[f64], mut eval: F) -> Result<GradientResult>
where
    F: FnMut(&[f64]) -> Result<Estimate>,
{
    let mut values = vec![0.0; n_params];
    let mut variances = vec![0.0; n_params];
    let mut shots = 0u64;
    for i in 0..n_params {
        let mut plus = params.to_vec();
        plus[i] += PI;
        let mut minus = params.to_vec();
        minus[i] -= PI;
        let ep = eval(&plus)?;
        let em = eval(&minus)?;
        values[i] = 0.25 * (ep.value - em.value);
        variances[i] = (1.0 / 16.0) * (ep.variance + em.variance);
        shots += ep.shots + em.shots;
    }
    Ok(GradientResult {
        values,
        variances,
        shots,
    })
}

fn half_hessian<F>(n_params: usize, params: &[f64], mut eval: F) -> Result<HessianResult>
where
    F: FnMut(&[f64]) -> Result<Estimate>,
{
    let n = n_params;
    let mut values = DMatrix::zeros(n, n);
    let mut variances = DMatrix::zeros(n, n);
    let base = eval(params)?;
    let mut shots = base.shots;
    for i in 0..n {
        values[(i, i)] = -0.25 * base.value;
        variances[(i, i)] = (1.0 / 16.0) * base.variance;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let mut shifted = |si: f64, sj: f64| -> Result<Estimate> {
                let mut p = params.to_vec();
                p[i] += si;
                p[j] += sj;
                eval(&p)
            };
            let pp = shifted(PI, PI)?;
            let mp = shifted(-PI, PI)?;
            let pm = shifted(PI, -PI)?;
            let mm = shifted(-PI, -PI)?;
            let s = (pp.value + mm.value) - (mp.value + pm.value);
            let value = (1.0 / 16.0) * s;
            values[(i, j)] = value;
            values[(j, i)] = value;
            let var =
                (1.0 / 256.0) * (pp.variance + mp.variance + pm.variance + mm.variance);
            variances[(i, j)] = var;
            variances[(j, i)] = var;
            shots += pp.shots + mp.shots + pm.shots + mm.shots;
        }
    }
    Ok(HessianResult {
        values,
        variances,
        shots,
    })
}

/// Gradient of the squared overlap with respect to the variational
/// parameters. The Hadamard variants differentiate the measured overlap part
/// m and return d(m²) = 2m·dm, which equals the squared-overlap gradient for
/// real-amplitude circuits.
pub fn squared_overlap_gradient<E: Estimator + ?Sized>(
    job: &OverlapJob,
    params: &[f64],
    estimator: &E,
) -> Result<GradientResult> {
    let circuit = build_overlap_circuit(job)?;
    match job.method {
        OverlapMethod::ComputeUncompute => grad_probability(&circuit, params, estimator),
        OverlapMethod::SwapTest => {
            grad_expectation(&circuit, params, &ancilla_z(circuit.width()), estimator)
        }
        OverlapMethod::HadamardReal | OverlapMethod::HadamardImag => {
            let obs = ancilla_z(circuit.width());
            let base = estimator.pauli_expectation(&circuit, params, &obs)?;
            let part = half_gradient(circuit.n_params(), params, |p| {
                estimator.pauli_expectation(&circuit, p, &obs)
            })?;
            let m = base.value;
            let values: Vec<f64> = part.values.iter().map(|g| 2.0 * m * g).collect();
            let variances: Vec<f64> = part
                .values
                .iter()
                .zip(&part.variances)
                .map(|(g, vg)| 4.0 * (m * m * vg + g * g * base.variance))
                .collect();
            Ok(GradientResult {
                values,
                variances,
                shots: part.shots + base.shots,
            })
        }
    }
}

/// Hessian of the squared overlap with respect to the variational
/// parameters. For the real-part Hadamard test this is 2× the Hessian of the
/// measured part, the squared-overlap Hessian at a working point where the
/// overlap is maximal; the imaginary variant has no squared-overlap Hessian.
pub fn squared_overlap_hessian<E: Estimator + ?Sized>(
    job: &OverlapJob,
    params: &[f64],
    estimator: &E,
) -> Result<HessianResult> {
    let circuit = build_overlap_circuit(job)?;
    match job.method {
        OverlapMethod::ComputeUncompute => hessian_probability(&circuit, params, estimator),
        OverlapMethod::SwapTest => {
            hessian_expectation(&circuit, params, &ancilla_z(circuit.width()), estimator)
        }
        OverlapMethod::HadamardReal => {
            let obs = ancilla_z(circuit.width());
            let part = half_hessian(circuit.n_params(), params, |p| {
                estimator.pauli_expectation(&circuit, p, &obs)
            })?;
            Ok(HessianResult {
                values: part.values * 2.0,
                variances: part.variances * 4.0,
                shots: part.shots,
            })
        }
        OverlapMethod::HadamardImag => Err(Error::UnsupportedOverlapHessian {
            method: OverlapMethod::HadamardImag.label(),
        }),
    }
}

/// One line of the method-comparison table: a method, the noise level it ran
/// under, its circuit cost, and its mean absolute deviation from the
/// reference susceptibility over the trials.
#[derive(Debug, Clone)]
pub struct NoiseReportRow {
    pub method: &'static str,
    pub implemented: bool,
    pub p1: f64,
    pub p2: f64,
    pub cnot_count: usize,
    pub trials: usize,
    pub mean_abs_deviation: f64,
}

/// Compares the overlap methods as susceptibility estimators under a sweep of
/// noise levels. The susceptibility is recomputed per trial from a sampled
/// overlap Hessian contracted with the supplied response vector; the
/// preparation and working point are both the supplied optimal parameters.
/// Rows for ancilla-assisted and Bell-basis overlap algorithms are emitted as
/// unimplemented placeholders.
pub fn noise_sensitivity_report(
    ansatz: &Circuit,
    theta_star: &[f64],
    response: &[f64],
    exact_fs: f64,
    noise_levels: &[NoiseModel],
    shots: u64,
    trials: usize,
    seed: u64,
) -> Result<Vec<NoiseReportRow>> {
    if trials == 0 {
        return Err(Error::EmptyTrials);
    }
    let prepare = ansatz.bind(theta_star)?;
    let n = response.len();
    let mut rows = Vec::new();
    let mut salt = 0u64;
    for noise in noise_levels {
        for (name, method) in [
            ("compute_uncompute", Some(OverlapMethod::ComputeUncompute)),
            ("swap_test", Some(OverlapMethod::SwapTest)),
            ("hadamard", Some(OverlapMethod::HadamardReal)),
            ("ancilla_based", None),
            ("bell_basis", None),
        ] {
            let Some(method) = method else {
                rows.push(NoiseReportRow {
                    method: name,
                    implemented: false,
                    p1: noise.p1(),
                    p2: noise.p2(),
                    cnot_count: 0,
                    trials: 0,
                    mean_abs_deviation: f64::NAN,
                });
                continue;
            };
            let job = OverlapJob::new(prepare.clone(), ansatz.clone(), method)?;
            let circuit = build_overlap_circuit(&job)?;
            let mut total = 0.0;
            for _ in 0..trials {
                let estimator = SampledEstimator::new(Some(*noise), shots, mix_seed(seed, salt));
                salt += 1;
                let hessian = squared_overlap_hessian(&job, theta_star, &estimator)?;
                let mut acc = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        acc += 0.5 * hessian.values[(i, j)] * response[i] * response[j];
                    }
                }
                total += (acc.abs() - exact_fs).abs();
            }
            rows.push(NoiseReportRow {
                method: name,
                implemented: true,
                p1: noise.p1(),
                p2: noise.p2(),
                cnot_count: circuit.cnot_count(),
                trials,
                mean_abs_deviation: total / trials as f64,
            });
        }
    }
    Ok(rows)
}
