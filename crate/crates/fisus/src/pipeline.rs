//! End-to-end response pipeline. Per coupling value: a gradient-descent
//! ground-state search on the reduced observable, the linear response of the
//! optimal angles to the driving field, and from that response the second
//! energy derivative and the fidelity susceptibility. A sweep runs this over
//! a coupling grid with repeated trials, each (coupling, trial) cell on its
//! own deterministic RNG stream so results do not depend on thread count.

use nalgebra::DVector;
use rayon::prelude::*;

use crate::ansatz::build_ansatz;
use crate::autodiff::{grad_expectation, hessian_expectation, GradientResult, HessianResult};
use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::estimator::{mix_seed, Estimator, ExactEstimator, SampledEstimator};
use crate::oracle::ground_energy;
use crate::overlap::{
    squared_overlap_gradient, squared_overlap_hessian, OverlapJob, OverlapMethod,
};
use crate::pauli::WeightedPaulis;
use crate::simulator::{Estimate, NoiseModel};
use crate::tfim::reduce;
use crate::zne::{MitigatedEstimator, MitigationPlan};

pub const VQE_STEP: f64 = 0.1;
pub const VQE_MAX_ITERATIONS: usize = 1000;
pub const VQE_ENERGY_TOLERANCE: f64 = 1e-8;
const VQE_GRADIENT_TOLERANCE: f64 = 1e-9;
const VQE_MINIMUM_GRADIENT: f64 = 1e-6;
const SINGULAR_VALUE_CUTOFF: f64 = 1e-8;
const OVERLAP_GRADIENT_TOLERANCE: f64 = 1e-3;

fn inf_norm(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Outcome of the variational ground-state search.
#[derive(Debug, Clone, PartialEq)]
pub struct VqeResult {
    pub theta_opt: Vec<f64>,
    pub energy: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Plain gradient descent on the expectation of the observable, analytic
/// estimates, step 0.1, starting from all-zero angles, at most 1000 updates.
/// With a reference energy the search stops once the energy is within 1e-8 of
/// it and the gradient is flat enough to sit at a variational minimum;
/// without one it stops when the gradient drops below 1e-9 in max norm.
pub fn vqe(
    observable: &WeightedPaulis,
    ansatz: &Circuit,
    reference_energy: Option<f64>,
) -> Result<VqeResult> {
    let est = ExactEstimator::noiseless();
    let mut theta = vec![0.0; ansatz.n_params()];
    let mut energy = est.pauli_expectation(ansatz, &theta, observable)?.value;
    let mut iterations = 0;
    let converged = loop {
        let grad = grad_expectation(ansatz, &theta, observable, &est)?;
        let flat = inf_norm(&grad.values);
        let done = match reference_energy {
            Some(e0) => {
                (energy - e0).abs() < VQE_ENERGY_TOLERANCE && flat < VQE_MINIMUM_GRADIENT
            }
            None => flat < VQE_GRADIENT_TOLERANCE,
        };
        if done {
            break true;
        }
        if iterations >= VQE_MAX_ITERATIONS {
            break false;
        }
        for (t, g) in theta.iter_mut().zip(&grad.values) {
            *t -= VQE_STEP * g;
        }
        iterations += 1;
        energy = est.pauli_expectation(ansatz, &theta, observable)?.value;
    };
    Ok(VqeResult {
        theta_opt: theta,
        energy,
        iterations,
        converged,
    })
}

/// Solution of the first-order response system Hess·(dθ/dr) = −grad⟨H1⟩.
/// Singular values below 1e-8 of the largest are truncated (pseudoinverse);
/// the condition number and the residual of the untruncated system are
/// always reported.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseSolution {
    pub dtheta_dr: Vec<f64>,
    pub condition_number: f64,
    pub residual_norm: f64,
    pub truncated: bool,
}

pub fn solve_response(
    hessian: &HessianResult,
    gradient: &GradientResult,
) -> Result<ResponseSolution> {
    let n = gradient.values.len();
    if hessian.values.nrows() != n || hessian.values.ncols() != n {
        return Err(Error::ResponseShape {
            rows: hessian.values.nrows(),
            cols: hessian.values.ncols(),
            grad: n,
        });
    }
    let svd = hessian.values.clone().svd(true, true);
    let s_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let s_min = svd
        .singular_values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let cutoff = SINGULAR_VALUE_CUTOFF * s_max;
    let truncated = svd.singular_values.iter().any(|s| *s <= cutoff);
    let condition_number = if s_min > 0.0 {
        s_max / s_min
    } else {
        f64::INFINITY
    };
    let rhs = DVector::from_iterator(n, gradient.values.iter().map(|g| -g));
    let solution = svd.solve(&rhs, cutoff).map_err(Error::ResponseSolve)?;
    let residual = &hessian.values * &solution - &rhs;
    Ok(ResponseSolution {
        dtheta_dr: solution.iter().cloned().collect(),
        condition_number,
        residual_norm: residual.iter().cloned().fold(0.0, |m, v| m.max(v.abs())),
        truncated,
    })
}

/// d²E/dr² from the chain rule: the driving-term gradient contracted with the
/// angle response. Variance adds the per-component gradient variances with
/// squared response weights.
pub fn second_energy_derivative(
    gradient: &GradientResult,
    response: &[f64],
) -> Result<Estimate> {
    if gradient.values.len() != response.len() {
        return Err(Error::ResponseShape {
            rows: gradient.values.len(),
            cols: 1,
            grad: response.len(),
        });
    }
    let mut value = 0.0;
    let mut variance = 0.0;
    for i in 0..response.len() {
        value += gradient.values[i] * response[i];
        variance += response[i] * response[i] * gradient.variances[i];
    }
    Ok(Estimate {
        value,
        variance,
        shots: gradient.shots,
    })
}

/// Fidelity susceptibility from the squared-overlap Hessian contracted twice
/// with the angle response, absolute value taken after summation. The
/// variance counts each independent Hessian entry once: diagonal entries
/// carry weight (tᵢ²/2)², mirrored off-diagonal pairs combine to (tᵢtⱼ)².
pub fn fidelity_susceptibility(
    overlap_hessian: &HessianResult,
    response: &[f64],
) -> Result<Estimate> {
    let n = response.len();
    if overlap_hessian.values.nrows() != n || overlap_hessian.values.ncols() != n {
        return Err(Error::ResponseShape {
            rows: overlap_hessian.values.nrows(),
            cols: overlap_hessian.values.ncols(),
            grad: n,
        });
    }
    let mut total = 0.0;
    let mut variance = 0.0;
    for i in 0..n {
        total += 0.5 * overlap_hessian.values[(i, i)] * response[i] * response[i];
        let wi = 0.5 * response[i] * response[i];
        variance += wi * wi * overlap_hessian.variances[(i, i)];
        for j in (i + 1)..n {
            total += overlap_hessian.values[(i, j)] * response[i] * response[j];
            let wij = response[i] * response[j];
            variance += wij * wij * overlap_hessian.variances[(i, j)];
        }
    }
    Ok(Estimate {
        value: total.abs(),
        variance,
        shots: overlap_hessian.shots,
    })
}

/// How a sweep cell estimates expectation values.
#[derive(Debug, Clone)]
pub enum EstimatorKind {
    Exact,
    Sampled { shots: u64 },
    Noisy { noise: NoiseModel, shots: u64 },
    Mitigated { noise: NoiseModel, plan: MitigationPlan },
}

impl EstimatorKind {
    pub fn build(&self, seed: u64) -> Box<dyn Estimator> {
        match self {
            EstimatorKind::Exact => Box::new(ExactEstimator::noiseless()),
            EstimatorKind::Sampled { shots } => {
                Box::new(SampledEstimator::new(None, *shots, seed))
            }
            EstimatorKind::Noisy { noise, shots } => {
                Box::new(SampledEstimator::new(Some(*noise), *shots, seed))
            }
            EstimatorKind::Mitigated { noise, plan } => Box::new(MitigatedEstimator::new(
                SampledEstimator::new(Some(*noise), plan.shots_per_scale(), seed),
                plan.clone(),
            )),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            EstimatorKind::Exact => "exact",
            EstimatorKind::Sampled { .. } => "sampled",
            EstimatorKind::Noisy { .. } => "noisy",
            EstimatorKind::Mitigated { .. } => "mitigated",
        }
    }
}

/// Both target quantities at one coupling value, with their per-site
/// versions, the response conditioning, and the runtime-check flag for a
/// non-vanishing overlap gradient at the working point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub r: f64,
    pub energy: Estimate,
    pub d2e_dr2: Estimate,
    pub fidelity_susceptibility: Estimate,
    pub energy_per_site: Estimate,
    pub d2e_per_site: Estimate,
    pub fs_per_site: Estimate,
    pub condition_number: f64,
    pub truncated: bool,
    pub flagged: bool,
}

fn per_site(estimate: Estimate, sites: f64) -> Estimate {
    Estimate {
        value: estimate.value / sites,
        variance: estimate.variance / (sites * sites),
        shots: estimate.shots,
    }
}

/// Everything a cell evaluation needs at a fixed coupling: the optimal
/// angles, the observable and its driving part, and the prepared
/// compute-uncompute overlap job at those angles.
#[derive(Debug, Clone)]
pub struct PointTask {
    sites: usize,
    r: f64,
    ansatz: Circuit,
    theta: Vec<f64>,
    observable: WeightedPaulis,
    drive: WeightedPaulis,
    job: OverlapJob,
}

impl PointTask {
    pub fn new(
        sites: usize,
        r: f64,
        ansatz: Circuit,
        theta: Vec<f64>,
        observable: WeightedPaulis,
        drive: WeightedPaulis,
    ) -> Result<Self> {
        let job = OverlapJob::new(
            ansatz.bind(&theta)?,
            ansatz.clone(),
            OverlapMethod::ComputeUncompute,
        )?;
        Ok(PointTask {
            sites,
            r,
            ansatz,
            theta,
            observable,
            drive,
            job,
        })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// One full cell: energy, the three derivative objects, the response
    /// solve, and both contracted quantities. The overlap gradient at the
    /// working point is checked against zero; components that are both above
    /// 1e-3 and five standard deviations from zero flag the result.
    pub fn evaluate<E: Estimator + ?Sized>(&self, estimator: &E) -> Result<PointResult> {
        let energy = estimator.pauli_expectation(&self.ansatz, &self.theta, &self.observable)?;
        let hessian = hessian_expectation(&self.ansatz, &self.theta, &self.observable, estimator)?;
        let drive_grad = grad_expectation(&self.ansatz, &self.theta, &self.drive, estimator)?;
        let response = solve_response(&hessian, &drive_grad)?;
        let d2e = second_energy_derivative(&drive_grad, &response.dtheta_dr)?;
        let overlap_grad = squared_overlap_gradient(&self.job, &self.theta, estimator)?;
        let flagged = overlap_grad
            .values
            .iter()
            .zip(&overlap_grad.variances)
            .any(|(g, v)| {
                g.abs() > OVERLAP_GRADIENT_TOLERANCE && g.abs() > 5.0 * v.sqrt()
            });
        let overlap_hessian = squared_overlap_hessian(&self.job, &self.theta, estimator)?;
        let fs = fidelity_susceptibility(&overlap_hessian, &response.dtheta_dr)?;
        let sites = self.sites as f64;
        Ok(PointResult {
            r: self.r,
            energy,
            d2e_dr2: d2e,
            fidelity_susceptibility: fs,
            energy_per_site: per_site(energy, sites),
            d2e_per_site: per_site(d2e, sites),
            fs_per_site: per_site(fs, sites),
            condition_number: response.condition_number,
            truncated: response.truncated,
            flagged,
        })
    }
}

#[derive(Debug, Clone)]
pub struct SweepRequest {
    pub sites: usize,
    pub r_values: Vec<f64>,
    pub estimator: EstimatorKind,
    pub trials: usize,
    pub seed: u64,
}

/// One coupling value of a sweep: the shared ground-state search and every
/// trial cell, failures kept as messages so one bad cell cannot sink the
/// sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub r: f64,
    pub vqe: VqeResult,
    pub cells: Vec<std::result::Result<PointResult, String>>,
}

/// Runs the pipeline over a coupling grid. The ground state is searched once
/// per coupling with analytic estimates and reused by every trial; the
/// (coupling, trial) cells then run in parallel, each building its estimator
/// from a seed mixed from the master seed and the cell indices.
pub fn sweep(request: &SweepRequest) -> Result<Vec<SweepPoint>> {
    if request.trials == 0 {
        return Err(Error::EmptyTrials);
    }
    let reduced = reduce(request.sites)?;
    let ansatz = build_ansatz(reduced.n_qubits())?;
    let mut tasks = Vec::with_capacity(request.r_values.len());
    let mut searches = Vec::with_capacity(request.r_values.len());
    for &r in &request.r_values {
        let reference = ground_energy(request.sites, r)?;
        let observable = reduced.observable().at(r);
        let search = vqe(&observable, &ansatz, Some(reference))?;
        tasks.push(PointTask::new(
            request.sites,
            r,
            ansatz.clone(),
            search.theta_opt.clone(),
            observable,
            reduced.observable().h1(),
        )?);
        searches.push(search);
    }
    let cells: Vec<(usize, usize)> = (0..tasks.len())
        .flat_map(|point| (0..request.trials).map(move |trial| (point, trial)))
        .collect();
    let outcomes: Vec<std::result::Result<PointResult, String>> = cells
        .par_iter()
        .map(|&(point, trial)| {
            let cell_seed = mix_seed(mix_seed(request.seed, point as u64), trial as u64);
            let estimator = request.estimator.build(cell_seed);
            tasks[point].evaluate(&*estimator).map_err(|e| e.to_string())
        })
        .collect();
    let mut outcomes = outcomes.into_iter();
    let mut points = Vec::with_capacity(tasks.len());
    for (task, search) in tasks.into_iter().zip(searches) {
        points.push(SweepPoint {
            r: task.r,
            vqe: search,
            cells: (&mut outcomes).take(request.trials).collect(),
        });
    }
    Ok(points)
}

/// Mean and sample standard deviation (n − 1 weighting; zero for a single
/// value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
    (mean, (ss / (n - 1.0)).sqrt())
}
