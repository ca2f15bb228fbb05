//! Quantum-circuit estimation of fidelity susceptibility and ground-state
//! energy curvature for the transverse-field Ising chain.
//!
//! The crate builds symmetry-reduced Hamiltonians for periodic chains,
//! prepares their ground states with small hardware-style ansatz circuits,
//! differentiates expectation values and state overlaps with parameter-shift
//! rules, and runs the resulting response pipeline exactly, with shot noise,
//! with depolarizing gate noise, or with Richardson zero-noise extrapolation
//! on top. Exact diagonalization utilities provide reference values for all
//! of it.

pub mod ansatz;
pub mod autodiff;
pub mod circuit;
pub mod error;
pub mod estimator;
pub mod oracle;
pub mod overlap;
pub mod pauli;
pub mod pipeline;
pub mod simulator;
pub mod tfim;
pub mod zne;

pub use ansatz::{amplitudes_real_check, build_ansatz, fit_two_qubit_state, AnsatzSpec, StateFit};
pub use autodiff::{
    compose, grad_expectation, grad_probability, hessian_expectation, hessian_probability,
    BatchEntry, CircuitBatch, GradientResult, HessianResult, Recombine, Transform,
};
pub use circuit::{Angle, Circuit, Gate};
pub use error::{Error, Result};
pub use estimator::{mix_seed, CountingEstimator, Estimator, ExactEstimator, SampledEstimator};
pub use oracle::{
    d2e_finite_difference, diagonalize, fs_finite_difference, fs_spectral, fs_spectral_full,
    full_ground_energy, ground_energy,
};
pub use overlap::{
    build_overlap_circuit, estimate_overlap, noise_sensitivity_report, squared_overlap_gradient,
    squared_overlap_hessian, NoiseReportRow, OverlapEstimate, OverlapJob, OverlapMethod,
};
pub use pauli::{Part, PauliObservable, PauliOp, PauliString, PauliTerm, WeightedPaulis};
pub use pipeline::{
    fidelity_susceptibility, mean_std, second_energy_derivative, solve_response, sweep, vqe,
    EstimatorKind, PointResult, PointTask, ResponseSolution, SweepPoint, SweepRequest, VqeResult,
};
pub use tfim::{
    composite_basis, full_tfim, pauli_decompose, reduce, CompositeBasis, ReducedHamiltonian,
    TranslationOrbit,
};
pub use simulator::{
    expectation_exact, expectation_sampled, probability_all_zeros, run, run_mixed, Estimate,
    NoiseModel, QuantumState, MAX_QUBITS,
};
pub use zne::{
    absolute_mitigation_error, fold_cnot, fold_unitary, mitigate, mitigated_gradient,
    mitigated_hessian, required_shots, richardson_coefficients, Folding, MitigatedEstimate,
    MitigatedEstimator, MitigationError, MitigationPlan,
};
