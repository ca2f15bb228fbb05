//! Zero-noise extrapolation over digital circuit folding.
//!
//! A mitigation plan fixes a ladder of odd noise-scale factors, a folding
//! method that stretches circuits to each scale, and per-scale shot counts.
//! Richardson coefficients extrapolate the per-scale estimates to zero noise;
//! the variance of the extrapolated value, its shot budget, and the error
//! metrics used to compare plans are all computed here. Differentiation and
//! mitigation compose in either order through the shared shift-rule cores.

use crate::autodiff::{grad_core, hessian_core, split_terms, GradientResult, HessianResult};
use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::estimator::Estimator;
use crate::pauli::WeightedPaulis;
use crate::simulator::Estimate;

/// How a circuit is stretched to a noise-scale factor λ.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Folding {
    /// Append (U† U) repeatedly to the whole circuit.
    Unitary,
    /// Insert cancelling CNOT pairs after every CNOT.
    Cnot,
}

/// Richardson extrapolation weights for the given scale factors:
/// γⱼ = Πₘ≠ⱼ (−xₘ)/(xⱼ − xₘ), the Lagrange basis evaluated at zero.
pub fn richardson_coefficients(scale_factors: &[u64]) -> Result<Vec<f64>> {
    for (idx, &x) in scale_factors.iter().enumerate() {
        if scale_factors[..idx].contains(&x) {
            return Err(Error::DuplicateScaleFactor { lambda: x as u32 });
        }
    }
    let xs: Vec<f64> = scale_factors.iter().map(|&x| x as f64).collect();
    Ok(xs
        .iter()
        .enumerate()
        .map(|(j, &xj)| {
            let mut gamma = 1.0;
            for (m, &xm) in xs.iter().enumerate() {
                if m != j {
                    gamma *= -xm / (xj - xm);
                }
            }
            gamma
        })
        .collect())
}

/// Scale ladder, folding method, per-scale shot count and the extrapolation
/// weights they imply. Scale factors must be the consecutive odd integers
/// starting at 1.
#[derive(Debug, Clone)]
pub struct MitigationPlan {
    scale_factors: Vec<u64>,
    folding: Folding,
    shots_per_scale: u64,
    gammas: Vec<f64>,
}

impl MitigationPlan {
    pub fn new(scale_factors: Vec<u64>, folding: Folding, shots_per_scale: u64) -> Result<Self> {
        if scale_factors.is_empty() {
            return Err(Error::BadScaleSequence);
        }
        for &lambda in &scale_factors {
            if lambda % 2 == 0 {
                return Err(Error::EvenScaleFactor {
                    lambda: lambda as u32,
                });
            }
        }
        for (idx, &lambda) in scale_factors.iter().enumerate() {
            if scale_factors[..idx].contains(&lambda) {
                return Err(Error::DuplicateScaleFactor {
                    lambda: lambda as u32,
                });
            }
        }
        for (j, &lambda) in scale_factors.iter().enumerate() {
            if lambda != 2 * j as u64 + 1 {
                return Err(Error::BadScaleSequence);
            }
        }
        if shots_per_scale == 0 {
            return Err(Error::ZeroShots);
        }
        let gammas = richardson_coefficients(&scale_factors)?;
        Ok(MitigationPlan {
            scale_factors,
            folding,
            shots_per_scale,
            gammas,
        })
    }

    pub fn scale_factors(&self) -> &[u64] {
        &self.scale_factors
    }

    pub fn folding(&self) -> Folding {
        self.folding
    }

    pub fn shots_per_scale(&self) -> u64 {
        self.shots_per_scale
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn len(&self) -> usize {
        self.scale_factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scale_factors.is_empty()
    }

    /// Stretches a circuit to one of this plan's scale factors.
    pub fn fold(&self, circuit: &Circuit, lambda: u64) -> Circuit {
        debug_assert!(lambda % 2 == 1);
        match self.folding {
            Folding::Unitary => fold_unitary(circuit, lambda),
            Folding::Cnot => fold_cnot(circuit, lambda),
        }
        .expect("plan scale factors are validated odd")
    }
}

/// Replaces U by U (U† U)^((λ−1)/2). Gate count grows by the factor λ and the
/// implemented unitary is unchanged.
pub fn fold_unitary(circuit: &Circuit, lambda: u64) -> Result<Circuit> {
    if lambda % 2 == 0 {
        return Err(Error::EvenScaleFactor {
            lambda: lambda as u32,
        });
    }
    let mut out = circuit.clone();
    let dagger = circuit.dagger();
    for _ in 0..(lambda - 1) / 2 {
        out.append(&dagger)?;
        out.append(circuit)?;
    }
    Ok(out)
}

/// Appends (λ−1)/2 cancelling CNOT pairs after every CNOT; all other gates
/// are left alone.
pub fn fold_cnot(circuit: &Circuit, lambda: u64) -> Result<Circuit> {
    if lambda % 2 == 0 {
        return Err(Error::EvenScaleFactor {
            lambda: lambda as u32,
        });
    }
    let pairs = (lambda - 1) / 2;
    let mut out = Circuit::new(circuit.width());
    for gate in circuit.gates() {
        out.push(gate.clone())?;
        if matches!(gate, Gate::Cnot { .. }) {
            for _ in 0..pairs {
                out.push(gate.clone())?;
                out.push(gate.clone())?;
            }
        }
    }
    Ok(out)
}

/// A zero-noise extrapolated estimate together with the per-scale estimates
/// it was built from.
#[derive(Debug, Clone)]
pub struct MitigatedEstimate {
    pub value: f64,
    pub variance: f64,
    pub components: Vec<Estimate>,
}

impl MitigatedEstimate {
    pub fn estimate(&self) -> Estimate {
        Estimate {
            value: self.value,
            variance: self.variance,
            shots: self.components.iter().map(|e| e.shots).sum(),
        }
    }
}

/// Extrapolates one estimate per scale factor to zero noise. Value and
/// variance accumulate in ascending scale order: Σγⱼ·Êⱼ and Σγⱼ²·σⱼ².
pub fn mitigate(plan: &MitigationPlan, estimates: &[Estimate]) -> Result<MitigatedEstimate> {
    if estimates.len() != plan.len() {
        return Err(Error::ScaleCountMismatch {
            expected: plan.len(),
            got: estimates.len(),
        });
    }
    let mut value = 0.0;
    let mut variance = 0.0;
    for (j, e) in estimates.iter().enumerate() {
        value += plan.gammas[j] * e.value;
        variance += plan.gammas[j] * plan.gammas[j] * e.variance;
    }
    Ok(MitigatedEstimate {
        value,
        variance,
        components: estimates.to_vec(),
    })
}

/// Wraps any estimator so every expectation and readout probability is
/// evaluated at each scale factor and extrapolated. Weighted sums are
/// mitigated term by term.
#[derive(Debug, Clone)]
pub struct MitigatedEstimator<E> {
    inner: E,
    plan: MitigationPlan,
}

impl<E: Estimator> MitigatedEstimator<E> {
    pub fn new(inner: E, plan: MitigationPlan) -> Self {
        MitigatedEstimator { inner, plan }
    }

    pub fn plan(&self) -> &MitigationPlan {
        &self.plan
    }

    pub fn inner(&self) -> &E {
        &self.inner
    }

    fn mitigated_term(
        &self,
        circuit: &Circuit,
        params: &[f64],
        term: &WeightedPaulis,
    ) -> Result<MitigatedEstimate> {
        let mut per_scale = Vec::with_capacity(self.plan.len());
        for &lambda in self.plan.scale_factors() {
            let folded = self.plan.fold(circuit, lambda);
            per_scale.push(self.inner.pauli_expectation(&folded, params, term)?);
        }
        mitigate(&self.plan, &per_scale)
    }
}

impl<E: Estimator> Estimator for MitigatedEstimator<E> {
    fn pauli_expectation(
        &self,
        circuit: &Circuit,
        params: &[f64],
        observable: &WeightedPaulis,
    ) -> Result<Estimate> {
        let mut value = 0.0;
        let mut variance = 0.0;
        let mut shots = 0u64;
        for (c, string) in &observable.terms {
            let term = WeightedPaulis::new(observable.width(), vec![(1.0, string.clone())]);
            let mitigated = self.mitigated_term(circuit, params, &term)?;
            value += c * mitigated.value;
            variance += c * c * mitigated.variance;
            shots += mitigated.components.iter().map(|e| e.shots).sum::<u64>();
        }
        Ok(Estimate {
            value,
            variance,
            shots,
        })
    }

    fn zeros_probability(&self, circuit: &Circuit, params: &[f64]) -> Result<Estimate> {
        let mut per_scale = Vec::with_capacity(self.plan.len());
        for &lambda in self.plan.scale_factors() {
            let folded = self.plan.fold(circuit, lambda);
            per_scale.push(self.inner.zeros_probability(&folded, params)?);
        }
        Ok(mitigate(&self.plan, &per_scale)?.estimate())
    }
}

/// Shift-rule gradient where every shifted expectation is mitigated
/// independently, term by term.
pub fn mitigated_gradient<E: Estimator + ?Sized>(
    circuit: &Circuit,
    params: &[f64],
    observable: &WeightedPaulis,
    plan: &MitigationPlan,
    estimator: &E,
) -> Result<GradientResult> {
    observable.check_width(circuit.width())?;
    circuit.check_shift_rules()?;
    let (coeffs, bare) = split_terms(observable, true);
    let folded: Vec<Circuit> = plan
        .scale_factors()
        .iter()
        .map(|&lambda| plan.fold(circuit, lambda))
        .collect();
    grad_core(circuit.n_params(), params, &coeffs, |p| {
        bare.iter()
            .map(|term| {
                let mut per_scale = Vec::with_capacity(folded.len());
                for variant in &folded {
                    per_scale.push(estimator.pauli_expectation(variant, p, term)?);
                }
                Ok(mitigate(plan, &per_scale)?.estimate())
            })
            .collect()
    })
}

/// Shift-rule Hessian with per-term mitigation of every evaluation.
pub fn mitigated_hessian<E: Estimator + ?Sized>(
    circuit: &Circuit,
    params: &[f64],
    observable: &WeightedPaulis,
    plan: &MitigationPlan,
    estimator: &E,
) -> Result<HessianResult> {
    observable.check_width(circuit.width())?;
    circuit.check_shift_rules()?;
    let (coeffs, bare) = split_terms(observable, true);
    let folded: Vec<Circuit> = plan
        .scale_factors()
        .iter()
        .map(|&lambda| plan.fold(circuit, lambda))
        .collect();
    hessian_core(circuit.n_params(), params, &coeffs, |p| {
        bare.iter()
            .map(|term| {
                let mut per_scale = Vec::with_capacity(folded.len());
                for variant in &folded {
                    per_scale.push(estimator.pauli_expectation(variant, p, term)?);
                }
                Ok(mitigate(plan, &per_scale)?.estimate())
            })
            .collect()
    })
}

/// Shots per mitigated circuit needed to keep the extrapolated standard
/// error at or below that of an unmitigated baseline with `n_baseline` shots:
/// M = ⌈(N/σ²)·Σγⱼ²σⱼ²⌉.
pub fn required_shots(
    n_baseline: u64,
    baseline_var: f64,
    per_scale_vars: &[f64],
    gammas: &[f64],
) -> Result<u64> {
    if !(baseline_var > 0.0) {
        return Err(Error::ZeroBaselineVariance);
    }
    if per_scale_vars.len() != gammas.len() {
        return Err(Error::ScaleCountMismatch {
            expected: gammas.len(),
            got: per_scale_vars.len(),
        });
    }
    let weighted: f64 = gammas
        .iter()
        .zip(per_scale_vars)
        .map(|(g, v)| g * g * v)
        .sum();
    Ok((n_baseline as f64 / baseline_var * weighted).ceil() as u64)
}

/// The two headline error metrics for a set of repeated estimates against a
/// reference: the mean per-trial absolute error and the absolute error of the
/// trial mean.
#[derive(Debug, Clone, Copy)]
pub struct MitigationError {
    pub per_trial_mean: f64,
    pub of_mean: f64,
}

pub fn absolute_mitigation_error(values: &[f64], exact: f64) -> Result<MitigationError> {
    if values.is_empty() {
        return Err(Error::EmptyTrials);
    }
    let n = values.len() as f64;
    let per_trial_mean = values.iter().map(|v| (v - exact).abs()).sum::<f64>() / n;
    let mean = values.iter().sum::<f64>() / n;
    Ok(MitigationError {
        per_trial_mean,
        of_mean: (mean - exact).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::build_ansatz;
    use crate::autodiff::grad_expectation;
    use crate::estimator::ExactEstimator;
    use crate::pauli::{PauliOp, PauliString};
    use crate::simulator::NoiseModel;
    use crate::tfim::reduce;

    fn two_qubit_obs() -> WeightedPaulis {
        WeightedPaulis::new(
            2,
            vec![
                (1.0, PauliString::two(2, 0, PauliOp::X, 1, PauliOp::X)),
                (-0.8, PauliString::single(2, 0, PauliOp::Z)),
            ],
        )
    }

    #[test]
    fn richardson_matches_closed_forms() {
        assert_eq!(richardson_coefficients(&[1]).unwrap(), vec![1.0]);
        let two = richardson_coefficients(&[1, 3]).unwrap();
        assert!((two[0] - 1.5).abs() < 1e-15);
        assert!((two[1] + 0.5).abs() < 1e-15);

        let four = richardson_coefficients(&[1, 3, 5, 7]).unwrap();
        let squares: Vec<f64> = four.iter().map(|g| g * g).collect();
        let expected = [4.78515625, 4.78515625, 1.72265625, 0.09765625];
        for (got, want) in squares.iter().zip(expected) {
            assert!((got - want).abs() < 5e-3);
            assert!((got - want).abs() < 1e-12);
        }

        assert!(matches!(
            richardson_coefficients(&[1, 3, 1]),
            Err(Error::DuplicateScaleFactor { lambda: 1 })
        ));
    }

    #[test]
    fn gamma_identities_hold_for_all_plan_sizes() {
        for points in 1..=5usize {
            let scales: Vec<u64> = (0..points).map(|j| 2 * j as u64 + 1).collect();
            let gammas = richardson_coefficients(&scales).unwrap();
            let total: f64 = gammas.iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
            for k in 1..points {
                let moment: f64 = gammas
                    .iter()
                    .zip(&scales)
                    .map(|(g, &x)| g * (x as f64).powi(k as i32))
                    .sum();
                assert!(moment.abs() < 1e-9, "k={k} moment {moment}");
            }
            let sum_sq: f64 = gammas.iter().map(|g| g * g).sum();
            if points == 1 {
                assert_eq!(sum_sq, 1.0);
            } else {
                assert!(sum_sq > 1.0);
            }
        }
    }

    #[test]
    fn plan_validation() {
        assert!(MitigationPlan::new(vec![1, 3, 5], Folding::Unitary, 8192).is_ok());
        assert!(matches!(
            MitigationPlan::new(vec![], Folding::Unitary, 8192),
            Err(Error::BadScaleSequence)
        ));
        assert!(matches!(
            MitigationPlan::new(vec![1, 2], Folding::Unitary, 8192),
            Err(Error::EvenScaleFactor { lambda: 2 })
        ));
        assert!(matches!(
            MitigationPlan::new(vec![1, 1], Folding::Unitary, 8192),
            Err(Error::DuplicateScaleFactor { lambda: 1 })
        ));
        assert!(matches!(
            MitigationPlan::new(vec![1, 5], Folding::Unitary, 8192),
            Err(Error::BadScaleSequence)
        ));
        assert!(matches!(
            MitigationPlan::new(vec![3, 5], Folding::Unitary, 8192),
            Err(Error::BadScaleSequence)
        ));
        assert!(matches!(
            MitigationPlan::new(vec![1, 3], Folding::Unitary, 0),
            Err(Error::ZeroShots)
        ));
    }

    #[test]
    fn folding_preserves_the_noiseless_expectation() {
        let circuit = build_ansatz(2).unwrap();
        let params = [0.7, -0.4, 1.2];
        let obs = two_qubit_obs();
        let est = ExactEstimator::noiseless();
        let reference = est.pauli_expectation(&circuit, &params, &obs).unwrap().value;

        for lambda in [1u64, 3, 5, 7, 9] {
            let unitary = fold_unitary(&circuit, lambda).unwrap();
            assert_eq!(unitary.gate_count(), circuit.gate_count() * lambda as usize);
            let value = est.pauli_expectation(&unitary, &params, &obs).unwrap().value;
            assert!((value - reference).abs() < 1e-12);

            let cnot = fold_cnot(&circuit, lambda).unwrap();
            assert_eq!(
                cnot.cnot_count(),
                circuit.cnot_count() * lambda as usize
            );
            assert_eq!(
                cnot.gate_count() - cnot.cnot_count(),
                circuit.gate_count() - circuit.cnot_count()
            );
            let value = est.pauli_expectation(&cnot, &params, &obs).unwrap().value;
            assert!((value - reference).abs() < 1e-12);
        }

        assert!(matches!(
            fold_unitary(&circuit, 2),
            Err(Error::EvenScaleFactor { lambda: 2 })
        ));
        assert!(matches!(
            fold_cnot(&circuit, 4),
            Err(Error::EvenScaleFactor { lambda: 4 })
        ));
    }

    #[test]
    fn folding_amplifies_depolarizing_noise() {
        let circuit = build_ansatz(2).unwrap();
        let params = [0.7, -0.4, 1.2];
        let obs = WeightedPaulis::new(
            2,
            vec![(1.0, PauliString::two(2, 0, PauliOp::Z, 1, PauliOp::Z))],
        );
        let noisy = ExactEstimator::with_noise(NoiseModel::default_depolarizing());
        let base = noisy
            .pauli_expectation(&circuit, &params, &obs)
            .unwrap()
            .value;
        let folded = fold_unitary(&circuit, 3).unwrap();
        let stretched = noisy
            .pauli_expectation(&folded, &params, &obs)
            .unwrap()
            .value;
        assert!(stretched.abs() < base.abs());
    }

    #[test]
    fn mitigate_extrapolates_and_propagates_variance() {
        let single = MitigationPlan::new(vec![1], Folding::Unitary, 8192).unwrap();
        let input = Estimate {
            value: 0.42,
            variance: 0.003,
            shots: 8192,
        };
        let out = mitigate(&single, &[input]).unwrap();
        assert_eq!(out.value, 0.42);
        assert_eq!(out.variance, 0.003);

        let pair = MitigationPlan::new(vec![1, 3], Folding::Unitary, 8192).unwrap();
        let s2 = 0.01;
        let estimates = [
            Estimate {
                value: 1.0,
                variance: s2,
                shots: 8192,
            },
            Estimate {
                value: 0.8,
                variance: s2,
                shots: 8192,
            },
        ];
        let out = mitigate(&pair, &estimates).unwrap();
        assert!((out.variance - 2.5 * s2).abs() < 1e-15);

        let quad = MitigationPlan::new(vec![1, 3, 5], Folding::Unitary, 8192).unwrap();
        let a = 0.9;
        let b = 0.07;
        let samples: Vec<Estimate> = [1.0, 3.0, 5.0]
            .iter()
            .map(|l| Estimate::exact(a - b * l))
            .collect();
        let out = mitigate(&quad, &samples).unwrap();
        assert!((out.value - a).abs() < 1e-10);

        assert!(matches!(
            mitigate(&pair, &samples),
            Err(Error::ScaleCountMismatch {
                expected: 2,
                got: 3
            })
        ));
    }

    #[test]
    fn shot_budget_matches_the_displayed_inequality() {
        let gammas = richardson_coefficients(&[1]).unwrap();
        assert_eq!(required_shots(8192, 0.5, &[0.5], &gammas).unwrap(), 8192);

        let gammas = richardson_coefficients(&[1, 3]).unwrap();
        let s2 = 0.5;
        assert_eq!(
            required_shots(1000, s2, &[s2, s2], &gammas).unwrap(),
            2500
        );

        let gammas = richardson_coefficients(&[1, 3, 5, 7]).unwrap();
        let ramp: Vec<f64> = [1.0f64, 3.0, 5.0, 7.0]
            .iter()
            .map(|l| (1.0 + l) / 2.0)
            .collect();
        let m = required_shots(8192, 1.0, &ramp, &gammas).unwrap();
        assert_eq!(m, 163_136);
        assert!(m >= 50_000 && m <= 200_000);

        assert!(matches!(
            required_shots(8192, 0.0, &[1.0], &[1.0]),
            Err(Error::ZeroBaselineVariance)
        ));
    }

    #[test]
    fn error_metrics_distinguish_spread_from_bias() {
        let exact = 1.25;
        let even = absolute_mitigation_error(&[1.25, 1.25], exact).unwrap();
        assert_eq!(even.per_trial_mean, 0.0);
        assert_eq!(even.of_mean, 0.0);

        let split = absolute_mitigation_error(&[1.25 + 0.2, 1.25 - 0.2], exact).unwrap();
        assert!((split.per_trial_mean - 0.2).abs() < 1e-15);
        assert!(split.of_mean < 1e-15);

        assert!(matches!(
            absolute_mitigation_error(&[], exact),
            Err(Error::EmptyTrials)
        ));
    }

    #[test]
    fn exact_mitigation_removes_most_of_the_noise_bias() {
        let reduced = reduce(4).unwrap();
        let obs = reduced.observable().at(1.0);
        let circuit = build_ansatz(2).unwrap();
        let params = [0.7, -0.4, 1.2];

        let clean = ExactEstimator::noiseless()
            .pauli_expectation(&circuit, &params, &obs)
            .unwrap()
            .value;
        let noisy = ExactEstimator::with_noise(NoiseModel::default_depolarizing());
        let raw = noisy
            .pauli_expectation(&circuit, &params, &obs)
            .unwrap()
            .value;

        let plan = MitigationPlan::new(vec![1, 3], Folding::Unitary, 8192).unwrap();
        let wrapped = MitigatedEstimator::new(noisy, plan);
        let mitigated = wrapped
            .pauli_expectation(&circuit, &params, &obs)
            .unwrap()
            .value;

        let raw_error = absolute_mitigation_error(&[raw], clean).unwrap().of_mean;
        let mitigated_error = absolute_mitigation_error(&[mitigated], clean)
            .unwrap()
            .of_mean;
        assert!(mitigated_error < raw_error);
        assert!(mitigated_error < 0.25 * raw_error);
    }

    #[test]
    fn mitigated_gradient_reduces_to_plain_gradient_without_noise() {
        let circuit = build_ansatz(2).unwrap();
        let params = [0.7, -0.4, 1.2];
        let obs = two_qubit_obs();
        let est = ExactEstimator::noiseless();
        let plan = MitigationPlan::new(vec![1, 3, 5], Folding::Cnot, 8192).unwrap();

        let plain = grad_expectation(&circuit, &params, &obs, &est).unwrap();
        let mitigated = mitigated_gradient(&circuit, &params, &obs, &plan, &est).unwrap();
        for i in 0..3 {
            assert!((plain.values[i] - mitigated.values[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn mitigation_and_differentiation_commute_bit_for_bit() {
        let circuit = build_ansatz(2).unwrap();
        let params = [0.7, -0.4, 1.2];
        let reduced = reduce(4).unwrap();
        let obs = reduced.observable().at(0.9);
        let noisy = ExactEstimator::with_noise(NoiseModel::default_depolarizing());
        let plan = MitigationPlan::new(vec![1, 3], Folding::Unitary, 8192).unwrap();

        let direct = mitigated_gradient(&circuit, &params, &obs, &plan, &noisy).unwrap();
        let wrapped = MitigatedEstimator::new(noisy, plan.clone());
        let via_estimator = grad_expectation(&circuit, &params, &obs, &wrapped).unwrap();
        for i in 0..3 {
            assert_eq!(
                direct.values[i].to_bits(),
                via_estimator.values[i].to_bits()
            );
            assert_eq!(
                direct.variances[i].to_bits(),
                via_estimator.variances[i].to_bits()
            );
        }

        let direct = mitigated_hessian(&circuit, &params, &obs, &plan, &noisy).unwrap();
        let via_estimator =
            crate::autodiff::hessian_expectation(&circuit, &params, &obs, &wrapped).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(
                    direct.values[(i, j)].to_bits(),
                    via_estimator.values[(i, j)].to_bits()
                );
            }
        }
    }

    #[test]
    fn gradient_variance_is_recomputable_from_the_plan() {
        struct FixedVariance;
        impl Estimator for FixedVariance {
            fn pauli_expectation(
                &self,
                circuit: &Circuit,
                params: &[f64],
                observable: &WeightedPaulis,
            ) -> Result<Estimate> {
                let exact = ExactEstimator::noiseless()
                    .pauli_expectation(circuit, params, observable)?;
                Ok(Estimate {
                    value: exact.value,
                    variance: 0.0123,
                    shots: 8192,
                })
            }

            fn zeros_probability(&self, circuit: &Circuit, params: &[f64]) -> Result<Estimate> {
                let exact = ExactEstimator::noiseless().zeros_probability(circuit, params)?;
                Ok(Estimate {
                    value: exact.value,
                    variance: 0.0123,
                    shots: 8192,
                })
            }
        }

        let circuit = build_ansatz(2).unwrap();
        let params = [0.7, -0.4, 1.2];
        let obs = two_qubit_obs();
        let plan = MitigationPlan::new(vec![1, 3], Folding::Unitary, 8192).unwrap();
        let grad = mitigated_gradient(&circuit, &params, &obs, &plan, &FixedVariance).unwrap();

        let gamma_sq: f64 = plan.gammas().iter().map(|g| g * g).sum();
        let per_shift = gamma_sq * 0.0123;
        let coeff_sq: f64 = obs.terms.iter().map(|(c, _)| c * c).sum();
        let expected = coeff_sq * 0.25 * (per_shift + per_shift);
        for i in 0..3 {
            assert!((grad.variances[i] - expected).abs() < 1e-15);
        }
        let calls_per_entry = obs.terms.len() as u64 * 2 * plan.len() as u64;
        assert_eq!(grad.shots, 3 * calls_per_entry * 8192);
    }
}
