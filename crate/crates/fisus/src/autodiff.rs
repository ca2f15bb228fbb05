//! Parameter-shift differentiation of circuit outputs.
//!
//! Gradients use the two-point rule ∂f/∂θ = [f(θ+π/2) − f(θ−π/2)]/2. Hessian
//! diagonals use the two-term rule [f(θ+π) − f(θ)]/2 with one shared
//! unshifted evaluation; off-diagonals use the four-point ±π/2 rule. Weighted
//! sums of Pauli strings are differentiated term by term, so the injected
//! estimator only ever sees bare strings and mitigating estimators wrap each
//! term separately. The batch types flatten the same computation into an
//! explicit circuit list plus a recombination tree.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DMatrix;

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::estimator::Estimator;
use crate::pauli::{PauliString, WeightedPaulis};
use crate::simulator::Estimate;
use crate::zne::MitigationPlan;

/// First derivatives of a scalar circuit output with respect to every
/// parameter, with per-entry variances and the total shot count consumed.
#[derive(Debug, Clone)]
pub struct GradientResult {
    pub values: Vec<f64>,
    pub variances: Vec<f64>,
    pub shots: u64,
}

/// Symmetric matrix of second derivatives with matching variance matrix.
/// Off-diagonal entries are computed once and mirrored.
#[derive(Debug, Clone)]
pub struct HessianResult {
    pub values: DMatrix<f64>,
    pub variances: DMatrix<f64>,
    pub shots: u64,
}

pub(crate) fn split_terms(
    observable: &WeightedPaulis,
    drop_identity: bool,
) -> (Vec<f64>, Vec<WeightedPaulis>) {
    let mut coeffs = Vec::new();
    let mut bare = Vec::new();
    for (c, string) in &observable.terms {
        if drop_identity && string.is_identity() {
            continue;
        }
        coeffs.push(*c);
        bare.push(WeightedPaulis::new(
            observable.width(),
            vec![(1.0, string.clone())],
        ));
    }
    (coeffs, bare)
}

pub(crate) fn grad_core<F>(
    n_params: usize,
    params: &[f64],
    coeffs: &[f64],
    mut eval: F,
) -> Result<GradientResult>
where
    F: FnMut(&[f64]) -> Result<Vec<Estimate>>,
{
    if params.len() != n_params {
        return Err(Error::ParamLen {
            expected: n_params,
            got: params.len(),
        });
    }
    let mut values = vec![0.0; n_params];
    let mut variances = vec![0.0; n_params];
    let mut shots = 0u64;
    for i in 0..n_params {
        let mut plus = params.to_vec();
        plus[i] += FRAC_PI_2;
        let mut minus = params.to_vec();
        minus[i] -= FRAC_PI_2;
        let ep = eval(&plus)?;
        let em = eval(&minus)?;
        for (k, c) in coeffs.iter().enumerate() {
            values[i] += c * (0.5 * (ep[k].value - em[k].value));
            variances[i] += c * c * 0.25 * (ep[k].variance + em[k].variance);
            shots += ep[k].shots + em[k].shots;
        }
    }
    Ok(GradientResult {
        values,
        variances,
        shots,
    })
}

pub(crate) fn hessian_core<F>(
    n_params: usize,
    params: &[f64],
    coeffs: &[f64],
    mut eval: F,
) -> Result<HessianResult>
where
    F: FnMut(&[f64]) -> Result<Vec<Estimate>>,
{
    if params.len() != n_params {
        return Err(Error::ParamLen {
            expected: n_params,
            got: params.len(),
        });
    }
    let n = n_params;
    let mut values = DMatrix::zeros(n, n);
    let mut variances = DMatrix::zeros(n, n);
    let mut shots = 0u64;

    let base = eval(params)?;
    for e in &base {
        shots += e.shots;
    }
    for i in 0..n {
        let mut plus = params.to_vec();
        plus[i] += PI;
        let ep = eval(&plus)?;
        for (k, c) in coeffs.iter().enumerate() {
            values[(i, i)] += c * (0.5 * (ep[k].value - base[k].value));
            variances[(i, i)] += c * c * 0.25 * (ep[k].variance + base[k].variance);
            shots += ep[k].shots;
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let mut shifted = |si: f64, sj: f64| -> Result<Vec<Estimate>> {
                let mut p = params.to_vec();
                p[i] += si;
                p[j] += sj;
                eval(&p)
            };
            let pp = shifted(FRAC_PI_2, FRAC_PI_2)?;
            let mp = shifted(-FRAC_PI_2, FRAC_PI_2)?;
            let pm = shifted(FRAC_PI_2, -FRAC_PI_2)?;
            let mm = shifted(-FRAC_PI_2, -FRAC_PI_2)?;
            for (k, c) in coeffs.iter().enumerate() {
                let s = (pp[k].value + mm[k].value) - (mp[k].value + pm[k].value);
                let value = c * (0.25 * s);
                values[(i, j)] += value;
                values[(j, i)] += value;
                let var = c
                    * c
                    * (1.0 / 16.0)
                    * (pp[k].variance + mp[k].variance + pm[k].variance + mm[k].variance);
                variances[(i, j)] += var;
                variances[(j, i)] += var;
                shots += pp[k].shots + mp[k].shots + pm[k].shots + mm[k].shots;
            }
        }
    }
    Ok(HessianResult {
        values,
        variances,
        shots,
    })
}

/// Gradient of ⟨observable⟩ with respect to all circuit parameters. Identity
/// terms are constant and skipped. Uses 2·n_params evaluations per remaining
/// Pauli term.
pub fn grad_expectation<E: Estimator + ?Sized>(
    circuit: &Circuit,
    params: &[f64],
    observable: &WeightedPaulis,
    estimator: &E,
) -> Result<GradientResult> {
    observable.check_width(circuit.width())?;
    circuit.check_shift_rules()?;
    let (coeffs, bare) = split_terms(observable, true);
    grad_core(circuit.n_params(), params, &coeffs, |p| {
        bare.iter()
            .map(|term| estimator.pauli_expectation(circuit, p, term))
            .collect()
    })
}

/// Hessian of ⟨observable⟩. Uses 1 + n + 2n(n−1) evaluations per non-identity
/// Pauli term, sharing a single unshifted evaluation across the diagonal.
pub fn hessian_expectation<E: Estimator + ?Sized>(
    circuit: &Circuit,
    params: &[f64],
    observable: &WeightedPaulis,
    estimator: &E,
) -> Result<HessianResult> {
    observable.check_width(circuit.width())?;
    circuit.check_shift_rules()?;
    let (coeffs, bare) = split_terms(observable, true);
    hessian_core(circuit.n_params(), params, &coeffs, |p| {
        bare.iter()
            .map(|term| estimator.pauli_expectation(circuit, p, term))
            .collect()
    })
}

/// Gradient of the all-zeros readout probability.
pub fn grad_probability<E: Estimator + ?Sized>(
    circuit: &Circuit,
    params: &[f64],
    estimator: &E,
) -> Result<GradientResult> {
    circuit.check_shift_rules()?;
    grad_core(circuit.n_params(), params, &[1.0], |p| {
        Ok(vec![estimator.zeros_probability(circuit, p)?])
    })
}

/// Hessian of the all-zeros readout probability.
pub fn hessian_probability<E: Estimator + ?Sized>(
    circuit: &Circuit,
    params: &[f64],
    estimator: &E,
) -> Result<HessianResult> {
    circuit.check_shift_rules()?;
    hessian_core(circuit.n_params(), params, &[1.0], |p| {
        Ok(vec![estimator.zeros_probability(circuit, p)?])
    })
}

/// One concrete execution: a bound-parameter circuit and the single Pauli
/// string to measure after it.
#[derive(Debug, Clone)]
pub struct BatchEntry {
    pub circuit: Circuit,
    pub params: Vec<f64>,
    pub measure: PauliString,
}

/// Affine post-processing over batch results. `Sum` accumulates children in
/// order starting from zero, matching the scalar code paths so recombined
/// results reproduce them exactly.
#[derive(Debug, Clone)]
pub enum Recombine {
    Leaf(usize),
    Scale(f64, Box<Recombine>),
    Sum(Vec<Recombine>),
    Diff(Box<Recombine>, Box<Recombine>),
}

impl Recombine {
    pub fn evaluate(&self, leaves: &[f64]) -> f64 {
        match self {
            Recombine::Leaf(index) => leaves[*index],
            Recombine::Scale(c, inner) => c * inner.evaluate(leaves),
            Recombine::Sum(children) => {
                let mut acc = 0.0;
                for child in children {
                    acc += child.evaluate(leaves);
                }
                acc
            }
            Recombine::Diff(a, b) => a.evaluate(leaves) - b.evaluate(leaves),
        }
    }
}

/// Flat list of circuits to execute plus the recombination tree for each
/// requested output.
#[derive(Debug, Clone)]
pub struct CircuitBatch {
    pub entries: Vec<BatchEntry>,
    pub outputs: Vec<Recombine>,
}

impl CircuitBatch {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Runs every entry through the estimator and folds the recombination
    /// trees over the results.
    pub fn execute<E: Estimator + ?Sized>(&self, estimator: &E) -> Result<Vec<f64>> {
        let mut leaves = Vec::with_capacity(self.entries.len());
        for entry in &self.entries {
            let term = WeightedPaulis::new(
                entry.circuit.width(),
                vec![(1.0, entry.measure.clone())],
            );
            let estimate = estimator.pauli_expectation(&entry.circuit, &entry.params, &term)?;
            leaves.push(estimate.value);
        }
        Ok(self
            .outputs
            .iter()
            .map(|output| output.evaluate(&leaves))
            .collect())
    }
}

/// A batch transform. Expansion splits a weighted Pauli sum into bare terms,
/// Gradient shifts every parameter both ways, Folding replicates each circuit
/// at every noise scale of a mitigation plan.
#[derive(Debug, Clone, Copy)]
pub enum Transform<'a> {
    Expansion(&'a WeightedPaulis),
    Gradient,
    Folding(&'a MitigationPlan),
}

fn scale_node(base: usize, gammas: Option<&[f64]>) -> Recombine {
    match gammas {
        None => Recombine::Leaf(base),
        Some(gammas) => Recombine::Sum(
            gammas
                .iter()
                .enumerate()
                .map(|(j, g)| Recombine::Scale(*g, Box::new(Recombine::Leaf(base + j))))
                .collect(),
        ),
    }
}

/// Builds the flat circuit list for a transform chain. Transforms must appear
/// in the order expansion, gradient, folding, each at most once, and the
/// expansion is mandatory. With a gradient transform the outputs are the
/// n_params gradient entries; otherwise the single recombined expectation.
pub fn compose(
    circuit: &Circuit,
    params: &[f64],
    transforms: &[Transform],
) -> Result<CircuitBatch> {
    let mut expansion = None;
    let mut gradient = false;
    let mut folding = None;
    let mut stage = 0u8;
    for transform in transforms {
        let rank = match transform {
            Transform::Expansion(_) => 1,
            Transform::Gradient => 2,
            Transform::Folding(_) => 3,
        };
        if rank <= stage {
            return Err(Error::TransformOrder);
        }
        stage = rank;
        match transform {
            Transform::Expansion(observable) => expansion = Some(*observable),
            Transform::Gradient => gradient = true,
            Transform::Folding(plan) => folding = Some(*plan),
        }
    }
    let observable = expansion.ok_or(Error::TransformOrder)?;
    observable.check_width(circuit.width())?;
    if params.len() != circuit.n_params() {
        return Err(Error::ParamLen {
            expected: circuit.n_params(),
            got: params.len(),
        });
    }
    if gradient {
        circuit.check_shift_rules()?;
    }

    let mut coeffs = Vec::new();
    let mut strings = Vec::new();
    for (c, string) in &observable.terms {
        if gradient && string.is_identity() {
            continue;
        }
        coeffs.push(*c);
        strings.push(string.clone());
    }

    let folded: Vec<Circuit> = match folding {
        Some(plan) => plan
            .scale_factors()
            .iter()
            .map(|&lambda| plan.fold(circuit, lambda))
            .collect(),
        None => vec![circuit.clone()],
    };
    let gammas = folding.map(|plan| plan.gammas());
    let scales = folded.len();

    let mut entries = Vec::new();
    let mut outputs = Vec::new();
    if gradient {
        let n = circuit.n_params();
        for string in &strings {
            for i in 0..n {
                for sign in [FRAC_PI_2, -FRAC_PI_2] {
                    let mut shifted = params.to_vec();
                    shifted[i] += sign;
                    for variant in &folded {
                        entries.push(BatchEntry {
                            circuit: variant.clone(),
                            params: shifted.clone(),
                            measure: string.clone(),
                        });
                    }
                }
            }
        }
        for i in 0..n {
            let mut children = Vec::with_capacity(coeffs.len());
            for (k, c) in coeffs.iter().enumerate() {
                let plus = scale_node(((k * n + i) * 2) * scales, gammas);
                let minus = scale_node(((k * n + i) * 2 + 1) * scales, gammas);
                children.push(Recombine::Scale(
                    *c,
                    Box::new(Recombine::Scale(
                        0.5,
                        Box::new(Recombine::Diff(Box::new(plus), Box::new(minus))),
                    )),
                ));
            }
            outputs.push(Recombine::Sum(children));
        }
    } else {
        for string in &strings {
            for variant in &folded {
                entries.push(BatchEntry {
                    circuit: variant.clone(),
                    params: params.to_vec(),
                    measure: string.clone(),
                });
            }
        }
        let children = coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| Recombine::Scale(*c, Box::new(scale_node(k * scales, gammas))))
            .collect();
        outputs.push(Recombine::Sum(children));
    }

    Ok(CircuitBatch { entries, outputs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Angle, Gate};
    use crate::estimator::{CountingEstimator, ExactEstimator};
    use crate::pauli::PauliOp;
    use crate::simulator::expectation_exact;
    use crate::zne::{mitigated_gradient, Folding};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ry_z() -> (Circuit, WeightedPaulis) {
        let mut c = Circuit::new(1);
        c.ry(0, Angle::param(0)).unwrap();
        let obs = WeightedPaulis::new(1, vec![(1.0, PauliString::single(1, 0, PauliOp::Z))]);
        (c, obs)
    }

    fn random_circuit(rng: &mut ChaCha8Rng, width: usize, n_params: usize) -> Circuit {
        let mut c = Circuit::new(width);
        for i in 0..n_params {
            c.ry(rng.random_range(0..width), Angle::param(i)).unwrap();
        }
        for _ in 0..rng.random_range(2..6usize) {
            match rng.random_range(0..3u8) {
                0 => {
                    let q = rng.random_range(0..width);
                    c.ry(q, Angle::Bound(rng.random_range(-2.0..2.0))).unwrap();
                }
                1 => {
                    let q = rng.random_range(0..width);
                    c.h(q).unwrap();
                }
                _ => {
                    let a = rng.random_range(0..width);
                    let b = (a + 1) % width;
                    c.cnot(a, b).unwrap();
                }
            }
        }
        c
    }

    fn random_observable(rng: &mut ChaCha8Rng, width: usize) -> WeightedPaulis {
        let ops = [PauliOp::I, PauliOp::X, PauliOp::Y, PauliOp::Z];
        let mut terms = Vec::new();
        for _ in 0..rng.random_range(1..=2usize) {
            let string = PauliString::new(
                (0..width)
                    .map(|_| ops[rng.random_range(1..4usize)])
                    .collect(),
            );
            terms.push((rng.random_range(-1.5..1.5), string));
        }
        WeightedPaulis::new(width, terms)
    }

    #[test]
    fn gradient_and_hessian_match_single_qubit_analytics() {
        let (c, obs) = ry_z();
        let est = ExactEstimator::noiseless();
        let theta = PI / 3.0;

        let grad = grad_expectation(&c, &[theta], &obs, &est).unwrap();
        assert!((grad.values[0] - (-0.8660254037844386)).abs() < 1e-12);
        assert_eq!(grad.variances[0], 0.0);

        let hess = hessian_expectation(&c, &[theta], &obs, &est).unwrap();
        assert!((hess.values[(0, 0)] - (-0.5)).abs() < 1e-12);
    }

    #[test]
    fn probability_derivatives_match_analytics() {
        let mut c = Circuit::new(1);
        c.ry(0, Angle::param(0)).unwrap();
        let est = ExactEstimator::noiseless();
        let theta = 0.8;

        let grad = grad_probability(&c, &[theta], &est).unwrap();
        assert!((grad.values[0] - (-theta.sin() / 2.0)).abs() < 1e-12);

        let hess = hessian_probability(&c, &[theta], &est).unwrap();
        assert!((hess.values[(0, 0)] - (-theta.cos() / 2.0)).abs() < 1e-12);
    }

    #[test]
    fn derivatives_match_finite_differences_on_random_circuits() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let est = ExactEstimator::noiseless();
        for _ in 0..8 {
            let width = rng.random_range(2..=3usize);
            let n_params = rng.random_range(1..=3usize);
            let c = random_circuit(&mut rng, width, n_params);
            let obs = random_observable(&mut rng, width);
            let params: Vec<f64> = (0..n_params)
                .map(|_| rng.random_range(-2.0..2.0))
                .collect();
            let energy = |p: &[f64]| expectation_exact(&c, p, &obs, None).unwrap();
            let h = 1e-3;

            let grad = grad_expectation(&c, &params, &obs, &est).unwrap();
            for i in 0..n_params {
                let mut plus = params.clone();
                plus[i] += h;
                let mut minus = params.clone();
                minus[i] -= h;
                let fd = (energy(&plus) - energy(&minus)) / (2.0 * h);
                assert!((grad.values[i] - fd).abs() < 1e-5);
            }

            let hess = hessian_expectation(&c, &params, &obs, &est).unwrap();
            for i in 0..n_params {
                for j in 0..n_params {
                    let fd = if i == j {
                        let mut plus = params.clone();
                        plus[i] += h;
                        let mut minus = params.clone();
                        minus[i] -= h;
                        (energy(&plus) - 2.0 * energy(&params) + energy(&minus)) / (h * h)
                    } else {
                        let mut pp = params.clone();
                        pp[i] += h;
                        pp[j] += h;
                        let mut pm = params.clone();
                        pm[i] += h;
                        pm[j] -= h;
                        let mut mp = params.clone();
                        mp[i] -= h;
                        mp[j] += h;
                        let mut mm = params.clone();
                        mm[i] -= h;
                        mm[j] -= h;
                        (energy(&pp) - energy(&pm) - energy(&mp) + energy(&mm))
                            / (4.0 * h * h)
                    };
                    assert!((hess.values[(i, j)] - fd).abs() < 1e-4);
                }
            }
        }
    }

    #[test]
    fn gradient_is_linear_in_the_observable() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let c = random_circuit(&mut rng, 2, 2);
        let params = [0.4, -0.9];
        let est = ExactEstimator::noiseless();
        let sa = PauliString::two(2, 0, PauliOp::X, 1, PauliOp::X);
        let sb = PauliString::two(2, 0, PauliOp::Z, 1, PauliOp::I);
        let a = WeightedPaulis::new(2, vec![(1.0, sa.clone())]);
        let b = WeightedPaulis::new(2, vec![(1.0, sb.clone())]);
        let combined = WeightedPaulis::new(2, vec![(2.2, sa), (-0.7, sb)]);

        let ga = grad_expectation(&c, &params, &a, &est).unwrap();
        let gb = grad_expectation(&c, &params, &b, &est).unwrap();
        let gc = grad_expectation(&c, &params, &combined, &est).unwrap();
        for i in 0..2 {
            let expected = 2.2 * ga.values[i] - 0.7 * gb.values[i];
            assert!((gc.values[i] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn off_diagonal_hessian_is_bit_stable_under_role_swap() {
        let est = ExactEstimator::noiseless();
        let obs = WeightedPaulis::new(2, vec![(1.0, PauliString::two(2, 0, PauliOp::Z, 1, PauliOp::Z))]);

        let mut c1 = Circuit::new(2);
        c1.ry(0, Angle::param(0)).unwrap();
        c1.cnot(0, 1).unwrap();
        c1.ry(1, Angle::param(1)).unwrap();

        let mut c2 = Circuit::new(2);
        c2.ry(0, Angle::param(1)).unwrap();
        c2.cnot(0, 1).unwrap();
        c2.ry(1, Angle::param(0)).unwrap();

        let h1 = hessian_expectation(&c1, &[0.7, -0.3], &obs, &est).unwrap();
        let h2 = hessian_expectation(&c2, &[-0.3, 0.7], &obs, &est).unwrap();
        assert_eq!(
            h1.values[(0, 1)].to_bits(),
            h2.values[(0, 1)].to_bits()
        );
        assert_eq!(h1.values[(0, 1)].to_bits(), h1.values[(1, 0)].to_bits());
    }

    #[test]
    fn evaluation_counts_follow_the_shift_rules() {
        let mut c = Circuit::new(2);
        c.ry(0, Angle::param(0)).unwrap();
        c.cnot(0, 1).unwrap();
        c.ry(1, Angle::param(1)).unwrap();
        c.ry(0, Angle::param(2)).unwrap();
        let obs = WeightedPaulis::new(
            2,
            vec![
                (1.0, PauliString::two(2, 0, PauliOp::X, 1, PauliOp::X)),
                (-0.5, PauliString::single(2, 0, PauliOp::Z)),
                (0.25, PauliString::single(2, 1, PauliOp::Z)),
            ],
        );
        let params = [0.3, 0.1, -0.2];

        let counter = CountingEstimator::new(ExactEstimator::noiseless());
        grad_expectation(&c, &params, &obs, &counter).unwrap();
        assert_eq!(counter.calls(), 3 * 2 * 3);

        counter.reset();
        hessian_expectation(&c, &params, &obs, &counter).unwrap();
        let n = 3u64;
        assert_eq!(counter.calls(), 3 * (1 + n + 2 * n * (n - 1)));
    }

    #[test]
    fn unsupported_parameter_gates_are_rejected() {
        let mut c = Circuit::new(2);
        c.push(Gate::Cry {
            control: 0,
            target: 1,
            angle: Angle::param(0),
        })
        .unwrap();
        let obs = WeightedPaulis::new(2, vec![(1.0, PauliString::single(2, 0, PauliOp::Z))]);
        let est = ExactEstimator::noiseless();
        assert!(matches!(
            grad_expectation(&c, &[0.2], &obs, &est),
            Err(Error::UnsupportedShiftGate { index: 0 })
        ));
    }

    #[test]
    fn compose_rejects_bad_transform_chains() {
        let (c, obs) = ry_z();
        let plan = MitigationPlan::new(vec![1, 3], Folding::Unitary, 8192).unwrap();
        for transforms in [
            vec![],
            vec![Transform::Gradient],
            vec![Transform::Folding(&plan)],
            vec![Transform::Gradient, Transform::Expansion(&obs)],
            vec![
                Transform::Expansion(&obs),
                Transform::Folding(&plan),
                Transform::Gradient,
            ],
            vec![Transform::Expansion(&obs), Transform::Expansion(&obs)],
        ] {
            assert!(matches!(
                compose(&c, &[0.3], &transforms),
                Err(Error::TransformOrder)
            ));
        }
    }

    #[test]
    fn expansion_batch_reproduces_the_expectation() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let c = random_circuit(&mut rng, 2, 2);
        let obs = WeightedPaulis::new(
            2,
            vec![
                (0.8, PauliString::two(2, 0, PauliOp::X, 1, PauliOp::X)),
                (-1.1, PauliString::single(2, 1, PauliOp::Z)),
            ],
        );
        let params = [0.5, -0.4];
        let est = ExactEstimator::noiseless();

        let batch = compose(&c, &params, &[Transform::Expansion(&obs)]).unwrap();
        assert_eq!(batch.len(), 2);
        let outputs = batch.execute(&est).unwrap();
        let direct = expectation_exact(&c, &params, &obs, None).unwrap();
        assert!((outputs[0] - direct).abs() < 1e-12);
    }

    #[test]
    fn gradient_batch_reproduces_the_direct_gradient_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let c = random_circuit(&mut rng, 2, 3);
        let obs = random_observable(&mut rng, 2);
        let params = [0.2, 1.1, -0.6];
        let est = ExactEstimator::noiseless();

        let batch = compose(
            &c,
            &params,
            &[Transform::Expansion(&obs), Transform::Gradient],
        )
        .unwrap();
        assert_eq!(batch.len(), obs.terms.len() * 2 * 3);
        let outputs = batch.execute(&est).unwrap();
        let direct = grad_expectation(&c, &params, &obs, &est).unwrap();
        for i in 0..3 {
            assert_eq!(outputs[i].to_bits(), direct.values[i].to_bits());
        }
    }

    #[test]
    fn folded_gradient_batch_matches_mitigated_gradient_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let c = random_circuit(&mut rng, 2, 2);
        let obs = random_observable(&mut rng, 2);
        let params = [0.9, -1.3];
        let plan = MitigationPlan::new(vec![1, 3], Folding::Unitary, 8192).unwrap();
        let est = ExactEstimator::noiseless();

        let batch = compose(
            &c,
            &params,
            &[
                Transform::Expansion(&obs),
                Transform::Gradient,
                Transform::Folding(&plan),
            ],
        )
        .unwrap();
        assert_eq!(batch.len(), obs.terms.len() * 2 * 2 * 2);
        let outputs = batch.execute(&est).unwrap();
        let direct = mitigated_gradient(&c, &params, &obs, &plan, &est).unwrap();
        for i in 0..2 {
            assert_eq!(outputs[i].to_bits(), direct.values[i].to_bits());
        }
    }
}
