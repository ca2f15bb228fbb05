//! Pluggable backends for evaluating circuits.
//!
//! Everything downstream of the simulator (differentiation, mitigation, the
//! sweep pipeline) talks to an [`Estimator`] instead of the simulator
//! directly, so exact, shot-sampled, noisy and mitigated evaluations all run
//! through the same code paths.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::circuit::Circuit;
use crate::error::Result;
use crate::pauli::WeightedPaulis;
use crate::simulator::{
    expectation_exact, expectation_sampled, probability_all_zeros, Estimate, NoiseModel,
};

/// splitmix64 finalizer over a seed and a salt. Used everywhere a derived,
/// decorrelated RNG stream is needed.
pub fn mix_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(salt.wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub trait Estimator: Sync {
    /// Expectation value of a weighted Pauli sum after the circuit.
    fn pauli_expectation(
        &self,
        circuit: &Circuit,
        params: &[f64],
        observable: &WeightedPaulis,
    ) -> Result<Estimate>;

    /// Probability of the all-zeros readout after the circuit.
    fn zeros_probability(&self, circuit: &Circuit, params: &[f64]) -> Result<Estimate>;
}

/// Infinite-shot evaluation, optionally under a noise model. Estimates carry
/// zero variance and zero shots.
#[derive(Clone, Copy, Debug, Default)]
pub struct ExactEstimator {
    noise: Option<NoiseModel>,
}

impl ExactEstimator {
    pub fn noiseless() -> Self {
        ExactEstimator { noise: None }
    }

    pub fn with_noise(noise: NoiseModel) -> Self {
        ExactEstimator { noise: Some(noise) }
    }

    pub fn noise(&self) -> Option<&NoiseModel> {
        self.noise.as_ref()
    }
}

impl Estimator for ExactEstimator {
    fn pauli_expectation(
        &self,
        circuit: &Circuit,
        params: &[f64],
        observable: &WeightedPaulis,
    ) -> Result<Estimate> {
        let value = expectation_exact(circuit, params, observable, self.noise.as_ref())?;
        Ok(Estimate::exact(value))
    }

    fn zeros_probability(&self, circuit: &Circuit, params: &[f64]) -> Result<Estimate> {
        probability_all_zeros(circuit, params, self.noise.as_ref(), 0, 0)
    }
}

/// Shot-based evaluation with an optional noise model. Every call consumes a
/// fresh RNG stream derived from the base seed and an internal counter, so a
/// fixed construction seed gives a reproducible sequence of estimates while
/// successive calls stay decorrelated.
#[derive(Debug)]
pub struct SampledEstimator {
    noise: Option<NoiseModel>,
    shots: u64,
    base_seed: u64,
    counter: AtomicU64,
}

impl SampledEstimator {
    pub fn new(noise: Option<NoiseModel>, shots: u64, base_seed: u64) -> Self {
        SampledEstimator {
            noise,
            shots,
            base_seed,
            counter: AtomicU64::new(0),
        }
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn noise(&self) -> Option<&NoiseModel> {
        self.noise.as_ref()
    }

    fn next_seed(&self) -> u64 {
        mix_seed(self.base_seed, self.counter.fetch_add(1, Ordering::Relaxed))
    }
}

impl Estimator for SampledEstimator {
    fn pauli_expectation(
        &self,
        circuit: &Circuit,
        params: &[f64],
        observable: &WeightedPaulis,
    ) -> Result<Estimate> {
        expectation_sampled(
            circuit,
            params,
            observable,
            self.noise.as_ref(),
            self.shots,
            self.next_seed(),
        )
    }

    fn zeros_probability(&self, circuit: &Circuit, params: &[f64]) -> Result<Estimate> {
        probability_all_zeros(
            circuit,
            params,
            self.noise.as_ref(),
            self.shots,
            self.next_seed(),
        )
    }
}

/// Wrapper that counts backend calls, for shot accounting and tests.
pub struct CountingEstimator<E> {
    inner: E,
    calls: AtomicU64,
}

impl<E> CountingEstimator<E> {
    pub fn new(inner: E) -> Self {
        CountingEstimator {
            inner,
            calls: AtomicU64::new(0),
        }
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.calls.store(0, Ordering::Relaxed);
    }
}

impl<E: Estimator> Estimator for CountingEstimator<E> {
    fn pauli_expectation(
        &self,
        circuit: &Circuit,
        params: &[f64],
        observable: &WeightedPaulis,
    ) -> Result<Estimate> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.pauli_expectation(circuit, params, observable)
    }

    fn zeros_probability(&self, circuit: &Circuit, params: &[f64]) -> Result<Estimate> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.zeros_probability(circuit, params)
    }
}
