//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter vector has length {got}, expected {expected}")]
    ParamLen { expected: usize, got: usize },
    #[error("circuit width {width} exceeds the simulator limit of {max} qubits")]
    WidthLimit { width: usize, max: usize },
    #[error("qubit index {qubit} out of range for width {width}")]
    QubitOutOfRange { qubit: usize, width: usize },
    #[error("gate acts on the same qubit twice")]
    DuplicateQubit,
    #[error("observable width {obs} does not match circuit width {circuit}")]
    WidthMismatch { obs: usize, circuit: usize },
    #[error("probability {p} outside [0, 1]")]
    BadProbability { p: f64 },
    #[error("shots must be at least 1")]
    ZeroShots,
    #[error("parameter {index} appears outside RY gates; the two-term shift rule does not apply")]
    UnsupportedShiftGate { index: usize },
    #[error("matrix dimension {dim} is not a power of two")]
    NotPowerOfTwo { dim: usize },
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("site count {l} unsupported: L must be even with 2 <= L <= 12")]
    BadSiteCount { l: usize },
    #[error("spectral gap below {threshold:e} at r = {r}; ground state treated as degenerate")]
    DegenerateGround { r: f64, threshold: f64 },
    #[error("finite-difference step {delta} outside [{lo}, {hi}]")]
    BadStep { delta: f64, lo: f64, hi: f64 },
    #[error("no ansatz provided for {n_qubits} qubits; supported widths are 2 and 3")]
    UnsupportedAnsatz { n_qubits: usize },
    #[error("target state has no finite norm")]
    ZeroTarget,
    #[error("scale factor {lambda} must be an odd integer >= 1")]
    EvenScaleFactor { lambda: u32 },
    #[error("duplicate scale factor {lambda}")]
    DuplicateScaleFactor { lambda: u32 },
    #[error("scale factors must be the consecutive odd integers 1, 3, 5, ...")]
    BadScaleSequence,
    #[error("got {got} estimates for {expected} scale factors")]
    ScaleCountMismatch { expected: usize, got: usize },
    #[error("baseline variance must be positive")]
    ZeroBaselineVariance,
    #[error("no trials supplied")]
    EmptyTrials,
    #[error("overlap circuits have different widths: {left} vs {right}")]
    OverlapWidthMismatch { left: usize, right: usize },
    #[error("the state-preparation side of an overlap job must have no free parameters")]
    UnboundPreparation,
    #[error("{gate} gates have no controlled compilation; controlled circuits support RY and CNOT only")]
    ControlledCompile { gate: &'static str },
    #[error("overlap method {method} does not produce a squared-overlap Hessian")]
    UnsupportedOverlapHessian { method: &'static str },
    #[error("hessian is {rows}x{cols} but the gradient has length {grad}")]
    ResponseShape { rows: usize, cols: usize, grad: usize },
    #[error("response solve failed: {0}")]
    ResponseSolve(&'static str),
    #[error("transforms must be ordered expansion, then gradient, then folding")]
    TransformOrder,
}

pub type Result<T> = std::result::Result<T, Error>;
