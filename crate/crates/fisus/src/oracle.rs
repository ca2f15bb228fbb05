//! Exact-diagonalization references for the chain observables.
//!
//! Everything here works on dense matrices and serves as ground truth for
//! the circuit pipeline: ground energies, the spectral form of the fidelity
//! susceptibility, and finite-difference versions of both target quantities.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::tfim::{full_tfim, reduce};

/// Smallest tolerated gap between the two lowest levels. Below this the
/// spectral susceptibility sum is ill-conditioned and the run is refused.
pub const GAP_THRESHOLD: f64 = 1e-9;

/// Accepted range of finite-difference steps.
pub const FD_STEP_MIN: f64 = 1e-4;
pub const FD_STEP_MAX: f64 = 1e-2;

/// Eigenvalues ascending with matching eigenvector columns. Each vector's
/// largest-magnitude entry is made positive so repeated runs agree in sign.
pub fn diagonalize(matrix: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let dim = matrix.nrows();
    assert_eq!(dim, matrix.ncols(), "matrix must be square");
    for i in 0..dim {
        for j in (i + 1)..dim {
            if (matrix[(i, j)] - matrix[(j, i)]).abs() > 1e-10 {
                return Err(Error::NotSymmetric);
            }
        }
    }
    let sym = matrix.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| {
        sym.eigenvalues[a]
            .partial_cmp(&sym.eigenvalues[b])
            .expect("eigenvalues are finite")
    });
    let values: Vec<f64> = order.iter().map(|&k| sym.eigenvalues[k]).collect();
    let mut vectors = DMatrix::zeros(dim, dim);
    for (col, &k) in order.iter().enumerate() {
        let mut v = sym.eigenvectors.column(k).clone_owned();
        let mut pivot = 0;
        for i in 0..dim {
            if v[i].abs() > v[pivot].abs() {
                pivot = i;
            }
        }
        if v[pivot] < 0.0 {
            v.neg_mut();
        }
        vectors.set_column(col, &v);
    }
    Ok((values, vectors))
}

fn ground_state(matrix: &DMatrix<f64>) -> Result<(f64, DVector<f64>)> {
    let (values, vectors) = diagonalize(matrix)?;
    Ok((values[0], vectors.column(0).clone_owned()))
}

/// Susceptibility sum over excited states for an explicit Hamiltonian pair:
/// sum_n |<n|H1|0>|^2 / (E_n - E_0)^2. `r` only labels the error when the
/// ground level is (nearly) degenerate.
pub fn fs_spectral_blocks(h: &DMatrix<f64>, h1: &DMatrix<f64>, r: f64) -> Result<f64> {
    let (values, vectors) = diagonalize(h)?;
    if values.len() < 2 || values[1] - values[0] < GAP_THRESHOLD {
        return Err(Error::DegenerateGround {
            r,
            threshold: GAP_THRESHOLD,
        });
    }
    let ground = vectors.column(0).clone_owned();
    let driven = h1 * &ground;
    let mut acc = 0.0;
    for n in 1..values.len() {
        let amp = vectors.column(n).dot(&driven);
        let gap = values[n] - values[0];
        acc += amp * amp / (gap * gap);
    }
    Ok(acc)
}

/// Fidelity susceptibility of the reduced chain at coupling r.
pub fn fs_spectral(l: usize, r: f64) -> Result<f64> {
    let red = reduce(l)?;
    fs_spectral_blocks(&red.matrix(r), red.h1(), r)
}

/// Same sum evaluated on the unreduced 2^L Hamiltonian.
pub fn fs_spectral_full(l: usize, r: f64) -> Result<f64> {
    let obs = full_tfim(l)?;
    let h = obs.dense(r);
    let h1 = obs.h1().dense();
    fs_spectral_blocks(&h, &h1, r)
}

/// Overlap magnitude between reduced ground states at two couplings.
pub fn ground_overlap(l: usize, r_a: f64, r_b: f64) -> Result<f64> {
    let red = reduce(l)?;
    let (_, va) = ground_state(&red.matrix(r_a))?;
    let (_, vb) = ground_state(&red.matrix(r_b))?;
    Ok(va.dot(&vb).abs())
}

fn check_step(delta: f64) -> Result<()> {
    if !(FD_STEP_MIN..=FD_STEP_MAX).contains(&delta) {
        return Err(Error::BadStep {
            delta,
            lo: FD_STEP_MIN,
            hi: FD_STEP_MAX,
        });
    }
    Ok(())
}

/// Finite-difference susceptibility from ground-state overlaps,
/// (1 - |<psi(r-d)|psi(r+d)>|) / (2 d^2).
pub fn fs_finite_difference(l: usize, r: f64, delta: f64) -> Result<f64> {
    check_step(delta)?;
    let f = ground_overlap(l, r - delta, r + delta)?;
    Ok((1.0 - f) / (2.0 * delta * delta))
}

/// Ground energy of the reduced chain.
pub fn ground_energy(l: usize, r: f64) -> Result<f64> {
    let red = reduce(l)?;
    Ok(ground_state(&red.matrix(r))?.0)
}

/// Ground energy of the unreduced chain.
pub fn full_ground_energy(l: usize, r: f64) -> Result<f64> {
    let h = full_tfim(l)?.dense(r);
    Ok(ground_state(&h)?.0)
}

/// Central second difference of the ground energy,
/// (E(r+h) - 2 E(r) + E(r-h)) / h^2.
pub fn d2e_finite_difference(l: usize, r: f64, h: f64) -> Result<f64> {
    check_step(h)?;
    let red = reduce(l)?;
    let em = ground_state(&red.matrix(r - h))?.0;
    let e0 = ground_state(&red.matrix(r))?.0;
    let ep = ground_state(&red.matrix(r + h))?.0;
    Ok((ep - 2.0 * e0 + em) / (h * h))
}
