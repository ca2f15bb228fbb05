//! Transverse-field Ising chains and their translation-symmetric reduction.
//!
//! The full Hamiltonian on L sites with periodic boundaries is
//! H(r) = -sum_i X_i X_{i+1} - r sum_i Z_i, split into a bond part H0 and a
//! field part H1 so that H(r) = H0 + r H1. The reduction keeps the sector of
//! even spin-flip parity and groups its basis states into orbits of the
//! cyclic shift; one normalized uniform superposition per orbit spans an
//! invariant subspace containing the ground state.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::{Part, PauliObservable, PauliOp, PauliString, WeightedPaulis};

/// Energy placed on the diagonal of padding rows when a reduced space is
/// blown up to the next power of two, far above the physical spectrum.
pub const PADDING_ENERGY: f64 = 1e3;

fn check_sites(l: usize) -> Result<()> {
    if l < 2 || l > 12 || l % 2 == 1 {
        return Err(Error::BadSiteCount { l });
    }
    Ok(())
}

/// Full-register Hamiltonian with L X_i X_{i+1} bond terms (H0 part) and L
/// field terms -Z_i (H1 part). On two sites both bonds connect the same pair
/// and merge into a single term of weight -2.
pub fn full_tfim(l: usize) -> Result<PauliObservable> {
    check_sites(l)?;
    let mut obs = PauliObservable::new(l);
    for i in 0..l {
        let j = (i + 1) % l;
        obs.push(
            -1.0,
            PauliString::two(l, i, PauliOp::X, j, PauliOp::X),
            Part::H0,
        );
    }
    for i in 0..l {
        obs.push(-1.0, PauliString::single(l, i, PauliOp::Z), Part::H1);
    }
    Ok(obs)
}

/// Orbit of a basis state under cyclic shifts of the chain. Members are
/// sorted ascending; the representative is the smallest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TranslationOrbit {
    representative: usize,
    members: Vec<usize>,
}

impl TranslationOrbit {
    pub fn representative(&self) -> usize {
        self.representative
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn largest(&self) -> usize {
        *self.members.last().expect("orbits are never empty")
    }

    /// Display form of the normalized uniform superposition over the orbit.
    pub fn label(&self, l: usize) -> String {
        let kets: Vec<String> = self
            .members
            .iter()
            .map(|&s| format!("|{:0width$b}>", s, width = l))
            .collect();
        if kets.len() == 1 {
            return kets.into_iter().next().unwrap();
        }
        let n = self.members.len();
        let root = (n as f64).sqrt();
        let norm = if root.fract() == 0.0 {
            format!("{}", root as usize)
        } else {
            format!("sqrt({})", n)
        };
        format!("({})/{}", kets.join(" + "), norm)
    }
}

/// Even-parity sector of an L-site chain organized into translation orbits,
/// ordered by each orbit's largest member.
#[derive(Clone, Debug)]
pub struct CompositeBasis {
    l: usize,
    orbits: Vec<TranslationOrbit>,
    lookup: Vec<Option<usize>>,
}

impl CompositeBasis {
    pub fn sites(&self) -> usize {
        self.l
    }

    pub fn orbits(&self) -> &[TranslationOrbit] {
        &self.orbits
    }

    pub fn len(&self) -> usize {
        self.orbits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orbits.is_empty()
    }

    /// Index of the orbit containing a basis state, if the state has even
    /// parity.
    pub fn orbit_of(&self, state: usize) -> Option<usize> {
        self.lookup.get(state).copied().flatten()
    }
}

fn rotate(state: usize, l: usize) -> usize {
    let mask = (1usize << l) - 1;
    ((state << 1) | (state >> (l - 1))) & mask
}

pub fn composite_basis(l: usize) -> Result<CompositeBasis> {
    check_sites(l)?;
    let dim = 1usize << l;
    let mut lookup: Vec<Option<usize>> = vec![None; dim];
    let mut orbits: Vec<TranslationOrbit> = Vec::new();
    let mut seen = vec![false; dim];
    for s in 0..dim {
        if seen[s] || s.count_ones() % 2 == 1 {
            continue;
        }
        let mut members = Vec::new();
        let mut t = s;
        loop {
            if !seen[t] {
                seen[t] = true;
                members.push(t);
            }
            t = rotate(t, l);
            if t == s {
                break;
            }
        }
        members.sort_unstable();
        orbits.push(TranslationOrbit {
            representative: members[0],
            members,
        });
    }
    orbits.sort_by_key(|o| o.largest());
    for (idx, orbit) in orbits.iter().enumerate() {
        for &m in orbit.members() {
            lookup[m] = Some(idx);
        }
    }
    Ok(CompositeBasis { l, orbits, lookup })
}

/// Writes a real symmetric matrix of power-of-two dimension as a weighted sum
/// of Pauli strings. Coefficients below 1e-12 are dropped; the kept terms
/// reproduce the input to 1e-10.
pub fn pauli_decompose(matrix: &DMatrix<f64>) -> Result<WeightedPaulis> {
    let dim = matrix.nrows();
    assert_eq!(dim, matrix.ncols(), "matrix must be square");
    if !dim.is_power_of_two() {
        return Err(Error::NotPowerOfTwo { dim });
    }
    for i in 0..dim {
        for j in (i + 1)..dim {
            if (matrix[(i, j)] - matrix[(j, i)]).abs() > 1e-10 {
                return Err(Error::NotSymmetric);
            }
        }
    }
    let n = dim.trailing_zeros() as usize;
    let mut terms = Vec::new();
    for code in 0..4usize.pow(n as u32) {
        let mut ops = Vec::with_capacity(n);
        let mut rem = code;
        for _ in 0..n {
            ops.push(match rem % 4 {
                0 => PauliOp::I,
                1 => PauliOp::X,
                2 => PauliOp::Y,
                _ => PauliOp::Z,
            });
            rem /= 4;
        }
        let string = PauliString::new(ops);
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..dim {
            let (tgt, phase) = string.apply_basis(i);
            acc += matrix[(i, tgt)] * phase;
        }
        let coeff = acc.re / dim as f64;
        if coeff.abs() >= 1e-12 {
            terms.push((coeff, string));
        }
    }
    let result = WeightedPaulis::new(n, terms);
    let mut residual = 0.0_f64;
    for i in 0..dim {
        for j in 0..dim {
            let mut entry = 0.0;
            for (c, s) in &result.terms {
                let (tgt, phase) = s.apply_basis(j);
                if tgt == i {
                    entry += c * phase.re;
                }
            }
            residual = residual.max((entry - matrix[(i, j)]).abs());
        }
    }
    assert!(
        residual <= 1e-10,
        "decomposition failed to reproduce the matrix: residual {}",
        residual
    );
    Ok(result)
}

fn pad_to_power_of_two(m: &DMatrix<f64>, diagonal: f64) -> DMatrix<f64> {
    let dim = m.nrows();
    let target = dim.next_power_of_two();
    if target == dim {
        return m.clone();
    }
    let mut out = DMatrix::zeros(target, target);
    out.view_mut((0, 0), (dim, dim)).copy_from(m);
    for k in dim..target {
        out[(k, k)] = diagonal;
    }
    out
}

/// Bundles the two reduced blocks into a single observable whose H0 and H1
/// parts decompose each block over Pauli strings. Dimensions that are not a
/// power of two are padded with inert high-energy levels first.
pub fn reduced_observable(h0: &DMatrix<f64>, h1: &DMatrix<f64>) -> Result<PauliObservable> {
    assert_eq!(h0.nrows(), h0.ncols(), "h0 must be square");
    assert_eq!(h0.shape(), h1.shape(), "blocks must share a shape");
    let p0 = pad_to_power_of_two(h0, PADDING_ENERGY);
    let p1 = pad_to_power_of_two(h1, 0.0);
    let d0 = pauli_decompose(&p0)?;
    let d1 = pauli_decompose(&p1)?;
    let n = p0.nrows().trailing_zeros() as usize;
    let mut obs = PauliObservable::new(n);
    for (c, s) in d0.terms {
        obs.push(c, s, Part::H0);
    }
    for (c, s) in d1.terms {
        obs.push(c, s, Part::H1);
    }
    Ok(obs)
}

/// Chain Hamiltonian projected onto the even-parity translation-orbit basis,
/// with the qubit-space observable acting on ceil(log2(dim)) qubits.
#[derive(Clone, Debug)]
pub struct ReducedHamiltonian {
    basis: CompositeBasis,
    h0: DMatrix<f64>,
    h1: DMatrix<f64>,
    observable: PauliObservable,
}

impl ReducedHamiltonian {
    pub fn basis(&self) -> &CompositeBasis {
        &self.basis
    }

    pub fn h0(&self) -> &DMatrix<f64> {
        &self.h0
    }

    pub fn h1(&self) -> &DMatrix<f64> {
        &self.h1
    }

    pub fn observable(&self) -> &PauliObservable {
        &self.observable
    }

    pub fn dim(&self) -> usize {
        self.h0.nrows()
    }

    pub fn n_qubits(&self) -> usize {
        self.observable.width()
    }

    pub fn matrix(&self, r: f64) -> DMatrix<f64> {
        &self.h0 + r * &self.h1
    }
}

pub fn reduce(l: usize) -> Result<ReducedHamiltonian> {
    let basis = composite_basis(l)?;
    let d = basis.len();
    let mut h0 = DMatrix::zeros(d, d);
    let mut h1 = DMatrix::zeros(d, d);
    let sizes: Vec<f64> = basis.orbits().iter().map(|o| o.size() as f64).collect();
    for (a, orbit) in basis.orbits().iter().enumerate() {
        let popcount = orbit.representative().count_ones() as f64;
        h1[(a, a)] = 2.0 * popcount - l as f64;
        for &s in orbit.members() {
            for i in 0..l {
                let j = (i + 1) % l;
                let mask = (1usize << (l - 1 - i)) | (1usize << (l - 1 - j));
                let t = s ^ mask;
                let b = basis
                    .orbit_of(t)
                    .expect("bond flips preserve spin-flip parity");
                h0[(a, b)] -= 1.0;
            }
        }
    }
    for a in 0..d {
        for b in 0..d {
            h0[(a, b)] /= (sizes[a] * sizes[b]).sqrt();
        }
    }
    let observable = reduced_observable(&h0, &h1)?;
    Ok(ReducedHamiltonian {
        basis,
        h0,
        h1,
        observable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn full_chain_term_structure() {
        let obs = full_tfim(4).unwrap();
        assert_eq!(obs.terms().len(), 8);
        let h0_count = obs
            .terms()
            .iter()
            .filter(|t| matches!(t.part, Part::H0))
            .count();
        assert_eq!(h0_count, 4);
        for t in obs.terms() {
            assert_eq!(t.coeff, -1.0);
        }

        let two = full_tfim(2).unwrap();
        let bonds: Vec<_> = two
            .terms()
            .iter()
            .filter(|t| matches!(t.part, Part::H0))
            .collect();
        assert_eq!(bonds.len(), 1);
        assert_eq!(bonds[0].coeff, -2.0);
        assert!(matches!(full_tfim(1), Err(Error::BadSiteCount { l: 1 })));
        assert!(matches!(full_tfim(3), Err(Error::BadSiteCount { l: 3 })));
        assert!(matches!(full_tfim(14), Err(Error::BadSiteCount { l: 14 })));
        assert!(matches!(composite_basis(5), Err(Error::BadSiteCount { .. })));
    }

    #[test]
    fn four_site_orbits() {
        let basis = composite_basis(4).unwrap();
        let reps: Vec<usize> = basis.orbits().iter().map(|o| o.representative()).collect();
        let sizes: Vec<usize> = basis.orbits().iter().map(|o| o.size()).collect();
        let largest: Vec<usize> = basis.orbits().iter().map(|o| o.largest()).collect();
        assert_eq!(reps, vec![0b0000, 0b0101, 0b0011, 0b1111]);
        assert_eq!(sizes, vec![1, 2, 4, 1]);
        assert_eq!(largest, vec![0b0000, 0b1010, 0b1100, 0b1111]);
        assert_eq!(basis.orbit_of(0b0110), Some(2));
        assert_eq!(basis.orbit_of(0b0001), None);
        assert_eq!(basis.orbits()[1].label(4), "(|0101> + |1010>)/sqrt(2)");
        assert_eq!(basis.orbits()[2].label(4).matches('|').count(), 4);
    }

    #[test]
    fn six_site_orbits() {
        let basis = composite_basis(6).unwrap();
        assert_eq!(basis.len(), 8);
        let reps: Vec<usize> = basis.orbits().iter().map(|o| o.representative()).collect();
        let sizes: Vec<usize> = basis.orbits().iter().map(|o| o.size()).collect();
        assert_eq!(reps, vec![0, 9, 5, 3, 27, 23, 15, 63]);
        assert_eq!(sizes, vec![1, 3, 6, 6, 3, 6, 6, 1]);
        let total: usize = sizes.iter().sum();
        assert_eq!(total, 32);
    }

    #[test]
    fn four_site_reduction_matches_known_matrix() {
        let red = reduce(4).unwrap();
        let s2 = 2.0_f64.sqrt();
        let h0 = [
            [0.0, 0.0, -2.0, 0.0],
            [0.0, 0.0, -2.0 * s2, 0.0],
            [-2.0, -2.0 * s2, 0.0, -2.0],
            [0.0, 0.0, -2.0, 0.0],
        ];
        let h1 = [
            [-4.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 4.0],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert!((red.h0()[(i, j)] - h0[i][j]).abs() < 1e-12, "h0 {} {}", i, j);
                assert!((red.h1()[(i, j)] - h1[i][j]).abs() < 1e-12, "h1 {} {}", i, j);
            }
        }
        let m = red.matrix(0.75);
        assert!((m[(0, 0)] + 3.0).abs() < 1e-12);
        assert!((m[(3, 3)] - 3.0).abs() < 1e-12);
        assert_eq!(red.n_qubits(), 2);
    }

    #[test]
    fn two_site_reduction() {
        let red = reduce(2).unwrap();
        assert_eq!(red.dim(), 2);
        let m = red.matrix(0.3);
        assert!((m[(0, 0)] + 0.6).abs() < 1e-12);
        assert!((m[(0, 1)] + 2.0).abs() < 1e-12);
        assert!((m[(1, 0)] + 2.0).abs() < 1e-12);
        assert!((m[(1, 1)] - 0.6).abs() < 1e-12);
        assert_eq!(red.n_qubits(), 1);
    }

    #[test]
    fn four_site_pauli_form() {
        let red = reduce(4).unwrap();
        let s2 = 2.0_f64.sqrt();
        let mut by_label: HashMap<String, (f64, Part)> = HashMap::new();
        for t in red.observable().terms() {
            by_label.insert(t.string.label(), (t.coeff, t.part));
        }
        let expected = [
            ("XI", -1.0),
            ("IX", -1.0),
            ("XZ", -1.0),
            ("ZX", 1.0),
            ("XX", -s2),
            ("YY", -s2),
        ];
        for (label, coeff) in expected {
            let (c, part) = by_label[label];
            assert!((c - coeff).abs() < 1e-12, "{}", label);
            assert!(matches!(part, Part::H0));
        }
        for label in ["ZI", "IZ"] {
            let (c, part) = by_label[label];
            assert!((c + 2.0).abs() < 1e-12, "{}", label);
            assert!(matches!(part, Part::H1));
        }
        assert_eq!(red.observable().terms().len(), 8);
    }

    #[test]
    fn reduced_matrix_matches_observable_dense_form() {
        for l in [2usize, 4, 6] {
            let red = reduce(l).unwrap();
            let dense = red.observable().dense(0.9);
            let direct = red.matrix(0.9);
            for i in 0..red.dim() {
                for j in 0..red.dim() {
                    assert!(
                        (dense[(i, j)] - direct[(i, j)]).abs() < 1e-10,
                        "l={} entry {} {}",
                        l,
                        i,
                        j
                    );
                }
            }
        }
    }

    #[test]
    fn decompose_rejects_bad_inputs() {
        let odd = DMatrix::from_element(3, 3, 1.0);
        assert!(matches!(
            pauli_decompose(&odd),
            Err(Error::NotPowerOfTwo { dim: 3 })
        ));
        let skew = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        assert!(matches!(pauli_decompose(&skew), Err(Error::NotSymmetric)));
    }

    #[test]
    fn padding_adds_inert_levels() {
        let h0 = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 1.0, 0.5, -1.0, 0.0, -1.0, 0.2]);
        let h1 = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.3]);
        let obs = reduced_observable(&h0, &h1).unwrap();
        assert_eq!(obs.width(), 2);
        let dense = obs.dense(0.4);
        for i in 0..3 {
            for j in 0..3 {
                let want = h0[(i, j)] + 0.4 * h1[(i, j)];
                assert!((dense[(i, j)] - want).abs() < 1e-10);
            }
            assert!(dense[(i, 3)].abs() < 1e-10);
            assert!(dense[(3, i)].abs() < 1e-10);
        }
        assert!((dense[(3, 3)] - PADDING_ENERGY).abs() < 1e-10);
    }
}
