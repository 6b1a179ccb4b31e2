//! Finite Fock space over at most three orthonormal modes, tensored with the
//! three atomic levels, truncated by excitation number (atom index plus photon
//! count). H₀ preserves excitation number, so each retained sector is exact.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{build_mode_frame, ModeFrame, ThreeLevelModel};
use crate::error::ThreeLevelError;

pub const DEFAULT_DIMENSION_CAP: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FockState {
    pub atom: u8,
    pub occ: [u8; 3],
}

impl FockState {
    pub fn photons(&self) -> usize {
        self.occ.iter().map(|&k| k as usize).sum()
    }

    pub fn excitation(&self) -> usize {
        self.atom as usize + self.photons()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedFock {
    modes: usize,
    max_excitation: usize,
    states: Vec<FockState>,
    index: HashMap<FockState, usize>,
}

fn distribute(total: usize, modes: usize, prefix: &mut Vec<u8>, out: &mut Vec<[u8; 3]>) {
    if prefix.len() + 1 == modes {
        let mut occ = [0u8; 3];
        occ[..prefix.len()].copy_from_slice(prefix);
        occ[modes - 1] = total as u8;
        out.push(occ);
        return;
    }
    for k in (0..=total).rev() {
        prefix.push(k as u8);
        distribute(total - k, modes, prefix, out);
        prefix.pop();
    }
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

impl TruncatedFock {
    /// All states with excitation number at most `max_excitation`, ordered by
    /// excitation, then atom, then occupation.
    pub fn new(modes: usize, max_excitation: usize, cap: usize) -> Result<Self, ThreeLevelError> {
        if !(1..=3).contains(&modes) {
            return Err(ThreeLevelError::InvalidParameter(format!("mode count {modes} not in 1..=3")));
        }
        if max_excitation > u8::MAX as usize {
            return Err(ThreeLevelError::DimensionOverflow(usize::MAX, cap));
        }
        let dim = (0..=2.min(max_excitation))
            .map(|a| binomial(max_excitation - a + modes, modes))
            .fold(0usize, usize::saturating_add);
        if dim > cap {
            return Err(ThreeLevelError::DimensionOverflow(dim, cap));
        }
        let mut states = Vec::with_capacity(dim);
        for exc in 0..=max_excitation {
            for atom in 0..=2.min(exc) {
                let mut occs = Vec::new();
                distribute(exc - atom, modes, &mut Vec::new(), &mut occs);
                states.extend(occs.into_iter().map(|occ| FockState { atom: atom as u8, occ }));
            }
        }
        debug_assert_eq!(states.len(), dim);
        let index = states.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        Ok(Self { modes, max_excitation, states, index })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn max_excitation(&self) -> usize {
        self.max_excitation
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[FockState] {
        &self.states
    }

    pub fn index_of(&self, s: &FockState) -> Option<usize> {
        self.index.get(s).copied()
    }

    /// Indices of the states with excitation number `k`.
    pub fn sector(&self, k: usize) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.states[i].excitation() == k).collect()
    }
}

/// Dense matrix of an operator on a [`TruncatedFock`] basis.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    pub fock: TruncatedFock,
    pub matrix: DMatrix<Complex64>,
}

impl OperatorMatrix {
    pub fn hermiticity_defect(&self) -> f64 {
        let m = &self.matrix;
        let mut worst = 0.0f64;
        for i in 0..m.nrows() {
            for j in i..m.ncols() {
                worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Block of the matrix on the excitation sector `k`, with its indices.
    pub fn sector_block(&self, k: usize) -> (Vec<usize>, DMatrix<Complex64>) {
        let idx = self.fock.sector(k);
        let block = DMatrix::from_fn(idx.len(), idx.len(), |i, j| self.matrix[(idx[i], idx[j])]);
        (idx, block)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThreeLevelOperators {
    pub frame: ModeFrame,
    pub fock: TruncatedFock,
    pub h0: DMatrix<Complex64>,
    /// The 0↔2 coupling without the λ₀₂ prefactor.
    pub v: DMatrix<Complex64>,
}

/// Adds `coupling · (|hi⟩⟨lo| ⊗ a(f) + h.c.)` with a(f) = Σ f̄ₖ aₖ, dropping
/// pairs whose upper state lies beyond the truncation.
fn add_transition(
    fock: &TruncatedFock,
    m: &mut DMatrix<Complex64>,
    lo: u8,
    hi: u8,
    f: &[Complex64; 3],
    coupling: f64,
) {
    if coupling == 0.0 {
        return;
    }
    for (j, s) in fock.states().iter().enumerate() {
        if s.atom != lo {
            continue;
        }
        for k in 0..fock.modes() {
            if s.occ[k] == 0 || f[k] == Complex64::default() {
                continue;
            }
            let mut t = FockState { atom: hi, occ: s.occ };
            t.occ[k] -= 1;
            // the 0↔2 transition raises excitation and can leave the truncation
            let Some(i) = fock.index_of(&t) else { continue };
            let amp = coupling * f[k].conj() * (s.occ[k] as f64).sqrt();
            m[(i, j)] += amp;
            m[(j, i)] += amp.conj();
        }
    }
}

/// Truncated H₀ and V over the frame modes, excitation number ≤ `n`. Only two
/// modes are used when f₀₁ = f₁₂, since the frame then spans two dimensions.
pub fn build_operators(model: &ThreeLevelModel, n: usize) -> Result<ThreeLevelOperators, ThreeLevelError> {
    build_operators_with_cap(model, n, DEFAULT_DIMENSION_CAP)
}

pub fn build_operators_with_cap(
    model: &ThreeLevelModel,
    n: usize,
    cap: usize,
) -> Result<ThreeLevelOperators, ThreeLevelError> {
    if n < 1 {
        return Err(ThreeLevelError::InvalidParameter("truncation must be at least 1".into()));
    }
    let frame = build_mode_frame(model)?;
    let modes = if frame.degenerate { 2 } else { 3 };
    let fock = TruncatedFock::new(modes, n, cap)?;
    let d = fock.dim();
    let mut h0 = DMatrix::from_fn(d, d, |i, j| {
        if i != j {
            return Complex64::default();
        }
        Complex64::new(
            match fock.states()[i].atom {
                0 => 0.0,
                1 => model.e1,
                _ => model.e2,
            },
            0.0,
        )
    });
    add_transition(&fock, &mut h0, 0, 1, &frame.f01, model.l01);
    add_transition(&fock, &mut h0, 1, 2, &frame.f12, model.l12);
    let mut v = DMatrix::zeros(d, d);
    add_transition(&fock, &mut v, 0, 2, &frame.f02, 1.0);
    Ok(ThreeLevelOperators { frame, fock, h0, v })
}

/// H₀, plus λ₀₂V when `include_v`, truncated at excitation number `n`.
pub fn build_truncated_hamiltonian(
    model: &ThreeLevelModel,
    n: usize,
    include_v: bool,
) -> Result<OperatorMatrix, ThreeLevelError> {
    let ops = build_operators(model, n)?;
    let matrix = if include_v { &ops.h0 + &ops.v * Complex64::new(model.l02, 0.0) } else { ops.h0 };
    Ok(OperatorMatrix { fock: ops.fock, matrix })
}

/// Eigenvalues ascending with matching eigenvector columns.
pub fn eigh(m: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let e = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..e.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| e.eigenvalues[a].total_cmp(&e.eigenvalues[b]));
    let values = order.iter().map(|&k| e.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), order.len(), |i, j| e.eigenvectors[(i, order[j])]);
    (values, vectors)
}

/// Sorted eigenvalues of a Hermitian operator matrix.
pub fn brute_spectrum(op: &OperatorMatrix) -> Result<Vec<f64>, ThreeLevelError> {
    let defect = op.hermiticity_defect();
    if defect > 1e-12 {
        return Err(ThreeLevelError::NonHermitian(defect));
    }
    Ok(eigh(&op.matrix).0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn dimension_counts() {
        let f = TruncatedFock::new(3, 2, DEFAULT_DIMENSION_CAP).unwrap();
        // atom 0: ≤2 photons in 3 modes (10), atom 1: ≤1 (4), atom 2: 0 (1)
        assert_eq!(f.dim(), 15);
        assert_eq!(f.sector(2).len(), 6 + 3 + 1);
        assert!(matches!(TruncatedFock::new(3, 60, 1000), Err(ThreeLevelError::DimensionOverflow(_, 1000))));
    }

    #[test]
    fn two_by_two() {
        let fock = TruncatedFock::new(1, 1, 10).unwrap();
        let l = 0.3;
        let m = DMatrix::from_row_slice(2, 2, &[c(1.0), c(l), c(l), c(0.0)]);
        let s = brute_spectrum(&OperatorMatrix { fock, matrix: m }).unwrap();
        let r = (1.0f64 + 4.0 * l * l).sqrt();
        assert!((s[0] - (1.0 - r) / 2.0).abs() < 1e-14 && (s[1] - (1.0 + r) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian() {
        let fock = TruncatedFock::new(1, 1, 10).unwrap();
        let m = DMatrix::from_row_slice(2, 2, &[c(1.0), c(0.1), c(0.2), c(0.0)]);
        assert!(matches!(brute_spectrum(&OperatorMatrix { fock, matrix: m }), Err(ThreeLevelError::NonHermitian(_))));
    }

    #[test]
    fn hermitian_with_v() {
        let m = ThreeLevelModel::new(1.0, 2.3, 0.1, 0.2, 0.05, Complex64::new(0.1, 0.2), Complex64::new(0.3, -0.1), Complex64::new(0.0, 0.2))
            .unwrap();
        let h = build_truncated_hamiltonian(&m, 4, true).unwrap();
        assert!(h.hermiticity_defect() <= 1e-12);
    }
}
