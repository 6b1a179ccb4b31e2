//! Second-order splitting of the degenerate levels ζ carried by the states
//! (c*(g₁))ⁿφ, analytically and through finite Kato operators.

use nalgebra::DVector;
use num_complex::Complex64;

use super::fock::{build_operators, eigh, FockState, ThreeLevelOperators, TruncatedFock};
use super::{build_mode_frame, prop41_spectrum, ThreeLevelModel};
use crate::error::ThreeLevelError;

/// Eigenvalues closer than this to ζ belong to the unperturbed eigenspace.
const EIGENSPACE_TOL: f64 = 1e-10;
/// Complement eigenvalues closer than this make the pseudo-resolvent unusable.
const GAP_TOL: f64 = 1e-7;
const STABILITY_TOL: f64 = 1e-9;

/// Which one-excitation level is dressed with g₁ photons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KatoFamily {
    /// The lower level (ζ₀,₁)₁.
    Lower,
    /// The upper level ζ₁,₁.
    Upper,
}

impl KatoFamily {
    pub fn name(self) -> &'static str {
        match self {
            KatoFamily::Lower => "zeta01_1",
            KatoFamily::Upper => "zeta11",
        }
    }
}

/// Weight of λ₀₁²/ζ² in the normalization factor of z⁽²⁾.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NormalizationConvention {
    /// (1 + λ₀₁²/ζ²)⁻¹, independent of n.
    #[default]
    Unit,
    /// (1 + n!·λ₀₁²/ζ²)⁻¹.
    Factorial,
}

pub fn family_energy(model: &ThreeLevelModel, family: KatoFamily) -> f64 {
    let s = prop41_spectrum(model);
    match family {
        KatoFamily::Lower => s[0].eigenvalue,
        KatoFamily::Upper => s[s.len() - 1].eigenvalue,
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// The coefficient A of the analytic second-order shift.
pub fn kato_a(model: &ThreeLevelModel, family: KatoFamily, n: u32) -> Result<f64, ThreeLevelError> {
    let frame = build_mode_frame(model)?;
    let z = family_energy(model, family);
    let (p, q) = (model.l01 * model.l01, model.l12 * model.l12);
    let d = q * z + p * (z - model.e2);
    if z == 0.0 || d.abs() < 1e-300 {
        return Err(ThreeLevelError::DegenerateDenominator("lambda12^2 zeta + lambda01^2 (zeta - e2)"));
    }
    let g = frame.f02_g1.norm_sqr();
    let weight = if frame.degenerate { f64::from(n) * g + model.s0.norm_sqr() } else { f64::from(n) * g };
    Ok(p * p * weight / (z * z * d))
}

/// ζ + λ₀₂²A/(1 + w·λ₀₁²/ζ²), with w = 1 or n! by `convention`.
pub fn kato_z2(
    model: &ThreeLevelModel,
    family: KatoFamily,
    n: u32,
    convention: NormalizationConvention,
) -> Result<f64, ThreeLevelError> {
    let z = family_energy(model, family);
    let a = kato_a(model, family, n)?;
    let w = match convention {
        NormalizationConvention::Unit => 1.0,
        NormalizationConvention::Factorial => factorial(n),
    };
    Ok(z + model.l02 * model.l02 * a / (1.0 + w * model.l01 * model.l01 / (z * z)))
}

/// The embedding of (c*(g₁))ⁿφ, normalized, where φ is the one-excitation
/// eigenvector of `family`.
pub fn unperturbed_vector(
    ops: &ThreeLevelOperators,
    model: &ThreeLevelModel,
    family: KatoFamily,
    n: usize,
) -> Result<DVector<Complex64>, ThreeLevelError> {
    let fock = &ops.fock;
    if n + 1 > fock.max_excitation() {
        return Err(ThreeLevelError::TruncationInsufficient { n: fock.max_excitation(), need: n + 1 });
    }
    let spectrum = prop41_spectrum(model);
    let entry = match family {
        KatoFamily::Lower => spectrum[0],
        KatoFamily::Upper => spectrum[spectrum.len() - 1],
    };
    let g1 = if ops.frame.degenerate { 1 } else { 2 };
    let mut occ = [0u8; 3];
    occ[g1] = n as u8;
    let atom = FockState { atom: 1, occ };
    let mut photon = FockState { atom: 0, occ };
    photon.occ[0] += 1;
    let mut v = DVector::zeros(fock.dim());
    let index = |s: &FockState| fock.index_of(s).expect("state within truncation");
    v[index(&atom)] = Complex64::new(entry.atom, 0.0);
    v[index(&photon)] += Complex64::new(entry.photon, 0.0);
    Ok(v)
}

/// Spectral data of H₀ around ζ: projector P₀ onto the ζ-eigenspace and
/// Q̃₀ = Q₀(ζ − H₀)⁻¹ on its complement.
struct KatoOperators {
    ops: ThreeLevelOperators,
    phi: DVector<Complex64>,
    vectors: nalgebra::DMatrix<Complex64>,
    /// 1/(ζ − Eₖ) on the complement, None inside the eigenspace.
    inverse_gaps: Vec<Option<f64>>,
}

impl KatoOperators {
    fn new(model: &ThreeLevelModel, family: KatoFamily, n: usize, truncation: usize) -> Result<Self, ThreeLevelError> {
        if truncation < n + 3 {
            return Err(ThreeLevelError::TruncationInsufficient { n: truncation, need: n + 3 });
        }
        let ops = build_operators(model, truncation)?;
        let zeta = family_energy(model, family);
        let phi = unperturbed_vector(&ops, model, family, n)?;
        let (values, vectors) = eigh(&ops.h0);
        let mut inverse_gaps = Vec::with_capacity(values.len());
        for e in values {
            let gap = zeta - e;
            if gap.abs() <= EIGENSPACE_TOL {
                inverse_gaps.push(None);
            } else if gap.abs() < GAP_TOL {
                return Err(ThreeLevelError::IllConditioned(gap.abs()));
            } else {
                inverse_gaps.push(Some(1.0 / gap));
            }
        }
        Ok(Self { ops, phi, vectors, inverse_gaps })
    }

    fn spectral(&self, x: &DVector<Complex64>, weight: impl Fn(Option<f64>) -> f64) -> DVector<Complex64> {
        let mut c = self.vectors.ad_mul(x);
        for (ck, g) in c.iter_mut().zip(&self.inverse_gaps) {
            *ck *= weight(*g);
        }
        &self.vectors * c
    }

    fn reduced_resolvent(&self, x: &DVector<Complex64>) -> DVector<Complex64> {
        self.spectral(x, |g| g.unwrap_or(0.0))
    }

    fn projector(&self, x: &DVector<Complex64>) -> DVector<Complex64> {
        self.spectral(x, |g| if g.is_none() { 1.0 } else { 0.0 })
    }

    fn v(&self, x: &DVector<Complex64>) -> DVector<Complex64> {
        &self.ops.v * x
    }

    /// ⟨φ, V Q̃₀ V φ⟩: the λ₀₂² coefficient of the shift.
    fn shift_coefficient(&self) -> f64 {
        let w = self.reduced_resolvent(&self.v(&self.phi));
        self.v(&self.phi).dotc(&w).re
    }
}

/// The λ₀₂² coefficient of the Kato second-order shift on a truncation with
/// excitation number ≤ `truncation`, checked against `truncation + 1`.
pub fn kato_matrix_coefficient(
    model: &ThreeLevelModel,
    family: KatoFamily,
    n: usize,
    truncation: usize,
) -> Result<f64, ThreeLevelError> {
    let a = KatoOperators::new(model, family, n, truncation)?.shift_coefficient();
    let b = KatoOperators::new(model, family, n, truncation + 1)?.shift_coefficient();
    let delta = (a - b).abs();
    if delta > STABILITY_TOL * (1.0 + a.abs()) {
        return Err(ThreeLevelError::TruncationUnstable { n: truncation, delta });
    }
    Ok(a)
}

/// ζ + λ₀₂²⟨φ, VQ̃₀Vφ⟩: the ratio l/k of the reduced Kato operators,
/// truncated at second order. P₀VP₀ = 0, so the first-order term is absent.
pub fn kato_matrix_second_order(
    model: &ThreeLevelModel,
    family: KatoFamily,
    n: usize,
    truncation: usize,
) -> Result<f64, ThreeLevelError> {
    let c = kato_matrix_coefficient(model, family, n, truncation)?;
    Ok(family_energy(model, family) + model.l02 * model.l02 * c)
}

/// Eigenvector approximant through second order,
/// φ + λ₀₂Q̃₀Vφ + λ₀₂²(Q̃₀VQ̃₀V − P₀VQ̃₀²V)φ, not normalized.
pub fn kato_vector_second_order(
    model: &ThreeLevelModel,
    family: KatoFamily,
    n: usize,
    truncation: usize,
) -> Result<(TruncatedFock, DVector<Complex64>), ThreeLevelError> {
    let k = KatoOperators::new(model, family, n, truncation)?;
    let l = Complex64::new(model.l02, 0.0);
    let first = k.reduced_resolvent(&k.v(&k.phi));
    let second = k.reduced_resolvent(&k.v(&first)) - k.projector(&k.v(&k.reduced_resolvent(&first)));
    let chi = &k.phi + &first * l + second * (l * l);
    Ok((k.ops.fock, chi))
}

/// Oracle: the eigenvalue of H₀ + λ₀₂V whose eigenvector overlaps most with
/// the unperturbed vector, and that overlap modulus.
pub fn exact_eigenvalue(
    model: &ThreeLevelModel,
    family: KatoFamily,
    n: usize,
    truncation: usize,
) -> Result<(f64, DVector<Complex64>, f64), ThreeLevelError> {
    let ops = build_operators(model, truncation)?;
    let phi = unperturbed_vector(&ops, model, family, n)?;
    let h = &ops.h0 + &ops.v * Complex64::new(model.l02, 0.0);
    let (values, vectors) = eigh(&h);
    let (best, overlap) = (0..values.len())
        .map(|j| (j, vectors.column(j).dotc(&phi).norm()))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty basis");
    Ok((values[best], vectors.column(best).into_owned(), overlap))
}
