//! Three-level atom at μ = 0: ground 0, levels e₁ < e₂, transitions 0↔1, 1↔2
//! coupled through modes f₀₁, f₁₂ and the perturbing 0↔2 transition through
//! f₀₂ with strength λ₀₂.

mod fock;
mod kato;

pub use fock::{
    brute_spectrum, build_operators, build_truncated_hamiltonian, eigh, FockState, OperatorMatrix,
    ThreeLevelOperators, TruncatedFock, DEFAULT_DIMENSION_CAP,
};
pub use kato::{
    exact_eigenvalue, family_energy, kato_a, kato_matrix_coefficient, kato_matrix_second_order,
    kato_vector_second_order, kato_z2, unperturbed_vector, KatoFamily, NormalizationConvention,
};

use nalgebra::{Matrix3, Matrix6};
use num_complex::Complex64;

use crate::error::ThreeLevelError;

/// `1 − |s₁|` below which f₀₁ and f₁₂ are treated as equal.
pub const DEGENERATE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeLevelModel {
    pub e1: f64,
    pub e2: f64,
    pub l01: f64,
    pub l12: f64,
    pub l02: f64,
    /// (f₀₁, f₀₂)
    pub s0: Complex64,
    /// (f₀₁, f₁₂)
    pub s1: Complex64,
    /// (f₀₂, f₁₂)
    pub s2: Complex64,
}

impl ThreeLevelModel {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        e1: f64,
        e2: f64,
        l01: f64,
        l12: f64,
        l02: f64,
        s0: Complex64,
        s1: Complex64,
        s2: Complex64,
    ) -> Result<Self, ThreeLevelError> {
        if !(e1 > 0.0 && e2 > e1 && e1.is_finite() && e2.is_finite()) {
            return Err(ThreeLevelError::InvalidParameter(format!("need 0 < e1 < e2, got {e1}, {e2}")));
        }
        if [l01, l12, l02].iter().any(|l| !(*l >= 0.0 && l.is_finite())) {
            return Err(ThreeLevelError::InvalidParameter("couplings must be finite and non-negative".into()));
        }
        if [s0, s1, s2].iter().any(|s| s.norm() > 1.0 + 1e-12) {
            return Err(ThreeLevelError::InvalidParameter("overlaps must satisfy |s| <= 1".into()));
        }
        let m = Self { e1, e2, l01, l12, l02, s0, s1, s2 };
        let min = m.gram_min_eigenvalue();
        if min < -1e-12 {
            return Err(ThreeLevelError::GramNotPsd(min));
        }
        Ok(m)
    }

    /// Model whose overlaps are those of explicit (not necessarily normalized
    /// beforehand) mode vectors in ℂ³.
    #[allow(clippy::too_many_arguments)]
    pub fn from_modes(
        e1: f64,
        e2: f64,
        l01: f64,
        l12: f64,
        l02: f64,
        f01: &[Complex64; 3],
        f12: &[Complex64; 3],
        f02: &[Complex64; 3],
    ) -> Result<Self, ThreeLevelError> {
        let unit = |v: &[Complex64; 3]| {
            let n = inner(v, v).re.sqrt();
            v.map(|x| x / n)
        };
        let (a, b, c) = (unit(f01), unit(f12), unit(f02));
        Self::new(e1, e2, l01, l12, l02, inner(&a, &c), inner(&a, &b), inner(&c, &b))
    }

    /// Gram matrix of (f₀₁, f₁₂, f₀₂), inner product antilinear in the first slot.
    pub fn gram(&self) -> Matrix3<Complex64> {
        let one = Complex64::new(1.0, 0.0);
        Matrix3::new(
            one,
            self.s1,
            self.s0,
            self.s1.conj(),
            one,
            self.s2.conj(),
            self.s0.conj(),
            self.s2,
            one,
        )
    }

    fn gram_min_eigenvalue(&self) -> f64 {
        let e = self.gram().symmetric_eigenvalues();
        e.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// f₀₁ = f₁₂ up to a phase.
    pub fn degenerate(&self) -> bool {
        1.0 - self.s1.norm() <= DEGENERATE_TOLERANCE
    }

    pub fn with_l02(self, l02: f64) -> Self {
        Self { l02, ..self }
    }

    /// Every overlap multiplied by a common phase. This changes the phase of
    /// s₁s̄₂s̄₀, so only quantities built from H₀ alone are unchanged; the
    /// result is validated like any new model.
    pub fn rephased(self, phase: Complex64) -> Result<Self, ThreeLevelError> {
        Self::new(self.e1, self.e2, self.l01, self.l12, self.l02, self.s0 * phase, self.s1 * phase, self.s2 * phase)
    }

    /// Overlaps after rephasing the atomic levels, which multiplies f₀₁ by
    /// e^{iθ₀₁}, f₁₂ by e^{iθ₁₂} and f₀₂ by e^{i(θ₀₁+θ₁₂)}. The Hamiltonian is
    /// unitarily equivalent, so every spectrum is unchanged.
    pub fn gauge_transformed(self, theta01: f64, theta12: f64) -> Self {
        let e = |t: f64| Complex64::from_polar(1.0, t);
        Self { s0: self.s0 * e(theta12), s1: self.s1 * e(theta12 - theta01), s2: self.s2 * e(-theta01), ..self }
    }
}

/// Coordinates of the coupling modes in an orthonormal frame obtained by
/// Gram–Schmidt on (f₀₁, f₁₂, f₀₂), and the mode g₁ orthogonal to f₀₁, f₁₂.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeFrame {
    pub f01: [Complex64; 3],
    pub f12: [Complex64; 3],
    pub f02: [Complex64; 3],
    pub g1: [Complex64; 3],
    /// (f₀₂, g₁)
    pub f02_g1: Complex64,
    pub degenerate: bool,
}

pub fn inner(u: &[Complex64; 3], v: &[Complex64; 3]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn build_mode_frame(model: &ThreeLevelModel) -> Result<ModeFrame, ThreeLevelError> {
    let (s0, s1, s2) = (model.s0, model.s1, model.s2);
    let zero = Complex64::default();
    let one = Complex64::new(1.0, 0.0);
    let f01 = [one, zero, zero];
    if model.degenerate() {
        // f₁₂ = s₁ f₀₁; f₀₂ must then satisfy (f₀₂, f₁₂) = s̄₀ s₁
        if (s2 - s0.conj() * s1).norm() > 1e-10 {
            return Err(ThreeLevelError::GramNotPsd(-(s2 - s0.conj() * s1).norm()));
        }
        let r0 = (1.0 - s0.norm_sqr()).max(0.0).sqrt();
        if r0 < 1e-12 {
            return Err(ThreeLevelError::Collinear);
        }
        let g1 = [zero, one, zero];
        return Ok(ModeFrame {
            f01,
            f12: [s1, zero, zero],
            f02: [s0, Complex64::new(r0, 0.0), zero],
            g1,
            f02_g1: Complex64::new(r0, 0.0),
            degenerate: true,
        });
    }
    let r1 = (1.0 - s1.norm_sqr()).sqrt();
    let b = (s2.conj() - s1.conj() * s0) / r1;
    let c2 = 1.0 - s0.norm_sqr() - b.norm_sqr();
    if c2 < -1e-12 {
        return Err(ThreeLevelError::GramNotPsd(c2));
    }
    let c = c2.max(0.0).sqrt();
    Ok(ModeFrame {
        f01,
        f12: [s1, Complex64::new(r1, 0.0), zero],
        f02: [s0, b, Complex64::new(c, 0.0)],
        g1: [zero, zero, one],
        f02_g1: Complex64::new(c, 0.0),
        degenerate: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prop41Entry {
    pub label: &'static str,
    pub eigenvalue: f64,
    /// Coefficient of |1,Ω⟩.
    pub atom: f64,
    /// Coefficient of |0,f₀₁⟩, or of |0,g₀⟩ for the zero eigenvalue, where
    /// g₀ is f₁₂ − s₁f₀₁ normalized.
    pub photon: f64,
}

/// Eigenvalues of H₀ on the one-excitation sector spanned by |1,Ω⟩,
/// |0,f₀₁⟩, |0,f₁₂⟩: three if f₀₁ ≠ f₁₂, else two.
pub fn prop41_spectrum(model: &ThreeLevelModel) -> Vec<Prop41Entry> {
    let (e1, l) = (model.e1, model.l01);
    let r = (e1 * e1 + 4.0 * l * l).sqrt();
    let pair = |label, z: f64| {
        let ratio = if z == 0.0 { 0.0 } else { l / z };
        let n = (1.0 + ratio * ratio).sqrt();
        if l == 0.0 && z == 0.0 {
            Prop41Entry { label, eigenvalue: z, atom: 0.0, photon: 1.0 }
        } else {
            Prop41Entry { label, eigenvalue: z, atom: 1.0 / n, photon: ratio / n }
        }
    };
    let mut out = vec![pair("zeta01_1", 0.5 * (e1 - r))];
    if !model.degenerate() {
        out.push(Prop41Entry { label: "zeta01_2", eigenvalue: 0.0, atom: 0.0, photon: 1.0 });
    }
    out.push(pair("zeta11", 0.5 * (e1 + r)));
    out
}

/// The 6×6 matrix of H₀ on the two-excitation sector in the non-orthogonal
/// basis |2,Ω⟩, |1,f₁₂⟩, |1,f₀₁⟩, |0,f₁₂∨f₀₁⟩, |0,f₀₁∨f₀₁⟩, |0,f₁₂∨f₁₂⟩, entered as printed.
pub fn b2_matrix(model: &ThreeLevelModel) -> Matrix6<Complex64> {
    let c = |x: f64| Complex64::new(x, 0.0);
    let (e1, e2, l01, l12, s1) = (model.e1, model.e2, model.l01, model.l12, model.s1);
    let r2 = 2f64.sqrt();
    let z = c(0.0);
    Matrix6::from_row_slice(&[
        c(e2), c(l12), s1 * l12, z, z, z,
        c(l12), c(e1), z, c(l01 / r2), z, s1 * (r2 * l01),
        z, z, c(e1), s1 * (l01 / r2), c(r2 * l01), z,
        z, c(r2 * l01), z, z, z, z,
        z, z, c(r2 * l01), z, z, z,
        z, z, z, z, z, z,
    ])
}

/// Coefficients (ascending powers) of the quintic whose roots are the nonzero
/// two-excitation eigenvalues.
pub fn b2_quintic(model: &ThreeLevelModel) -> Vec<f64> {
    let (e1, e2, l01, l12) = (model.e1, model.e2, model.l01, model.l12);
    let a = model.s1.norm_sqr();
    let (p, q) = (l01 * l01, l12 * l12);
    // ζ(ζ−e₁) = [0, −e₁, 1]
    let zz = [0.0, -e1, 1.0];
    // inner = ζ(ζ−e₁)(ζ−e₂) − 3λ₀₁²(ζ−e₂) − λ₁₂²ζ
    let mut inner = poly_mul(&zz, &[-e2, 1.0]);
    inner[0] += 3.0 * p * e2;
    inner[1] -= 3.0 * p + q;
    let mut out = poly_mul(&zz, &inner);
    out[1] += p * (2.0 * p + (2.0 - a) * q);
    out[0] -= 2.0 * e2 * p * p;
    out
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn horner(c: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::default();
    let mut d = Complex64::default();
    for &a in c.iter().rev() {
        d = d * z + p;
        p = p * z + a;
    }
    (p, d)
}

/// ζ times the quintic: the characteristic polynomial of the sector up to sign.
pub fn b2_charpoly(model: &ThreeLevelModel, zeta: Complex64) -> Complex64 {
    zeta * horner(&b2_quintic(model), zeta).0
}

/// Scale for residual checks of [`b2_charpoly`] at `zeta`.
pub fn b2_charpoly_scale(model: &ThreeLevelModel, zeta: Complex64) -> f64 {
    let r = zeta.norm().max(1.0);
    b2_quintic(model).iter().enumerate().map(|(k, c)| c.abs() * r.powi(k as i32 + 1)).sum()
}

/// The six two-excitation eigenvalues, ascending: 0 and the quintic's roots,
/// found by deflated Newton from the second-order values.
pub fn b2_spectrum(model: &ThreeLevelModel) -> Result<[f64; 6], ThreeLevelError> {
    if model.degenerate() {
        return Err(ThreeLevelError::Degenerate);
    }
    let c = b2_quintic(model);
    let seeds = b2_second_order(model);
    let mut roots: Vec<Complex64> = Vec::with_capacity(5);
    for &s in &seeds {
        let mut z = Complex64::new(s, 0.0);
        let mut converged = false;
        let mut polish = 0;
        for _ in 0..100 {
            let (p, d) = horner(&c, z);
            let defl: Complex64 = roots.iter().map(|r| 1.0 / (z - r)).sum();
            let step = p / (d - p * defl);
            if !(step.re.is_finite() && step.im.is_finite()) {
                converged = p.norm() == 0.0;
                break;
            }
            z -= step;
            if step.norm() <= 1e-13 * (1.0 + z.norm()) {
                converged = true;
                polish += 1;
                if polish == 2 {
                    break;
                }
            }
        }
        if !converged || z.im.abs() > 1e-9 * (1.0 + z.norm()) {
            return Err(ThreeLevelError::RootIsolation(z));
        }
        roots.push(z);
    }
    let mut out = [0.0; 6];
    out[0] = 0.0;
    for (o, r) in out.iter_mut().skip(1).zip(&roots) {
        *o = r.re;
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// Second-order values of the five nonzero two-excitation eigenvalues,
/// ascending: the near-degenerate pairs at 0 and e₁ are split by the
/// effective 2×2 couplings.
pub fn b2_second_order(model: &ThreeLevelModel) -> [f64; 5] {
    let (e1, e2) = (model.e1, model.e2);
    let a = model.l01 * model.l01 / e1;
    let b = model.l12 * model.l12 / (e1 - e2);
    let s = model.s1.norm_sqr();
    // diag(2a, a) + b|f₁₂⟩⟨f₁₂| with f₁₂ = (s₁, √(1−|s₁|²))
    let (m11, m22, m12) = (2.0 * a + b * s, a + b * (1.0 - s), b * model.s1.norm() * (1.0 - s).sqrt());
    let mean = 0.5 * (m11 + m22);
    let half = (0.25 * (m11 - m22).powi(2) + m12 * m12).sqrt();
    let mut out = [-2.0 * a, -a, e1 + mean - half, e1 + mean + half, e2 + model.l12 * model.l12 / (e2 - e1)];
    out.sort_by(f64::total_cmp);
    out
}

/// The second-order list as printed alongside the characteristic polynomial:
/// 0, −3λ₀₁²/e₁, e₁, e₁ + 3λ₀₁²/e₁ + λ₁₂²/(e₁−e₂), e₂ + λ₁₂²/(e₂−e₁).
pub fn b2_second_order_printed(model: &ThreeLevelModel) -> [f64; 5] {
    let (e1, e2) = (model.e1, model.e2);
    let a = model.l01 * model.l01 / e1;
    let q = model.l12 * model.l12;
    [0.0, -3.0 * a, e1, e1 + 3.0 * a + q / (e1 - e2), e2 + q / (e2 - e1)]
}

/// Largest distance from an eigenvalue of the printed 6×6 matrix to the
/// nearest true two-excitation eigenvalue.
pub fn b2_matrix_discrepancy(model: &ThreeLevelModel) -> Result<f64, ThreeLevelError> {
    let spectrum = b2_spectrum(model)?;
    let eig = b2_matrix(model)
        .eigenvalues()
        .ok_or(ThreeLevelError::RootIsolation(Complex64::default()))?;
    Ok(eig
        .iter()
        .map(|z| spectrum.iter().map(|s| (z - s).norm()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max))
}
