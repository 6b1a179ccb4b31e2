//! Error control for the truncation D ≈ D⁽¹⁾: the second Fredholm
//! coefficient C₂, Hölder majorants M₃ ≥ |C₃| and M₄ ≥ |C₄|, the derivative
//! ∂_zC₁ and the resulting estimate of how far the zero moves.
//!
//! All integrands depend on |p| and |q| only; integrals over ℝ² are four
//! times the positive quadrant. With k = λ²/μ, w = z/μ and F(p) = f(z − μp):
//!
//! ```text
//! φ₂ = g(p)²g(q)² (p−q)² / (F(p)(w−2p) F(q)(w−2q) (w−p−q)²)
//! φ₃ = |g(p)g(q)| ((1+p)(1+q))^¼ (p−q)² / (|F(p)F(q)(w−2p)(w−2q)|^½ |w−p−q|²)
//! φ₄ = |g(p)g(q)|^⅔ ((1+p)(1+q))^¼ (p−q)² / (|F(p)F(q)(w−2p)(w−2q)|^⅓ |w−p−q|²)
//! C₂ = k²∫φ₂,  M₃ = 4k³∫|φ₃|³,  M₄ = 16k⁴∫|φ₄|⁶
//! ```

use num_complex::Complex64;

use crate::error::ModelError;
use crate::friedrichs::{eval_f, eval_f_prime, eval_g, Sheet, TwoLevelModel};
use crate::par::{self, Exec};
use crate::quad::{integrate_quadrant, integrate_ray, QuadratureSettings};

/// Tolerances for the two-dimensional bound integrals.
pub fn bound_quadrature() -> QuadratureSettings {
    QuadratureSettings { abs_tol: 1e-300, rel_tol: 1e-7, max_subdivisions: 400 }
}

struct Integrand<'a> {
    model: &'a TwoLevelModel,
    w: Complex64,
}

impl Integrand<'_> {
    fn big_f(&self, p: f64) -> Result<Complex64, ModelError> {
        let m = self.model;
        eval_f(m, self.w * m.mu - m.mu * p, Sheet::Principal)
    }

    /// Single-variable factors g(p)², F(p)(w − 2p), tabulated lazily by the caller.
    fn single(&self, p: f64) -> Result<(f64, Complex64), ModelError> {
        Ok((eval_g(p), self.big_f(p)? * (self.w - 2.0 * p)))
    }
}

fn quadrant<F>(model: &TwoLevelModel, z: Complex64, kernel: F) -> Result<Complex64, ModelError>
where
    F: Fn((f64, Complex64), (f64, Complex64), f64, f64, Complex64) -> Complex64,
{
    let it = Integrand { model, w: z / model.mu };
    let failure = std::sync::Mutex::new(None);
    let e = integrate_quadrant(
        |p, q| match (it.single(p), it.single(q)) {
            (Ok(a), Ok(b)) => kernel(a, b, p, q, it.w),
            (Err(e), _) | (_, Err(e)) => {
                failure.lock().expect("poisoned").get_or_insert(e);
                Complex64::new(f64::NAN, 0.0)
            }
        },
        &bound_quadrature(),
    );
    if let Some(e) = failure.into_inner().expect("poisoned") {
        return Err(e);
    }
    Ok(4.0 * e?.value)
}

fn trivial(model: &TwoLevelModel) -> bool {
    model.lambda == 0.0 || model.mu == 0.0
}

/// C₂ with the signed integrand.
pub fn eval_c2(model: &TwoLevelModel, z: Complex64) -> Result<Complex64, ModelError> {
    if trivial(model) {
        return Ok(Complex64::default());
    }
    let k = model.lambda * model.lambda / model.mu;
    let i = quadrant(model, z, |(gp, dp), (gq, dq), p, q, w| {
        let d = w - p - q;
        gp * gp * gq * gq * (p - q).powi(2) / (dp * dq * d * d)
    })?;
    Ok(k * k * i)
}

/// k²∫|φ₂|, which dominates |C₂|.
pub fn eval_c2_abs(model: &TwoLevelModel, z: Complex64) -> Result<f64, ModelError> {
    if trivial(model) {
        return Ok(0.0);
    }
    let k = model.lambda * model.lambda / model.mu;
    let i = quadrant(model, z, |(gp, dp), (gq, dq), p, q, w| {
        let d = w - p - q;
        Complex64::new((gp * gp * gq * gq * (p - q).powi(2) / (dp * dq * d * d)).norm(), 0.0)
    })?;
    Ok(k * k * i.re)
}

/// Modulus of the shared factor, with exponents `a` on |g(p)g(q)| and `b` on
/// the denominator product.
fn phi(gp: f64, gq: f64, dp: Complex64, dq: Complex64, p: f64, q: f64, w: Complex64, a: f64, b: f64) -> f64 {
    let num = (gp * gq).abs().powf(a) * ((1.0 + p) * (1.0 + q)).powf(0.25) * (p - q).powi(2);
    num / ((dp * dq).norm().powf(b) * (w - p - q).norm_sqr())
}

pub fn eval_m3(model: &TwoLevelModel, z: Complex64) -> Result<f64, ModelError> {
    if trivial(model) {
        return Ok(0.0);
    }
    let k = model.lambda * model.lambda / model.mu;
    let i = quadrant(model, z, |(gp, dp), (gq, dq), p, q, w| {
        Complex64::new(phi(gp, gq, dp, dq, p, q, w, 1.0, 0.5).powi(3), 0.0)
    })?;
    Ok(4.0 * k.powi(3) * i.re)
}

pub fn eval_m4(model: &TwoLevelModel, z: Complex64) -> Result<f64, ModelError> {
    if trivial(model) {
        return Ok(0.0);
    }
    let k = model.lambda * model.lambda / model.mu;
    let i = quadrant(model, z, |(gp, dp), (gq, dq), p, q, w| {
        Complex64::new(phi(gp, gq, dp, dq, p, q, w, 2.0 / 3.0, 1.0 / 3.0).powi(6), 0.0)
    })?;
    Ok(16.0 * k.powi(4) * i.re)
}

/// ∂_zC₁, by differentiating under the integral with the closed-form f′;
/// at μ = 0, −λ²(2z − 1)/(z² − z − λ²)².
pub fn eval_dz_c1(model: &TwoLevelModel, z: Complex64) -> Result<Complex64, ModelError> {
    let lam2 = model.lambda * model.lambda;
    if lam2 == 0.0 {
        return Ok(Complex64::default());
    }
    if model.mu == 0.0 {
        let d = z * z - z - lam2;
        return Ok(-lam2 * (2.0 * z - 1.0) / (d * d));
    }
    let mu = model.mu;
    let mut failure = None;
    let e = integrate_ray(
        |p| {
            let g = eval_g(p);
            if g == 0.0 {
                return Complex64::default();
            }
            let w = z - mu * p;
            let a = z - 2.0 * mu * p;
            match (eval_f(model, w, Sheet::Principal), eval_f_prime(model, w, Sheet::Principal)) {
                (Ok(f), Ok(fp)) => -g * g * (f + a * fp) / (a * a * f * f),
                (Err(e), _) | (_, Err(e)) => {
                    failure.get_or_insert(e);
                    Complex64::new(f64::NAN, 0.0)
                }
            }
        },
        &QuadratureSettings::default(),
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(2.0 * lam2 * e?.value)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    pub mu: f64,
    pub z: Complex64,
    pub c2: Complex64,
    pub m3: f64,
    pub m4: f64,
    pub dz_c1: Complex64,
    /// (|C₂|/2 + M₃/6)/|∂_zC₁|.
    pub correction_magnitude: f64,
    /// The terms (z − z₀)∂_zC₂ and (z − z₀)∂_zC₃ are dropped from the estimate.
    pub neglects_derivative_terms: bool,
}

pub fn bound_report(model: &TwoLevelModel, z: Complex64) -> Result<BoundReport, ModelError> {
    let c2 = eval_c2(model, z)?;
    let m3 = eval_m3(model, z)?;
    let m4 = eval_m4(model, z)?;
    let dz_c1 = eval_dz_c1(model, z)?;
    let correction_magnitude = combine(c2, m3, dz_c1);
    Ok(BoundReport { mu: model.mu, z, c2, m3, m4, dz_c1, correction_magnitude, neglects_derivative_terms: true })
}

fn combine(c2: Complex64, m3: f64, dz_c1: Complex64) -> f64 {
    let num = c2.norm() / 2.0 + m3 / 6.0;
    if num == 0.0 {
        0.0
    } else {
        num / dz_c1.norm()
    }
}

/// Magnitude bound on the shift of a D⁽¹⁾ zero `z0` under the full determinant.
pub fn correction_estimate(model: &TwoLevelModel, z0: Complex64) -> Result<f64, ModelError> {
    if model.lambda == 0.0 {
        return Ok(0.0);
    }
    let c2 = eval_c2(model, z0)?;
    let m3 = eval_m3(model, z0)?;
    Ok(combine(c2, m3, eval_dz_c1(model, z0)?))
}

/// Bound reports for several (μ, z) points at fixed λ, one independent job per point.
pub fn bound_rows(exec: Exec, lambda: f64, points: &[(f64, Complex64)]) -> Vec<Result<BoundReport, ModelError>> {
    par::map(exec, points, |&(mu, z)| bound_report(&TwoLevelModel { lambda, mu }, z))
}
