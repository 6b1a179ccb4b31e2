//! Newton iteration with a central-difference derivative and a secant
//! fallback, for analytic functions evaluated by quadrature.

use num_complex::Complex64;

use crate::error::RootError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootSettings {
    /// Residual and absolute step tolerance.
    pub abs_tol: f64,
    /// Step tolerance relative to |root|.
    pub rel_tol: f64,
    pub max_iterations: usize,
}

impl Default for RootSettings {
    fn default() -> Self {
        Self { abs_tol: 1e-12, rel_tol: 1e-12, max_iterations: 60 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootResult {
    pub root: Complex64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Derivative step used by the solver: `1e-7·(1+|z|)`.
pub fn derivative_step(z: Complex64) -> f64 {
    1e-7 * (1.0 + z.norm())
}

/// Central-difference derivative along the real direction.
pub fn central_derivative<F, E>(f: &mut F, z: Complex64) -> Result<Complex64, E>
where
    F: FnMut(Complex64) -> Result<Complex64, E>,
{
    let h = derivative_step(z);
    Ok((f(z + h)? - f(z - h)?) / (2.0 * h))
}

pub fn find_root_complex<F, E>(mut f: F, seed: Complex64, settings: &RootSettings) -> Result<RootResult, RootError>
where
    F: FnMut(Complex64) -> Result<Complex64, E>,
    E: std::fmt::Display,
{
    let mut eval = |z: Complex64| f(z).map_err(|e| RootError::Evaluation(e.to_string()));
    let mut z = seed;
    let mut fz = eval(z)?;
    let mut prev: Option<(Complex64, Complex64)> = None;
    for it in 1..=settings.max_iterations {
        let d = central_derivative(&mut eval, z)?;
        let mut step = fz / d;
        if !(step.re.is_finite() && step.im.is_finite()) || d.norm() == 0.0 {
            let (zp, fp) = prev.ok_or(RootError::SingularDerivative { at: z })?;
            let slope = (fz - fp) / (z - zp);
            step = fz / slope;
            if !(step.re.is_finite() && step.im.is_finite()) {
                return Err(RootError::SingularDerivative { at: z });
            }
        }
        prev = Some((z, fz));
        z -= step;
        fz = eval(z)?;
        let residual = fz.norm();
        let small_step = step.norm() <= settings.rel_tol * z.norm() + settings.abs_tol;
        if residual <= settings.abs_tol && small_step {
            return Ok(RootResult { root: z, residual, iterations: it, converged: true });
        }
    }
    Err(RootError::NoConvergence { last: z, residual: fz.norm(), iterations: settings.max_iterations })
}
