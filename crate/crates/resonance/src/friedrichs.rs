//! One-excitation sector: the coupling function g, the function f on its
//! sheets, the critical scale, the μ = 0 germs and the bound-state amplitude.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::ModelError;
use crate::quad::{integrate_ray, QuadratureSettings};

const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_4;

/// Coupling constant λ and photon-energy scale μ; e₀ = 0, e₁ = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelModel {
    pub lambda: f64,
    pub mu: f64,
}

impl TwoLevelModel {
    pub fn new(lambda: f64, mu: f64) -> Result<Self, ModelError> {
        if !(lambda >= 0.0 && lambda.is_finite()) || !(mu >= 0.0 && mu.is_finite()) {
            return Err(ModelError::InvalidParameter(format!("lambda={lambda}, mu={mu}")));
        }
        Ok(Self { lambda, mu })
    }

    pub fn with_mu(self, mu: f64) -> Self {
        Self { mu, ..self }
    }

    pub fn mu_c(&self) -> f64 {
        mu_critical(self.lambda)
    }
}

/// Which continuation of f is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sheet {
    /// Cut along ℝ⁺.
    Principal,
    /// Principal continued clockwise through ℝ⁺ (cut along ℝ⁺ of the lower sheet).
    ContinuedPlus,
    /// Principal in the upper half-plane and for Re z < 0, ContinuedPlus in
    /// the fourth quadrant; cut along iℝ⁻.
    Hat,
}

impl Sheet {
    pub fn name(self) -> &'static str {
        match self {
            Sheet::Principal => "principal",
            Sheet::ContinuedPlus => "continued_plus",
            Sheet::Hat => "hat",
        }
    }
}

pub fn eval_g(p: f64) -> f64 {
    SQRT_2_OVER_PI * p / (1.0 + p * p)
}

/// g continued to complex arguments.
pub fn g_complex(w: Complex64) -> Complex64 {
    SQRT_2_OVER_PI * w / (1.0 + w * w)
}

fn g_complex_prime(w: Complex64) -> Complex64 {
    let d = 1.0 + w * w;
    SQRT_2_OVER_PI * (1.0 - w * w) / (d * d)
}

/// μ_c(λ) = 2λ²∫₀^∞ g(p)²/p dp = 2λ²/π.
pub fn mu_critical(lambda: f64) -> f64 {
    2.0 * lambda * lambda / PI
}

/// μ_c by quadrature of its defining integral.
pub fn mu_critical_quadrature(lambda: f64, settings: &QuadratureSettings) -> Result<f64, ModelError> {
    let e = integrate_ray(
        |p| {
            let d = 1.0 + p * p;
            Complex64::new(2.0 / PI * p / (d * d), 0.0)
        },
        settings,
    )?;
    Ok(2.0 * lambda * lambda * e.value.re)
}

/// Germ ζ_{i,n}(λ) = (1 ∓ √(1+4nλ²))/2.
pub fn zeta_eigenvalue(i: u8, n: u32, lambda: f64) -> f64 {
    let r = (1.0 + 4.0 * f64::from(n) * lambda * lambda).sqrt();
    if i == 0 {
        0.5 * (1.0 - r)
    } else {
        0.5 * (1.0 + r)
    }
}

/// Unit eigenvector `(c_atom, c_photon)` of `[[1, √n λ], [√n λ, 0]]` for
/// ζ_{i,n}, in the basis (|1,g^{n-1}⟩, |0,g^n⟩), with c_atom ≥ 0.
pub fn phi_eigenvector_coeffs(i: u8, n: u32, lambda: f64) -> (f64, f64) {
    let zeta = zeta_eigenvalue(i, n, lambda);
    let b = f64::from(n).sqrt() * lambda;
    if zeta == 0.0 {
        return (0.0, 1.0);
    }
    let ratio = b / zeta;
    let norm = (1.0 + ratio * ratio).sqrt();
    (1.0 / norm, ratio / norm)
}

/// ln(−z) with the principal branch; `from_above` selects the upper-side
/// value when z lies on ℝ⁺.
fn log_neg(z: Complex64, from_above: bool) -> Complex64 {
    let w = -z;
    if w.im == 0.0 && w.re < 0.0 {
        let arg = if from_above { -PI } else { PI };
        return Complex64::new(w.re.abs().ln(), arg);
    }
    w.ln()
}

fn closed_form(lambda: f64, mu: f64, z: Complex64, log_mz: Complex64) -> Complex64 {
    let lam2 = lambda * lambda;
    let d = mu * mu + z * z;
    let num = 2.0 * mu.powi(3) + mu * mu * PI * z + 2.0 * mu * z * z - PI * z * z * z
        + 4.0 * mu * z * z * (mu.ln() - log_mz);
    z - 1.0 + lam2 * num / (PI * d * d)
}

fn closed_form_prime(lambda: f64, mu: f64, z: Complex64, log_mz: Complex64) -> Complex64 {
    let lam2 = lambda * lambda;
    let d = mu * mu + z * z;
    let l = mu.ln() - log_mz;
    let num = 2.0 * mu.powi(3) + mu * mu * PI * z + 2.0 * mu * z * z - PI * z * z * z + 4.0 * mu * z * z * l;
    let dnum = mu * mu * PI - 3.0 * PI * z * z + 8.0 * mu * z * l;
    1.0 + lam2 / PI * (dnum / (d * d) - 4.0 * z * num / (d * d * d))
}

fn plus_term(lambda: f64, mu: f64, z: Complex64) -> Complex64 {
    let g = g_complex(z / mu);
    Complex64::new(0.0, 4.0 * PI * lambda * lambda / mu) * g * g
}

fn plus_term_prime(lambda: f64, mu: f64, z: Complex64) -> Complex64 {
    let w = z / mu;
    Complex64::new(0.0, 8.0 * PI * lambda * lambda / (mu * mu)) * g_complex(w) * g_complex_prime(w)
}

/// Resolves the sheet at z: (use the f₊ term, take the log from above on ℝ⁺).
fn resolve(model: &TwoLevelModel, z: Complex64, sheet: Sheet) -> Result<(bool, bool), ModelError> {
    if model.mu == 0.0 {
        return Err(ModelError::MuZero);
    }
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(ModelError::Singular(z));
    }
    if z.norm() == 0.0 {
        return Err(ModelError::Singular(z));
    }
    let on_pos_axis = z.im == 0.0 && z.re > 0.0;
    let pole = (z + Complex64::new(0.0, model.mu)).norm() <= 1e-14 * model.mu.max(1e-300);
    match sheet {
        Sheet::Principal => {
            if on_pos_axis {
                return Err(ModelError::OnCut(z));
            }
            Ok((false, false))
        }
        Sheet::ContinuedPlus => {
            if on_pos_axis {
                return Err(ModelError::OnCut(z));
            }
            if pole {
                return Err(ModelError::Singular(z));
            }
            Ok((true, false))
        }
        Sheet::Hat => {
            if z.re == 0.0 && z.im < 0.0 {
                return Err(ModelError::OnCut(z));
            }
            if z.re > 0.0 && z.im < 0.0 {
                if pole {
                    return Err(ModelError::Singular(z));
                }
                Ok((true, false))
            } else {
                Ok((false, on_pos_axis))
            }
        }
    }
}

/// f(λ,μ,z) = z − 1 − 2λ²∫₀^∞ g(p)²/(z − μp) dp on the requested sheet.
pub fn eval_f(model: &TwoLevelModel, z: Complex64, sheet: Sheet) -> Result<Complex64, ModelError> {
    let (plus, above) = resolve(model, z, sheet)?;
    let lmz = log_neg(z, above);
    let mut v = closed_form(model.lambda, model.mu, z, lmz);
    if plus {
        v += plus_term(model.lambda, model.mu, z);
    }
    Ok(v)
}

/// ∂_z f on the requested sheet.
pub fn eval_f_prime(model: &TwoLevelModel, z: Complex64, sheet: Sheet) -> Result<Complex64, ModelError> {
    let (plus, above) = resolve(model, z, sheet)?;
    let lmz = log_neg(z, above);
    let mut v = closed_form_prime(model.lambda, model.mu, z, lmz);
    if plus {
        v += plus_term_prime(model.lambda, model.mu, z);
    }
    Ok(v)
}

/// f by direct quadrature of its defining integral (principal sheet, z off ℝ⁺).
pub fn eval_f_quadrature(
    model: &TwoLevelModel,
    z: Complex64,
    settings: &QuadratureSettings,
) -> Result<Complex64, ModelError> {
    if z.im == 0.0 && z.re >= 0.0 {
        return Err(ModelError::OnCut(z));
    }
    let mu = model.mu;
    let e = integrate_ray(
        |p| {
            let g = eval_g(p);
            Complex64::new(g * g, 0.0) / (z - mu * p)
        },
        settings,
    )?;
    Ok(z - 1.0 - 2.0 * model.lambda * model.lambda * e.value)
}

/// Real zero of the principal f below μ_c (the hybrid bound state).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundState {
    pub model: TwoLevelModel,
    pub z01: f64,
}

impl BoundState {
    pub fn new(model: TwoLevelModel) -> Result<Self, ModelError> {
        let mu_c = model.mu_c();
        if model.mu >= mu_c {
            return Err(ModelError::AboveCritical { mu: model.mu, mu_c });
        }
        if model.mu == 0.0 {
            return Ok(Self { model, z01: zeta_eigenvalue(0, 1, model.lambda) });
        }
        let z01 = real_zero_below(&model)?;
        Ok(Self { model, z01 })
    }

    /// Photon amplitude λ g(p)/(z₀,₁ − μ|p|).
    pub fn amplitude(&self, p: f64) -> f64 {
        self.model.lambda * eval_g(p) / (self.z01 - self.model.mu * p.abs())
    }

    /// ∫_ℝ |amplitude|² dp.
    pub fn photon_norm2(&self, settings: &QuadratureSettings) -> Result<f64, ModelError> {
        let e = integrate_ray(|p| Complex64::new(self.amplitude(p).powi(2), 0.0), settings)?;
        Ok(2.0 * e.value.re)
    }
}

pub fn photon_amplitude_psi01(model: &TwoLevelModel, p: f64) -> Result<f64, ModelError> {
    Ok(BoundState::new(*model)?.amplitude(p))
}

/// Bisection-safeguarded Newton for the real zero of f on (−∞, 0) when μ < μ_c.
fn real_zero_below(model: &TwoLevelModel) -> Result<f64, ModelError> {
    let f = |x: f64| eval_f(model, Complex64::new(x, 0.0), Sheet::Principal).map(|v| v.re);
    // f(0⁻) = −1 + μ_c/μ > 0 below μ_c, while f < 0 left of twice the germ.
    let mut hi = -1e-300_f64.max(1e-14 * model.mu);
    let mut lo = zeta_eigenvalue(0, 1, model.lambda) * 2.0 - 1e-3;
    let (flo, fhi) = (f(lo)?, f(hi)?);
    if flo.signum() == fhi.signum() {
        return Err(ModelError::InvalidParameter("no sign change for the bound state".into()));
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let fx = f(x)?;
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == flo.signum() {
            lo = x;
        } else {
            hi = x;
        }
        let d = eval_f_prime(model, Complex64::new(x, 0.0), Sheet::Principal)?.re;
        let newton = x - fx / d;
        x = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (hi - lo).abs() <= 1e-15 * x.abs().max(1e-300) || (fx / d).abs() <= 1e-17 * x.abs() {
            return Ok(x);
        }
    }
    Ok(x)
}
