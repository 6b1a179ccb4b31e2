//! Adaptive Gauss–Kronrod quadrature for complex-valued integrands along
//! straight segments, the half line, and the positive quadrant.

use num_complex::Complex64;

use crate::error::QuadError;

// 15-point Kronrod abscissae on [-1, 1] (non-negative half) with the
// embedded 7-point Gauss weights at the odd positions.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self { abs_tol: 1e-13, rel_tol: 1e-11, max_subdivisions: 2000 }
    }
}

impl QuadratureSettings {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Result<Self, QuadError> {
        if !(abs_tol > 0.0) || !(rel_tol > 0.0) || max_subdivisions == 0 {
            return Err(QuadError::InvalidSettings);
        }
        Ok(Self { abs_tol, rel_tol, max_subdivisions })
    }
}

/// Integral value with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: Complex64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

fn kronrod<F>(f: &mut F, a: f64, b: f64) -> Result<Panel, QuadError>
where
    F: FnMut(f64) -> Complex64,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    check(fc, center)?;
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut res_abs = fc.norm() * WGK[7];
    let mut fv = [(Complex64::default(), Complex64::default()); 7];
    for (j, &x) in XGK.iter().take(7).enumerate() {
        let dx = half * x;
        let (f1, f2) = (f(center - dx), f(center + dx));
        check(f1, center - dx)?;
        check(f2, center + dx)?;
        fv[j] = (f1, f2);
        kron += (f1 + f2) * WGK[j];
        res_abs += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            gauss += (f1 + f2) * WG[j / 2];
        }
    }
    let mean = kron * 0.5;
    let mut res_asc = WGK[7] * (fc - mean).norm();
    for (j, (f1, f2)) in fv.iter().enumerate() {
        res_asc += WGK[j] * ((f1 - mean).norm() + (f2 - mean).norm());
    }
    let (res_abs, res_asc) = (res_abs * half.abs(), res_asc * half.abs());
    let mut err = ((kron - gauss) * half).norm();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok(Panel { a, b, value: kron * half, error: err })
}

fn check(v: Complex64, t: f64) -> Result<(), QuadError> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(())
    } else {
        Err(QuadError::NonFinite { at: t })
    }
}

/// Globally adaptive bisection of `[a, b]`: the panel with the largest error
/// estimate is split at its midpoint until the total error is within
/// tolerance.
pub fn adaptive<F>(mut f: F, a: f64, b: f64, settings: &QuadratureSettings) -> Result<Estimate, QuadError>
where
    F: FnMut(f64) -> Complex64,
{
    let mut panels = vec![kronrod(&mut f, a, b)?];
    let mut evaluations = 15;
    loop {
        let value: Complex64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        if error <= settings.abs_tol.max(settings.rel_tol * value.norm()) {
            return Ok(Estimate { value, error, evaluations });
        }
        if panels.len() >= settings.max_subdivisions {
            return Err(QuadError::ToleranceNotMet { value, error });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            return Err(QuadError::ToleranceNotMet { value, error });
        }
        panels.push(kronrod(&mut f, p.a, mid)?);
        panels.push(kronrod(&mut f, mid, p.b)?);
        evaluations += 30;
    }
}

/// Integral of `f` along the straight segment from `a` to `b`.
pub fn integrate_segment<F>(
    mut f: F,
    a: Complex64,
    b: Complex64,
    settings: &QuadratureSettings,
) -> Result<Estimate, QuadError>
where
    F: FnMut(Complex64) -> Complex64,
{
    let d = b - a;
    if d.norm() == 0.0 {
        return Ok(Estimate { value: Complex64::default(), error: 0.0, evaluations: 0 });
    }
    adaptive(|t| f(a + d * t) * d, 0.0, 1.0, settings)
}

/// Integral of `f` over `[0, ∞)` after the change of variable `q = t/(1-t)`.
pub fn integrate_ray<F>(mut f: F, settings: &QuadratureSettings) -> Result<Estimate, QuadError>
where
    F: FnMut(f64) -> Complex64,
{
    let mapped = |t: f64| {
        let s = 1.0 - t;
        f(t / s) / (s * s)
    };
    let stalled = match adaptive(mapped, 0.0, 1.0, settings) {
        Ok(e) => return Ok(e),
        Err(QuadError::ToleranceNotMet { value, error }) => QuadError::ToleranceNotMet { value, error },
        // bisection reached the image of q = ∞
        Err(QuadError::NonFinite { at }) if at >= 1.0 => QuadError::NonFinite { at },
        Err(e) => return Err(e),
    };
    // A stalled tail panel means the integrand does not decay fast enough.
    let mut g = |t: f64| {
        let s = 1.0 - t;
        f(t / s) / (s * s)
    };
    let tail = kronrod(&mut g, 1.0 - 1e-6, 1.0)?;
    let scale = match stalled {
        QuadError::ToleranceNotMet { value, .. } => value.norm(),
        _ => 0.0,
    };
    if tail.value.norm() > settings.abs_tol.max(1e-3 * scale) {
        Err(QuadError::Divergent)
    } else {
        Err(stalled)
    }
}

/// Integral of `f(p, q)` over `[0, ∞)²`, as nested adaptive rules on the
/// compactified square. The inner rule runs at a tenth of the outer tolerance.
pub fn integrate_quadrant<F>(f: F, settings: &QuadratureSettings) -> Result<Estimate, QuadError>
where
    F: Fn(f64, f64) -> Complex64,
{
    let inner = QuadratureSettings {
        abs_tol: settings.abs_tol * 0.1,
        rel_tol: settings.rel_tol * 0.1,
        ..*settings
    };
    let mut failure = None;
    let mut evaluations = 0;
    let outer = integrate_ray(
        |p| match integrate_ray(|q| f(p, q), &inner) {
            Ok(e) => {
                evaluations += e.evaluations;
                e.value
            }
            Err(QuadError::ToleranceNotMet { value, .. }) => value,
            Err(e) => {
                failure.get_or_insert(e);
                Complex64::new(f64::NAN, 0.0)
            }
        },
        settings,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    outer.map(|e| Estimate { evaluations, ..e })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_kronrod_is_exact_for_low_degree() {
        let s = QuadratureSettings::default();
        let e = adaptive(|t| Complex64::new(t.powi(5), 3.0 * t * t), 0.0, 2.0, &s).unwrap();
        assert!((e.value - Complex64::new(64.0 / 6.0, 8.0)).norm() < 1e-13);
        assert!(e.evaluations == 15);
    }

    #[test]
    fn bad_settings_rejected() {
        assert!(QuadratureSettings::new(0.0, 1e-8, 10).is_err());
        assert!(QuadratureSettings::new(1e-8, 1e-8, 0).is_err());
    }

    #[test]
    fn slow_tail_is_divergent() {
        let s = QuadratureSettings { max_subdivisions: 200, ..Default::default() };
        let r = integrate_ray(|q| Complex64::new(1.0 / (1.0 + q).sqrt(), 0.0), &s);
        assert!(matches!(r, Err(QuadError::Divergent)), "{r:?}");
    }

    #[test]
    fn quadrant_of_separable_function() {
        let s = QuadratureSettings { abs_tol: 1e-12, rel_tol: 1e-9, max_subdivisions: 500 };
        let e = integrate_quadrant(|p, q| Complex64::new((-p - 2.0 * q).exp(), 0.0), &s).unwrap();
        assert!((e.value.re - 0.5).abs() < 1e-9);
    }
}
