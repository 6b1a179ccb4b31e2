//! Two-excitation sector: the kernel pieces, the truncated determinant
//! D⁽¹⁾ = 1 − C₁ and its continuations past the branch points 0, z₀,₁ and
//! z₁,₁, and tracing of z₀,₂ and z₁,₂ in μ.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::continuation::{
    validate_grid, Branch, Continuation, ContinuationSettings, OneExcitationTracker, ResonanceTrajectory, Sample,
};
use crate::error::{ModelError, RootError, TraceError};
use crate::friedrichs::{
    eval_f, eval_f_prime, eval_g, g_complex, mu_critical, zeta_eigenvalue, Sheet, TwoLevelModel,
};
use crate::path::{crossings_of_shifted_ray, gamma0_path};
use crate::quad::{integrate_ray, integrate_segment, QuadratureSettings};
use crate::root::{find_root_complex, RootResult};

/// Continuation of D⁽¹⁾ being evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BranchTag2 {
    /// The defining integral; near ℝ⁻ and in the upper half-plane.
    PrincipalReal,
    /// Continued once around z₀,₁ (real z₀,₁, Re z < 0).
    LoopA0,
    /// Continued into Re z > 0, Im z < 0 without encircling z₁,₁.
    LowerRight,
    /// LowerRight continued across z₁,₁ + ℝ⁺, valid near z₁,₂.
    LowerRightNearZ12,
}

impl BranchTag2 {
    pub fn name(self) -> &'static str {
        match self {
            BranchTag2::PrincipalReal => "principal_real",
            BranchTag2::LoopA0 => "loop_a0",
            BranchTag2::LowerRight => "lower_right",
            BranchTag2::LowerRightNearZ12 => "lower_right_near_z12",
        }
    }

    fn label(self) -> Branch {
        match self {
            BranchTag2::PrincipalReal => Branch::PrincipalReal,
            BranchTag2::LoopA0 => Branch::LoopA0,
            BranchTag2::LowerRight => Branch::LowerRight,
            BranchTag2::LowerRightNearZ12 => Branch::LowerRightNearZ12,
        }
    }
}

/// Imaginary height of the γ₀ polyline.
pub const GAMMA0_EPSILON: f64 = 1e-3;

/// Zero z₀,₂ of the LowerRight branch at μ = 7·10⁻³ used to restart past μ_c.
pub const Z02_BRIDGE_MU: f64 = 7e-3;
pub const Z02_BRIDGE_SEED: Complex64 = Complex64::new(2.8e-4, -2.4e-5);

const CONTEXT_RESIDUAL: f64 = 1e-10;

/// A two-level model together with its one-excitation resonances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoExcitationContext {
    pub model: TwoLevelModel,
    pub z01: Complex64,
    pub z11: Complex64,
    /// Sheet on which z₀,₁ is a zero: principal below μ_c, f₊ above.
    pub z01_sheet: Sheet,
    pub quad: QuadratureSettings,
}

impl TwoExcitationContext {
    /// Checks that z₀,₁ and z₁,₁ are zeros of their sheets.
    pub fn new(model: TwoLevelModel, z01: Complex64, z11: Complex64) -> Result<Self, ModelError> {
        let z01_sheet = if z01.im == 0.0 && z01.re < 0.0 { Sheet::Principal } else { Sheet::ContinuedPlus };
        if model.mu > 0.0 {
            // at μ = μ_c the zero sits on the branch point 0, where f(0⁻) = 0
            let r0 = if z01 == Complex64::default() { 0.0 } else { eval_f(&model, z01, z01_sheet)?.norm() };
            let r1 = eval_f(&model, z11, Sheet::ContinuedPlus)?.norm();
            if r0 > CONTEXT_RESIDUAL || r1 > CONTEXT_RESIDUAL {
                return Err(ModelError::InvalidParameter(format!(
                    "context resonances not converged (residuals {r0:e}, {r1:e})"
                )));
            }
        }
        Ok(Self { model, z01, z11, z01_sheet, quad: QuadratureSettings::default() })
    }

    /// Context at (λ, μ), tracking z₀,₁ and z₁,₁ up from μ = 0.
    pub fn at(lambda: f64, mu: f64) -> Result<Self, TraceError> {
        let mut t0 = OneExcitationTracker::new(lambda, 0, ContinuationSettings::default())?;
        let mut t1 = OneExcitationTracker::new(lambda, 1, ContinuationSettings::default())?;
        let z01 = t0.advance(mu)?.z;
        let z11 = t1.advance(mu)?.z;
        Ok(Self::new(TwoLevelModel { lambda, mu }, z01, z11)?)
    }

    /// Base point of γ₀: real and left of every branch point.
    pub fn base_point(&self) -> f64 {
        zeta_eigenvalue(0, 2, self.model.lambda) - 0.05
    }

    /// Whether γ₀(z) crosses z₀,₁ + ℝ⁺, i.e. whether the q₀ residue is picked up.
    pub fn crosses_z01(&self, z: Complex64) -> Result<bool, ModelError> {
        let path = gamma0_path(self.base_point(), z, GAMMA0_EPSILON)
            .map_err(|e| ModelError::InvalidParameter(e.to_string()))?;
        let n = crossings_of_shifted_ray(&path, self.z01).map_err(|e| ModelError::InvalidParameter(e.to_string()))?;
        Ok(n != 0)
    }
}

/// (T_{μ,z}w)(p) = ∫_ℝ g(q) w(q)/(z − μ(|p|+|q|)) dq, folded onto q ≥ 0.
pub fn eval_t<W>(model: &TwoLevelModel, z: Complex64, weights: W, p: f64) -> Result<Complex64, ModelError>
where
    W: Fn(f64) -> Complex64,
{
    let mu = model.mu;
    if z.im == 0.0 && z.re >= mu * p.abs() {
        return Err(ModelError::OnCut(z));
    }
    let e = integrate_ray(
        |q| {
            let num = eval_g(q) * weights(q) + eval_g(-q) * weights(-q);
            num / (z - mu * (p.abs() + q))
        },
        &QuadratureSettings::default(),
    )?;
    Ok(e.value)
}

/// K_{μ,z}(p, q) = g(p)g(q)/(f(z − μ|p|)·(z − μ(|p|+|q|))).
pub fn eval_k_kernel(model: &TwoLevelModel, z: Complex64, p: f64, q: f64) -> Result<Complex64, ModelError> {
    let gp = eval_g(p) * eval_g(q);
    if gp == 0.0 {
        return Ok(Complex64::default());
    }
    let first = if model.mu == 0.0 {
        z - 1.0 - model.lambda * model.lambda / z
    } else {
        eval_f(model, z - model.mu * p.abs(), Sheet::Principal)?
    };
    let second = z - model.mu * (p.abs() + q.abs());
    let den = first * second;
    if den.norm() == 0.0 {
        return Err(ModelError::Singular(z));
    }
    Ok(gp / den)
}

/// First denominator of the kernel written through T: z − 1 − μ|p| − λ²(Tg)(p).
pub fn kernel_denominator_via_t(model: &TwoLevelModel, z: Complex64, p: f64) -> Result<Complex64, ModelError> {
    let t = eval_t(model, z, |q| Complex64::new(eval_g(q), 0.0), p)?;
    Ok(z - 1.0 - model.mu * p.abs() - model.lambda * model.lambda * t)
}

/// C₁ = 2λ² ∫₀^∞ g(p)²/((z − 2μp) f(z − μp)) dp; at μ = 0, λ²/(z(z−1) − λ²).
pub fn eval_c1(model: &TwoLevelModel, z: Complex64) -> Result<Complex64, ModelError> {
    eval_c1_with(model, z, &QuadratureSettings::default())
}

pub fn eval_c1_with(model: &TwoLevelModel, z: Complex64, settings: &QuadratureSettings) -> Result<Complex64, ModelError> {
    let lam2 = model.lambda * model.lambda;
    if lam2 == 0.0 {
        return Ok(Complex64::default());
    }
    if model.mu == 0.0 {
        let den = z * (z - 1.0) - lam2;
        if den.norm() == 0.0 {
            return Err(ModelError::Singular(z));
        }
        return Ok(lam2 / den);
    }
    if z.im == 0.0 && z.re >= 0.0 {
        return Err(ModelError::OnCut(z));
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
            match eval_f(model, w, Sheet::Principal) {
                Ok(f) => g * g / ((z - 2.0 * mu * p) * f),
                Err(e) => {
                    failure.get_or_insert(e);
                    Complex64::new(f64::NAN, 0.0)
                }
            }
        },
        settings,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(2.0 * lam2 * e?.value)
}

/// ψ_F(q) = g(q/μ)²/((z − 2q) F(z − q)).
fn psi(model: &TwoLevelModel, z: Complex64, q: Complex64, sheet: Sheet) -> Result<Complex64, ModelError> {
    let g = g_complex(q / model.mu);
    Ok(g * g / ((z - 2.0 * q) * eval_f(model, z - q, sheet)?))
}

fn integrate_path<F>(mut f: F, a: Complex64, b: Complex64, settings: &QuadratureSettings) -> Result<Complex64, ModelError>
where
    F: FnMut(Complex64) -> Result<Complex64, ModelError>,
{
    let mut failure = None;
    let e = integrate_segment(
        |q| match f(q) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                Complex64::new(f64::NAN, 0.0)
            }
        },
        a,
        b,
        settings,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(e?.value)
}

/// Residue contribution −2iπ g(q/μ)²/((2c − z) F′(c)) of the pole at z − q = c.
fn pole_term(model: &TwoLevelModel, z: Complex64, c: Complex64, sheet: Sheet) -> Result<Complex64, ModelError> {
    let d = eval_f_prime(model, c, sheet)?;
    if d.norm() == 0.0 {
        return Err(ModelError::ResidueDerivative(c));
    }
    let g = g_complex((z - c) / model.mu);
    Ok(Complex64::new(0.0, -2.0 * PI) * g * g / ((2.0 * c - z) * d))
}

/// D⁽¹⁾ on the requested continuation.
pub fn eval_d1(ctx: &TwoExcitationContext, z: Complex64, branch: BranchTag2) -> Result<Complex64, ModelError> {
    let model = &ctx.model;
    let lam2 = model.lambda * model.lambda;
    let region = |ok: bool| if ok { Ok(()) } else { Err(ModelError::BranchRegion { z, branch: branch.name() }) };
    match branch {
        BranchTag2::PrincipalReal => {
            region(!(z.re > 0.0 && z.im < 0.0))?;
            Ok(1.0 - eval_c1_with(model, z, &ctx.quad)?)
        }
        BranchTag2::LoopA0 => {
            if model.mu == 0.0 {
                return Err(ModelError::MuZero);
            }
            region(z.re < 0.0)?;
            let base = 1.0 - eval_c1_with(model, z, &ctx.quad)?;
            Ok(base + loop_a0_term(ctx, z)?)
        }
        BranchTag2::LowerRight | BranchTag2::LowerRightNearZ12 => {
            if model.mu == 0.0 {
                return Err(ModelError::MuZero);
            }
            region(z.re > 0.0 && z.im < 0.0)?;
            let mut i = lower_right_integral(ctx, z)?;
            if branch == BranchTag2::LowerRightNearZ12 {
                i += pole_term(model, z, ctx.z11, Sheet::ContinuedPlus)?;
            }
            Ok(1.0 - 2.0 * lam2 / model.mu * i)
        }
    }
}

/// Difference LoopA0 − PrincipalReal: 4iπ(λ²/μ) g(q₀/μ)²/((z − 2q₀) f′(z₀,₁)), q₀ = z − z₀,₁.
pub fn loop_a0_term(ctx: &TwoExcitationContext, z: Complex64) -> Result<Complex64, ModelError> {
    let model = &ctx.model;
    let q0 = z - ctx.z01;
    let d = eval_f_prime(model, ctx.z01, ctx.z01_sheet)?;
    if d.norm() == 0.0 {
        return Err(ModelError::ResidueDerivative(ctx.z01));
    }
    let g = g_complex(q0 / model.mu);
    Ok(Complex64::new(0.0, 4.0 * PI * model.lambda * model.lambda / model.mu) * g * g / ((z - 2.0 * q0) * d))
}

/// Difference LowerRightNearZ12 − LowerRight.
pub fn near_z12_term(ctx: &TwoExcitationContext, z: Complex64) -> Result<Complex64, ModelError> {
    let model = &ctx.model;
    let t = pole_term(model, z, ctx.z11, Sheet::ContinuedPlus)?;
    Ok(-2.0 * model.lambda * model.lambda / model.mu * t)
}

/// Continuation of ∫₀^∞ψ_f from the upper half-plane into Re z > 0, Im z < 0:
/// the ray is deformed to [0, Re z] ∪ [Re z, z], across which f is replaced
/// by f₊, with the residues of the poles the deformation sweeps over.
fn lower_right_integral(ctx: &TwoExcitationContext, z: Complex64) -> Result<Complex64, ModelError> {
    let model = &ctx.model;
    let s = &ctx.quad;
    let x = Complex64::new(z.re, 0.0);
    let origin = Complex64::default();
    let diff = |q: Complex64| Ok(psi(model, z, q, Sheet::ContinuedPlus)? - psi(model, z, q, Sheet::Principal)?);
    let mut i = integrate_path(diff, origin, x, s)? + integrate_path(diff, x, z, s)?;
    let mut failure = None;
    let ray = integrate_ray(
        |q| match psi(model, z, Complex64::new(q, 0.0), Sheet::Principal) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                Complex64::new(f64::NAN, 0.0)
            }
        },
        s,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    i += ray?.value;
    let half = z / 2.0;
    let gh = g_complex(half / model.mu);
    i += Complex64::new(0.0, -PI) * gh * gh / eval_f(model, half, Sheet::ContinuedPlus)?;
    if ctx.crosses_z01(z)? {
        i += pole_term(model, z, ctx.z01, ctx.z01_sheet)?;
    }
    Ok(i)
}

/// Zero of the LoopA0 branch near `seed`.
pub fn find_a0_zero(ctx: &TwoExcitationContext, seed: Complex64) -> Result<RootResult, RootError> {
    find_root_complex(|w| eval_d1(ctx, w, BranchTag2::LoopA0), seed, &ContinuationSettings::default().root)
}

/// Tolerances for D⁽¹⁾ zeros: the determinant is itself a quadrature.
fn d1_settings() -> ContinuationSettings {
    let mut s = ContinuationSettings::default();
    s.root.abs_tol = 1e-11;
    s.root.rel_tol = 1e-10;
    s.root.max_iterations = 40;
    s
}

/// Lazily tracked one-excitation resonances, advanced on demand. A request
/// below the cached μ restarts from the committed state.
struct ContextTracker {
    lambda: f64,
    committed: (OneExcitationTracker, OneExcitationTracker),
    latest: (OneExcitationTracker, OneExcitationTracker),
}

impl ContextTracker {
    fn new(lambda: f64) -> Result<Self, TraceError> {
        let s = ContinuationSettings::default();
        let pair = (OneExcitationTracker::new(lambda, 0, s)?, OneExcitationTracker::new(lambda, 1, s)?);
        Ok(Self { lambda, committed: pair.clone(), latest: pair })
    }

    fn context(&mut self, mu: f64) -> Result<TwoExcitationContext, TraceError> {
        if mu < self.latest.0.mu() {
            self.latest = self.committed.clone();
        }
        let z01 = self.latest.0.advance(mu)?.z;
        let z11 = self.latest.1.advance(mu)?.z;
        Ok(TwoExcitationContext::new(TwoLevelModel { lambda: self.lambda, mu }, z01, z11)?)
    }

    fn commit(&mut self, mu: f64) -> Result<(), TraceError> {
        self.context(mu)?;
        self.committed = self.latest.clone();
        Ok(())
    }
}

fn d1_sample(
    ctx: &TwoExcitationContext,
    r: RootResult,
    branch: BranchTag2,
    bridge: bool,
) -> Result<Sample, TraceError> {
    let residual = eval_d1(ctx, r.root, branch)?.norm();
    Ok(Sample { mu: ctx.model.mu, z: r.root, branch: branch.label(), residual, iterations: r.iterations, bridge })
}

/// Tracks a D⁽¹⁾ zero over `grid` (all points ≥ the state's μ) on one branch.
fn track_branch(
    tracker: &RefCell<ContextTracker>,
    state: &mut Continuation,
    grid: &[f64],
    branch: BranchTag2,
    max_step: impl Fn(f64) -> f64 + Copy,
    mut bridge: bool,
    emit: &mut dyn FnMut(Sample),
) -> Result<(), TraceError> {
    let settings = d1_settings();
    let real = branch == BranchTag2::PrincipalReal;
    for &mu in grid {
        let r = state.advance(
            mu,
            max_step,
            |t, seed| {
                let ctx = tracker.borrow_mut().context(t).map_err(|e| RootError::Evaluation(e.to_string()))?;
                let seed = if real { Complex64::new(seed.re, 0.0) } else { seed };
                let r = find_root_complex(
                    |w| {
                        if real {
                            eval_d1(&ctx, Complex64::new(w.re, 0.0), branch).map(|v| Complex64::new(v.re, 0.0))
                        } else {
                            eval_d1(&ctx, w, branch)
                        }
                    },
                    seed,
                    &settings.root,
                )?;
                Ok(r)
            },
            &settings,
        )?;
        let ctx = tracker.borrow_mut().context(mu)?;
        tracker.borrow_mut().commit(mu)?;
        emit(d1_sample(&ctx, r, branch, bridge)?);
        bridge = false;
    }
    Ok(())
}

/// z₀,₂ at fixed λ: the real zero of PrincipalReal up to μ_c, then the
/// LowerRight zero restarted at μ = 7·10⁻³. Grid points strictly between are
/// skipped; the first LowerRight sample carries the bridge flag.
pub fn trace_z02(lambda: f64, mu_grid: &[f64]) -> Result<ResonanceTrajectory, TraceError> {
    let mut samples = Vec::with_capacity(mu_grid.len());
    trace_z02_with(lambda, mu_grid, &mut |s| samples.push(s))?;
    Ok(ResonanceTrajectory { family: "z02".into(), samples })
}

/// [`trace_z02`], handing each sample to `emit` as soon as it converges.
pub fn trace_z02_with(lambda: f64, mu_grid: &[f64], emit: &mut dyn FnMut(Sample)) -> Result<(), TraceError> {
    validate_grid(mu_grid)?;
    let mu_c = mu_critical(lambda);
    let upper = mu_c * (1.0 + 1e-6);
    let tracker = RefCell::new(ContextTracker::new(lambda)?);
    let below: Vec<f64> = mu_grid.iter().copied().filter(|&m| m <= upper).collect();
    if !below.is_empty() {
        let germ = Complex64::new(zeta_eigenvalue(0, 2, lambda), 0.0);
        let mut state = Continuation::new(0.0, germ);
        let mut rest = below.as_slice();
        if rest[0] == 0.0 {
            let ctx = tracker.borrow_mut().context(0.0)?;
            let r = find_root_complex(
                |w| eval_d1(&ctx, w, BranchTag2::PrincipalReal),
                germ,
                &d1_settings().root,
            )
            .map_err(|source| TraceError::Seed { mu: 0.0, source })?;
            emit(d1_sample(&ctx, r, BranchTag2::PrincipalReal, false)?);
            state.reset(0.0, r.root);
            rest = &rest[1..];
        }
        track_branch(
            &tracker,
            &mut state,
            rest,
            BranchTag2::PrincipalReal,
            |t| 5e-4f64.min(0.5 * t + 2e-5),
            false,
            emit,
        )?;
    }
    let above: Vec<f64> = mu_grid.iter().copied().filter(|&m| m >= Z02_BRIDGE_MU).collect();
    if !above.is_empty() {
        let ctx = tracker.borrow_mut().context(Z02_BRIDGE_MU)?;
        let r = find_root_complex(
            |w| eval_d1(&ctx, w, BranchTag2::LowerRight),
            Z02_BRIDGE_SEED,
            &d1_settings().root,
        )
        .map_err(|source| TraceError::Seed { mu: Z02_BRIDGE_MU, source })?;
        tracker.borrow_mut().commit(Z02_BRIDGE_MU)?;
        let mut state = Continuation::new(Z02_BRIDGE_MU, r.root);
        state.last = Some(r);
        track_branch(
            &tracker,
            &mut state,
            &above,
            BranchTag2::LowerRight,
            |t| 0.02f64.min(0.1 * t),
            true,
            emit,
        )?;
    }
    Ok(())
}

/// μ at which the z₁,₂ continuation starts from its germ.
pub const Z12_START_MU: f64 = 3e-4;

/// z₁,₂ at fixed λ on the branch valid near it, continued from ζ₁,₂.
pub fn trace_z12(lambda: f64, mu_grid: &[f64]) -> Result<ResonanceTrajectory, TraceError> {
    let mut samples = Vec::with_capacity(mu_grid.len());
    trace_z12_with(lambda, mu_grid, &mut |s| samples.push(s))?;
    Ok(ResonanceTrajectory { family: "z12".into(), samples })
}

/// [`trace_z12`], handing each sample to `emit` as soon as it converges.
pub fn trace_z12_with(lambda: f64, mu_grid: &[f64], emit: &mut dyn FnMut(Sample)) -> Result<(), TraceError> {
    validate_grid(mu_grid)?;
    let tracker = RefCell::new(ContextTracker::new(lambda)?);
    let germ = zeta_eigenvalue(1, 2, lambda);
    let mut rest = mu_grid;
    if rest[0] == 0.0 {
        emit(Sample {
            mu: 0.0,
            z: Complex64::new(germ, 0.0),
            branch: Branch::Germ,
            residual: 0.0,
            iterations: 0,
            bridge: false,
        });
        rest = &rest[1..];
    }
    if rest.is_empty() {
        return Ok(());
    }
    let start = rest[0].min(Z12_START_MU);
    let ctx = tracker.borrow_mut().context(start)?;
    let branch = BranchTag2::LowerRightNearZ12;
    let r = find_root_complex(|w| eval_d1(&ctx, w, branch), Complex64::new(germ, -1e-5), &d1_settings().root)
        .map_err(|source| TraceError::Seed { mu: start, source })?;
    tracker.borrow_mut().commit(start)?;
    let mut state = Continuation::new(start, r.root);
    state.last = Some(r);
    track_branch(&tracker, &mut state, rest, branch, |t| 0.02f64.min(0.25 * t), false, emit)?;
    Ok(())
}
