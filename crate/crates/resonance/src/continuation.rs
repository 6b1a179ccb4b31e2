//! Natural-parameter continuation of a zero with a linear predictor, a
//! root-jump guard and step halving, plus the one-excitation trackers built
//! on it.

use std::fmt;

use num_complex::Complex64;

use crate::error::{RootError, TraceError};
use crate::friedrichs::{eval_f, mu_critical, zeta_eigenvalue, Sheet, TwoLevelModel};
use crate::root::{find_root_complex, RootResult, RootSettings};

/// Label attached to every trajectory sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Germ,
    Sheet(Sheet),
    PrincipalReal,
    LoopA0,
    LowerRight,
    LowerRightNearZ12,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Branch::Germ => "germ",
            Branch::Sheet(s) => s.name(),
            Branch::PrincipalReal => "principal_real",
            Branch::LoopA0 => "loop_a0",
            Branch::LowerRight => "lower_right",
            Branch::LowerRightNearZ12 => "lower_right_near_z12",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub mu: f64,
    pub z: Complex64,
    pub branch: Branch,
    pub residual: f64,
    pub iterations: usize,
    /// First sample after a seeded restart (the continuation is not
    /// connected to the previous sample).
    pub bridge: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceTrajectory {
    /// Family name, e.g. `z01`, `z11`, `z02`, `z12`.
    pub family: String,
    pub samples: Vec<Sample>,
}

impl ResonanceTrajectory {
    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }

    /// Sample whose μ is closest to `mu`.
    pub fn at(&self, mu: f64) -> Option<&Sample> {
        self.samples.iter().min_by(|a, b| (a.mu - mu).abs().total_cmp(&(b.mu - mu).abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuationSettings {
    /// Reject a step when |Δz| exceeds this multiple of the extrapolated step.
    pub guard: f64,
    /// Absolute allowance added to the guard, for steps where the predictor
    /// barely moves.
    pub guard_floor: f64,
    pub max_halvings: u32,
    pub root: RootSettings,
}

impl Default for ContinuationSettings {
    fn default() -> Self {
        Self { guard: 5.0, guard_floor: 1e-9, max_halvings: 6, root: RootSettings::default() }
    }
}

/// State of a one-parameter continuation: the current point and the
/// previous one (for the secant predictor).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Continuation {
    pub t: f64,
    pub z: Complex64,
    prev: Option<(f64, Complex64)>,
    pub last: Option<RootResult>,
}

impl Continuation {
    pub fn new(t: f64, z: Complex64) -> Self {
        Self { t, z, prev: None, last: None }
    }

    /// Forgets the predictor history (after a restart).
    pub fn reset(&mut self, t: f64, z: Complex64) {
        *self = Self::new(t, z);
    }

    fn predict(&self, t: f64) -> Complex64 {
        match self.prev {
            Some((tp, zp)) if tp != self.t => self.z + (self.z - zp) * ((t - self.t) / (self.t - tp)),
            _ => self.z,
        }
    }

    /// Advances to `target`, stepping no further than `max_step(t)` at a time.
    /// `solve(t, seed)` finds the zero at parameter `t`.
    pub fn advance<S, M>(
        &mut self,
        target: f64,
        mut max_step: M,
        mut solve: S,
        settings: &ContinuationSettings,
    ) -> Result<RootResult, TraceError>
    where
        S: FnMut(f64, Complex64) -> Result<RootResult, RootError>,
        M: FnMut(f64) -> f64,
    {
        if target == self.t {
            if let Some(r) = self.last {
                return Ok(r);
            }
            let r = solve(self.t, self.z).map_err(|source| TraceError::Seed { mu: self.t, source })?;
            self.z = r.root;
            self.last = Some(r);
            return Ok(r);
        }
        let dir = (target - self.t).signum();
        let mut halvings = 0;
        let mut scale = 1.0;
        loop {
            let remaining = (target - self.t).abs();
            let h = (max_step(self.t) * scale).min(remaining);
            // never leave a sliver: a tiny last step would make the secant predictor blow up
            let t_new = if remaining - h <= 1e-6 * h { target } else { self.t + dir * h };
            let pred = self.predict(t_new);
            let accepted = match solve(t_new, pred) {
                Ok(r) if r.converged => {
                    let allowed = match self.prev {
                        Some(_) => settings.guard * (pred - self.z).norm() + settings.guard_floor,
                        None => f64::INFINITY,
                    };
                    ((r.root - self.z).norm() <= allowed).then_some(r)
                }
                _ => None,
            };
            match accepted {
                Some(r) => {
                    self.prev = Some((self.t, self.z));
                    self.t = t_new;
                    self.z = r.root;
                    self.last = Some(r);
                    halvings = 0;
                    scale = 1.0;
                    if t_new == target {
                        return Ok(r);
                    }
                }
                None => {
                    halvings += 1;
                    if halvings > settings.max_halvings {
                        return Err(TraceError::Lost { mu: self.t, z: self.z });
                    }
                    scale *= 0.5;
                }
            }
        }
    }
}

fn check_grid(grid: &[f64]) -> Result<(), TraceError> {
    let ok = !grid.is_empty()
        && grid.iter().all(|m| m.is_finite() && *m >= 0.0)
        && grid.windows(2).all(|w| w[1] > w[0]);
    if ok {
        Ok(())
    } else {
        Err(TraceError::BadGrid)
    }
}

pub(crate) fn validate_grid(grid: &[f64]) -> Result<(), TraceError> {
    check_grid(grid)
}

/// Default μ step for one-excitation tracking away from μ_c.
const BASE_STEP: f64 = 0.02;

/// Relative offset of the restart point just above μ_c.
const HANDOFF_OFFSET: f64 = 1e-6;

/// Tracks z₀,₁ (family 0) or z₁,₁ (family 1) in μ at fixed λ. Stateful so
/// that callers can interleave it with other continuations.
#[derive(Debug, Clone)]
pub struct OneExcitationTracker {
    pub lambda: f64,
    pub family: u8,
    state: Continuation,
    sheet: Sheet,
    settings: ContinuationSettings,
}

impl OneExcitationTracker {
    pub fn new(lambda: f64, family: u8, settings: ContinuationSettings) -> Result<Self, TraceError> {
        if family > 1 || !(lambda > 0.0 && lambda.is_finite()) {
            return Err(TraceError::Model(crate::error::ModelError::InvalidParameter(format!(
                "family {family}, lambda {lambda}"
            ))));
        }
        let sheet = if family == 0 { Sheet::Principal } else { Sheet::ContinuedPlus };
        let germ = Complex64::new(zeta_eigenvalue(family, 1, lambda), 0.0);
        Ok(Self { lambda, family, state: Continuation::new(0.0, germ), sheet, settings })
    }

    pub fn mu(&self) -> f64 {
        self.state.t
    }

    pub fn z(&self) -> Complex64 {
        self.state.z
    }

    /// Sheet on which the current zero lives.
    pub fn sheet(&self) -> Sheet {
        self.sheet
    }

    fn model(&self, mu: f64) -> TwoLevelModel {
        TwoLevelModel { lambda: self.lambda, mu }
    }

    /// Moves the zero to `mu` (≥ the current μ) and returns the sample there.
    pub fn advance(&mut self, mu: f64) -> Result<Sample, TraceError> {
        if mu < self.state.t {
            return Err(TraceError::BadGrid);
        }
        if mu == 0.0 {
            return Ok(Sample {
                mu,
                z: self.state.z,
                branch: Branch::Germ,
                residual: 0.0,
                iterations: 0,
                bridge: false,
            });
        }
        let lambda = self.lambda;
        let mu_c = mu_critical(lambda);
        let root = self.settings.root;
        if self.family == 0 && self.sheet == Sheet::Principal {
            if mu == mu_c {
                // f(0⁻) = 0 exactly at μ_c
                return Ok(Sample {
                    mu,
                    z: Complex64::default(),
                    branch: Branch::Sheet(Sheet::Principal),
                    residual: 0.0,
                    iterations: 0,
                    bridge: false,
                });
            }
            if mu > mu_c {
                // The real zero reaches the branch point 0 at μ_c; restart on f₊ just above.
                let mu_s = (mu_c * (1.0 + HANDOFF_OFFSET)).min(mu);
                let seed = Complex64::new((1.0 - mu_c / mu_s) / (1.0 + lambda * lambda / (mu_s * mu_s)), -1e-14);
                let m = self.model(mu_s);
                let r = find_root_complex(|w| eval_f(&m, w, Sheet::ContinuedPlus), seed, &root)
                    .map_err(|source| TraceError::Seed { mu: mu_s, source })?;
                self.sheet = Sheet::ContinuedPlus;
                self.state.reset(mu_s, r.root);
                self.state.last = Some(r);
            } else {
                let r = self.state.advance(
                    mu,
                    |t| BASE_STEP.min(((mu_c - t) / 4.0).max(1e-12)).min(0.5 * t + 1e-5),
                    |t, seed| {
                        let m = TwoLevelModel { lambda, mu: t };
                        find_root_complex(|w| real_axis_f(&m, w), Complex64::new(seed.re, 0.0), &root)
                    },
                    &self.settings,
                )?;
                return self.sample(mu, r);
            }
        }
        let sheet = self.sheet;
        let r = self.state.advance(
            mu,
            |t| {
                let near = if t > mu_c { (t - mu_c) / 4.0 } else { f64::INFINITY };
                BASE_STEP.min(near).min(0.5 * t + 1e-4)
            },
            |t, seed| {
                let m = TwoLevelModel { lambda, mu: t };
                // off the cut of f₊ along ℝ⁺
                let seed = if seed.im == 0.0 { Complex64::new(seed.re, -1e-12) } else { seed };
                find_root_complex(|w| eval_f(&m, w, sheet), seed, &root)
            },
            &self.settings,
        )?;
        self.sample(mu, r)
    }

    fn sample(&self, mu: f64, r: RootResult) -> Result<Sample, TraceError> {
        let m = self.model(mu);
        let residual = eval_f(&m, r.root, self.sheet)?.norm();
        Ok(Sample {
            mu,
            z: r.root,
            branch: Branch::Sheet(self.sheet),
            residual,
            iterations: r.iterations,
            bridge: false,
        })
    }
}

/// f on the negative real axis, kept real so Newton stays on the axis.
fn real_axis_f(m: &TwoLevelModel, w: Complex64) -> Result<Complex64, crate::error::ModelError> {
    let x = Complex64::new(w.re, 0.0);
    if x.re >= 0.0 {
        return Err(crate::error::ModelError::OnCut(x));
    }
    eval_f(m, x, Sheet::Principal).map(|v| Complex64::new(v.re, 0.0))
}

/// z₀,₁ or z₁,₁ on an increasing μ grid starting at or near 0.
pub fn trace_resonance_in_mu(lambda: f64, family: u8, mu_grid: &[f64]) -> Result<ResonanceTrajectory, TraceError> {
    check_grid(mu_grid)?;
    let mut tracker = OneExcitationTracker::new(lambda, family, ContinuationSettings::default())?;
    let samples = mu_grid.iter().map(|&mu| tracker.advance(mu)).collect::<Result<Vec<_>, _>>()?;
    Ok(ResonanceTrajectory { family: format!("z{family}1"), samples })
}

/// Piecewise-linear path of waypoints in the (λ, μ) plane.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterPath {
    waypoints: Vec<(f64, f64)>,
}

impl ParameterPath {
    pub fn new(waypoints: Vec<(f64, f64)>) -> Result<Self, TraceError> {
        let ok = waypoints.len() >= 2
            && waypoints.iter().all(|&(l, m)| l >= 0.0 && m >= 0.0 && l.is_finite() && m.is_finite())
            && waypoints.windows(2).all(|w| w[0] != w[1]);
        if ok {
            Ok(Self { waypoints })
        } else {
            Err(TraceError::BadGrid)
        }
    }

    pub fn waypoints(&self) -> &[(f64, f64)] {
        &self.waypoints
    }

    pub fn length(&self) -> f64 {
        self.waypoints.windows(2).map(|w| (w[1].0 - w[0].0).hypot(w[1].1 - w[0].1)).sum()
    }

    /// Point at arc length `s`.
    pub fn at(&self, s: f64) -> (f64, f64) {
        let mut left = s;
        for w in self.waypoints.windows(2) {
            let len = (w[1].0 - w[0].0).hypot(w[1].1 - w[0].1);
            if left <= len {
                let u = left / len;
                return (w[0].0 + u * (w[1].0 - w[0].0), w[0].1 + u * (w[1].1 - w[0].1));
            }
            left -= len;
        }
        *self.waypoints.last().expect("at least two waypoints")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSample {
    pub s: f64,
    pub lambda: f64,
    pub mu: f64,
    pub z: Complex64,
    pub residual: f64,
    pub iterations: usize,
}

/// Continues a zero of `sheet` along `path`, reporting `samples + 1` equally
/// spaced points in arc length. Halts when the zero comes within `1e-6` of
/// 0 or of the pole −iμ.
pub fn trace_resonance_along_path(
    path: &ParameterPath,
    start: Complex64,
    sheet: Sheet,
    samples: usize,
) -> Result<Vec<PathSample>, TraceError> {
    const POLE_GUARD: f64 = 1e-6;
    let settings = ContinuationSettings::default();
    let total = path.length();
    let n = samples.max(1);
    let ds = total / n as f64;
    let max_step = (total / 400.0).min(ds);
    let mut state = Continuation::new(0.0, start);
    let mut out = Vec::with_capacity(n + 1);
    let eval = |s: f64, w: Complex64| {
        let (lambda, mu) = path.at(s);
        let m = TwoLevelModel { lambda, mu };
        if mu == 0.0 {
            // μ = 0: f is the rational function z − 1 − λ²/z.
            return Ok(w - 1.0 - lambda * lambda / w);
        }
        eval_f(&m, w, sheet)
    };
    for k in 0..=n {
        let s = if k == n { total } else { k as f64 * ds };
        let r = if k == 0 {
            let (lambda, mu) = path.at(0.0);
            if mu == 0.0 && lambda == 0.0 {
                RootResult { root: start, residual: 0.0, iterations: 0, converged: true }
            } else {
                let r = find_root_complex(|w| eval(0.0, w), start, &settings.root)
                    .map_err(|source| TraceError::Seed { mu, source })?;
                state.reset(0.0, r.root);
                r
            }
        } else {
            state.advance(s, |_| max_step, |t, seed| find_root_complex(|w| eval(t, w), seed, &settings.root), &settings)?
        };
        let (lambda, mu) = path.at(s);
        for point in [Complex64::default(), Complex64::new(0.0, -mu)] {
            let distance = (r.root - point).norm();
            if distance < POLE_GUARD {
                return Err(TraceError::PoleApproach { point, distance });
            }
        }
        let residual = eval(s, r.root).map(|v| v.norm()).unwrap_or(f64::NAN);
        out.push(PathSample { s, lambda, mu, z: r.root, residual, iterations: r.iterations });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::convert::Infallible;

    #[test]
    fn continuation_follows_a_moving_root() {
        let mut c = Continuation::new(0.0, Complex64::new(1.0, 0.0));
        let r = c
            .advance(
                2.0,
                |_| 0.1,
                |t, seed| find_root_complex(|w| Ok::<_, Infallible>(w * w - (1.0 + t)), seed, &RootSettings::default()),
                &ContinuationSettings::default(),
            )
            .unwrap();
        assert!((r.root.re - 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn bad_grids() {
        assert!(trace_resonance_in_mu(0.1, 0, &[0.0, 0.0]).is_err());
        assert!(trace_resonance_in_mu(0.1, 0, &[]).is_err());
        assert!(trace_resonance_in_mu(0.1, 2, &[0.0]).is_err());
    }

    #[test]
    fn path_arc_length() {
        let p = ParameterPath::new(vec![(0.0, 1.0), (0.1, 1.0)]).unwrap();
        assert!((p.length() - 0.1).abs() < 1e-15);
        assert_eq!(p.at(0.05), (0.05, 1.0));
        assert!(ParameterPath::new(vec![(0.1, 1.0)]).is_err());
    }
}
