//! Resonances of the Friedrichs atom-photon model.
//!
//! The two-level model couples a two-level atom (energies 0 and 1) to a
//! continuum through the fixed form factor `g(p) = √(2/π) p/(1+p²)`, with the
//! photon energy scaled by `μ`. Resonances are zeros of analytic
//! continuations of `f` (one excitation) and of the truncated Fredholm
//! determinant `D⁽¹⁾ = 1 − C₁` (two excitations), continued in `μ` from the
//! exactly solvable `μ = 0` point. The three-level part works at `μ = 0` on a
//! truncated Fock space.

pub mod bounds;
pub mod continuation;
pub mod error;
pub mod friedrichs;
pub mod par;
pub mod path;
pub mod quad;
pub mod root;
pub mod three_level;
pub mod two_excitation;

pub use num_complex::Complex64;

/// A point of the spectral plane.
pub type ComplexPoint = Complex64;

pub use continuation::{
    trace_resonance_along_path, trace_resonance_in_mu, Branch, ContinuationSettings, OneExcitationTracker,
    ParameterPath, ResonanceTrajectory, Sample,
};
pub use error::{ModelError, PathError, QuadError, RootError, ThreeLevelError, TraceError};
pub use friedrichs::{eval_f, eval_g, mu_critical, zeta_eigenvalue, Sheet, TwoLevelModel};
pub use par::Exec;
pub use path::{crossings_of_shifted_ray, gamma0_path, PolylinePath};
pub use quad::{integrate_ray, integrate_segment, Estimate, QuadratureSettings};
pub use root::{find_root_complex, RootResult, RootSettings};
