//! Three-level spectra and second-order shifts as JSON documents.

use resonance::three_level::{
    b2_matrix_discrepancy, b2_second_order, b2_second_order_printed, b2_spectrum, build_truncated_hamiltonian, eigh,
    exact_eigenvalue, family_energy, kato_matrix_second_order, kato_z2, prop41_spectrum, KatoFamily,
    NormalizationConvention, ThreeLevelModel,
};
use serde_json::{json, Value as Json};

use crate::config::{Convention, KatoArgs, KatoLevel, ModelArgs, Overlap, RunConfig};
use crate::error::{config, AtlasError};

/// Default model: e₁ = 1, e₂ = 2.3, λ₀₁ = 0.05, λ₁₂ = 0.07, all other entries 0.
pub fn resolve_model(args: &ModelArgs, file: &RunConfig) -> Result<ThreeLevelModel, AtlasError> {
    let sec = file.three_level.clone().unwrap_or_default();
    let overlap = |flag: &Option<String>, file: Option<Overlap>| -> Result<_, AtlasError> {
        Ok(match flag {
            Some(s) => Overlap::parse(s)?.value(),
            None => file.map_or(Default::default(), Overlap::value),
        })
    };
    ThreeLevelModel::new(
        args.e1.or(sec.e1).unwrap_or(1.0),
        args.e2.or(sec.e2).unwrap_or(2.3),
        args.l01.or(sec.l01).unwrap_or(0.05),
        args.l12.or(sec.l12).unwrap_or(0.07),
        args.l02.or(sec.l02).unwrap_or(0.0),
        overlap(&args.s0, sec.s0)?,
        overlap(&args.s1, sec.s1)?,
        overlap(&args.s2, sec.s2)?,
    )
    .map_err(|e| config(e.to_string()))
}

fn model_json(m: &ThreeLevelModel) -> Json {
    json!({
        "e1": m.e1, "e2": m.e2, "l01": m.l01, "l12": m.l12, "l02": m.l02,
        "s0": [m.s0.re, m.s0.im], "s1": [m.s1.re, m.s1.im], "s2": [m.s2.re, m.s2.im],
    })
}

fn computation(e: impl std::fmt::Display) -> AtlasError {
    AtlasError::Computation(e.to_string())
}

fn sector_oracle(model: &ThreeLevelModel, k: usize) -> Result<Vec<f64>, AtlasError> {
    let h = build_truncated_hamiltonian(&model.with_l02(0.0), k, false).map_err(computation)?;
    Ok(eigh(&h.sector_block(k).1).0)
}

fn nearest(xs: &[f64], x: f64) -> f64 {
    xs.iter().map(|y| (y - x).abs()).fold(f64::INFINITY, f64::min)
}

/// H₀ spectra on the one- and two-excitation sectors, each eigenvalue with
/// its distance to the truncated-Fock oracle.
pub fn spectrum(model: &ThreeLevelModel) -> Result<Json, AtlasError> {
    let one = sector_oracle(model, 1)?;
    let two = sector_oracle(model, 2)?;
    let prop41: Vec<Json> = prop41_spectrum(model)
        .iter()
        .map(|e| {
            json!({"label": e.label, "eigenvalue": e.eigenvalue, "atom": e.atom, "photon": e.photon,
                   "oracle_delta": nearest(&one, e.eigenvalue)})
        })
        .collect();
    let b2 = match b2_spectrum(model) {
        Ok(values) => {
            let deltas: Vec<f64> = values.iter().map(|&v| nearest(&two, v)).collect();
            json!({
                "eigenvalues": values,
                "oracle_deltas": deltas,
                "second_order": b2_second_order(model),
                "second_order_printed": b2_second_order_printed(model),
                "printed_matrix_discrepancy": b2_matrix_discrepancy(model).ok(),
            })
        }
        Err(e) => json!({ "error": e.to_string() }),
    };
    Ok(json!({
        "model": model_json(model),
        "prop41": prop41,
        "b2": b2,
        "oracle": { "sector1": one, "sector2": two },
    }))
}

pub struct KatoRequest {
    pub n: u32,
    pub family: KatoFamily,
    pub convention: NormalizationConvention,
    pub truncation: usize,
}

impl KatoRequest {
    pub fn resolve(args: &KatoArgs, file: &RunConfig) -> Result<Self, AtlasError> {
        let sec = file.kato.clone().unwrap_or_default();
        let n = args.n.or(sec.n).ok_or_else(|| config("kato needs --n"))?;
        let family = match args.level.or(sec.level).unwrap_or(KatoLevel::Lower) {
            KatoLevel::Lower => KatoFamily::Lower,
            KatoLevel::Upper => KatoFamily::Upper,
        };
        let convention = match args.convention.or(sec.convention).unwrap_or(Convention::Unit) {
            Convention::Unit => NormalizationConvention::Unit,
            Convention::Factorial => NormalizationConvention::Factorial,
        };
        let truncation = args.truncation.or(sec.truncation).unwrap_or(n as usize + 3);
        Ok(Self { n, family, convention, truncation })
    }
}

/// Analytic against finite-matrix second-order level, plus the exact
/// eigenvalue of H₀ + λ₀₂V on the same truncation.
pub fn kato(model: &ThreeLevelModel, req: &KatoRequest) -> Result<Json, AtlasError> {
    let zeta = family_energy(model, req.family);
    let analytic = kato_z2(model, req.family, req.n, req.convention).map_err(computation)?;
    let matrix = kato_matrix_second_order(model, req.family, req.n as usize, req.truncation).map_err(computation)?;
    let shift = matrix - zeta;
    let delta = (analytic - matrix).abs();
    let scale = 1e-10 * (1.0 + shift.abs());
    let (exact, _, overlap) =
        exact_eigenvalue(model, req.family, req.n as usize, req.truncation).map_err(computation)?;
    Ok(json!({
        "model": model_json(model),
        "level": req.family.name(),
        "n": req.n,
        "convention": format!("{:?}", req.convention).to_lowercase(),
        "truncation": req.truncation,
        "zeta": zeta,
        "analytic": analytic,
        "matrix": matrix,
        "shift": shift,
        "delta": delta,
        "delta_bound": scale,
        "agree": delta <= scale,
        "exact": { "eigenvalue": exact, "overlap": overlap, "error": (exact - matrix).abs() },
    }))
}
