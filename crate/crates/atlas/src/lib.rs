//! Front end for the `resonance` crate: trajectory sweeps with resume,
//! recomputed reference tables with a pass/fail report, three-level
//! spectra and the critical scale.
//!
//! Exit status: 0 when every comparison passes, 2 when some comparison
//! fails, 3 when a computation aborts, 1 for invalid input.

pub mod config;
pub mod error;
pub mod grid;
pub mod reference;
pub mod tables;
pub mod threelevel;
pub mod trace;

use std::io::Write;

use resonance::friedrichs::mu_critical_quadrature;
use resonance::{mu_critical, QuadratureSettings};
use serde_json::Value as Json;

pub use config::{Cli, Command, RunConfig, Settings};
pub use error::AtlasError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_MISMATCH: i32 = 2;
pub const EXIT_ABORTED: i32 = 3;

/// Largest oracle distance accepted for three-level spectra.
pub const SPECTRUM_TOLERANCE: f64 = 1e-9;

fn write_json(settings: &Settings, name: &str, value: &impl serde::Serialize) -> Result<(), AtlasError> {
    std::fs::create_dir_all(&settings.out)?;
    let text = serde_json::to_string_pretty(value).map_err(|e| AtlasError::Computation(e.to_string()))?;
    std::fs::write(settings.out.join(name), text + "\n")?;
    Ok(())
}

#[cfg(feature = "parallel")]
fn configure_pool(jobs: usize) {
    // an already initialised pool (second call in one process) is fine
    let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
}

#[cfg(not(feature = "parallel"))]
fn configure_pool(_jobs: usize) {}

fn spectrum_passes(doc: &Json) -> bool {
    let deltas = doc["prop41"]
        .as_array()
        .into_iter()
        .flatten()
        .map(|e| &e["oracle_delta"])
        .chain(doc["b2"]["oracle_deltas"].as_array().into_iter().flatten());
    deltas.map(|d| d.as_f64().unwrap_or(f64::INFINITY)).all(|d| d <= SPECTRUM_TOLERANCE)
}

/// Executes a parsed command line and returns the process exit status.
pub fn run(cli: &Cli) -> Result<i32, AtlasError> {
    let file = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let settings = Settings::merge(cli, &file)?;
    configure_pool(settings.jobs);
    let mut stdout = std::io::stdout().lock();
    match &cli.command {
        Command::Trace(args) => {
            let job = trace::TraceJob::resolve(args, &file)?;
            let o = trace::run_trace(&job, &settings)?;
            writeln!(stdout, "{}: {} rows kept, {} written", o.path.display(), o.kept, o.written)?;
            Ok(EXIT_OK)
        }
        Command::Tables(args) => {
            let which = args.which.or(file.which).ok_or_else(|| error::config("tables needs --which"))?;
            let computed = tables::compute(which, &settings);
            let rows = tables::report(which, &computed);
            std::fs::create_dir_all(&settings.out)?;
            std::fs::write(settings.out.join(format!("{}.csv", which.name())), tables::table_csv(&rows))?;
            write_json(&settings, &format!("report_{}.json", which.name()), &rows)?;
            tables::render(&rows, &mut stdout)?;
            Ok(if rows.iter().all(|r| r.pass) { EXIT_OK } else { EXIT_MISMATCH })
        }
        Command::Threelevel(args) => {
            use config::ThreeLevelAction;
            let (name, doc, pass) = match &args.action {
                ThreeLevelAction::Spectrum(m) => {
                    let model = threelevel::resolve_model(m, &file)?;
                    let doc = threelevel::spectrum(&model)?;
                    let pass = spectrum_passes(&doc);
                    ("threelevel_spectrum.json", doc, pass)
                }
                ThreeLevelAction::Kato(k) => {
                    let model = threelevel::resolve_model(&k.model, &file)?;
                    let req = threelevel::KatoRequest::resolve(k, &file)?;
                    let doc = threelevel::kato(&model, &req)?;
                    let pass = doc["agree"].as_bool() == Some(true);
                    ("threelevel_kato.json", doc, pass)
                }
            };
            write_json(&settings, name, &doc)?;
            writeln!(stdout, "{}", serde_json::to_string_pretty(&doc).unwrap_or_default())?;
            Ok(if pass { EXIT_OK } else { EXIT_MISMATCH })
        }
        Command::Critical(args) => {
            let lambda = args
                .lambda
                .or(file.two_level.as_ref().and_then(|t| t.lambda))
                .ok_or_else(|| error::config("critical needs --lambda"))?;
            if !(lambda >= 0.0 && lambda.is_finite()) {
                return Err(error::config(format!("lambda must be finite and non-negative, got {lambda}")));
            }
            let closed = mu_critical(lambda);
            let quad = mu_critical_quadrature(lambda, &QuadratureSettings::default())
                .map_err(|e| AtlasError::Computation(e.to_string()))?;
            writeln!(stdout, "lambda {lambda:?}")?;
            writeln!(stdout, "mu_c closed_form {closed:?}")?;
            writeln!(stdout, "mu_c quadrature {quad:?}")?;
            writeln!(stdout, "difference {:?}", (closed - quad).abs())?;
            Ok(EXIT_OK)
        }
    }
}
