//! Recomputed tables and the comparison report.

use std::collections::HashMap;
use std::io::{IsTerminal, Write};

use num_complex::Complex64;
use resonance::bounds::bound_rows;
use resonance::friedrichs::mu_critical_quadrature;
use resonance::two_excitation::{trace_z02, trace_z12};
use resonance::{trace_resonance_in_mu, Exec, QuadratureSettings, ResonanceTrajectory, TraceError};
use serde::Serialize;

use crate::config::{Settings, Which};
use crate::reference::{reference_table, Tolerance, Value, ANCHORS, TABLE1, TABLE2, TABLE2_COLUMNS};

const LAMBDA: f64 = 0.1;

pub type Computed = HashMap<String, Result<Value, String>>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub id: String,
    pub location: String,
    pub quote: &'static str,
    pub computed: Option<Value>,
    pub reference: Value,
    pub tolerance: Tolerance,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

fn complex(z: Complex64) -> Value {
    Value::Complex([z.re, z.im])
}

fn at(t: &Result<ResonanceTrajectory, TraceError>, mu: f64) -> Result<Complex64, String> {
    match t {
        Ok(t) => t.at(mu).map(|s| s.z).ok_or_else(|| format!("no sample at mu = {mu}")),
        Err(e) => Err(e.to_string()),
    }
}

/// Runs `jobs` closures, on separate threads when `threads > 1`.
fn run_all<T: Send>(threads: usize, jobs: Vec<Box<dyn FnOnce() -> T + Send + '_>>) -> Vec<T> {
    if threads <= 1 {
        return jobs.into_iter().map(|j| j()).collect();
    }
    std::thread::scope(|s| {
        let handles: Vec<_> = jobs.into_iter().map(|j| s.spawn(j)).collect();
        handles.into_iter().map(|h| h.join().expect("table job panicked")).collect()
    })
}

fn table1(out: &mut Computed) {
    let grid: Vec<f64> = TABLE1.iter().map(|r| r.1).collect();
    let t = trace_resonance_in_mu(LAMBDA, 0, &grid);
    for (label, mu, _) in TABLE1 {
        out.insert(format!("table1/z01/{label}"), at(&t, mu).map(|z| Value::Real(z.re)));
    }
}

fn table2(out: &mut Computed, settings: &Settings) {
    let grid: Vec<f64> = TABLE2.iter().map(|r| r.1).collect();
    let t = trace_z02(LAMBDA, &grid);
    let zs: Vec<Result<Complex64, String>> = grid.iter().map(|&mu| at(&t, mu)).collect();
    let points: Vec<(f64, Complex64)> =
        grid.iter().zip(&zs).filter_map(|(&mu, z)| z.as_ref().ok().map(|&z| (mu, z))).collect();
    let exec = if settings.jobs > 1 { Exec::Parallel } else { Exec::Sequential };
    let mut rows = bound_rows(exec, LAMBDA, &points).into_iter();
    for ((label, _, _), z) in TABLE2.iter().zip(zs) {
        let key = |k: usize| format!("table2/{}/{label}", TABLE2_COLUMNS[k]);
        let z = match z {
            Ok(z) => z,
            Err(e) => {
                (0..5).for_each(|k| {
                    out.insert(key(k), Err(e.clone()));
                });
                continue;
            }
        };
        out.insert(key(0), Ok(Value::Real(z.re)));
        match rows.next().expect("one row per point") {
            Ok(r) => {
                out.insert(key(1), Ok(Value::Real(r.c2.norm() / 2.0)));
                out.insert(key(2), Ok(Value::Real(r.m3 / 6.0)));
                out.insert(key(3), Ok(Value::Real(r.m4 / 24.0)));
                out.insert(key(4), Ok(Value::Real(r.dz_c1.norm())));
            }
            Err(e) => (1..5).for_each(|k| {
                out.insert(key(k), Err(e.to_string()));
            }),
        }
    }
}

/// One-excitation trajectories up to μ = 2 and the two-excitation ones up to μ = 1.
struct Trajectories {
    z01: Result<ResonanceTrajectory, TraceError>,
    z11: Result<ResonanceTrajectory, TraceError>,
    z02: Result<ResonanceTrajectory, TraceError>,
    z12: Result<ResonanceTrajectory, TraceError>,
}

fn trajectories(threads: usize) -> Trajectories {
    let one = [0.0, 1e-3, 0.1, 0.5, 1.0, 2.0];
    let jobs: Vec<Box<dyn FnOnce() -> Result<ResonanceTrajectory, TraceError> + Send>> = vec![
        Box::new(move || trace_resonance_in_mu(LAMBDA, 0, &one)),
        Box::new(move || trace_resonance_in_mu(LAMBDA, 1, &one)),
        Box::new(|| trace_z02(LAMBDA, &[1e-4, 3e-3, 7e-3, 0.1, 0.5, 1.0])),
        Box::new(|| trace_z12(LAMBDA, &[0.0, 3e-4, 1e-2, 0.1, 0.5, 1.0])),
    ];
    let mut r = run_all(threads, jobs).into_iter();
    let mut next = || r.next().expect("four trajectories");
    Trajectories { z01: next(), z11: next(), z02: next(), z12: next() }
}

fn table3(out: &mut Computed, t: &Trajectories) {
    for (name, traj) in [("z01", &t.z01), ("z02", &t.z02), ("z11", &t.z11), ("z12", &t.z12)] {
        out.insert(format!("table3/{name}"), at(traj, 1.0).map(complex));
    }
}

fn anchors(out: &mut Computed, t: &Trajectories) {
    let mut put = |id: &str, v: Result<Value, String>| {
        out.insert(format!("anchors/{id}"), v);
    };
    let mu_c = mu_critical_quadrature(LAMBDA, &QuadratureSettings::default()).map_err(|e| e.to_string());
    put(ANCHORS[0].0, mu_c.map(Value::Real));
    put(ANCHORS[1].0, at(&t.z01, 1.0).map(complex));
    put(ANCHORS[2].0, at(&t.z01, 2.0).map(complex));
    put(ANCHORS[3].0, at(&t.z11, 0.0).map(|z| Value::Real(z.re)));
    put(ANCHORS[4].0, at(&t.z11, 1.0).map(complex));
    put(ANCHORS[5].0, at(&t.z11, 2.0).map(complex));
    put(ANCHORS[6].0, at(&t.z02, 7e-3).map(complex));
    put(ANCHORS[7].0, at(&t.z12, 0.0).map(|z| Value::Real(z.re)));
}

pub fn compute(which: Which, settings: &Settings) -> Computed {
    let mut out = Computed::new();
    let needs = |w: Which| which == w || which == Which::All;
    if needs(Which::One) {
        table1(&mut out);
    }
    if needs(Which::Two) {
        table2(&mut out, settings);
    }
    if needs(Which::Three) || needs(Which::Anchors) {
        let t = trajectories(settings.jobs);
        if needs(Which::Three) {
            table3(&mut out, &t);
        }
        if needs(Which::Anchors) {
            anchors(&mut out, &t);
        }
    }
    out
}

/// One row per reference entry, in table order.
pub fn report(which: Which, computed: &Computed) -> Vec<ReportRow> {
    reference_table(which)
        .into_iter()
        .map(|e| {
            let (value, error) = match computed.get(&e.id) {
                Some(Ok(v)) => (Some(*v), None),
                Some(Err(msg)) => (None, Some(msg.clone())),
                None => (None, Some("not computed".to_string())),
            };
            let pass = value.is_some_and(|v| e.tolerance.accepts(v, e.reference));
            ReportRow {
                id: e.id,
                location: e.location,
                quote: e.quote,
                computed: value,
                reference: e.reference,
                tolerance: e.tolerance,
                pass,
                error,
            }
        })
        .collect()
}

pub fn table_csv(rows: &[ReportRow]) -> String {
    let mut s = String::from("id,re,im,reference_re,reference_im,pass\n");
    for r in rows {
        let (re, im) = r.computed.map_or((String::new(), String::new()), |v| {
            let (a, b) = v.parts();
            (format!("{a:?}"), format!("{b:?}"))
        });
        let (rr, ri) = r.reference.parts();
        s.push_str(&format!("{},{re},{im},{rr:?},{ri:?},{}\n", r.id, r.pass));
    }
    s
}

fn use_color() -> bool {
    std::env::var_os("NO_COLOR").is_none_or(|v| v.is_empty()) && std::io::stdout().is_terminal()
}

pub fn render(rows: &[ReportRow], mut w: impl Write) -> std::io::Result<()> {
    let color = use_color();
    for r in rows {
        let verdict = match (r.pass, color) {
            (true, true) => "\x1b[32mPASS\x1b[0m",
            (false, true) => "\x1b[31mFAIL\x1b[0m",
            (true, false) => "PASS",
            (false, false) => "FAIL",
        };
        let computed = match (&r.computed, &r.error) {
            (Some(v), _) => format!("{:?}", v.parts()),
            (None, Some(e)) => format!("error: {e}"),
            (None, None) => "-".to_string(),
        };
        writeln!(w, "{verdict} {:<28} computed {computed} printed {} tol {:?}", r.id, r.quote, r.tolerance)?;
    }
    let failed = rows.iter().filter(|r| !r.pass).count();
    writeln!(w, "{} cells, {failed} failed", rows.len())
}
