//! Published reference values with their comparison tolerances.

use serde::Serialize;

use crate::config::Which;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Value {
    Real(f64),
    Complex([f64; 2]),
}

impl Value {
    pub fn parts(self) -> (f64, f64) {
        match self {
            Value::Real(x) => (x, 0.0),
            Value::Complex([re, im]) => (re, im),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Tolerance {
    /// Each component within `max(rel·|reference|, abs)`.
    RelOrAbs { rel: f64, abs: f64 },
    /// Only the magnitude is compared; the printed sign is not trusted.
    MagnitudeAtMost(f64),
}

impl Tolerance {
    pub fn accepts(self, computed: Value, reference: Value) -> bool {
        let (c, r) = (computed.parts(), reference.parts());
        match self {
            Tolerance::RelOrAbs { rel, abs } => {
                let ok = |x: f64, y: f64| (x - y).abs() <= (rel * y.abs()).max(abs);
                let imaginary = match reference {
                    Value::Real(_) => true,
                    Value::Complex(_) => ok(c.1, r.1),
                };
                ok(c.0, r.0) && imaginary
            }
            Tolerance::MagnitudeAtMost(m) => c.0.hypot(c.1) <= m,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReferenceEntry {
    /// Key the computation fills in.
    pub id: String,
    pub location: String,
    /// The value exactly as printed.
    pub quote: &'static str,
    pub reference: Value,
    pub tolerance: Tolerance,
}

/// 10³μ label, μ, printed 10⁴z₀,₁.
pub const TABLE1: [(&str, f64, &str); 8] = [
    ("0", 0.0, "-99"),
    ("0.1", 1e-4, "-94"),
    ("1", 1e-3, "-68"),
    ("3", 3e-3, "-34"),
    ("6", 6e-3, "-2.5"),
    ("6.2", 6.2e-3, "-1.1"),
    ("6.36", 6.36e-3, "0.04"),
    ("6.366", 6.366e-3, "0.001"),
];

/// 10³μ label, μ, and the printed row: 10⁴z₀,₂, C₂/2, M₃/6, M₄/24, ∂_zC₁.
pub const TABLE2: [(&str, f64, [&str; 5]); 8] = [
    ("0", 0.0, ["-196", "0", "0", "0", "103.9"]),
    ("0.1", 1e-4, ["-185.5", "1.65e-3", "3.95e-6", "1.04e-8", "105.3"]),
    ("1", 1e-3, ["-135.7", "13.14e-3", "1e-4", "6.26e-7", "116"]),
    ("3", 3e-3, ["-69.8", "0.038", "7.93e-4", "1e-5", "143.8"]),
    ("6", 6e-3, ["-9.3", "0.099", "7.7e-3", "3.68e-4", "247.1"]),
    ("6.2", 6.2e-3, ["-6.6", "0.106", "9.3e-3", "5.2e-4", "265.3"]),
    ("6.36", 6.36e-3, ["-4.4", "0.111", "1.09e-2", "7.1e-4", "284.2"]),
    ("6.3662", 6.3662e-3, ["-4.328", "0.112", "1.10e-2", "7.17e-4", "285"]),
];

pub const TABLE2_COLUMNS: [&str; 5] = ["z02", "c2_half", "m3_sixth", "m4_24th", "dz_c1"];
const TABLE2_REL: [f64; 5] = [0.02, 0.05, 0.10, 0.10, 0.05];

/// Name, printed value, parsed value at (λ, μ) = (0.1, 1).
pub const TABLE3: [(&str, &str, [f64; 2]); 4] = [
    ("z01", "0.13-1.97 i", [0.13, -1.97]),
    ("z02", "0.216-1.9 i", [0.216, -1.9]),
    ("z11", "0.997-0.010 i", [0.997, -0.010]),
    ("z12", "1.043-1.127 i", [1.043, -1.127]),
];

/// Scalar anchors quoted in the running text: id, location, printed value, value, absolute tolerance (relative if negative).
pub const ANCHORS: [(&str, &str, &str, [f64; 2], f64); 8] = [
    ("mu_c(0.1)", "critical scale at lambda = 0.1", "6.3662", [6.3662e-3, 0.0], 1e-6),
    ("z01(0.1,1)", "z01 endpoint at mu = 1", "0.11-0.95 i", [0.11, -0.95], 0.01),
    ("z01(0.1,2)", "z01 endpoint at mu = 2", "0.13-1.97 i", [0.13, -1.97], 0.01),
    ("z11(0.1,0)", "z11 germ", "1.0099", [1.0099, 0.0], 1e-4),
    ("z11(0.1,1)", "z11 at mu = 1", "0.997-0.010 i", [0.997, -0.010], 2e-3),
    ("z11(0.1,2)", "z11 at mu = 2", "0.995-0.0032 i", [0.995, -0.0032], 2e-3),
    ("z02(0.1,7e-3)", "z02 restart point past the critical scale", "2.8 10^-4-2.4 10^-5 i", [2.8e-4, -2.4e-5], -0.02),
    ("z12(0.1,0)", "z12 germ", "1.01962", [1.01962, 0.0], 1e-5),
];

fn parse_quote(q: &str) -> f64 {
    q.parse().expect("reference cells are numeric")
}

pub fn reference_table(which: Which) -> Vec<ReferenceEntry> {
    match which {
        Which::One => TABLE1
            .iter()
            .map(|&(label, _, quote)| {
                let value = parse_quote(quote) * 1e-4;
                let tolerance = if value > 0.0 {
                    Tolerance::MagnitudeAtMost(5e-6)
                } else {
                    Tolerance::RelOrAbs { rel: 0.02, abs: 2e-5 }
                };
                ReferenceEntry {
                    id: format!("table1/z01/{label}"),
                    location: format!("Table 1, 10^3 mu = {label}"),
                    quote,
                    reference: Value::Real(value),
                    tolerance,
                }
            })
            .collect(),
        Which::Two => TABLE2
            .iter()
            .flat_map(|&(label, _, row)| {
                row.into_iter().enumerate().map(move |(k, quote)| {
                    let scale = if k == 0 { 1e-4 } else { 1.0 };
                    ReferenceEntry {
                        id: format!("table2/{}/{label}", TABLE2_COLUMNS[k]),
                        location: format!("Table 2, 10^3 mu = {label}, column {}", TABLE2_COLUMNS[k]),
                        quote,
                        reference: Value::Real(parse_quote(quote) * scale),
                        tolerance: Tolerance::RelOrAbs { rel: TABLE2_REL[k], abs: 1e-12 },
                    }
                })
            })
            .collect(),
        Which::Three => TABLE3
            .iter()
            .map(|&(name, quote, value)| ReferenceEntry {
                id: format!("table3/{name}"),
                location: format!("Table 3, {name} at (lambda, mu) = (0.1, 1)"),
                quote,
                reference: Value::Complex(value),
                tolerance: Tolerance::RelOrAbs { rel: 0.02, abs: 0.005 },
            })
            .collect(),
        Which::Anchors => ANCHORS
            .iter()
            .map(|&(id, location, quote, value, tol)| ReferenceEntry {
                id: format!("anchors/{id}"),
                location: location.to_string(),
                quote,
                reference: if value[1] == 0.0 { Value::Real(value[0]) } else { Value::Complex(value) },
                tolerance: if tol < 0.0 {
                    Tolerance::RelOrAbs { rel: -tol, abs: 0.0 }
                } else {
                    Tolerance::RelOrAbs { rel: 0.0, abs: tol }
                },
            })
            .collect(),
        Which::All => [Which::One, Which::Two, Which::Three, Which::Anchors]
            .into_iter()
            .flat_map(reference_table)
            .collect(),
    }
}
