//! Command line and JSON run configuration. Flags override the file.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{config, AtlasError};
use crate::grid::GridSpec;

#[derive(Debug, Parser)]
#[command(name = "atlas", version, about = "Resonance sweeps, reference tables and reproduction reports")]
pub struct Cli {
    /// JSON run configuration; command-line flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (default: current directory).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for independent jobs (default 1).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Keep rows already present in trajectory files and append the rest.
    #[arg(long, global = true)]
    pub resume: bool,
    /// Omit the generation-time comment line from CSV files.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Continue a resonance in μ and write its trajectory CSV.
    Trace(TraceArgs),
    /// Recompute a reference table and compare it cell by cell.
    Tables(TablesArgs),
    /// Three-level spectra and second-order shifts.
    Threelevel(ThreeLevelArgs),
    /// Critical scale μ_c(λ), closed form and quadrature.
    Critical(CriticalArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sector {
    One,
    Two,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    #[arg(long, value_enum)]
    pub sector: Option<Sector>,
    /// Atomic level the resonance is continued from (0 or 1).
    #[arg(long)]
    pub family: Option<u8>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// `start:stop:count` or a comma-separated list.
    #[arg(long)]
    pub mu: Option<String>,
    /// Largest accepted |branch value| at a reported zero (default 1e-9).
    #[arg(long)]
    pub max_residual: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
pub enum Which {
    #[value(name = "1")]
    #[serde(rename = "1")]
    One,
    #[value(name = "2")]
    #[serde(rename = "2")]
    Two,
    #[value(name = "3")]
    #[serde(rename = "3")]
    Three,
    #[serde(rename = "anchors")]
    Anchors,
    #[serde(rename = "all")]
    All,
}

impl Which {
    pub fn name(self) -> &'static str {
        match self {
            Which::One => "table1",
            Which::Two => "table2",
            Which::Three => "table3",
            Which::Anchors => "anchors",
            Which::All => "all",
        }
    }
}

#[derive(Debug, Args)]
pub struct TablesArgs {
    #[arg(long, value_enum)]
    pub which: Option<Which>,
}

#[derive(Debug, Args)]
pub struct ThreeLevelArgs {
    #[command(subcommand)]
    pub action: ThreeLevelAction,
}

#[derive(Debug, Subcommand)]
pub enum ThreeLevelAction {
    /// One- and two-excitation H₀ spectra against the truncated-Fock oracle.
    Spectrum(ModelArgs),
    /// Analytic against finite-matrix second-order shift of a dressed level.
    Kato(KatoArgs),
}

#[derive(Debug, Args, Default)]
pub struct ModelArgs {
    #[arg(long)]
    pub e1: Option<f64>,
    #[arg(long)]
    pub e2: Option<f64>,
    #[arg(long)]
    pub l01: Option<f64>,
    #[arg(long)]
    pub l12: Option<f64>,
    #[arg(long)]
    pub l02: Option<f64>,
    /// Overlap (f01, f02) as `re` or `re,im`.
    #[arg(long, allow_hyphen_values = true)]
    pub s0: Option<String>,
    /// Overlap (f01, f12).
    #[arg(long, allow_hyphen_values = true)]
    pub s1: Option<String>,
    /// Overlap (f02, f12).
    #[arg(long, allow_hyphen_values = true)]
    pub s2: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KatoLevel {
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    Unit,
    Factorial,
}

#[derive(Debug, Args)]
pub struct KatoArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Number of g1 photons dressing the level.
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long, value_enum)]
    pub level: Option<KatoLevel>,
    #[arg(long, value_enum)]
    pub convention: Option<Convention>,
    /// Excitation cap of the Fock truncation (default n + 3).
    #[arg(long)]
    pub truncation: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CriticalArgs {
    #[arg(long)]
    pub lambda: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Overlap {
    Real(f64),
    Complex([f64; 2]),
}

impl Overlap {
    pub fn value(self) -> Complex64 {
        match self {
            Overlap::Real(x) => Complex64::new(x, 0.0),
            Overlap::Complex([re, im]) => Complex64::new(re, im),
        }
    }

    pub fn parse(s: &str) -> Result<Self, AtlasError> {
        let parts: Result<Vec<f64>, _> = s.split(',').map(|p| p.trim().parse::<f64>()).collect();
        match parts.map_err(|_| config(format!("bad overlap {s:?}")))?.as_slice() {
            [x] => Ok(Overlap::Real(*x)),
            [re, im] => Ok(Overlap::Complex([*re, *im])),
            _ => Err(config(format!("overlap must be `re` or `re,im`, got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoLevelSection {
    pub lambda: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThreeLevelSection {
    pub e1: Option<f64>,
    pub e2: Option<f64>,
    pub l01: Option<f64>,
    pub l12: Option<f64>,
    pub l02: Option<f64>,
    pub s0: Option<Overlap>,
    pub s1: Option<Overlap>,
    pub s2: Option<Overlap>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub sector: Option<Sector>,
    pub family: Option<u8>,
    pub mu: Option<GridSpec>,
    pub max_residual: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KatoSection {
    pub n: Option<u32>,
    pub level: Option<KatoLevel>,
    pub convention: Option<Convention>,
    pub truncation: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub two_level: Option<TwoLevelSection>,
    pub three_level: Option<ThreeLevelSection>,
    pub sweep: Option<SweepSection>,
    pub kato: Option<KatoSection>,
    pub which: Option<Which>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub resume: Option<bool>,
    pub no_timestamp: Option<bool>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, AtlasError> {
        let text = std::fs::read_to_string(path).map_err(|e| config(format!("{}: {e}", path.display())))?;
        let c: RunConfig = serde_json::from_str(&text).map_err(|e| config(format!("{}: {e}", path.display())))?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), AtlasError> {
        if self.two_level.is_some() && self.three_level.is_some() {
            return Err(config("exactly one of two_level and three_level may be present"));
        }
        if self.jobs == Some(0) {
            return Err(config("jobs must be at least 1"));
        }
        if let Some(r) = self.sweep.as_ref().and_then(|s| s.max_residual) {
            positive("max_residual", r)?;
        }
        Ok(())
    }
}

pub(crate) fn positive(name: &str, x: f64) -> Result<f64, AtlasError> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(config(format!("{name} must be positive, got {x}")))
    }
}

/// Options shared by every command after merging flags and file.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub out: PathBuf,
    pub jobs: usize,
    pub resume: bool,
    pub timestamp: bool,
}

impl Settings {
    pub fn merge(cli: &Cli, file: &RunConfig) -> Result<Self, AtlasError> {
        let jobs = cli.jobs.or(file.jobs).unwrap_or(1);
        if jobs == 0 {
            return Err(config("jobs must be at least 1"));
        }
        Ok(Self {
            out: cli.out.clone().or_else(|| file.out.clone()).unwrap_or_else(|| PathBuf::from(".")),
            jobs,
            resume: cli.resume || file.resume.unwrap_or(false),
            timestamp: !(cli.no_timestamp || file.no_timestamp.unwrap_or(false)),
        })
    }
}
