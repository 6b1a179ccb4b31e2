//! Trajectory CSV files, written and flushed one sample at a time.

use std::fs::{File, OpenOptions};
use std::io::{Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use resonance::continuation::ContinuationSettings;
use resonance::two_excitation::{trace_z02_with, trace_z12_with};
use resonance::{OneExcitationTracker, Sample};

use crate::config::{positive, RunConfig, Sector, Settings, TraceArgs};
use crate::error::{config, AtlasError};
use crate::grid::GridSpec;

pub const HEADER: &str = "mu,re,im,branch,residual,iterations";
pub const DEFAULT_MAX_RESIDUAL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct TraceJob {
    pub sector: Sector,
    pub family: u8,
    pub lambda: f64,
    pub grid: Vec<f64>,
    pub max_residual: f64,
}

impl TraceJob {
    pub fn resolve(args: &TraceArgs, file: &RunConfig) -> Result<Self, AtlasError> {
        let sweep = file.sweep.clone().unwrap_or_default();
        let sector = args.sector.or(sweep.sector).ok_or_else(|| config("trace needs --sector"))?;
        let family = args.family.or(sweep.family).ok_or_else(|| config("trace needs --family"))?;
        if family > 1 {
            return Err(config(format!("family must be 0 or 1, got {family}")));
        }
        let lambda = args
            .lambda
            .or(file.two_level.as_ref().and_then(|t| t.lambda))
            .ok_or_else(|| config("trace needs --lambda"))?;
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(config(format!("lambda must be finite and non-negative, got {lambda}")));
        }
        let grid = match (&args.mu, sweep.mu) {
            (Some(text), _) => GridSpec::Text(text.clone()),
            (None, Some(spec)) => spec,
            (None, None) => return Err(config("trace needs --mu")),
        }
        .resolve()?;
        let max_residual =
            positive("max_residual", args.max_residual.or(sweep.max_residual).unwrap_or(DEFAULT_MAX_RESIDUAL))?;
        Ok(Self { sector, family, lambda, grid, max_residual })
    }

    /// Resonance name, e.g. `z01` for the one-excitation family 0.
    pub fn name(&self) -> String {
        let n = match self.sector {
            Sector::One => 1,
            Sector::Two => 2,
        };
        format!("z{}{n}", self.family)
    }

    pub fn path(&self, out: &Path) -> PathBuf {
        out.join(format!("{}.csv", self.name()))
    }
}

/// One CSV row; floats in shortest round-trip form.
pub fn format_row(s: &Sample) -> String {
    let branch = if s.bridge { format!("{}:bridge", s.branch) } else { s.branch.to_string() };
    format!("{:?},{:?},{:?},{branch},{:?},{}\n", s.mu, s.z.re, s.z.im, s.residual, s.iterations)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceOutcome {
    pub path: PathBuf,
    pub kept: usize,
    pub written: usize,
}

struct Existing {
    rows: usize,
    len: u64,
    last_mu: Option<f64>,
}

/// Complete rows already in `path`, which must lie on `grid` in order, and
/// the byte length they occupy. A trailing partial line is not counted.
fn existing_rows(path: &Path, grid: &[f64]) -> Result<Option<Existing>, AtlasError> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    let complete = text.rfind('\n').map_or(0, |i| i + 1);
    let mut header = false;
    let mut rows = 0;
    let mut last_mu = None;
    let mut position = 0;
    for line in text[..complete].lines() {
        if line.starts_with('#') && !header {
            continue;
        }
        if !header {
            if line != HEADER {
                return Err(config(format!("{}: unexpected header {line:?}", path.display())));
            }
            header = true;
            continue;
        }
        let mu: f64 = line
            .split(',')
            .next()
            .and_then(|f| f.parse().ok())
            .ok_or_else(|| config(format!("{}: malformed row {line:?}", path.display())))?;
        match grid[position..].iter().position(|&g| g == mu) {
            Some(k) => position += k + 1,
            None => {
                return Err(config(format!("{}: row {} (mu = {mu}) is not on the grid", path.display(), rows + 1)))
            }
        }
        rows += 1;
        last_mu = Some(mu);
    }
    Ok(header.then_some(Existing { rows, len: complete as u64, last_mu }))
}

fn timestamp_line() -> String {
    let now = time::OffsetDateTime::now_utc();
    let stamp = now.format(&time::format_description::well_known::Rfc3339).unwrap_or_else(|_| now.to_string());
    format!("# generated {stamp}\n")
}

/// Traces `job` into `<out>/<name>.csv`. With `resume`, rows already on
/// disk are kept byte for byte and only the missing ones are appended.
pub fn run_trace(job: &TraceJob, settings: &Settings) -> Result<TraceOutcome, AtlasError> {
    std::fs::create_dir_all(&settings.out)?;
    let path = job.path(&settings.out);
    let resumed = if settings.resume { existing_rows(&path, &job.grid)? } else { None };
    let complete = resumed.as_ref().is_some_and(|e| e.last_mu == job.grid.last().copied());
    let (mut file, kept) = match resumed {
        Some(e) => {
            let mut f = OpenOptions::new().write(true).open(&path)?;
            f.set_len(e.len)?;
            f.seek(SeekFrom::End(0))?;
            (f, e.rows)
        }
        None => {
            let mut f = File::create(&path)?;
            if settings.timestamp {
                f.write_all(timestamp_line().as_bytes())?;
            }
            f.write_all(format!("{HEADER}\n").as_bytes())?;
            f.flush()?;
            (f, 0)
        }
    };
    let mut outcome = TraceOutcome { path, kept, written: 0 };
    if complete {
        return Ok(outcome);
    }

    let mut index = 0usize;
    let mut failure: Option<AtlasError> = None;
    let mut emit = |s: Sample| {
        if failure.is_some() {
            return;
        }
        let i = index;
        index += 1;
        if i < kept {
            return;
        }
        if s.residual > job.max_residual {
            failure = Some(AtlasError::Computation(format!(
                "residual {:e} at mu = {} exceeds {:e}",
                s.residual, s.mu, job.max_residual
            )));
            return;
        }
        match file.write_all(format_row(&s).as_bytes()).and_then(|_| file.flush()) {
            Ok(()) => outcome.written += 1,
            Err(e) => failure = Some(e.into()),
        }
    };
    let traced = match job.sector {
        Sector::One => {
            let mut tracker = OneExcitationTracker::new(job.lambda, job.family, ContinuationSettings::default())
                .map_err(|e| AtlasError::Computation(e.to_string()))?;
            job.grid.iter().try_for_each(|&mu| tracker.advance(mu).map(&mut emit))
        }
        Sector::Two if job.family == 0 => trace_z02_with(job.lambda, &job.grid, &mut emit),
        Sector::Two => trace_z12_with(job.lambda, &job.grid, &mut emit),
    };
    traced.map_err(|e| AtlasError::Computation(e.to_string()))?;
    if let Some(e) = failure {
        return Err(e);
    }
    let missing = job.grid.len() - outcome.kept - outcome.written;
    if missing > 0 {
        // z₀,₂ has no sample between μ_c and its restart point
        eprintln!("note: {missing} of {} grid points have no sample on this branch", job.grid.len());
    }
    Ok(outcome)
}
