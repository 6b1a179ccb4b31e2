//! μ grids: `start:stop:count` (inclusive, evenly spaced) or a comma list.

use serde::Deserialize;

use crate::error::{config, AtlasError};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Text(String),
    Values(Vec<f64>),
}

impl GridSpec {
    pub fn resolve(&self) -> Result<Vec<f64>, AtlasError> {
        let values = match self {
            GridSpec::Text(s) => parse_text(s)?,
            GridSpec::Values(v) => v.clone(),
        };
        validate(&values)?;
        Ok(values)
    }
}

fn number(s: &str) -> Result<f64, AtlasError> {
    s.trim().parse().map_err(|_| config(format!("not a number: {s:?}")))
}

fn parse_text(s: &str) -> Result<Vec<f64>, AtlasError> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [a, b, n] => {
            let (a, b) = (number(a)?, number(b)?);
            let n: usize = n.trim().parse().map_err(|_| config(format!("bad point count in {s:?}")))?;
            Ok(linspace(a, b, n))
        }
        [_] => s.split(',').map(number).collect(),
        _ => Err(config(format!("grid must be start:stop:count or a comma list, got {s:?}"))),
    }
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => {
            let last = (n - 1) as f64;
            (0..n).map(|k| if k + 1 == n { b } else { a + (b - a) * k as f64 / last }).collect()
        }
    }
}

pub fn validate(grid: &[f64]) -> Result<(), AtlasError> {
    if grid.is_empty() {
        return Err(config("grid is empty"));
    }
    if grid.iter().any(|m| !m.is_finite() || *m < 0.0) {
        return Err(config("grid values must be finite and non-negative"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(config("grid must be strictly increasing"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn colon_form_is_inclusive() {
        let g = GridSpec::Text("0:2:200".into()).resolve().unwrap();
        assert_eq!(g.len(), 200);
        assert_eq!((g[0], g[199]), (0.0, 2.0));
    }

    #[test]
    fn list_and_rejections() {
        assert_eq!(GridSpec::Text("1e-3, 0.5".into()).resolve().unwrap(), vec![1e-3, 0.5]);
        assert!(GridSpec::Text("0.5,0.1".into()).resolve().is_err());
        assert!(GridSpec::Values(vec![]).resolve().is_err());
        assert!(GridSpec::Text("a:b".into()).resolve().is_err());
        assert!(GridSpec::Values(vec![-1.0, 0.0]).resolve().is_err());
    }
}
