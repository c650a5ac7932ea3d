//! Named residuals with pass/fail verdicts.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chart::{Chart, Point};
use crate::error::{Error, EvalError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// Max over the sample set; `None` when evaluation failed.
    pub residual: Option<f64>,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Wall-clock time spent on this check, in milliseconds.
    #[serde(default)]
    pub wall_ms: f64,
}

impl Check {
    pub fn new(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            residual: Some(residual),
            tolerance,
            passed: residual.is_finite() && residual < tolerance,
            error: None,
            wall_ms: 0.0,
        }
    }

    pub fn failed(name: impl Into<String>, tolerance: f64, error: &Error) -> Self {
        Self {
            name: name.into(),
            residual: None,
            tolerance,
            passed: false,
            error: Some(error.to_string()),
            wall_ms: 0.0,
        }
    }

    pub fn from_result(name: impl Into<String>, residual: Result<f64>, tolerance: f64) -> Self {
        match residual {
            Ok(r) => Self::new(name, r, tolerance),
            Err(e) => Self::failed(name, tolerance, &e),
        }
    }

    /// Run `f`, recording its residual and elapsed time.
    pub fn timed(name: impl Into<String>, tolerance: f64, f: impl FnOnce() -> Result<f64>) -> Self {
        let start = Instant::now();
        let mut c = Self::from_result(name, f(), tolerance);
        c.wall_ms = start.elapsed().as_secs_f64() * 1e3;
        c
    }

    /// Residual as a plain number; failures read as `+∞`.
    pub fn value(&self) -> f64 {
        self.residual.unwrap_or(f64::INFINITY)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub title: String,
    pub seed: u64,
    pub samples: usize,
    pub checks: Vec<Check>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl ResidualReport {
    pub fn new(title: impl Into<String>, chart: &Chart) -> Self {
        Self {
            title: title.into(),
            seed: chart.seed(),
            samples: chart.sample_count(),
            ..Default::default()
        }
    }

    pub fn push(&mut self, check: Check) -> &mut Self {
        self.checks.push(check);
        self
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Residual of the named check; panics if absent.
    pub fn residual(&self, name: &str) -> f64 {
        self.check(name)
            .unwrap_or_else(|| panic!("no check named {name}"))
            .value()
    }

    pub fn has_flag(&self, flag: &str) -> bool {
        self.flags.iter().any(|f| f == flag)
    }

    pub fn merge(&mut self, other: ResidualReport) {
        self.checks.extend(other.checks);
        self.flags.extend(other.flags);
        self.notes.extend(other.notes);
    }
}

fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

/// Maximum of `f` over the sample points, evaluated in parallel.
///
/// The result is independent of scheduling: `max` is exact and the first
/// error in sample order is the one reported.
pub fn sweep_max<F>(points: &[Point], f: F) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64, EvalError> + Sync,
{
    let values: Vec<std::result::Result<f64, EvalError>> =
        points.par_iter().map(|p| f(&p.coords)).collect();
    let mut acc = 0.0_f64;
    for (p, v) in points.iter().zip(values) {
        acc = nan_max(acc, v.map_err(|e| Error::at(&p.coords, e))?);
    }
    Ok(acc)
}

/// Several residuals at once: `f` returns one value per named slot.
pub fn sweep_max_many<F>(points: &[Point], slots: usize, f: F) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>, EvalError> + Sync,
{
    let values: Vec<std::result::Result<Vec<f64>, EvalError>> =
        points.par_iter().map(|p| f(&p.coords)).collect();
    let mut acc = vec![0.0_f64; slots];
    for (p, v) in points.iter().zip(values) {
        let v = v.map_err(|e| Error::at(&p.coords, e))?;
        for (a, b) in acc.iter_mut().zip(v) {
            *a = nan_max(*a, b);
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nan_never_passes() {
        assert!(!Check::new("x", f64::NAN, 1.0).passed);
        assert!(Check::new("x", 0.5, 1.0).passed);
        assert!(!Check::new("x", 1.0, 1.0).passed);
    }

    #[test]
    fn sweep_reports_first_error_in_order() {
        let pts: Vec<Point> = (0..8).map(|i| Point::new(vec![i as f64])).collect();
        let r = sweep_max(&pts, |x| {
            if x[0] >= 3.0 {
                Err(EvalError::DivisionByZero)
            } else {
                Ok(x[0])
            }
        });
        match r {
            Err(Error::Eval { point, .. }) => assert_eq!(point, vec![3.0]),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(sweep_max(&pts, |x| Ok(-x[0])).unwrap(), 0.0);
        assert!(sweep_max(&pts, |_| Ok(f64::NAN)).unwrap().is_nan());
    }
}
