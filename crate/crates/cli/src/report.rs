//! Machine-readable reports.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use num_traits::{ToPrimitive, Zero};
use poisson_compat::lie::{rational_text, Rational};
use poisson_compat::scene::Tolerances;
use poisson_compat::{Check, DiffStrategy, ResidualReport};
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Input files in the order they were read, with a running digest.
#[derive(Default)]
pub struct Inputs {
    paths: Vec<String>,
    hasher: Sha256,
}

impl Inputs {
    pub fn read(&mut self, path: &Path) -> Result<String> {
        let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        self.hasher.update(&bytes);
        self.paths.push(path.display().to_string());
        String::from_utf8(bytes).with_context(|| format!("{} is not UTF-8", path.display()))
    }
}

#[derive(Debug, Serialize)]
pub struct ReportFile {
    pub version: &'static str,
    pub command: String,
    pub inputs: Vec<String>,
    /// SHA-256 of the input files, concatenated in read order.
    pub input_digest: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strategy: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
    pub passed: bool,
    pub checks: Vec<Check>,
    /// Reported but not counted towards `passed`.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<Check>,
    /// Exact values of rational residuals, keyed by check name.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub exact: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<serde_json::Value>,
}

impl ReportFile {
    pub fn new(command: &str, inputs: Inputs, seed: u64, samples: usize) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION"),
            command: command.into(),
            inputs: inputs.paths,
            input_digest: hex::encode(inputs.hasher.finalize()),
            seed,
            samples: Some(samples),
            strategy: None,
            tolerances: None,
            passed: true,
            checks: Vec::new(),
            diagnostics: Vec::new(),
            exact: BTreeMap::new(),
            flags: Vec::new(),
            notes: Vec::new(),
            data: None,
        }
    }

    /// A report whose checks pass only at exactly zero.
    pub fn exact(command: &str, inputs: Inputs) -> Self {
        let mut r = Self::new(command, inputs, poisson_compat::chart::DEFAULT_SEED, 0);
        r.samples = None;
        r
    }

    pub fn with_strategy(mut self, s: DiffStrategy) -> Self {
        self.strategy = Some(s.label());
        self
    }

    pub fn with_tolerances(mut self, t: Tolerances) -> Self {
        self.tolerances = Some(t);
        self
    }

    pub fn push(&mut self, check: Check) {
        self.passed &= check.passed;
        self.checks.push(check);
    }

    /// Record an exact residual; returns whether it is zero.
    pub fn push_exact(&mut self, name: &str, f: impl FnOnce() -> Rational) -> bool {
        let start = Instant::now();
        let value = f();
        let mut check = Check::new(name, value.to_f64().unwrap_or(f64::INFINITY), 0.0);
        check.passed = value.is_zero();
        check.wall_ms = start.elapsed().as_secs_f64() * 1e3;
        self.exact.insert(name.into(), rational_text(&value));
        let ok = check.passed;
        self.push(check);
        ok
    }

    pub fn absorb(&mut self, r: ResidualReport) {
        for c in r.checks {
            self.push(c);
        }
        self.flags.extend(r.flags);
        self.notes.extend(r.notes);
    }

    /// Move a check to the diagnostics.
    pub fn demote(&mut self, name: &str) {
        if let Some(i) = self.checks.iter().position(|c| c.name == name) {
            self.diagnostics.push(self.checks.remove(i));
            self.passed = self.checks.iter().all(|c| c.passed);
        }
    }

    pub fn absorb_diagnostics(&mut self, r: ResidualReport) {
        self.diagnostics.extend(r.checks);
        self.flags.extend(r.flags);
        self.notes.extend(r.notes);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        let line = |out: &mut String, tag: &str, c: &Check| {
            let value = match (&c.residual, self.exact.get(&c.name)) {
                (_, Some(e)) => e.clone(),
                (Some(r), None) => format!("{r:.3e}"),
                (None, None) => c.error.clone().unwrap_or_else(|| "error".into()),
            };
            out.push_str(&format!(
                "{tag:<5} {:<32} {value:>14}  tol {:.1e}\n",
                c.name, c.tolerance
            ));
        };
        for c in &self.checks {
            line(&mut out, if c.passed { "PASS" } else { "FAIL" }, c);
        }
        for c in &self.diagnostics {
            line(&mut out, if c.passed { "yes" } else { "no" }, c);
        }
        for f in &self.flags {
            out.push_str(&format!("flag  {f}\n"));
        }
        for n in &self.notes {
            out.push_str(&format!("note  {n}\n"));
        }
        out.push_str(&format!(
            "{}: {}\n",
            self.command,
            if self.passed { "ok" } else { "FAILED" }
        ));
        out
    }
}
