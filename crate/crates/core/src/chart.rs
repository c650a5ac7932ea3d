//! The single coordinate chart everything is computed in.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed interval `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Chart {
    names: Vec<String>,
    domain: Vec<Interval>,
    sample_count: usize,
    seed: u64,
}

pub const DEFAULT_SAMPLES: usize = 32;
pub const DEFAULT_SEED: u64 = 20_240_601;

fn valid_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

const RESERVED: [&str; 6] = ["sin", "cos", "tan", "exp", "log", "sqrt"];

impl Chart {
    pub fn new<S: Into<String>>(
        names: impl IntoIterator<Item = S>,
        domain: Vec<Interval>,
    ) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(Error::InvalidChart("dimension must be at least 1".into()));
        }
        if names.len() != domain.len() {
            return Err(Error::InvalidChart(format!(
                "{} coordinate names but {} domain intervals",
                names.len(),
                domain.len()
            )));
        }
        for (i, name) in names.iter().enumerate() {
            if !valid_identifier(name) || RESERVED.contains(&name.as_str()) {
                return Err(Error::InvalidChart(format!(
                    "invalid coordinate name '{name}'"
                )));
            }
            if names[..i].contains(name) {
                return Err(Error::InvalidChart(format!(
                    "duplicate coordinate name '{name}'"
                )));
            }
        }
        for iv in &domain {
            if !(iv.lo <= iv.hi) || !iv.lo.is_finite() || !iv.hi.is_finite() {
                return Err(Error::InvalidChart(format!(
                    "empty or unbounded interval [{}, {}]",
                    iv.lo, iv.hi
                )));
            }
        }
        Ok(Self {
            names,
            domain,
            sample_count: DEFAULT_SAMPLES,
            seed: DEFAULT_SEED,
        })
    }

    /// Chart `x1..xn` (or `x, y, z` up to three dimensions) on a cube.
    pub fn cube(n: usize, lo: f64, hi: f64) -> Result<Self> {
        let names: Vec<String> = if n <= 3 {
            ["x", "y", "z"][..n].iter().map(|s| s.to_string()).collect()
        } else {
            (1..=n).map(|i| format!("x{i}")).collect()
        };
        Self::new(names, vec![Interval::new(lo, hi); n])
    }

    pub fn with_sampling(mut self, sample_count: usize, seed: u64) -> Self {
        self.sample_count = sample_count.max(1);
        self.seed = seed;
        self
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn domain(&self) -> &[Interval] {
        &self.domain
    }

    pub fn sample_count(&self) -> usize {
        self.sample_count
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.coords.len() == self.dim()
            && p.coords
                .iter()
                .zip(&self.domain)
                .all(|(v, iv)| iv.contains(*v))
    }

    /// Uniform i.i.d. points in the domain box; reproducible from the seed.
    pub fn sample_points(&self) -> Vec<Point> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.sample_count)
            .map(|_| Point {
                coords: self
                    .domain
                    .iter()
                    .map(|iv| {
                        if iv.lo == iv.hi {
                            iv.lo
                        } else {
                            rng.gen_range(iv.lo..iv.hi)
                        }
                    })
                    .collect(),
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: impl Into<Vec<f64>>) -> Self {
        Self {
            coords: coords.into(),
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

impl From<Vec<f64>> for Point {
    fn from(coords: Vec<f64>) -> Self {
        Self { coords }
    }
}
