//! JSON scene and curve files.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::chart::{Chart, Interval, DEFAULT_SAMPLES, DEFAULT_SEED};
use crate::error::{Error, Result};
use crate::field::{BivectorField, DiffStrategy, MetricField, VectorField};
use crate::poisson::Geometry;
use crate::transport::CotangentCurve;

/// Pass thresholds for the different report families.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub compat: f64,
    pub identities: f64,
    pub poisson: f64,
    pub curvature: f64,
    pub transport: f64,
    pub killing: f64,
}

impl Tolerances {
    pub fn for_strategy(strategy: DiffStrategy) -> Self {
        match strategy {
            DiffStrategy::ForwardAd => Self {
                compat: 1e-7,
                identities: 1e-6,
                poisson: 1e-6,
                curvature: 1e-5,
                transport: 1e-6,
                killing: 1e-8,
            },
            DiffStrategy::CentralFd => Self {
                compat: 1e-4,
                identities: 1e-3,
                poisson: 1e-4,
                curvature: 1e-2,
                transport: 1e-4,
                killing: 1e-6,
            },
        }
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::for_strategy(DiffStrategy::ForwardAd)
    }
}

/// On-disk description of a metric, a bivector and sampling settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub dimension: usize,
    pub coordinates: Vec<String>,
    pub domain: Vec<[f64; 2]>,
    pub metric: Vec<Vec<String>>,
    pub bivector: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub killing: Option<Vec<String>>,
    #[serde(default = "default_samples")]
    pub sample_count: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub diff_strategy: DiffStrategy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
}

fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

/// A loaded scene.
#[derive(Clone, Debug)]
pub struct Scene {
    pub name: String,
    pub geometry: Geometry,
    pub killing: Option<VectorField>,
    pub tolerances: Tolerances,
}

impl SceneFile {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scene serializes")
    }

    pub fn chart(&self) -> Result<Chart> {
        let n = self.dimension;
        if self.coordinates.len() != n || self.domain.len() != n {
            return Err(Error::InvalidScene(format!(
                "dimension {n} but {} coordinate names and {} domain intervals",
                self.coordinates.len(),
                self.domain.len()
            )));
        }
        let domain = self
            .domain
            .iter()
            .map(|[lo, hi]| Interval::new(*lo, *hi))
            .collect();
        Ok(Chart::new(self.coordinates.clone(), domain)?
            .with_sampling(self.sample_count, self.seed))
    }

    fn matrix<'a>(rows: &'a [Vec<String>], n: usize, what: &str) -> Result<Vec<&'a str>> {
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidScene(format!(
                "{what} must be a {n}×{n} matrix"
            )));
        }
        Ok(rows
            .iter()
            .flat_map(|r| r.iter().map(String::as_str))
            .collect())
    }

    /// Build the geometry, overriding sampling and strategy when given.
    pub fn build(
        &self,
        samples: Option<usize>,
        seed: Option<u64>,
        strategy: Option<DiffStrategy>,
    ) -> Result<Scene> {
        let chart = self.chart()?.with_sampling(
            samples.unwrap_or(self.sample_count),
            seed.unwrap_or(self.seed),
        );
        let n = self.dimension;
        let m = Self::matrix(&self.metric, n, "metric")?;
        let b = Self::matrix(&self.bivector, n, "bivector")?;
        let rows = |flat: &[&str]| -> Vec<Vec<String>> {
            flat.chunks(n)
                .map(|r| r.iter().map(|s| s.to_string()).collect())
                .collect()
        };
        let metric = parse_matrix::<MetricField>(&rows(&m), &chart)?;
        let bivector = parse_matrix::<BivectorField>(&rows(&b), &chart)?;
        let strategy = strategy.unwrap_or(self.diff_strategy);
        let geometry = Geometry::new(chart.clone(), metric, bivector)?.with_strategy(strategy);
        let killing = match &self.killing {
            Some(k) => {
                let refs: Vec<&str> = k.iter().map(String::as_str).collect();
                Some(VectorField::parse(&refs, &chart)?)
            }
            None => None,
        };
        let tolerances = self
            .tolerances
            .unwrap_or_else(|| Tolerances::for_strategy(strategy));
        Ok(Scene {
            name: self.name.clone().unwrap_or_else(|| "scene".into()),
            geometry,
            killing,
            tolerances,
        })
    }
}

trait ParseMatrix: Sized {
    fn parse_rows(rows: &[&[&str]], chart: &Chart) -> Result<Self>;
}

impl ParseMatrix for MetricField {
    fn parse_rows(rows: &[&[&str]], chart: &Chart) -> Result<Self> {
        MetricField::parse(rows, chart)
    }
}

impl ParseMatrix for BivectorField {
    fn parse_rows(rows: &[&[&str]], chart: &Chart) -> Result<Self> {
        BivectorField::parse(rows, chart)
    }
}

fn parse_matrix<M: ParseMatrix>(rows: &[Vec<String>], chart: &Chart) -> Result<M> {
    let refs: Vec<Vec<&str>> = rows
        .iter()
        .map(|r| r.iter().map(String::as_str).collect())
        .collect();
    let slices: Vec<&[&str]> = refs.iter().map(Vec::as_slice).collect();
    M::parse_rows(&slices, chart)
}

/// On-disk cotangent curve: `gamma` and `alpha` are expressions in `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveFile {
    pub gamma: Vec<String>,
    pub alpha: Vec<String>,
}

impl CurveFile {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("curve serializes")
    }

    pub fn build(&self) -> Result<CotangentCurve> {
        let g: Vec<&str> = self.gamma.iter().map(String::as_str).collect();
        let a: Vec<&str> = self.alpha.iter().map(String::as_str).collect();
        CotangentCurve::parse(&g, &a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FLAT: &str = r#"{
        "dimension": 2,
        "coordinates": ["x", "y"],
        "domain": [[-1, 1], [-1, 1]],
        "metric": [["1", "0"], ["0", "1"]],
        "bivector": [["0", "1"], ["-1", "0"]],
        "diff_strategy": "ad"
    }"#;

    #[test]
    fn loads_and_roundtrips() {
        let f = SceneFile::from_json(FLAT).unwrap();
        assert_eq!(f.sample_count, DEFAULT_SAMPLES);
        let s = f.build(Some(4), Some(9), None).unwrap();
        assert_eq!(s.geometry.chart().sample_count(), 4);
        assert_eq!(s.geometry.chart().seed(), 9);
        let again = SceneFile::from_json(&f.to_json()).unwrap();
        assert_eq!(again, f);
        let fd = SceneFile::from_json(&FLAT.replace("\"ad\"", "\"CENTRAL_FD\"")).unwrap();
        assert_eq!(fd.diff_strategy, DiffStrategy::CentralFd);
    }

    #[test]
    fn rejects_bad_shapes_and_names() {
        let mut f = SceneFile::from_json(FLAT).unwrap();
        f.metric.pop();
        assert!(matches!(
            f.build(None, None, None),
            Err(Error::InvalidScene(_))
        ));
        let mut f = SceneFile::from_json(FLAT).unwrap();
        f.bivector[0][1] = "z".into();
        assert!(matches!(f.build(None, None, None), Err(Error::Parse(_))));
    }
}
