//! Fields on the chart and the differentiation contract.
//!
//! Anything that can be evaluated at a point of any [`Scalar`] type is a
//! [`Field`]. Derived geometric quantities implement the same trait, which
//! is how nested derivatives (curvature, brackets of brackets) are taken:
//! a field is differentiated by evaluating it on dual numbers, or by central
//! differences, according to a [`DiffStrategy`].

use std::fmt;
use std::sync::Arc;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::chart::{Chart, Interval, Point};
use crate::dual::Dual;
use crate::error::{Error, EvalError, Result};
use crate::expr::{self, Expr};
use crate::scalar::{OpaqueFn, Scalar};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DiffStrategy {
    /// Nested dual numbers; exact to rounding for expression fields.
    #[default]
    #[serde(rename = "ad", alias = "FORWARD_AD")]
    ForwardAd,
    /// Central differences.
    #[serde(rename = "fd", alias = "CENTRAL_FD")]
    CentralFd,
}

impl DiffStrategy {
    pub fn label(self) -> &'static str {
        match self {
            DiffStrategy::ForwardAd => "ad",
            DiffStrategy::CentralFd => "fd",
        }
    }
}

impl std::str::FromStr for DiffStrategy {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "ad" => Ok(DiffStrategy::ForwardAd),
            "fd" => Ok(DiffStrategy::CentralFd),
            other => Err(format!("unknown strategy '{other}' (expected ad|fd)")),
        }
    }
}

/// Step for a first derivative of a field whose evaluation already involves
/// `order` derivatives of the inputs.
pub fn fd_step(order: usize) -> f64 {
    match order {
        0 => 1e-5,
        1 => 1e-4,
        _ => 1e-3,
    }
}

/// Step of the direct second-difference stencil.
pub const FD_STEP_SECOND: f64 = 1e-4;

/// A tensor-valued field, flattened to `components()` numbers per point.
pub trait Field: Sync {
    fn components(&self) -> usize;

    fn eval<T: Scalar>(&self, x: &[T]) -> Result<Vec<T>, EvalError>;

    /// Number of input derivatives consumed by one evaluation.
    fn order(&self) -> usize {
        0
    }
}

impl<F: Field> Field for &F {
    fn components(&self) -> usize {
        (**self).components()
    }
    fn eval<T: Scalar>(&self, x: &[T]) -> Result<Vec<T>, EvalError> {
        (**self).eval(x)
    }
    fn order(&self) -> usize {
        (**self).order()
    }
}

/// `out[i][c] = ∂_i f_c(x)`.
pub fn jacobian<F: Field, T: Scalar>(
    f: &F,
    x: &[T],
    strategy: DiffStrategy,
) -> Result<Vec<Vec<T>>, EvalError> {
    let n = x.len();
    let mut out = Vec::with_capacity(n);
    match strategy {
        DiffStrategy::ForwardAd => {
            let mut xd: Vec<Dual<T>> = x.iter().map(|v| Dual::constant(*v)).collect();
            for i in 0..n {
                xd[i].eps = T::one();
                out.push(f.eval(&xd)?.into_iter().map(|d| d.eps).collect());
                xd[i].eps = T::zero();
            }
        }
        DiffStrategy::CentralFd => {
            let h = T::from_f64(fd_step(f.order()));
            let two_h = h + h;
            let mut xs = x.to_vec();
            for i in 0..n {
                xs[i] = x[i] + h;
                let fp = f.eval(&xs)?;
                xs[i] = x[i] - h;
                let fm = f.eval(&xs)?;
                xs[i] = x[i];
                out.push(fp.iter().zip(&fm).map(|(a, b)| (*a - *b) / two_h).collect());
            }
        }
    }
    Ok(out)
}

/// Derivative of `f` along `v` at `x`.
pub fn directional<F: Field, T: Scalar>(
    f: &F,
    x: &[T],
    v: &[T],
    strategy: DiffStrategy,
) -> Result<Vec<T>, EvalError> {
    match strategy {
        DiffStrategy::ForwardAd => {
            let xd: Vec<Dual<T>> = x.iter().zip(v).map(|(a, b)| Dual::new(*a, *b)).collect();
            Ok(f.eval(&xd)?.into_iter().map(|d| d.eps).collect())
        }
        DiffStrategy::CentralFd => {
            let scale = v.iter().fold(0.0_f64, |m, c| m.max(c.abs_re()));
            if scale == 0.0 {
                return Ok(vec![T::zero(); f.components()]);
            }
            let t = T::from_f64(fd_step(f.order()) / scale);
            let xp: Vec<T> = x.iter().zip(v).map(|(a, b)| *a + t * *b).collect();
            let xm: Vec<T> = x.iter().zip(v).map(|(a, b)| *a - t * *b).collect();
            let fp = f.eval(&xp)?;
            let fm = f.eval(&xm)?;
            Ok(fp
                .iter()
                .zip(&fm)
                .map(|(a, b)| (*a - *b) / (t + t))
                .collect())
        }
    }
}

/// Gradient of a one-component field.
pub fn gradient<F: Field, T: Scalar>(
    f: &F,
    x: &[T],
    strategy: DiffStrategy,
) -> Result<Vec<T>, EvalError> {
    Ok(jacobian(f, x, strategy)?
        .into_iter()
        .map(|row| row[0])
        .collect())
}

#[derive(Clone)]
pub enum Body {
    Expr(Arc<Expr>),
    Opaque(OpaqueFn),
}

/// Real function on the chart.
#[derive(Clone)]
pub struct ScalarField {
    body: Body,
    strategy: DiffStrategy,
    names: Arc<[String]>,
    domain: Arc<[Interval]>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.body {
            Body::Expr(e) => write!(f, "ScalarField({})", e.display(&self.names)),
            Body::Opaque(_) => write!(f, "ScalarField(<opaque>)"),
        }
    }
}

impl ScalarField {
    pub fn parse(text: &str, chart: &Chart) -> Result<Self> {
        let e = expr::parse(text, chart.names())?;
        Ok(Self::from_expr(e, chart))
    }

    pub fn from_expr(e: Arc<Expr>, chart: &Chart) -> Self {
        Self {
            body: Body::Expr(e),
            strategy: DiffStrategy::default(),
            names: chart.names().into(),
            domain: chart.domain().into(),
        }
    }

    pub fn constant(c: f64, chart: &Chart) -> Self {
        Self::from_expr(expr::cst(c), chart)
    }

    pub fn opaque(f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static, chart: &Chart) -> Self {
        Self {
            body: Body::Opaque(Arc::new(f)),
            strategy: DiffStrategy::CentralFd,
            names: chart.names().into(),
            domain: chart.domain().into(),
        }
    }

    pub fn with_strategy(mut self, strategy: DiffStrategy) -> Self {
        self.strategy = strategy;
        self
    }

    pub fn strategy(&self) -> DiffStrategy {
        self.strategy
    }

    pub fn body(&self) -> &Body {
        &self.body
    }

    pub fn expr(&self) -> Option<&Arc<Expr>> {
        match &self.body {
            Body::Expr(e) => Some(e),
            Body::Opaque(_) => None,
        }
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    /// Rendering in the input grammar, if this is an expression field.
    pub fn pretty(&self) -> Option<String> {
        self.expr().map(|e| e.display(&self.names).to_string())
    }

    #[inline]
    pub fn eval_scalar<T: Scalar>(&self, x: &[T]) -> Result<T, EvalError> {
        match &self.body {
            Body::Expr(e) => e.eval(x),
            Body::Opaque(f) => Ok(T::lift_opaque(f, x)),
        }
    }

    pub fn value(&self, p: &Point) -> Result<f64> {
        self.eval_scalar(&p.coords)
            .map_err(|e| Error::at(&p.coords, e))
    }

    fn check_point(&self, p: &Point, indices: &[usize]) -> Result<()> {
        let n = self.dim();
        if p.dim() != n {
            return Err(Error::InvalidField(format!(
                "point has {} coordinates, chart has {n}",
                p.dim()
            )));
        }
        for &i in indices {
            if i >= n {
                return Err(Error::Index { index: i, dim: n });
            }
        }
        let inside = p
            .coords
            .iter()
            .zip(self.domain.iter())
            .all(|(v, iv)| iv.contains(*v));
        if !inside {
            return Err(Error::OutsideDomain(p.coords.clone()));
        }
        Ok(())
    }

    /// Central step along axis `i`, shrunk so the stencil stays in the box.
    fn stencil_step(&self, p: &Point, i: usize, h: f64) -> f64 {
        let iv = self.domain[i];
        let room = (p.coords[i] - iv.lo).min(iv.hi - p.coords[i]);
        if room >= h {
            return h;
        }
        let shrunk = room.max(h * 1e-3);
        warn!(
            "finite-difference step along axis {i} shrunk from {h:e} to {shrunk:e} near the domain boundary"
        );
        shrunk
    }

    /// `∂f/∂x^i` at `p` under the field's strategy.
    pub fn partial(&self, p: &Point, i: usize) -> Result<f64> {
        self.check_point(p, &[i])?;
        let x = &p.coords;
        let r = match self.strategy {
            DiffStrategy::ForwardAd => {
                let xd: Vec<Dual<f64>> = x
                    .iter()
                    .enumerate()
                    .map(|(k, v)| Dual::new(*v, if k == i { 1.0 } else { 0.0 }))
                    .collect();
                self.eval_scalar(&xd).map(|d| d.eps)
            }
            DiffStrategy::CentralFd => {
                let h = self.stencil_step(p, i, fd_step(0));
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += h;
                xm[i] -= h;
                self.eval_scalar(&xp)
                    .and_then(|a| Ok((a - self.eval_scalar(&xm)?) / (2.0 * h)))
            }
        };
        r.map_err(|e| Error::at(x, e))
    }

    /// `∂²f/∂x^i∂x^j` at `p` under the field's strategy.
    pub fn second_partial(&self, p: &Point, i: usize, j: usize) -> Result<f64> {
        self.check_point(p, &[i, j])?;
        let x = &p.coords;
        let r = match self.strategy {
            DiffStrategy::ForwardAd => {
                let xd: Vec<Dual<Dual<f64>>> = x
                    .iter()
                    .enumerate()
                    .map(|(k, v)| {
                        Dual::new(
                            Dual::new(*v, if k == i { 1.0 } else { 0.0 }),
                            Dual::constant(if k == j { 1.0 } else { 0.0 }),
                        )
                    })
                    .collect();
                self.eval_scalar(&xd).map(|d| d.eps.eps)
            }
            DiffStrategy::CentralFd => {
                let hi = self.stencil_step(p, i, FD_STEP_SECOND);
                let hj = self.stencil_step(p, j, FD_STEP_SECOND);
                let at = |di: f64, dj: f64| {
                    let mut y = x.clone();
                    y[i] += di;
                    y[j] += dj;
                    self.eval_scalar(&y)
                };
                if i == j {
                    (|| Ok((at(hi, 0.0)? - 2.0 * at(0.0, 0.0)? + at(-hi, 0.0)?) / (hi * hi)))()
                } else {
                    (|| {
                        Ok((at(hi, hj)? - at(hi, -hj)? - at(-hi, hj)? + at(-hi, -hj)?)
                            / (4.0 * hi * hj))
                    })()
                }
            }
        };
        r.map_err(|e| Error::at(x, e))
    }
}

impl Field for ScalarField {
    fn components(&self) -> usize {
        1
    }
    fn eval<T: Scalar>(&self, x: &[T]) -> Result<Vec<T>, EvalError> {
        Ok(vec![self.eval_scalar(x)?])
    }
}

/// Free-function form of [`ScalarField::partial`].
pub fn partial(f: &ScalarField, p: &Point, i: usize) -> Result<f64> {
    f.partial(p, i)
}

pub fn second_partial(f: &ScalarField, p: &Point, i: usize, j: usize) -> Result<f64> {
    f.second_partial(p, i, j)
}

fn eval_all<T: Scalar>(comps: &[ScalarField], x: &[T]) -> Result<Vec<T>, EvalError> {
    comps.iter().map(|c| c.eval_scalar(x)).collect()
}

fn parse_all(texts: &[&str], chart: &Chart) -> Result<Vec<ScalarField>> {
    texts.iter().map(|t| ScalarField::parse(t, chart)).collect()
}

macro_rules! component_field {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Clone, Debug)]
        pub struct $name {
            comps: Vec<ScalarField>,
        }

        impl $name {
            pub fn new(comps: Vec<ScalarField>) -> Self {
                Self { comps }
            }

            pub fn parse(texts: &[&str], chart: &Chart) -> Result<Self> {
                if texts.len() != chart.dim() {
                    return Err(Error::InvalidField(format!(
                        "expected {} components, got {}",
                        chart.dim(),
                        texts.len()
                    )));
                }
                Ok(Self::new(parse_all(texts, chart)?))
            }

            pub fn component(&self, i: usize) -> &ScalarField {
                &self.comps[i]
            }

            pub fn comps(&self) -> &[ScalarField] {
                &self.comps
            }

            pub fn with_strategy(self, strategy: DiffStrategy) -> Self {
                Self::new(self.comps.into_iter().map(|c| c.with_strategy(strategy)).collect())
            }

            pub fn at(&self, p: &Point) -> Result<Vec<f64>> {
                self.eval(&p.coords).map_err(|e| Error::at(&p.coords, e))
            }
        }

        impl Field for $name {
            fn components(&self) -> usize {
                self.comps.len()
            }
            fn eval<T: Scalar>(&self, x: &[T]) -> Result<Vec<T>, EvalError> {
                eval_all(&self.comps, x)
            }
        }
    };
}

component_field!(
    /// 1-form `α = α_i dx^i`.
    CovectorField
);
component_field!(
    /// Vector field `X = X^i ∂_i`.
    VectorField
);

macro_rules! matrix_field {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Clone, Debug)]
        pub struct $name {
            n: usize,
            comps: Vec<ScalarField>,
        }

        impl $name {
            /// Row-major `n × n` components.
            pub fn new(n: usize, comps: Vec<ScalarField>) -> Result<Self> {
                if comps.len() != n * n {
                    return Err(Error::InvalidField(format!(
                        "expected {} components, got {}",
                        n * n,
                        comps.len()
                    )));
                }
                Ok(Self { n, comps })
            }

            pub fn parse(rows: &[&[&str]], chart: &Chart) -> Result<Self> {
                let n = chart.dim();
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(Error::InvalidField(format!("expected a {n}×{n} matrix")));
                }
                let flat: Vec<&str> = rows.iter().flat_map(|r| r.iter().copied()).collect();
                Self::new(n, parse_all(&flat, chart)?)
            }

            pub fn dim(&self) -> usize {
                self.n
            }

            pub fn component(&self, i: usize, j: usize) -> &ScalarField {
                &self.comps[i * self.n + j]
            }

            pub fn comps(&self) -> &[ScalarField] {
                &self.comps
            }

            pub fn with_strategy(self, strategy: DiffStrategy) -> Self {
                Self {
                    n: self.n,
                    comps: self.comps.into_iter().map(|c| c.with_strategy(strategy)).collect(),
                }
            }
        }

        impl Field for $name {
            fn components(&self) -> usize {
                self.comps.len()
            }
            fn eval<T: Scalar>(&self, x: &[T]) -> Result<Vec<T>, EvalError> {
                eval_all(&self.comps, x)
            }
        }
    };
}

matrix_field!(
    /// Covariant metric components `g_ij`.
    MetricField
);
matrix_field!(
    /// Contravariant bivector components `π^ij`.
    BivectorField
);

impl BivectorField {
    /// Bivector from its strictly-upper entries `(i, j, π^ij)`, `i < j`,
    /// completed antisymmetrically. Unlisted entries are zero.
    pub fn from_upper(chart: &Chart, entries: &[(usize, usize, &str)]) -> Result<Self> {
        let n = chart.dim();
        let zero = ScalarField::constant(0.0, chart);
        let mut comps = vec![zero; n * n];
        for &(i, j, text) in entries {
            if i >= j || j >= n {
                return Err(Error::InvalidField(format!("bad upper entry ({i}, {j})")));
            }
            let e = expr::parse(text, chart.names())?;
            comps[i * n + j] = ScalarField::from_expr(e.clone(), chart);
            comps[j * n + i] = ScalarField::from_expr(expr::neg(e), chart);
        }
        Self::new(n, comps)
    }

    pub fn zero(chart: &Chart) -> Self {
        let n = chart.dim();
        Self::new(n, vec![ScalarField::constant(0.0, chart); n * n]).expect("square")
    }
}

impl MetricField {
    /// Diagonal metric from expressions.
    pub fn diagonal(chart: &Chart, diag: &[&str]) -> Result<Self> {
        let n = chart.dim();
        if diag.len() != n {
            return Err(Error::InvalidField(format!(
                "expected {n} diagonal entries"
            )));
        }
        let mut comps = vec![ScalarField::constant(0.0, chart); n * n];
        for (i, text) in diag.iter().enumerate() {
            comps[i * n + i] = ScalarField::parse(text, chart)?;
        }
        Self::new(n, comps)
    }

    pub fn euclidean(chart: &Chart) -> Self {
        let n = chart.dim();
        let comps = (0..n * n)
            .map(|k| ScalarField::constant(if k / n == k % n { 1.0 } else { 0.0 }, chart))
            .collect();
        Self::new(n, comps).expect("square")
    }
}

/// Constant field, e.g. a coordinate covector `dx^i`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstField {
    values: Vec<f64>,
}

impl ConstField {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    /// `dx^i` (or `∂_i`) in dimension `n`.
    pub fn basis(n: usize, i: usize) -> Self {
        let mut values = vec![0.0; n];
        values[i] = 1.0;
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl Field for ConstField {
    fn components(&self) -> usize {
        self.values.len()
    }
    fn eval<T: Scalar>(&self, _x: &[T]) -> Result<Vec<T>, EvalError> {
        Ok(self.values.iter().map(|v| T::from_f64(*v)).collect())
    }
}

/// Pointwise sum of two fields with the same shape.
#[derive(Clone, Debug)]
pub struct SumField<A, B>(pub A, pub B);

impl<A: Field, B: Field> Field for SumField<A, B> {
    fn components(&self) -> usize {
        self.0.components()
    }
    fn eval<T: Scalar>(&self, x: &[T]) -> Result<Vec<T>, EvalError> {
        let a = self.0.eval(x)?;
        let b = self.1.eval(x)?;
        Ok(a.into_iter().zip(b).map(|(p, q)| p + q).collect())
    }
    fn order(&self) -> usize {
        self.0.order().max(self.1.order())
    }
}

/// `f · F` for a one-component field `f`.
#[derive(Clone, Debug)]
pub struct ProductField<S, F>(pub S, pub F);

impl<S: Field, F: Field> Field for ProductField<S, F> {
    fn components(&self) -> usize {
        self.1.components()
    }
    fn eval<T: Scalar>(&self, x: &[T]) -> Result<Vec<T>, EvalError> {
        let s = self.0.eval(x)?[0];
        Ok(self.1.eval(x)?.into_iter().map(|v| s * v).collect())
    }
    fn order(&self) -> usize {
        self.0.order().max(self.1.order())
    }
}

/// Evaluate any field at `p` in `f64`.
pub fn eval_at<F: Field>(f: &F, p: &Point) -> Result<Vec<f64>> {
    f.eval(&p.coords).map_err(|e| Error::at(&p.coords, e))
}
