//! Musical maps, the endomorphisms `J` and `J̃`, the Koszul bracket of
//! 1-forms and the Schouten bracket of bivectors.
//!
//! Index conventions, used everywhere in the crate:
//!
//! * `π(α, β) = π^{ij} α_i β_j`
//! * `(#_π α)^j = α_i π^{ij}`, so that `β(#_π α) = π(α, β)`
//! * `(#_g α)^i = g^{ij} α_j` and `(b_g X)_i = g_{ij} X^j`
//! * `(Jα)_i = g_{ik} π^{jk} α_j`, so that `π(α, β) = g̃(Jα, β)`
//! * `J̃ = #_g ∘ J ∘ b_g`
//!
//! Operations come in two flavours: `*_at` methods are generic over the
//! [`Scalar`] type and take raw coordinates, so they can be nested inside
//! further differentiation; the plain-named methods evaluate at a [`Point`].

use log::warn;

use crate::chart::{Chart, Point};
use crate::error::{Error, EvalError, Result};
use crate::field::{directional, jacobian, BivectorField, DiffStrategy, Field, MetricField};
use crate::linalg::{self, Mat};
use crate::report::{sweep_max, Check, ResidualReport};
use crate::scalar::Scalar;

/// Floor on `|det g|`.
pub const METRIC_FLOOR: f64 = 1e-10;

const SYMMETRY_TOL: f64 = 1e-12;
const INVERSE_TOL: f64 = 1e-10;

pub(crate) fn lift<R>(p: &[f64], r: std::result::Result<R, EvalError>) -> Result<R> {
    r.map_err(|e| Error::at(p, e))
}

fn to_t<T: Scalar>(v: &[f64]) -> Vec<T> {
    v.iter().map(|c| T::from_f64(*c)).collect()
}

fn check_len(v: &[f64], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::InvalidField(format!(
            "expected {n} components, got {}",
            v.len()
        )));
    }
    Ok(())
}

/// Square matrix from a flattened `n²`-component field value.
pub(crate) fn square<T: Scalar>(v: Vec<T>) -> std::result::Result<Mat<T>, EvalError> {
    Mat::from_row_major(v)
}

/// A metric and a bivector field on one chart.
#[derive(Clone, Debug)]
pub struct Geometry {
    chart: Chart,
    metric: MetricField,
    bivector: BivectorField,
    strategy: DiffStrategy,
}

impl Geometry {
    /// Validates shapes, symmetry of `g`, antisymmetry of `π`, and
    /// nondegeneracy of `g` at every sample point.
    pub fn new(chart: Chart, metric: MetricField, bivector: BivectorField) -> Result<Self> {
        let n = chart.dim();
        if metric.dim() != n || bivector.dim() != n {
            return Err(Error::InvalidField(format!(
                "metric is {}×{}, bivector {}×{}, chart dimension {n}",
                metric.dim(),
                metric.dim(),
                bivector.dim(),
                bivector.dim()
            )));
        }
        let geom = Self {
            chart,
            metric,
            bivector,
            strategy: DiffStrategy::default(),
        };
        for p in geom.chart.sample_points() {
            geom.validate_at(&p)?;
        }
        Ok(geom)
    }

    fn validate_at(&self, p: &Point) -> Result<()> {
        let x = &p.coords;
        let g: Mat<f64> = lift(x, self.metric_at(x))?;
        let pi: Mat<f64> = lift(x, self.pi_at(x))?;
        let n = g.dim();
        for i in 0..n {
            for j in 0..n {
                let scale = 1.0 + g[(i, j)].abs();
                if (g[(i, j)] - g[(j, i)]).abs() > SYMMETRY_TOL * scale {
                    return Err(Error::InvalidField(format!(
                        "metric not symmetric at {x:?}: g[{i}][{j}] = {}, g[{j}][{i}] = {}",
                        g[(i, j)],
                        g[(j, i)]
                    )));
                }
                let scale = 1.0 + pi[(i, j)].abs();
                if (pi[(i, j)] + pi[(j, i)]).abs() > SYMMETRY_TOL * scale {
                    return Err(Error::InvalidField(format!(
                        "bivector not antisymmetric at {x:?}: π[{i}][{j}] = {}, π[{j}][{i}] = {}",
                        pi[(i, j)],
                        pi[(j, i)]
                    )));
                }
            }
        }
        let inv = lift(x, self.cometric_at::<f64>(x))?;
        let id = inv.mul(&g);
        let err = id.add(&Mat::identity(n).scale(-1.0)).max_abs();
        if err > INVERSE_TOL {
            return Err(Error::InvalidField(format!(
                "metric inversion residual {err:e} at {x:?}"
            )));
        }
        Ok(())
    }

    pub fn with_strategy(mut self, strategy: DiffStrategy) -> Self {
        self.strategy = strategy;
        self
    }

    /// Same metric and chart, different bivector. No revalidation of `g`.
    pub fn with_bivector(&self, bivector: BivectorField) -> Result<Self> {
        if bivector.dim() != self.dim() {
            return Err(Error::InvalidField("bivector dimension mismatch".into()));
        }
        let geom = Self {
            chart: self.chart.clone(),
            metric: self.metric.clone(),
            bivector,
            strategy: self.strategy,
        };
        for p in geom.chart.sample_points() {
            geom.validate_at(&p)?;
        }
        Ok(geom)
    }

    pub fn with_chart(mut self, chart: Chart) -> Self {
        self.chart = chart;
        self
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn metric(&self) -> &MetricField {
        &self.metric
    }

    pub fn bivector(&self) -> &BivectorField {
        &self.bivector
    }

    pub fn strategy(&self) -> DiffStrategy {
        self.strategy
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn sample_points(&self) -> Vec<Point> {
        self.chart.sample_points()
    }

    pub fn metric_at<T: Scalar>(&self, x: &[T]) -> std::result::Result<Mat<T>, EvalError> {
        square(self.metric.eval(x)?)
    }

    /// `g^{ij}`, failing when `|det g|` is below [`METRIC_FLOOR`].
    pub fn cometric_at<T: Scalar>(&self, x: &[T]) -> std::result::Result<Mat<T>, EvalError> {
        let g = self.metric_at(x)?;
        let det = g.det().re();
        if det.abs() <= METRIC_FLOOR {
            return Err(EvalError::DegenerateMetric { det });
        }
        g.inverse()
    }

    pub fn pi_at<T: Scalar>(&self, x: &[T]) -> std::result::Result<Mat<T>, EvalError> {
        square(self.bivector.eval(x)?)
    }

    // ---- pointwise algebra ------------------------------------------------

    /// `#_π α` at `p`.
    pub fn sharp_pi(&self, alpha: &[f64], p: &Point) -> Result<Vec<f64>> {
        check_len(alpha, self.dim())?;
        Ok(lift(&p.coords, self.pi_at(&p.coords))?.vec_mul(alpha))
    }

    /// `#_g α` at `p`.
    pub fn sharp_g(&self, alpha: &[f64], p: &Point) -> Result<Vec<f64>> {
        check_len(alpha, self.dim())?;
        Ok(lift(&p.coords, self.cometric_at(&p.coords))?.mul_vec(alpha))
    }

    /// `b_g X` at `p`.
    pub fn flat_g(&self, v: &[f64], p: &Point) -> Result<Vec<f64>> {
        check_len(v, self.dim())?;
        Ok(lift(&p.coords, self.metric_at(&p.coords))?.mul_vec(v))
    }

    /// `g̃(α, β)` at `p`.
    pub fn cometric(&self, alpha: &[f64], beta: &[f64], p: &Point) -> Result<f64> {
        check_len(alpha, self.dim())?;
        check_len(beta, self.dim())?;
        Ok(lift(&p.coords, self.cometric_at(&p.coords))?.bilinear(alpha, beta))
    }

    /// `J α` at `p`.
    pub fn j_map(&self, alpha: &[f64], p: &Point) -> Result<Vec<f64>> {
        check_len(alpha, self.dim())?;
        lift(&p.coords, self.j_at(&to_t::<f64>(alpha), &p.coords))
    }

    /// `J̃ X` at `p`.
    pub fn jtilde_map(&self, v: &[f64], p: &Point) -> Result<Vec<f64>> {
        check_len(v, self.dim())?;
        lift(&p.coords, self.jtilde_at(v, &p.coords))
    }

    /// `Jα = b_g(#_π α)`.
    pub fn j_at<T: Scalar>(&self, alpha: &[T], x: &[T]) -> std::result::Result<Vec<T>, EvalError> {
        let g = self.metric_at(x)?;
        let pi = self.pi_at(x)?;
        Ok(g.mul_vec(&pi.vec_mul(alpha)))
    }

    /// `J̃X = #_π(b_g X)`.
    pub fn jtilde_at<T: Scalar>(&self, v: &[T], x: &[T]) -> std::result::Result<Vec<T>, EvalError> {
        let g = self.metric_at(x)?;
        let pi = self.pi_at(x)?;
        Ok(pi.vec_mul(&g.mul_vec(v)))
    }

    /// Matrix of `J` acting on covector components: `(Jα)_i = J_i^j α_j`.
    pub fn j_matrix_at<T: Scalar>(&self, x: &[T]) -> std::result::Result<Mat<T>, EvalError> {
        let g = self.metric_at(x)?;
        let pi = self.pi_at(x)?;
        Ok(g.mul(&pi.transpose()))
    }

    /// Matrix of `J̃` acting on vector components: `J̃^i_j = π^{ai} g_{aj}`.
    pub fn jtilde_matrix_at<T: Scalar>(&self, x: &[T]) -> std::result::Result<Mat<T>, EvalError> {
        let g = self.metric_at(x)?;
        let pi = self.pi_at(x)?;
        Ok(pi.transpose().mul(&g))
    }

    /// Size of a covector for residual reporting: `√|g̃(ζ, ζ)|` where the
    /// metric is definite, the largest coordinate otherwise.
    pub fn covector_norm_at(&self, zeta: &[f64], x: &[f64]) -> std::result::Result<f64, EvalError> {
        let g = self.metric_at(x)?;
        if linalg::definiteness(&g).is_some() {
            let q = self.cometric_at(x)?.bilinear(zeta, zeta);
            Ok(q.abs().sqrt())
        } else {
            Ok(linalg::max_abs(zeta))
        }
    }

    // ---- brackets ---------------------------------------------------------

    /// Koszul bracket `[α, β]_π` of two covector fields.
    pub fn koszul_bracket<A: Field, B: Field>(&self, a: &A, b: &B, p: &Point) -> Result<Vec<f64>> {
        self.check_field(a)?;
        self.check_field(b)?;
        lift(&p.coords, self.koszul_at(a, b, &p.coords))
    }

    pub fn koszul_at<A: Field, B: Field, T: Scalar>(
        &self,
        a: &A,
        b: &B,
        x: &[T],
    ) -> std::result::Result<Vec<T>, EvalError> {
        koszul(&self.bivector, a, b, x, self.strategy)
    }

    /// `[π, π]_S(α, β, γ)`.
    pub fn schouten_self<A: Field, B: Field, C: Field>(
        &self,
        a: &A,
        b: &B,
        c: &C,
        p: &Point,
    ) -> Result<f64> {
        self.check_field(a)?;
        self.check_field(b)?;
        self.check_field(c)?;
        lift(
            &p.coords,
            schouten(&self.bivector, a, b, c, &p.coords, self.strategy),
        )
    }

    /// `[P, Q]_S(α, β, γ)` by polarization of the self-bracket.
    #[allow(clippy::too_many_arguments)]
    pub fn schouten_mixed<P: Field, Q: Field, A: Field, B: Field, C: Field>(
        &self,
        pf: &P,
        qf: &Q,
        a: &A,
        b: &B,
        c: &C,
        p: &Point,
    ) -> Result<f64> {
        lift(
            &p.coords,
            schouten_mixed(pf, qf, a, b, c, &p.coords, self.strategy),
        )
    }

    /// Largest `|[π, π]_S|` over coordinate triples `i < j < k` and sample
    /// points.
    pub fn is_poisson(&self, tol: f64) -> ResidualReport {
        let mut report = ResidualReport::new("poisson", &self.chart);
        let points = self.sample_points();
        let check = Check::timed("poisson_jacobi", tol, || {
            sweep_max(&points, |x| {
                schouten_basis_max(&self.bivector, x, self.strategy)
            })
        });
        report.push(check);
        report
    }

    pub(crate) fn check_field<F: Field>(&self, f: &F) -> Result<()> {
        if f.components() != self.dim() {
            return Err(Error::InvalidField(format!(
                "field has {} components, chart dimension is {}",
                f.components(),
                self.dim()
            )));
        }
        Ok(())
    }
}

/// Largest `|[P, P]_S(dx^i, dx^j, dx^k)|` over `i < j < k` at `x`.
pub fn schouten_basis_max<P: Field>(
    pf: &P,
    x: &[f64],
    strategy: DiffStrategy,
) -> std::result::Result<f64, EvalError> {
    let n = x.len();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                let v = schouten(
                    pf,
                    &Basis::new(n, i),
                    &Basis::new(n, j),
                    &Basis::new(n, k),
                    x,
                    strategy,
                )?;
                worst = worst.max(v.abs());
            }
        }
    }
    Ok(worst)
}

// ---- field-level building blocks ---------------------------------------

/// Coordinate 1-form `dx^i` (equally the vector field `∂_i`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Basis {
    n: usize,
    i: usize,
}

impl Basis {
    pub fn new(n: usize, i: usize) -> Self {
        assert!(i < n, "basis index {i} out of range for dimension {n}");
        Self { n, i }
    }
}

impl Field for Basis {
    fn components(&self) -> usize {
        self.n
    }
    fn eval<T: Scalar>(&self, _x: &[T]) -> std::result::Result<Vec<T>, EvalError> {
        let mut v = vec![T::zero(); self.n];
        v[self.i] = T::one();
        Ok(v)
    }
}

/// `#_P α` as a vector field.
#[derive(Clone, Copy, Debug)]
pub struct Sharp<P, A> {
    pub pi: P,
    pub alpha: A,
}

impl<P: Field, A: Field> Field for Sharp<P, A> {
    fn components(&self) -> usize {
        self.alpha.components()
    }
    fn eval<T: Scalar>(&self, x: &[T]) -> std::result::Result<Vec<T>, EvalError> {
        let pi = square(self.pi.eval(x)?)?;
        Ok(pi.vec_mul(&self.alpha.eval(x)?))
    }
    fn order(&self) -> usize {
        self.pi.order().max(self.alpha.order())
    }
}

/// `P(α, β)` as a scalar field.
#[derive(Clone, Copy, Debug)]
pub struct Pairing<P, A, B> {
    pub pi: P,
    pub alpha: A,
    pub beta: B,
}

impl<P: Field, A: Field, B: Field> Field for Pairing<P, A, B> {
    fn components(&self) -> usize {
        1
    }
    fn eval<T: Scalar>(&self, x: &[T]) -> std::result::Result<Vec<T>, EvalError> {
        let pi = square(self.pi.eval(x)?)?;
        Ok(vec![pi.bilinear(&self.alpha.eval(x)?, &self.beta.eval(x)?)])
    }
    fn order(&self) -> usize {
        self.pi
            .order()
            .max(self.alpha.order())
            .max(self.beta.order())
    }
}

/// `(L_X β)_i = X^j ∂_j β_i + β_j ∂_i X^j`.
pub fn lie_derivative_oneform<X: Field, B: Field, T: Scalar>(
    xf: &X,
    b: &B,
    x: &[T],
    strategy: DiffStrategy,
) -> std::result::Result<Vec<T>, EvalError> {
    let xv = xf.eval(x)?;
    let bv = b.eval(x)?;
    let transport = directional(b, x, &xv, strategy)?;
    let dx = jacobian(xf, x, strategy)?;
    Ok((0..x.len())
        .map(|i| transport[i] + linalg::dot(&bv, &dx[i]))
        .collect())
}

/// Lie bracket of vector fields, `[X, Y]^i = X^j ∂_j Y^i − Y^j ∂_j X^i`.
pub fn lie_bracket<X: Field, Y: Field, T: Scalar>(
    xf: &X,
    yf: &Y,
    x: &[T],
    strategy: DiffStrategy,
) -> std::result::Result<Vec<T>, EvalError> {
    let xv = xf.eval(x)?;
    let yv = yf.eval(x)?;
    let a = directional(yf, x, &xv, strategy)?;
    let b = directional(xf, x, &yv, strategy)?;
    Ok(linalg::sub(&a, &b))
}

/// `[α, β]_P = L_{#α} β − L_{#β} α − d(P(α, β))`.
pub fn koszul<P: Field, A: Field, B: Field, T: Scalar>(
    pf: &P,
    a: &A,
    b: &B,
    x: &[T],
    strategy: DiffStrategy,
) -> std::result::Result<Vec<T>, EvalError> {
    let sa = Sharp { pi: pf, alpha: a };
    let sb = Sharp { pi: pf, alpha: b };
    let l1 = lie_derivative_oneform(&sa, b, x, strategy)?;
    let l2 = lie_derivative_oneform(&sb, a, x, strategy)?;
    let d = jacobian(
        &Pairing {
            pi: pf,
            alpha: a,
            beta: b,
        },
        x,
        strategy,
    )?;
    Ok((0..x.len()).map(|i| l1[i] - l2[i] - d[i][0]).collect())
}

/// `[P, P]_S(α, β, γ) = γ(#_P[α, β]_P − [#_P α, #_P β])`.
pub fn schouten<P: Field, A: Field, B: Field, C: Field, T: Scalar>(
    pf: &P,
    a: &A,
    b: &B,
    c: &C,
    x: &[T],
    strategy: DiffStrategy,
) -> std::result::Result<T, EvalError> {
    let pi = square(pf.eval(x)?)?;
    let k = koszul(pf, a, b, x, strategy)?;
    let sharp_k = pi.vec_mul(&k);
    let br = lie_bracket(
        &Sharp { pi: pf, alpha: a },
        &Sharp { pi: pf, alpha: b },
        x,
        strategy,
    )?;
    Ok(linalg::dot(&c.eval(x)?, &linalg::sub(&sharp_k, &br)))
}

/// `[P, Q]_S = ½([P+Q, P+Q]_S − [P, P]_S − [Q, Q]_S)`.
pub fn schouten_mixed<P: Field, Q: Field, A: Field, B: Field, C: Field, T: Scalar>(
    pf: &P,
    qf: &Q,
    a: &A,
    b: &B,
    c: &C,
    x: &[T],
    strategy: DiffStrategy,
) -> std::result::Result<T, EvalError> {
    let sum = crate::field::SumField(pf, qf);
    let whole = schouten(&sum, a, b, c, x, strategy)?;
    let pp = schouten(pf, a, b, c, x, strategy)?;
    let qq = schouten(qf, a, b, c, x, strategy)?;
    Ok((whole - pp - qq) * T::from_f64(0.5))
}

// ---- geometry-derived fields ---------------------------------------------

/// `g̃(α, β)` as a scalar field.
#[derive(Clone, Copy, Debug)]
pub struct CometricPairing<'g, A, B> {
    pub geom: &'g Geometry,
    pub alpha: A,
    pub beta: B,
}

impl<A: Field, B: Field> Field for CometricPairing<'_, A, B> {
    fn components(&self) -> usize {
        1
    }
    fn eval<T: Scalar>(&self, x: &[T]) -> std::result::Result<Vec<T>, EvalError> {
        let gi = self.geom.cometric_at(x)?;
        Ok(vec![gi.bilinear(&self.alpha.eval(x)?, &self.beta.eval(x)?)])
    }
    fn order(&self) -> usize {
        self.alpha.order().max(self.beta.order())
    }
}

/// `#_g α` as a vector field.
#[derive(Clone, Copy, Debug)]
pub struct SharpG<'g, A> {
    pub geom: &'g Geometry,
    pub alpha: A,
}

impl<A: Field> Field for SharpG<'_, A> {
    fn components(&self) -> usize {
        self.alpha.components()
    }
    fn eval<T: Scalar>(&self, x: &[T]) -> std::result::Result<Vec<T>, EvalError> {
        Ok(self.geom.cometric_at(x)?.mul_vec(&self.alpha.eval(x)?))
    }
    fn order(&self) -> usize {
        self.alpha.order()
    }
}

/// `b_g X` as a covector field.
#[derive(Clone, Copy, Debug)]
pub struct FlatG<'g, X> {
    pub geom: &'g Geometry,
    pub v: X,
}

impl<X: Field> Field for FlatG<'_, X> {
    fn components(&self) -> usize {
        self.v.components()
    }
    fn eval<T: Scalar>(&self, x: &[T]) -> std::result::Result<Vec<T>, EvalError> {
        Ok(self.geom.metric_at(x)?.mul_vec(&self.v.eval(x)?))
    }
    fn order(&self) -> usize {
        self.v.order()
    }
}

/// `Jα` as a covector field.
#[derive(Clone, Copy, Debug)]
pub struct JField<'g, A> {
    pub geom: &'g Geometry,
    pub alpha: A,
}

impl<A: Field> Field for JField<'_, A> {
    fn components(&self) -> usize {
        self.alpha.components()
    }
    fn eval<T: Scalar>(&self, x: &[T]) -> std::result::Result<Vec<T>, EvalError> {
        self.geom.j_at(&self.alpha.eval(x)?, x)
    }
    fn order(&self) -> usize {
        self.alpha.order()
    }
}

/// `J̃X` as a vector field.
#[derive(Clone, Copy, Debug)]
pub struct JTildeField<'g, X> {
    pub geom: &'g Geometry,
    pub v: X,
}

impl<X: Field> Field for JTildeField<'_, X> {
    fn components(&self) -> usize {
        self.v.components()
    }
    fn eval<T: Scalar>(&self, x: &[T]) -> std::result::Result<Vec<T>, EvalError> {
        self.geom.jtilde_at(&self.v.eval(x)?, x)
    }
    fn order(&self) -> usize {
        self.v.order()
    }
}

/// `#_π⁻¹ X` as a covector field; fails where `π` is singular.
#[derive(Clone, Copy, Debug)]
pub struct InvSharpPi<'g, X> {
    pub geom: &'g Geometry,
    pub v: X,
}

impl<X: Field> Field for InvSharpPi<'_, X> {
    fn components(&self) -> usize {
        self.v.components()
    }
    fn eval<T: Scalar>(&self, x: &[T]) -> std::result::Result<Vec<T>, EvalError> {
        self.geom.inv_sharp_pi_at(&self.v.eval(x)?, x)
    }
    fn order(&self) -> usize {
        self.v.order()
    }
}

/// Floor on `|det π|` for operations that invert `#_π`.
pub const POISSON_FLOOR: f64 = 1e-10;

impl Geometry {
    /// `#_π⁻¹ v`, failing when `|det π|` is below [`POISSON_FLOOR`].
    pub fn inv_sharp_pi_at<T: Scalar>(
        &self,
        v: &[T],
        x: &[T],
    ) -> std::result::Result<Vec<T>, EvalError> {
        let pi = self.pi_at(x)?;
        let det = pi.det().re();
        if det.abs() <= POISSON_FLOOR {
            return Err(EvalError::DegeneratePoisson { det });
        }
        pi.transpose().solve(v)
    }

    /// Largest deviation of `g̃(Jα, β) − π(α, β)` and of
    /// `g̃(Jα, β) + g̃(α, Jβ)` over coordinate pairs at `p`.
    pub fn j_consistency(&self, p: &Point) -> Result<f64> {
        let x = &p.coords;
        let n = self.dim();
        let gi = lift(x, self.cometric_at::<f64>(x))?;
        let pi = lift(x, self.pi_at::<f64>(x))?;
        let mut worst = 0.0_f64;
        for i in 0..n {
            let ei: Vec<f64> = (0..n).map(|k| if k == i { 1.0 } else { 0.0 }).collect();
            let ji = self.j_map(&ei, p)?;
            for j in 0..n {
                let ej: Vec<f64> = (0..n).map(|k| if k == j { 1.0 } else { 0.0 }).collect();
                let jj = self.j_map(&ej, p)?;
                let lhs = gi.bilinear(&ji, &ej);
                worst = worst.max((lhs - pi[(i, j)]).abs());
                worst = worst.max((lhs + gi.bilinear(&ei, &jj)).abs());
            }
        }
        Ok(worst)
    }
}

/// Warn once when a report was produced from finite differences with a
/// tolerance tighter than they can deliver.
pub(crate) fn warn_tight_tolerance(strategy: DiffStrategy, tol: f64) {
    if strategy == DiffStrategy::CentralFd && tol < 1e-6 {
        warn!("tolerance {tol:e} is below the truncation error of central differences");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::Interval;
    use crate::field::{CovectorField, VectorField};

    fn flat(n: usize, pi: &[(usize, usize, &str)]) -> Geometry {
        let chart = Chart::cube(n, -2.0, 2.0).unwrap();
        let g = MetricField::euclidean(&chart);
        let b = BivectorField::from_upper(&chart, pi).unwrap();
        Geometry::new(chart, g, b).unwrap()
    }

    #[test]
    fn sharp_pi_examples() {
        let g = flat(2, &[(0, 1, "1")]);
        let p = Point::new(vec![0.5, 0.5]);
        assert_eq!(g.sharp_pi(&[1.0, 0.0], &p).unwrap(), vec![0.0, 1.0]);
        assert_eq!(g.sharp_pi(&[0.0, 0.0], &p).unwrap(), vec![0.0, 0.0]);
        let chart = Chart::cube(2, -10.0, 10.0).unwrap();
        let g = Geometry::new(
            chart.clone(),
            MetricField::euclidean(&chart),
            BivectorField::from_upper(&chart, &[(0, 1, "x")]).unwrap(),
        )
        .unwrap();
        let p = Point::new(vec![2.0, 5.0]);
        assert_eq!(g.sharp_pi(&[0.0, 1.0], &p).unwrap(), vec![-2.0, 0.0]);
    }

    #[test]
    fn musical_maps() {
        let chart = Chart::cube(2, -1.0, 1.0).unwrap();
        let g = Geometry::new(
            chart.clone(),
            MetricField::diagonal(&chart, &["4", "4"]).unwrap(),
            BivectorField::zero(&chart),
        )
        .unwrap();
        let p = Point::new(vec![0.1, 0.2]);
        assert_eq!(g.sharp_g(&[1.0, 0.0], &p).unwrap(), vec![0.25, 0.0]);
        assert_eq!(g.cometric(&[1.0, 0.0], &[1.0, 0.0], &p).unwrap(), 0.25);
        let a = [0.3, -1.7];
        let back = g.flat_g(&g.sharp_g(&a, &p).unwrap(), &p).unwrap();
        assert!(linalg::max_abs(&linalg::sub(&back, &a)) < 1e-10);
        assert_eq!(g.j_map(&[1.0, 0.0], &p).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn j_examples() {
        let g = flat(2, &[(0, 1, "1")]);
        let p = Point::new(vec![0.0, 0.0]);
        assert_eq!(g.j_map(&[1.0, 0.0], &p).unwrap(), vec![0.0, 1.0]);
        assert!(g.j_consistency(&p).unwrap() < 1e-15);
    }

    #[test]
    fn degenerate_metric_rejected() {
        let chart = Chart::cube(2, -1.0, 1.0).unwrap();
        let m = MetricField::diagonal(&chart, &["1", "0"]).unwrap();
        assert!(Geometry::new(chart.clone(), m, BivectorField::zero(&chart)).is_err());
        let m = MetricField::parse(&[&["1", "x"], &["0", "1"]], &chart).unwrap();
        assert!(Geometry::new(chart.clone(), m, BivectorField::zero(&chart)).is_err());
        let b = BivectorField::parse(&[&["0", "1"], &["1", "0"]], &chart).unwrap();
        assert!(Geometry::new(chart.clone(), MetricField::euclidean(&chart), b).is_err());
    }

    #[test]
    fn lie_derivative_examples() {
        let chart = Chart::cube(2, -1.0, 1.0).unwrap();
        let x = [0.3, 0.4];
        let s = DiffStrategy::ForwardAd;
        let c = VectorField::parse(&["1", "2"], &chart).unwrap();
        let b = CovectorField::parse(&["3", "-1"], &chart).unwrap();
        assert_eq!(
            lie_derivative_oneform(&c, &b, &x, s).unwrap(),
            vec![0.0, 0.0]
        );
        let v = VectorField::parse(&["0", "x"], &chart).unwrap();
        let dy = CovectorField::parse(&["0", "1"], &chart).unwrap();
        assert_eq!(
            lie_derivative_oneform(&v, &dy, &x, s).unwrap(),
            vec![1.0, 0.0]
        );
        let e1 = VectorField::parse(&["1", "0"], &chart).unwrap();
        let xdy = CovectorField::parse(&["0", "x"], &chart).unwrap();
        assert_eq!(
            lie_derivative_oneform(&e1, &xdy, &x, s).unwrap(),
            vec![0.0, 1.0]
        );
    }

    #[test]
    fn koszul_examples() {
        let g = flat(2, &[(0, 1, "1")]);
        let p = Point::new(vec![0.2, 0.7]);
        let dx = Basis::new(2, 0);
        let dy = Basis::new(2, 1);
        assert_eq!(g.koszul_bracket(&dx, &dy, &p).unwrap(), vec![0.0, 0.0]);
        let g = flat(2, &[(0, 1, "x")]);
        assert_eq!(g.koszul_bracket(&dx, &dy, &p).unwrap(), vec![1.0, 0.0]);
        assert_eq!(g.koszul_bracket(&dy, &dx, &p).unwrap(), vec![-1.0, 0.0]);
    }

    #[test]
    fn schouten_trivial_cases() {
        let g = flat(3, &[(0, 1, "1"), (1, 2, "-2")]);
        assert_eq!(g.is_poisson(1e-12).residual("poisson_jacobi"), 0.0);
        let chart = Chart::new(["x", "y"], vec![Interval::new(-1.0, 1.0); 2]).unwrap();
        let g2 = Geometry::new(
            chart.clone(),
            MetricField::euclidean(&chart),
            BivectorField::from_upper(&chart, &[(0, 1, "sin(x*y)+x^3")]).unwrap(),
        )
        .unwrap();
        assert!(g2.is_poisson(1e-12).passed());
    }

    #[test]
    fn schouten_mixed_polarization() {
        let g = flat(3, &[(0, 1, "z"), (1, 2, "x*y")]);
        let q = BivectorField::from_upper(g.chart(), &[(0, 2, "y^2")]).unwrap();
        let zero = BivectorField::zero(g.chart());
        let p = Point::new(vec![0.3, -0.4, 1.1]);
        let (a, b, c) = (Basis::new(3, 0), Basis::new(3, 1), Basis::new(3, 2));
        let pi = g.bivector();
        assert_eq!(g.schouten_mixed(pi, &zero, &a, &b, &c, &p).unwrap(), 0.0);
        let same = g.schouten_mixed(pi, pi, &a, &b, &c, &p).unwrap();
        let own = g.schouten_self(&a, &b, &c, &p).unwrap();
        assert!((same - own).abs() < 1e-12);
        let pq = g.schouten_mixed(pi, &q, &a, &b, &c, &p).unwrap();
        let qp = g.schouten_mixed(&q, pi, &a, &b, &c, &p).unwrap();
        assert!((pq - qp).abs() < 1e-12);
    }
}
