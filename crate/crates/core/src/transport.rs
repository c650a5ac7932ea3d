//! Parallel transport of covectors along cotangent curves.

use crate::chart::{Chart, Interval, Point};
use crate::dual::Dual;
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::linalg;
use crate::poisson::{lift, Geometry};
use crate::report::{Check, ResidualReport};

/// Anchor tolerance, relative to `|γ'|`.
pub const ANCHOR_TOL: f64 = 1e-6;
/// Absolute slack added to the anchor tolerance so that resting curves
/// (`γ' = 0`) are not rejected for rounding noise.
const ANCHOR_FLOOR: f64 = 1e-12;
pub const DEFAULT_STEPS: usize = 256;

/// A curve `γ` with a covector `α` along it, both expressions in `t ∈ [0, 1]`.
#[derive(Clone, Debug)]
pub struct CotangentCurve {
    gamma: Vec<ScalarField>,
    alpha: Vec<ScalarField>,
}

impl CotangentCurve {
    pub fn parse(gamma: &[&str], alpha: &[&str]) -> Result<Self> {
        if gamma.len() != alpha.len() || gamma.is_empty() {
            return Err(Error::InvalidField(format!(
                "curve has {} point components and {} covector components",
                gamma.len(),
                alpha.len()
            )));
        }
        let chart = Chart::new(["t"], vec![Interval::new(0.0, 1.0)])?;
        let parse = |v: &[&str]| -> Result<Vec<ScalarField>> {
            v.iter().map(|s| ScalarField::parse(s, &chart)).collect()
        };
        Ok(Self {
            gamma: parse(gamma)?,
            alpha: parse(alpha)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.gamma.len()
    }

    fn eval(fields: &[ScalarField], t: f64) -> Result<Vec<f64>> {
        fields
            .iter()
            .map(|f| f.eval_scalar(&[t]).map_err(|e| Error::at(&[t], e)))
            .collect()
    }

    pub fn point(&self, t: f64) -> Result<Vec<f64>> {
        Self::eval(&self.gamma, t)
    }

    pub fn velocity(&self, t: f64) -> Result<Vec<f64>> {
        self.gamma
            .iter()
            .map(|f| {
                f.eval_scalar(&[Dual::variable(t)])
                    .map(|d| d.eps)
                    .map_err(|e| Error::at(&[t], e))
            })
            .collect()
    }

    pub fn covector(&self, t: f64) -> Result<Vec<f64>> {
        Self::eval(&self.alpha, t)
    }
}

impl Geometry {
    /// `|#_π α(t) − γ'(t)|` (largest coordinate) and `|γ'(t)|`.
    pub fn anchor_residual(&self, curve: &CotangentCurve, t: f64) -> Result<(f64, f64)> {
        let x = curve.point(t)?;
        let v = curve.velocity(t)?;
        let a = curve.covector(t)?;
        let sharp = self.sharp_pi(&a, &Point::new(x))?;
        Ok((
            linalg::max_abs(&linalg::sub(&sharp, &v)),
            linalg::max_abs(&v),
        ))
    }

    fn transport_rhs(&self, curve: &CotangentCurve, t: f64, beta: &[f64]) -> Result<Vec<f64>> {
        let x = curve.point(t)?;
        let p = Point::new(x);
        if !self.chart().contains(&p) {
            return Err(Error::OutsideDomain(p.coords));
        }
        let (res, speed) = self.anchor_residual(curve, t)?;
        if res > ANCHOR_TOL * speed + ANCHOR_FLOOR {
            return Err(Error::AnchorViolation { t, residual: res });
        }
        let table = lift(&p.coords, self.contravariant_christoffel_at(&p.coords))?;
        let a = curve.covector(t)?;
        Ok(table.contract(&a, beta).into_iter().map(|v| -v).collect())
    }

    /// `β(t)` at the `steps + 1` uniform nodes, by the classical fourth-order
    /// Runge–Kutta scheme for `dβ_k/dt = −Γ^{ij}_k α_i β_j`.
    pub fn transport_path(
        &self,
        curve: &CotangentCurve,
        beta0: &[f64],
        steps: usize,
    ) -> Result<Vec<Vec<f64>>> {
        let n = self.dim();
        if curve.dim() != n || beta0.len() != n {
            return Err(Error::InvalidField(format!(
                "curve/covector dimension does not match chart dimension {n}"
            )));
        }
        let steps = steps.max(1);
        let h = 1.0 / steps as f64;
        let mut beta = beta0.to_vec();
        let mut path = Vec::with_capacity(steps + 1);
        path.push(beta.clone());
        for s in 0..steps {
            let t = s as f64 * h;
            let k1 = self.transport_rhs(curve, t, &beta)?;
            let k2 = self.transport_rhs(
                curve,
                t + 0.5 * h,
                &linalg::add(&beta, &linalg::scale(&k1, 0.5 * h)),
            )?;
            let k3 = self.transport_rhs(
                curve,
                t + 0.5 * h,
                &linalg::add(&beta, &linalg::scale(&k2, 0.5 * h)),
            )?;
            let k4 =
                self.transport_rhs(curve, t + h, &linalg::add(&beta, &linalg::scale(&k3, h)))?;
            for i in 0..n {
                beta[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            path.push(beta.clone());
        }
        Ok(path)
    }

    /// `τ_(γ,α)(β₀)`.
    pub fn cotangent_transport(
        &self,
        curve: &CotangentCurve,
        beta0: &[f64],
        steps: usize,
    ) -> Result<Vec<f64>> {
        Ok(self
            .transport_path(curve, beta0, steps)?
            .pop()
            .expect("nonempty path"))
    }

    /// Observed order `log₂(|β_N − β_{2N}| / |β_{2N} − β_{4N}|)`.
    pub fn transport_convergence_order(
        &self,
        curve: &CotangentCurve,
        beta0: &[f64],
        base_steps: usize,
    ) -> Result<f64> {
        let a = self.cotangent_transport(curve, beta0, base_steps)?;
        let b = self.cotangent_transport(curve, beta0, 2 * base_steps)?;
        let c = self.cotangent_transport(curve, beta0, 4 * base_steps)?;
        let e1 = linalg::max_abs(&linalg::sub(&a, &b));
        let e2 = linalg::max_abs(&linalg::sub(&b, &c));
        if e2 == 0.0 {
            return Ok(f64::INFINITY);
        }
        Ok((e1 / e2).log2())
    }

    /// Isometry and `J`-commutation defects of the transport, plus the
    /// observed integrator order.
    pub fn transport_report(
        &self,
        curve: &CotangentCurve,
        beta0: &[f64],
        steps: usize,
        tol: f64,
    ) -> ResidualReport {
        let mut report = ResidualReport::new("transport", self.chart());
        let p0 = Point::new(curve.point(0.0).unwrap_or_default());
        let p1 = Point::new(curve.point(1.0).unwrap_or_default());
        report.push(Check::timed("isometry", tol, || {
            let b1 = self.cotangent_transport(curve, beta0, steps)?;
            let q0 = self.cometric(beta0, beta0, &p0)?;
            let q1 = self.cometric(&b1, &b1, &p1)?;
            Ok((q1 - q0).abs())
        }));
        report.push(Check::timed("j_commutes", tol, || {
            let b1 = self.cotangent_transport(curve, beta0, steps)?;
            let jb0 = self.j_map(beta0, &p0)?;
            let lhs = self.cotangent_transport(curve, &jb0, steps)?;
            let rhs = self.j_map(&b1, &p1)?;
            Ok(linalg::max_abs(&linalg::sub(&lhs, &rhs)))
        }));
        // Shortfall against fourth order; a flat scene is exact and reads 0.
        report.push(Check::timed("order_deficit", 0.5, || {
            let order = self.transport_convergence_order(curve, beta0, 8)?;
            Ok((4.0 - order).max(0.0))
        }));
        report
    }
}
