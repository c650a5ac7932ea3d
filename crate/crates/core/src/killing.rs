//! Bivectors built from Killing fields: `J̃X = ∇_X U` and
//! `π(α, β) = g(J̃ #_g α, #_g β)`, with the curvature conditions that decide
//! their compatibility.

use std::sync::Arc;

use log::warn;

use crate::chart::Point;
use crate::error::{Error, EvalError, Result};
use crate::expr::{self, Expr};
use crate::field::{jacobian, BivectorField, Field, ScalarField, VectorField};
use crate::linalg::{self, Mat};
use crate::poisson::{lift, square, Geometry};
use crate::report::{sweep_max, sweep_max_many, Check, ResidualReport};
use crate::scalar::Scalar;

type EvalResult<T> = std::result::Result<T, EvalError>;

/// `J̃ = ∇U` as an `n²`-component field, `J̃^i_j` row-major.
#[derive(Clone, Copy, Debug)]
pub struct KillingJTilde<'g, U> {
    pub geom: &'g Geometry,
    pub u: U,
}

impl<U: Field> Field for KillingJTilde<'_, U> {
    fn components(&self) -> usize {
        self.geom.dim() * self.geom.dim()
    }
    fn eval<T: Scalar>(&self, x: &[T]) -> EvalResult<Vec<T>> {
        Ok(self.geom.jtilde_from_killing_at(&self.u, x)?.into_vec())
    }
    fn order(&self) -> usize {
        1 + self.u.order()
    }
}

fn basis(n: usize, i: usize) -> Vec<f64> {
    (0..n).map(|k| if k == i { 1.0 } else { 0.0 }).collect()
}

impl Geometry {
    /// `(L_U g)_{ij} = U^k ∂_k g_{ij} + g_{kj} ∂_i U^k + g_{ik} ∂_j U^k`.
    pub fn lie_derivative_metric_at<U: Field, T: Scalar>(
        &self,
        u: &U,
        x: &[T],
    ) -> EvalResult<Mat<T>> {
        let n = x.len();
        let s = self.strategy();
        let uv = u.eval(x)?;
        let g = self.metric_at(x)?;
        let dg = jacobian(self.metric(), x, s)?;
        let du = jacobian(u, x, s)?;
        Ok(Mat::from_fn(n, |i, j| {
            let mut acc = T::zero();
            for k in 0..n {
                acc = acc + uv[k] * dg[k][i * n + j] + g[(k, j)] * du[i][k] + g[(i, k)] * du[j][k];
            }
            acc
        }))
    }

    /// Largest component of `L_U g` over the samples, as check `killing`.
    pub fn killing_residual<U: Field>(&self, u: &U, tol: f64) -> ResidualReport {
        let mut report = ResidualReport::new("killing", self.chart());
        let points = self.sample_points();
        let check = Check::timed("killing", tol, || {
            sweep_max(&points, |x| {
                Ok(self.lie_derivative_metric_at(u, x)?.max_abs())
            })
        });
        if !check.passed {
            warn!("vector field is not Killing: residual {:?}", check.residual);
        }
        report.push(check);
        report
    }

    /// `J̃^i_j = ∂_j U^i + Γ^i_{jk} U^k`.
    pub fn jtilde_from_killing_at<U: Field, T: Scalar>(
        &self,
        u: &U,
        x: &[T],
    ) -> EvalResult<Mat<T>> {
        let n = x.len();
        let uv = u.eval(x)?;
        let du = jacobian(u, x, self.strategy())?;
        let gamma = self.christoffel_at(x)?;
        Ok(Mat::from_fn(n, |i, j| {
            let mut acc = du[j][i];
            for k in 0..n {
                acc = acc + gamma.get(i, j, k) * uv[k];
            }
            acc
        }))
    }

    pub fn jtilde_from_killing<U: Field>(&self, u: &U, p: &Point) -> Result<Mat<f64>> {
        self.check_field(u)?;
        lift(&p.coords, self.jtilde_from_killing_at(u, &p.coords))
    }

    /// The bivector `π^{ab} = J̃^b_e g^{ea}`, built symbolically from the
    /// metric and `U` expressions and skew-symmetrized. The result is exact
    /// for Killing `U`; otherwise the skew part is returned with a warning.
    pub fn pi_from_killing(&self, u: &VectorField) -> Result<BivectorField> {
        let n = self.dim();
        self.check_field(u)?;
        let exprs = |comps: &[ScalarField], what: &str| -> Result<Vec<Arc<Expr>>> {
            comps
                .iter()
                .map(|c| {
                    c.expr().cloned().ok_or_else(|| {
                        Error::InvalidField(format!("{what} has an opaque component"))
                    })
                })
                .collect()
        };
        let g = exprs(self.metric().comps(), "metric")?;
        let uc = exprs(u.comps(), "vector field")?;
        let gi = symbolic_inverse(&g, n);
        let dg: Vec<Vec<Arc<Expr>>> = (0..n)
            .map(|l| g.iter().map(|e| e.derivative(l)).collect())
            .collect();
        let at = |m: &[Arc<Expr>], i: usize, j: usize| m[i * n + j].clone();
        // J̃^i_j
        let mut jt = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut terms = vec![uc[i].derivative(j)];
                for k in 0..n {
                    let mut inner = Vec::new();
                    for l in 0..n {
                        let christ = expr::sub(
                            expr::add(at(&dg[j], l, k), at(&dg[k], l, j)),
                            at(&dg[l], j, k),
                        );
                        inner.push(expr::mul(at(&gi, i, l), christ));
                    }
                    let gamma = expr::mul(expr::cst(0.5), expr::sum(inner));
                    terms.push(expr::mul(gamma, uc[k].clone()));
                }
                jt.push(expr::sum(terms));
            }
        }
        let a =
            |p: usize, q: usize| expr::sum((0..n).map(|e| expr::mul(at(&jt, q, e), at(&gi, e, p))));
        let chart = self.chart();
        let mut comps = vec![ScalarField::constant(0.0, chart); n * n];
        for p in 0..n {
            for q in (p + 1)..n {
                let e = expr::mul(expr::cst(0.5), expr::sub(a(p, q), a(q, p)));
                comps[q * n + p] = ScalarField::from_expr(expr::neg(e.clone()), chart);
                comps[p * n + q] = ScalarField::from_expr(e, chart);
            }
        }
        let killing = self.killing_residual(u, crate::scene::Tolerances::default().killing);
        if !killing.passed() {
            warn!(
                "pi_from_killing: field is not Killing (residual {:e}); returning the skew part",
                killing.residual("killing")
            );
        }
        BivectorField::new(n, comps)
    }

    /// Largest defect of `(∇_X J̃)(Y) = R(X, U)Y` on coordinate vectors at
    /// `x`, with `R` in the convention of [`Geometry::riemann`]. This is
    /// the identity `∇_X(J̃)(Y) = R(U, X)Y` for the opposite sign of `R`.
    pub fn killing_identity_at<U: Field>(&self, u: &U, x: &[f64]) -> EvalResult<f64> {
        let n = x.len();
        let field = KillingJTilde { geom: self, u };
        let k = square(field.eval(x)?)?;
        let dk = jacobian(&field, x, self.strategy())?;
        let gamma = self.christoffel_at(x)?;
        let r = self.riemann_at(x)?;
        let uv = u.eval(x)?;
        let mut worst = 0.0_f64;
        for l in 0..n {
            for b in 0..n {
                let rhs = r.apply(&basis(n, l), &uv, &basis(n, b));
                for (i, ri) in rhs.iter().enumerate() {
                    let mut lhs = dk[l][i * n + b];
                    for m in 0..n {
                        lhs += gamma.get(i, l, m) * k[(m, b)] - k[(i, m)] * gamma.get(m, l, b);
                    }
                    worst = worst.max((lhs - ri).abs());
                }
            }
        }
        Ok(worst)
    }

    /// Largest `|R(U, J̃X)Y|` and largest
    /// `|g(R(Y,Z)U, J̃X) + g(R(X,U)Y, J̃Z) + g(R(U,X)Z, J̃Y)|` over coordinate
    /// vectors at `x`.
    pub fn killing_conditions_at<U: Field>(&self, u: &U, x: &[f64]) -> EvalResult<[f64; 2]> {
        let n = x.len();
        let r = self.riemann_at(x)?;
        let g = self.metric_at(x)?;
        let jt = self.jtilde_from_killing_at(u, x)?;
        let uv = u.eval(x)?;
        let e: Vec<Vec<f64>> = (0..n).map(|i| basis(n, i)).collect();
        let je: Vec<Vec<f64>> = e.iter().map(|v| jt.mul_vec(v)).collect();
        let mut out = [0.0_f64; 2];
        for a in 0..n {
            for b in 0..n {
                out[0] = out[0].max(linalg::max_abs(&r.apply(&uv, &je[a], &e[b])));
                for c in 0..n {
                    let (xv, yv, zv) = (&e[a], &e[b], &e[c]);
                    let v = g.bilinear(&r.apply(yv, zv, &uv), &je[a])
                        + g.bilinear(&r.apply(xv, &uv, yv), &je[c])
                        + g.bilinear(&r.apply(&uv, xv, zv), &je[b]);
                    out[1] = out[1].max(v.abs());
                }
            }
        }
        Ok(out)
    }

    /// Conditions `cond12`, `cond13` and the identity `killing_identity`
    /// for a Killing field `U`, together with both compatibility residuals
    /// of `(g, π_U)` and checks that each condition's verdict agrees with
    /// the matching compatibility verdict.
    pub fn prop41_check(&self, u: &VectorField, tol: f64) -> Result<ResidualReport> {
        let killing = self.killing_residual(u, tol);
        if !killing.passed() {
            return Err(Error::NotKilling {
                residual: killing.residual("killing"),
                tol,
            });
        }
        let mut report = ResidualReport::new("killing_compatibility", self.chart());
        report.merge(killing);
        let points = self.sample_points();
        let start = std::time::Instant::now();
        let r = sweep_max_many(&points, 3, |x| {
            let c = self.killing_conditions_at(u, x)?;
            Ok(vec![c[0], c[1], self.killing_identity_at(u, x)?])
        });
        let ms = start.elapsed().as_secs_f64() * 1e3;
        for (slot, name) in ["cond12", "cond13", "killing_identity"]
            .into_iter()
            .enumerate()
        {
            let mut c = match &r {
                Ok(v) => Check::new(name, v[slot], tol),
                Err(e) => Check::failed(name, tol, e),
            };
            c.wall_ms = ms;
            report.push(c);
        }
        let induced = self.with_bivector(self.pi_from_killing(u)?)?;
        let compat = induced.compat_residuals(tol);
        for (cond, compat_name, name) in [
            ("cond12", "nabla_pi", "agrees_nabla"),
            ("cond13", "d_pi", "agrees_d"),
        ] {
            let a = report.check(cond).map(|c| c.passed);
            let b = compat.check(compat_name).map(|c| c.passed);
            report.notes.push(format!(
                "{cond} {} / {compat_name} {:e}",
                report.residual(cond),
                compat.residual(compat_name)
            ));
            report.push(Check::new(name, if a == b { 0.0 } else { 1.0 }, 0.5));
        }
        report.merge(compat);
        Ok(report)
    }
}

/// Inverse of a symbolic `n × n` matrix by cofactors.
fn symbolic_inverse(m: &[Arc<Expr>], n: usize) -> Vec<Arc<Expr>> {
    let idx: Vec<usize> = (0..n).collect();
    let det = symbolic_det(m, n, &idx, &idx);
    let mut out = vec![expr::cst(0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            let rows: Vec<usize> = idx.iter().copied().filter(|r| *r != j).collect();
            let cols: Vec<usize> = idx.iter().copied().filter(|c| *c != i).collect();
            let minor = symbolic_det(m, n, &rows, &cols);
            let signed = if (i + j) % 2 == 0 {
                minor
            } else {
                expr::neg(minor)
            };
            out[i * n + j] = expr::div(signed, det.clone());
        }
    }
    out
}

fn symbolic_det(m: &[Arc<Expr>], n: usize, rows: &[usize], cols: &[usize]) -> Arc<Expr> {
    match rows.len() {
        0 => expr::cst(1.0),
        1 => m[rows[0] * n + cols[0]].clone(),
        _ => {
            let r0 = rows[0];
            let rest = &rows[1..];
            let mut terms = Vec::new();
            for (c, &col) in cols.iter().enumerate() {
                let entry = m[r0 * n + col].clone();
                if entry.is_zero() {
                    continue;
                }
                let sub_cols: Vec<usize> = cols.iter().copied().filter(|k| *k != col).collect();
                let t = expr::mul(entry, symbolic_det(m, n, rest, &sub_cols));
                terms.push(if c % 2 == 0 { t } else { expr::neg(t) });
            }
            expr::sum(terms)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::Chart;
    use crate::field::MetricField;
    use crate::scenes;

    fn flat2() -> Geometry {
        let chart = Chart::cube(2, -1.0, 1.0).unwrap().with_sampling(8, 1);
        let g = MetricField::euclidean(&chart);
        Geometry::new(chart.clone(), g, BivectorField::zero(&chart)).unwrap()
    }

    #[test]
    fn rotation_on_the_plane() {
        let g = flat2();
        let u = VectorField::parse(&["-y", "x"], g.chart()).unwrap();
        assert_eq!(g.killing_residual(&u, 1e-12).residual("killing"), 0.0);
        let jt = g
            .jtilde_from_killing(&u, &Point::new(vec![0.3, 0.1]))
            .unwrap();
        assert_eq!(jt.as_slice(), &[0.0, -1.0, 1.0, 0.0]);
        let pi = g.pi_from_killing(&u).unwrap();
        let p = Point::new(vec![0.7, -0.2]);
        assert_eq!(pi.component(0, 1).value(&p).unwrap(), 1.0);
        assert_eq!(pi.component(1, 0).value(&p).unwrap(), -1.0);
        let r = g.prop41_check(&u, 1e-10).unwrap();
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn zero_field() {
        let g = flat2();
        let u = VectorField::parse(&["0", "0"], g.chart()).unwrap();
        let pi = g.pi_from_killing(&u).unwrap();
        let p = Point::new(vec![0.4, 0.4]);
        assert_eq!(pi.component(0, 1).value(&p).unwrap(), 0.0);
        assert!(g.prop41_check(&u, 1e-10).unwrap().passed());
    }

    #[test]
    fn dilation_is_not_killing() {
        let g = flat2();
        let u = VectorField::parse(&["x", "y"], g.chart()).unwrap();
        assert_eq!(g.killing_residual(&u, 1e-8).residual("killing"), 2.0);
        assert!(matches!(
            g.prop41_check(&u, 1e-8),
            Err(Error::NotKilling { .. })
        ));
    }

    #[test]
    fn sphere_rotation_identity() {
        let s = scenes::s2_kahler();
        let g = scenes::build(&s).unwrap();
        let u = VectorField::parse(&["-y", "x"], g.chart()).unwrap();
        for p in g.sample_points() {
            assert!(g.killing_identity_at(&u, &p.coords).unwrap() < 1e-10);
        }
    }

    #[test]
    fn symbolic_inverse_matches_numeric() {
        let chart = Chart::cube(3, -1.0, 1.0).unwrap();
        let texts = ["2+x^2", "x*y", "0", "x*y", "3", "z", "0", "z", "1+y^2"];
        let m: Vec<Arc<Expr>> = texts
            .iter()
            .map(|t| expr::parse(t, chart.names()).unwrap())
            .collect();
        let inv = symbolic_inverse(&m, 3);
        let x = [0.3_f64, -0.5, 0.2];
        let num = Mat::from_row_major(m.iter().map(|e| e.eval(&x).unwrap()).collect()).unwrap();
        let num_inv = num.inverse().unwrap();
        for (a, b) in inv.iter().zip(num_inv.as_slice()) {
            assert!((a.eval(&x).unwrap() - b).abs() < 1e-12);
        }
    }
}
