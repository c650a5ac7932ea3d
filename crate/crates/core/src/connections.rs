//! Levi-Civita connection, the contravariant derivatives `∇^π` and `D^π`,
//! their torsion and difference tensors, and the two compatibility tests.

use crate::chart::Point;
use crate::error::{EvalError, Result};
use crate::field::{directional, jacobian, DiffStrategy, Field};
use crate::linalg::{self, Mat};
use crate::poisson::{
    koszul, lift, schouten, square, Basis, CometricPairing, Geometry, JField, Sharp,
};
use crate::report::{sweep_max, sweep_max_many, Check, ResidualReport};
use crate::scalar::Scalar;

type EvalResult<T> = std::result::Result<T, EvalError>;

/// Levi-Civita symbols `Γ^k_ij` at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct Christoffels<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> Christoffels<T> {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// `Γ^k_ij`
    #[inline]
    pub fn get(&self, k: usize, i: usize, j: usize) -> T {
        self.data[(k * self.n + i) * self.n + j]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    /// `Γ^k_ij u^i v^j`
    pub fn contract(&self, u: &[T], v: &[T]) -> Vec<T> {
        let n = self.n;
        (0..n)
            .map(|k| {
                let mut acc = T::zero();
                for i in 0..n {
                    for j in 0..n {
                        acc = acc + self.get(k, i, j) * u[i] * v[j];
                    }
                }
                acc
            })
            .collect()
    }
}

/// Christoffel symbols of any `n²`-component symmetric metric field.
pub fn christoffel_of<M: Field, T: Scalar>(
    metric: &M,
    x: &[T],
    strategy: DiffStrategy,
) -> EvalResult<Christoffels<T>> {
    let n = x.len();
    let g = square(metric.eval(x)?)?;
    let det = g.det().re();
    if det.abs() <= crate::poisson::METRIC_FLOOR {
        return Err(EvalError::DegenerateMetric { det });
    }
    let gi = g.inverse()?;
    let dg = jacobian(metric, x, strategy)?;
    let d = |l: usize, i: usize, j: usize| dg[l][i * n + j];
    let half = T::from_f64(0.5);
    let mut data = Vec::with_capacity(n * n * n);
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut acc = T::zero();
                for l in 0..n {
                    acc = acc + gi[(k, l)] * (d(i, j, l) + d(j, i, l) - d(l, i, j));
                }
                data.push(acc * half);
            }
        }
    }
    Ok(Christoffels { n, data })
}

/// The Christoffel table of a metric as an `n³`-component field.
#[derive(Clone, Copy, Debug)]
pub struct ChristoffelField<M> {
    pub metric: M,
    pub strategy: DiffStrategy,
}

impl<M: Field> Field for ChristoffelField<M> {
    fn components(&self) -> usize {
        let n2 = self.metric.components();
        let n = (n2 as f64).sqrt().round() as usize;
        n * n * n
    }
    fn eval<T: Scalar>(&self, x: &[T]) -> EvalResult<Vec<T>> {
        Ok(christoffel_of(&self.metric, x, self.strategy)?.data)
    }
    fn order(&self) -> usize {
        self.metric.order() + 1
    }
}

/// Coefficients `Γ^{ij}_k = (D^π_{dx^i} dx^j)_k` at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct ContravariantChristoffels<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> ContravariantChristoffels<T> {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// `Γ^{ij}_k`
    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> T {
        self.data[(i * self.n + j) * self.n + k]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    /// `α_i β_j Γ^{ij}_k`, the zeroth-order part of `D^π_α β`.
    pub fn contract(&self, a: &[T], b: &[T]) -> Vec<T> {
        let n = self.n;
        (0..n)
            .map(|k| {
                let mut acc = T::zero();
                for i in 0..n {
                    for j in 0..n {
                        acc = acc + self.get(i, j, k) * a[i] * b[j];
                    }
                }
                acc
            })
            .collect()
    }
}

/// `g^{ij}` followed by `π^{ij}`, flattened; differentiated together.
#[derive(Clone, Copy, Debug)]
struct CometricAndPi<'g> {
    geom: &'g Geometry,
}

impl Field for CometricAndPi<'_> {
    fn components(&self) -> usize {
        2 * self.geom.dim() * self.geom.dim()
    }
    fn eval<T: Scalar>(&self, x: &[T]) -> EvalResult<Vec<T>> {
        let mut v = self.geom.cometric_at(x)?.into_vec();
        v.extend(self.geom.pi_at(x)?.into_vec());
        Ok(v)
    }
}

/// Cometric as an `n²`-component field.
#[derive(Clone, Copy, Debug)]
pub struct CometricField<'g> {
    pub geom: &'g Geometry,
}

impl Field for CometricField<'_> {
    fn components(&self) -> usize {
        self.geom.dim() * self.geom.dim()
    }
    fn eval<T: Scalar>(&self, x: &[T]) -> EvalResult<Vec<T>> {
        Ok(self.geom.cometric_at(x)?.into_vec())
    }
}

/// The table `Γ^{ij}_k` as an `n³`-component field.
#[derive(Clone, Copy, Debug)]
pub struct ContravariantChristoffelField<'g> {
    pub geom: &'g Geometry,
}

impl Field for ContravariantChristoffelField<'_> {
    fn components(&self) -> usize {
        self.geom.dim().pow(3)
    }
    fn eval<T: Scalar>(&self, x: &[T]) -> EvalResult<Vec<T>> {
        Ok(self.geom.contravariant_christoffel_at(x)?.data)
    }
    fn order(&self) -> usize {
        1
    }
}

/// `J̃` as an `n²`-component matrix field, `J̃^i_j` row-major.
#[derive(Clone, Copy, Debug)]
pub struct JTildeMatrixField<'g> {
    pub geom: &'g Geometry,
}

impl Field for JTildeMatrixField<'_> {
    fn components(&self) -> usize {
        self.geom.dim() * self.geom.dim()
    }
    fn eval<T: Scalar>(&self, x: &[T]) -> EvalResult<Vec<T>> {
        Ok(self.geom.jtilde_matrix_at(x)?.into_vec())
    }
}

/// The metric `g^{J̃}(u, v) = g(J̃⁻¹u, J̃⁻¹v)`; defined where `π` is
/// invertible.
#[derive(Clone, Copy, Debug)]
pub struct JTildeMetric<'g> {
    pub geom: &'g Geometry,
}

impl Field for JTildeMetric<'_> {
    fn components(&self) -> usize {
        self.geom.dim() * self.geom.dim()
    }
    fn eval<T: Scalar>(&self, x: &[T]) -> EvalResult<Vec<T>> {
        let jt = self.geom.jtilde_matrix_at(x)?;
        let det = jt.det().re();
        if det.abs() <= crate::poisson::POISSON_FLOOR {
            return Err(EvalError::DegeneratePoisson { det });
        }
        let inv = jt.inverse()?;
        let g = self.geom.metric_at(x)?;
        Ok(inv.transpose().mul(&g).mul(&inv).into_vec())
    }
}

/// `D^π_α β` as a covector field (coefficient-table route).
#[derive(Clone, Copy, Debug)]
pub struct DField<'g, A, B> {
    pub geom: &'g Geometry,
    pub alpha: A,
    pub beta: B,
}

impl<A: Field, B: Field> Field for DField<'_, A, B> {
    fn components(&self) -> usize {
        self.geom.dim()
    }
    fn eval<T: Scalar>(&self, x: &[T]) -> EvalResult<Vec<T>> {
        self.geom.d_pi_table_at(&self.alpha, &self.beta, x)
    }
    fn order(&self) -> usize {
        1 + self.alpha.order().max(self.beta.order())
    }
}

/// `∇^π_α β` as a covector field.
#[derive(Clone, Copy, Debug)]
pub struct NablaPiField<'g, A, B> {
    pub geom: &'g Geometry,
    pub alpha: A,
    pub beta: B,
}

impl<A: Field, B: Field> Field for NablaPiField<'_, A, B> {
    fn components(&self) -> usize {
        self.geom.dim()
    }
    fn eval<T: Scalar>(&self, x: &[T]) -> EvalResult<Vec<T>> {
        self.geom.nabla_pi_at(&self.alpha, &self.beta, x)
    }
    fn order(&self) -> usize {
        1 + self.alpha.order().max(self.beta.order())
    }
}

fn row<T: Scalar>(m: &Mat<T>, i: usize) -> Vec<T> {
    (0..m.dim()).map(|j| m[(i, j)]).collect()
}

fn basis_vec(n: usize, i: usize) -> Vec<f64> {
    (0..n).map(|k| if k == i { 1.0 } else { 0.0 }).collect()
}

impl Geometry {
    // ---- Levi-Civita --------------------------------------------------------

    pub fn christoffel_at<T: Scalar>(&self, x: &[T]) -> EvalResult<Christoffels<T>> {
        christoffel_of(self.metric(), x, self.strategy())
    }

    pub fn christoffel(&self, p: &Point) -> Result<Christoffels<f64>> {
        lift(&p.coords, self.christoffel_at(&p.coords))
    }

    /// `(∇_X β)_i = X^j (∂_j β_i − Γ^k_{ji} β_k)` with `X` given at the point.
    pub fn nabla_covector_at<B: Field, T: Scalar>(
        &self,
        v: &[T],
        b: &B,
        x: &[T],
    ) -> EvalResult<Vec<T>> {
        let n = x.len();
        let gamma = self.christoffel_at(x)?;
        let bv = b.eval(x)?;
        let db = directional(b, x, v, self.strategy())?;
        Ok((0..n)
            .map(|i| {
                let mut acc = db[i];
                for j in 0..n {
                    for k in 0..n {
                        acc = acc - gamma.get(k, j, i) * v[j] * bv[k];
                    }
                }
                acc
            })
            .collect())
    }

    pub fn nabla_cov_covector<B: Field>(&self, v: &[f64], b: &B, p: &Point) -> Result<Vec<f64>> {
        self.check_field(b)?;
        lift(&p.coords, self.nabla_covector_at(v, b, &p.coords))
    }

    /// `(∇_Z V)^i = Z^j ∂_j V^i + Γ^i_{jk} Z^j V^k` with `Z` given at the point.
    pub fn nabla_vector_at<V: Field, T: Scalar>(
        &self,
        z: &[T],
        v: &V,
        x: &[T],
    ) -> EvalResult<Vec<T>> {
        let gamma = self.christoffel_at(x)?;
        let dv = directional(v, x, z, self.strategy())?;
        Ok(linalg::add(&dv, &gamma.contract(z, &v.eval(x)?)))
    }

    /// `∇^π_α β = ∇_{#_π α} β`.
    pub fn nabla_pi_at<A: Field, B: Field, T: Scalar>(
        &self,
        a: &A,
        b: &B,
        x: &[T],
    ) -> EvalResult<Vec<T>> {
        let sa = self.pi_at(x)?.vec_mul(&a.eval(x)?);
        self.nabla_covector_at(&sa, b, x)
    }

    pub fn nabla_pi<A: Field, B: Field>(&self, a: &A, b: &B, p: &Point) -> Result<Vec<f64>> {
        self.check_field(a)?;
        self.check_field(b)?;
        lift(&p.coords, self.nabla_pi_at(a, b, &p.coords))
    }

    // ---- D^π ----------------------------------------------------------------

    /// `D^π_α β` from its defining six-term formula, tested against each
    /// coordinate 1-form `dx^k` and lowered with `g`.
    pub fn d_pi_at<A: Field, B: Field, T: Scalar>(
        &self,
        a: &A,
        b: &B,
        x: &[T],
    ) -> EvalResult<Vec<T>> {
        let n = x.len();
        let s = self.strategy();
        let pf = self.bivector();
        let gi = self.cometric_at(x)?;
        let g = self.metric_at(x)?;
        let pi = self.pi_at(x)?;
        let av = a.eval(x)?;
        let bv = b.eval(x)?;
        let sa = pi.vec_mul(&av);
        let sb = pi.vec_mul(&bv);
        let kab = gi.mul_vec(&koszul(pf, a, b, x, s)?);
        let ab = CometricPairing {
            geom: self,
            alpha: a,
            beta: b,
        };
        let mut rhs = Vec::with_capacity(n);
        for k in 0..n {
            let ek = Basis::new(n, k);
            let t1 = directional(
                &CometricPairing {
                    geom: self,
                    alpha: b,
                    beta: ek,
                },
                x,
                &sa,
                s,
            )?[0];
            let t2 = directional(
                &CometricPairing {
                    geom: self,
                    alpha: a,
                    beta: ek,
                },
                x,
                &sb,
                s,
            )?[0];
            let t3 = directional(&ab, x, &row(&pi, k), s)?[0];
            let t4 = gi.bilinear(&koszul(pf, &ek, a, x, s)?, &bv);
            let t5 = gi.bilinear(&koszul(pf, &ek, b, x, s)?, &av);
            rhs.push(t1 + t2 - t3 + t4 + t5 + kab[k]);
        }
        Ok(g.mul_vec(&rhs)
            .into_iter()
            .map(|v| v * T::from_f64(0.5))
            .collect())
    }

    pub fn d_pi<A: Field, B: Field>(&self, a: &A, b: &B, p: &Point) -> Result<Vec<f64>> {
        self.check_field(a)?;
        self.check_field(b)?;
        lift(&p.coords, self.d_pi_at(a, b, &p.coords))
    }

    /// `Γ^{ij}_k` from the six-term formula on coordinate forms.
    pub fn contravariant_christoffel_at<T: Scalar>(
        &self,
        x: &[T],
    ) -> EvalResult<ContravariantChristoffels<T>> {
        let n = x.len();
        let n2 = n * n;
        let both = CometricAndPi { geom: self };
        let vals = both.eval(x)?;
        let jac = jacobian(&both, x, self.strategy())?;
        let gi = |i: usize, j: usize| vals[i * n + j];
        let pi = |i: usize, j: usize| vals[n2 + i * n + j];
        let dgi = |l: usize, i: usize, j: usize| jac[l][i * n + j];
        let dpi = |l: usize, i: usize, j: usize| jac[l][n2 + i * n + j];
        let g = self.metric_at(x)?;
        let half = T::from_f64(0.5);
        let mut data = vec![T::zero(); n * n2];
        let mut raised = vec![T::zero(); n];
        for i in 0..n {
            for j in 0..n {
                for (k, r) in raised.iter_mut().enumerate() {
                    let mut acc = T::zero();
                    for l in 0..n {
                        acc = acc + pi(i, l) * dgi(l, j, k) + pi(j, l) * dgi(l, i, k)
                            - pi(k, l) * dgi(l, i, j)
                            + gi(j, l) * dpi(l, k, i)
                            + gi(i, l) * dpi(l, k, j)
                            + gi(k, l) * dpi(l, i, j);
                    }
                    *r = acc * half;
                }
                let low = g.mul_vec(&raised);
                data[(i * n + j) * n..(i * n + j + 1) * n].copy_from_slice(&low);
            }
        }
        Ok(ContravariantChristoffels { n, data })
    }

    pub fn contravariant_christoffel(&self, p: &Point) -> Result<ContravariantChristoffels<f64>> {
        lift(&p.coords, self.contravariant_christoffel_at(&p.coords))
    }

    /// `D^π_α β = α_i β_j Γ^{ij}_k + (#_π α)(β_k)`.
    pub fn d_pi_table_at<A: Field, B: Field, T: Scalar>(
        &self,
        a: &A,
        b: &B,
        x: &[T],
    ) -> EvalResult<Vec<T>> {
        let table = self.contravariant_christoffel_at(x)?;
        let av = a.eval(x)?;
        let sa = self.pi_at(x)?.vec_mul(&av);
        let db = directional(b, x, &sa, self.strategy())?;
        Ok(linalg::add(&table.contract(&av, &b.eval(x)?), &db))
    }

    /// `D^π_α β` obtained by transporting through `#_π` to the Levi-Civita
    /// connection of `g^{J̃}`. Requires invertible `π`.
    pub fn d_pi_via_jtilde_at<A: Field, B: Field, T: Scalar>(
        &self,
        a: &A,
        b: &B,
        x: &[T],
    ) -> EvalResult<Vec<T>> {
        let pi = self.pi_at(x)?;
        let sa = pi.vec_mul(&a.eval(x)?);
        let yf = Sharp {
            pi: self.bivector(),
            alpha: b,
        };
        let gamma = christoffel_of(&JTildeMetric { geom: self }, x, self.strategy())?;
        let dy = directional(&yf, x, &sa, self.strategy())?;
        let v = linalg::add(&dy, &gamma.contract(&sa, &yf.eval(x)?));
        self.inv_sharp_pi_at(&v, x)
    }

    pub fn d_pi_via_jtilde<A: Field, B: Field>(&self, a: &A, b: &B, p: &Point) -> Result<Vec<f64>> {
        lift(&p.coords, self.d_pi_via_jtilde_at(a, b, &p.coords))
    }

    // ---- torsion and difference tensors -------------------------------------

    /// `T(α, β) = [α, β]_π − (∇^π_α β − ∇^π_β α)`.
    pub fn torsion_at<A: Field, B: Field, T: Scalar>(
        &self,
        a: &A,
        b: &B,
        x: &[T],
    ) -> EvalResult<Vec<T>> {
        let k = self.koszul_at(a, b, x)?;
        let ab = self.nabla_pi_at(a, b, x)?;
        let ba = self.nabla_pi_at(b, a, x)?;
        Ok(linalg::sub(&k, &linalg::sub(&ab, &ba)))
    }

    pub fn torsion_t<A: Field, B: Field>(&self, a: &A, b: &B, p: &Point) -> Result<Vec<f64>> {
        lift(&p.coords, self.torsion_at(a, b, &p.coords))
    }

    /// `∇̃^π_α β = ∇^π_α β + ½ T(α, β)`.
    pub fn tilde_nabla_pi_at<A: Field, B: Field, T: Scalar>(
        &self,
        a: &A,
        b: &B,
        x: &[T],
    ) -> EvalResult<Vec<T>> {
        let t = self.torsion_at(a, b, x)?;
        let nab = self.nabla_pi_at(a, b, x)?;
        Ok(linalg::add(&nab, &linalg::scale(&t, T::from_f64(0.5))))
    }

    pub fn tilde_nabla_pi<A: Field, B: Field>(&self, a: &A, b: &B, p: &Point) -> Result<Vec<f64>> {
        lift(&p.coords, self.tilde_nabla_pi_at(a, b, &p.coords))
    }

    /// `S(α, β) = ∇̃^π_α β − D^π_α β`.
    pub fn s_tensor_at<A: Field, B: Field, T: Scalar>(
        &self,
        a: &A,
        b: &B,
        x: &[T],
    ) -> EvalResult<Vec<T>> {
        Ok(linalg::sub(
            &self.tilde_nabla_pi_at(a, b, x)?,
            &self.d_pi_at(a, b, x)?,
        ))
    }

    pub fn s_tensor<A: Field, B: Field>(&self, a: &A, b: &B, p: &Point) -> Result<Vec<f64>> {
        lift(&p.coords, self.s_tensor_at(a, b, &p.coords))
    }

    // ---- derivatives of J ---------------------------------------------------

    /// `(∇^π_α J)(β) = ∇^π_α(Jβ) − J(∇^π_α β)`.
    pub fn nabla_pi_of_j_at<A: Field, B: Field, T: Scalar>(
        &self,
        a: &A,
        b: &B,
        x: &[T],
    ) -> EvalResult<Vec<T>> {
        let jb = JField {
            geom: self,
            alpha: b,
        };
        let first = self.nabla_pi_at(a, &jb, x)?;
        let second = self.j_at(&self.nabla_pi_at(a, b, x)?, x)?;
        Ok(linalg::sub(&first, &second))
    }

    pub fn nabla_pi_of_j<A: Field, B: Field>(&self, a: &A, b: &B, p: &Point) -> Result<Vec<f64>> {
        lift(&p.coords, self.nabla_pi_of_j_at(a, b, &p.coords))
    }

    /// `(D^π_α J)(β) = D^π_α(Jβ) − J(D^π_α β)`.
    pub fn d_pi_of_j_at<A: Field, B: Field, T: Scalar>(
        &self,
        a: &A,
        b: &B,
        x: &[T],
    ) -> EvalResult<Vec<T>> {
        let jb = JField {
            geom: self,
            alpha: b,
        };
        let first = self.d_pi_at(a, &jb, x)?;
        let second = self.j_at(&self.d_pi_at(a, b, x)?, x)?;
        Ok(linalg::sub(&first, &second))
    }

    pub fn d_pi_of_j<A: Field, B: Field>(&self, a: &A, b: &B, p: &Point) -> Result<Vec<f64>> {
        lift(&p.coords, self.d_pi_of_j_at(a, b, &p.coords))
    }

    /// `(∇_{∂_l} J̃)^i_j` for every `l`, as `n` matrices.
    pub fn nabla_jtilde_at<T: Scalar>(&self, x: &[T]) -> EvalResult<Vec<Mat<T>>> {
        let n = x.len();
        let field = JTildeMatrixField { geom: self };
        let jt = square(field.eval(x)?)?;
        let djt = jacobian(&field, x, self.strategy())?;
        let gamma = self.christoffel_at(x)?;
        Ok((0..n)
            .map(|l| {
                Mat::from_fn(n, |i, b| {
                    let mut acc = djt[l][i * n + b];
                    for m in 0..n {
                        acc =
                            acc + gamma.get(i, l, m) * jt[(m, b)] - jt[(i, m)] * gamma.get(m, l, b);
                    }
                    acc
                })
            })
            .collect())
    }

    // ---- reports --------------------------------------------------------------

    /// Largest `(∇^π J)` and `(D^π J)` over coordinate pairs, measured with
    /// [`Geometry::covector_norm_at`]. Order: `[∇^π, D^π]`.
    pub fn compat_residuals_at(&self, x: &[f64]) -> EvalResult<[f64; 2]> {
        let n = x.len();
        let mut out = [0.0_f64; 2];
        for i in 0..n {
            for j in 0..n {
                let (a, b) = (Basis::new(n, i), Basis::new(n, j));
                let nj = self.nabla_pi_of_j_at(&a, &b, x)?;
                let dj = self.d_pi_of_j_at(&a, &b, x)?;
                out[0] = out[0].max(self.covector_norm_at(&nj, x)?);
                out[1] = out[1].max(self.covector_norm_at(&dj, x)?);
            }
        }
        Ok(out)
    }

    /// Both compatibility residuals, named `nabla_pi` and `d_pi`.
    pub fn compat_residuals(&self, tol: f64) -> ResidualReport {
        crate::poisson::warn_tight_tolerance(self.strategy(), tol);
        let mut report = ResidualReport::new("compatibility", self.chart());
        let points = self.sample_points();
        let start = std::time::Instant::now();
        let r = sweep_max_many(&points, 2, |x| {
            self.compat_residuals_at(x).map(|a| a.to_vec())
        });
        let ms = start.elapsed().as_secs_f64() * 1e3;
        for (slot, name) in ["nabla_pi", "d_pi"].into_iter().enumerate() {
            let mut c = match &r {
                Ok(v) => Check::new(name, v[slot], tol),
                Err(e) => Check::failed(name, tol, e),
            };
            c.wall_ms = ms;
            report.push(c);
        }
        report
    }

    /// Largest `|D^π_α β − #_π⁻¹(∇^{J̃}_{#_π α} #_π β)|` over coordinate
    /// pairs at `x`.
    pub fn jtilde_route_residual_at(&self, x: &[f64]) -> EvalResult<f64> {
        let n = x.len();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                let (a, b) = (Basis::new(n, i), Basis::new(n, j));
                let direct = self.d_pi_at(&a, &b, x)?;
                let other = self.d_pi_via_jtilde_at(&a, &b, x)?;
                worst = worst.max(linalg::max_abs(&linalg::sub(&direct, &other)));
            }
        }
        Ok(worst)
    }

    pub fn jtilde_route_check(&self, tol: f64) -> Check {
        let points = self.sample_points();
        Check::timed("jtilde_route", tol, || {
            sweep_max(&points, |x| self.jtilde_route_residual_at(x))
        })
    }

    /// The five structural identities relating `∇^π`, `D^π`, `J` and the
    /// Schouten bracket, on coordinate forms at `x`.
    ///
    /// Slots: metricity, torsion, Schouten expressions, `∇̃^π − D^π`, and
    /// the `S`-tensor identity (read with `Jβ`, `Jγ` on the right).
    pub fn identity_residuals_at(&self, x: &[f64]) -> EvalResult<[f64; 5]> {
        let n = x.len();
        let s = self.strategy();
        let gi = self.cometric_at(x)?;
        let g = self.metric_at(x)?;
        let pi = self.pi_at(x)?;
        let e: Vec<Basis> = (0..n).map(|i| Basis::new(n, i)).collect();
        let ev: Vec<Vec<f64>> = (0..n).map(|i| basis_vec(n, i)).collect();

        let mut kz = vec![vec![Vec::new(); n]; n];
        let mut d = kz.clone();
        let mut nb = kz.clone();
        let mut dj = kz.clone();
        let mut nj = kz.clone();
        for i in 0..n {
            for j in 0..n {
                kz[i][j] = koszul(self.bivector(), &e[i], &e[j], x, s)?;
                d[i][j] = self.d_pi_at(&e[i], &e[j], x)?;
                nb[i][j] = self.nabla_pi_at(&e[i], &e[j], x)?;
                dj[i][j] = self.d_pi_of_j_at(&e[i], &e[j], x)?;
                nj[i][j] = self.nabla_pi_of_j_at(&e[i], &e[j], x)?;
            }
        }
        let mut sch = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    sch[(i * n + j) * n + k] =
                        schouten(self.bivector(), &e[i], &e[j], &e[k], x, s)?;
                }
            }
        }
        let sch = |i: usize, j: usize, k: usize| sch[(i * n + j) * n + k];
        let dgi = jacobian(&CometricField { geom: self }, x, s)?;
        let njt = self.nabla_jtilde_at(x)?;
        // (∇_Z J̃)(V)
        let nabla_jt = |z: &[f64], v: &[f64]| -> Vec<f64> {
            let mut out = vec![0.0; n];
            for (l, zl) in z.iter().enumerate() {
                for (o, w) in out.iter_mut().zip(njt[l].mul_vec(v)) {
                    *o += zl * w;
                }
            }
            out
        };
        let sharp_g: Vec<Vec<f64>> = ev.iter().map(|v| gi.mul_vec(v)).collect();
        let torsion =
            |i: usize, j: usize| linalg::sub(&kz[i][j], &linalg::sub(&nb[i][j], &nb[j][i]));
        let tilde =
            |i: usize, j: usize| linalg::add(&nb[i][j], &linalg::scale(&torsion(i, j), 0.5));
        let s_t = |i: usize, j: usize| linalg::sub(&tilde(i, j), &d[i][j]);
        let jmat = self.j_matrix_at(x)?;
        let je: Vec<Vec<f64>> = ev.iter().map(|v| jmat.mul_vec(v)).collect();
        let cg = |a: &[f64], b: &[f64]| gi.bilinear(a, b);

        let mut r = [0.0_f64; 5];
        for i in 0..n {
            let sp = row(&pi, i);
            for j in 0..n {
                // torsion-freeness of D^π
                let tf = linalg::sub(&kz[i][j], &linalg::sub(&d[i][j], &d[j][i]));
                r[1] = r[1].max(linalg::max_abs(&tf));
                // ∇̃^π − D^π
                let sym = linalg::add(
                    &nabla_jt(&sharp_g[i], &sharp_g[j]),
                    &nabla_jt(&sharp_g[j], &sharp_g[i]),
                );
                let rhs = linalg::scale(&g.mul_vec(&sym), 0.5);
                r[3] = r[3].max(linalg::max_abs(&linalg::sub(&s_t(i, j), &rhs)));
                for k in 0..n {
                    let deriv: f64 = (0..n).map(|l| sp[l] * dgi[l][j * n + k]).sum();
                    let m_d = deriv - cg(&d[i][j], &ev[k]) - cg(&ev[j], &d[i][k]);
                    let m_n = deriv - cg(&nb[i][j], &ev[k]) - cg(&ev[j], &nb[i][k]);
                    r[0] = r[0].max(m_d.abs()).max(m_n.abs());

                    let lhs = cg(&torsion(i, j), &ev[k]);
                    let rhs = g.bilinear(&nabla_jt(&sharp_g[k], &sharp_g[i]), &sharp_g[j]);
                    r[1] = r[1].max((lhs - rhs).abs());

                    let sv = sch(i, j, k);
                    let via_d = 0.5
                        * (cg(&ev[i], &dj[k][j]) + cg(&ev[j], &dj[i][k]) + cg(&ev[k], &dj[j][i]));
                    let via_n =
                        cg(&ev[i], &nj[k][j]) + cg(&ev[j], &nj[i][k]) + cg(&ev[k], &nj[j][i]);
                    r[2] = r[2].max((sv - via_d).abs()).max((sv - via_n).abs());

                    let lhs = cg(
                        &linalg::sub(&dj[i][j], &linalg::scale(&nj[i][j], 0.5)),
                        &ev[k],
                    ) + 0.5 * sv;
                    let rhs = cg(&s_t(i, k), &je[j]) - cg(&s_t(i, j), &je[k]);
                    r[4] = r[4].max((lhs - rhs).abs());
                }
            }
        }
        Ok(r)
    }

    /// The identity suite as a report with checks `metric`, `torsion`,
    /// `schouten`, `tilde_difference` and `s_tensor`.
    pub fn prop11_identity_suite(&self, tol: f64) -> ResidualReport {
        crate::poisson::warn_tight_tolerance(self.strategy(), tol);
        let mut report = ResidualReport::new("identities", self.chart());
        let points = self.sample_points();
        let start = std::time::Instant::now();
        let r = sweep_max_many(&points, 5, |x| {
            self.identity_residuals_at(x).map(|a| a.to_vec())
        });
        let ms = start.elapsed().as_secs_f64() * 1e3;
        let names = [
            "metric",
            "torsion",
            "schouten",
            "tilde_difference",
            "s_tensor",
        ];
        for (slot, name) in names.into_iter().enumerate() {
            let mut c = match &r {
                Ok(v) => Check::new(name, v[slot], tol),
                Err(e) => Check::failed(name, tol, e),
            };
            c.wall_ms = ms;
            report.push(c);
        }
        report
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::{Chart, Interval};
    use crate::field::{BivectorField, CovectorField, MetricField};

    fn flat(n: usize, pi: &[(usize, usize, &str)]) -> Geometry {
        let chart = Chart::cube(n, -2.0, 2.0).unwrap();
        let g = MetricField::euclidean(&chart);
        let b = BivectorField::from_upper(&chart, pi).unwrap();
        Geometry::new(chart, g, b).unwrap()
    }

    #[test]
    fn polar_christoffels() {
        let chart = Chart::new(
            ["r", "t"],
            vec![Interval::new(0.5, 2.0), Interval::new(-1.0, 1.0)],
        )
        .unwrap();
        let g = Geometry::new(
            chart.clone(),
            MetricField::diagonal(&chart, &["1", "r^2"]).unwrap(),
            BivectorField::zero(&chart),
        )
        .unwrap();
        let c = g.christoffel(&Point::new(vec![1.5, 0.2])).unwrap();
        assert!((c.get(1, 0, 1) - 1.0 / 1.5).abs() < 1e-15);
        assert!((c.get(1, 1, 0) - 1.0 / 1.5).abs() < 1e-15);
        assert!((c.get(0, 1, 1) + 1.5).abs() < 1e-15);
        assert_eq!(c.get(0, 0, 0), 0.0);
        assert_eq!(c.get(1, 1, 1), 0.0);
    }

    #[test]
    fn nabla_pi_flat_examples() {
        let g = flat(2, &[(0, 1, "1")]);
        let p = Point::new(vec![0.4, -0.3]);
        let b = CovectorField::parse(&["x", "0"], g.chart()).unwrap();
        let r = g.nabla_pi(&Basis::new(2, 0), &b, &p).unwrap();
        assert_eq!(r, vec![0.0, 0.0]);
        let r = g.nabla_pi(&Basis::new(2, 1), &b, &p).unwrap();
        assert_eq!(r, vec![-1.0, 0.0]);
        let z = flat(2, &[]);
        assert_eq!(
            z.nabla_pi(&Basis::new(2, 1), &b, &p).unwrap(),
            vec![0.0, 0.0]
        );
        assert_eq!(z.d_pi(&Basis::new(2, 1), &b, &p).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn flat_constant_is_compatible() {
        let g = flat(3, &[(0, 1, "1"), (0, 2, "2")]);
        let rep = g.compat_residuals(1e-12);
        assert!(rep.passed(), "{rep:?}");
        let rep = g.prop11_identity_suite(1e-12);
        assert!(rep.passed(), "{rep:?}");
    }
}
