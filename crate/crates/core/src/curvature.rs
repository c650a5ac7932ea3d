//! Riemann tensor of `g`, the contravariant curvature `R^π` and Ricci
//! tensor `r^π`, the bivector `π^r`, leaf geometry in the invertible case,
//! and the Kähler and Einstein diagnostics.
//!
//! Sign conventions. [`Geometry::riemann`] is
//! `R(X, Y) = ∇_X ∇_Y − ∇_Y ∇_X − ∇_{[X,Y]}`, which makes the unit sphere
//! have sectional curvature `+1`. The contravariant curvature follows the
//! operator order
//! `R^π(α, β) = D^π_{[α,β]_π} − (D^π_α D^π_β − D^π_β D^π_α)`, so the leaf
//! curvature it pushes forward to is `−R` in the first convention.

use log::warn;

use crate::chart::Point;
use crate::connections::{ChristoffelField, ContravariantChristoffelField, DField, JTildeMetric};
use crate::error::{Error, EvalError, Result};
use crate::field::{jacobian, DiffStrategy, Field};
use crate::linalg::{self, Mat};
use crate::poisson::{koszul, lift, square, Basis, Geometry, InvSharpPi, POISSON_FLOOR};
use crate::report::{sweep_max, sweep_max_many, Check, ResidualReport};
use crate::scalar::Scalar;

type EvalResult<T> = std::result::Result<T, EvalError>;

/// Flag set by [`Geometry::kahler_diagnostic`] when every check passes.
pub const KAHLER_LEAVES: &str = "KAHLER_LEAVES";
/// Flag set by [`Geometry::check_pi_r_cocycle`] when the scene is not
/// `D^π`-compatible.
pub const NOT_COMPATIBLE: &str = "NOT_COMPATIBLE";

/// Components `R^l_{kij}` of a Riemann tensor at one point, so that
/// `(R(X, Y)Z)^l = R^l_{kij} X^i Y^j Z^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct Riemann<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> Riemann<T> {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// `R^l_{kij}`
    #[inline]
    pub fn get(&self, l: usize, k: usize, i: usize, j: usize) -> T {
        let n = self.n;
        self.data[((l * n + k) * n + i) * n + j]
    }

    /// `R(X, Y)Z`
    pub fn apply(&self, x: &[T], y: &[T], z: &[T]) -> Vec<T> {
        let n = self.n;
        (0..n)
            .map(|l| {
                let mut acc = T::zero();
                for k in 0..n {
                    for i in 0..n {
                        for j in 0..n {
                            acc = acc + self.get(l, k, i, j) * x[i] * y[j] * z[k];
                        }
                    }
                }
                acc
            })
            .collect()
    }

    /// `Ric_{jk} = R^i_{kij}`, the trace of `X ↦ R(X, ∂_j)∂_k`.
    pub fn ricci(&self) -> Mat<T> {
        let n = self.n;
        Mat::from_fn(n, |j, k| {
            let mut acc = T::zero();
            for i in 0..n {
                acc = acc + self.get(i, k, i, j);
            }
            acc
        })
    }
}

/// Riemann tensor of any `n²`-component metric field.
pub fn riemann_of<M: Field, T: Scalar>(
    metric: &M,
    x: &[T],
    strategy: DiffStrategy,
) -> EvalResult<Riemann<T>> {
    let n = x.len();
    let cf = ChristoffelField { metric, strategy };
    let gamma = crate::connections::christoffel_of(metric, x, strategy)?;
    let dg = jacobian(&cf, x, strategy)?;
    let d = |a: usize, l: usize, i: usize, j: usize| dg[a][(l * n + i) * n + j];
    let mut data = Vec::with_capacity(n.pow(4));
    for l in 0..n {
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut acc = d(i, l, j, k) - d(j, l, i, k);
                    for m in 0..n {
                        acc = acc + gamma.get(l, i, m) * gamma.get(m, j, k)
                            - gamma.get(l, j, m) * gamma.get(m, i, k);
                    }
                    data.push(acc);
                }
            }
        }
    }
    Ok(Riemann { n, data })
}

/// Components `R^{ijk}_l = (R^π(dx^i, dx^j) dx^k)_l` at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct ContravariantCurvature<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> ContravariantCurvature<T> {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// `R^{ijk}_l`
    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> T {
        let n = self.n;
        self.data[((i * n + j) * n + k) * n + l]
    }

    /// `R^π(α, β)γ`
    pub fn apply(&self, a: &[T], b: &[T], c: &[T]) -> Vec<T> {
        let n = self.n;
        (0..n)
            .map(|l| {
                let mut acc = T::zero();
                for i in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            acc = acc + self.get(i, j, k, l) * a[i] * b[j] * c[k];
                        }
                    }
                }
                acc
            })
            .collect()
    }

    /// `r^{ij} = r^π(dx^i, dx^j) = Σ_k (R^π(dx^i, dx^k) dx^j)_k`.
    pub fn ricci(&self) -> Mat<T> {
        let n = self.n;
        Mat::from_fn(n, |i, j| {
            let mut acc = T::zero();
            for k in 0..n {
                acc = acc + self.get(i, k, j, k);
            }
            acc
        })
    }
}

/// Koszul bracket `[α, β]_π` as a covector field.
#[derive(Clone, Copy, Debug)]
pub struct KoszulField<'g, A, B> {
    pub geom: &'g Geometry,
    pub alpha: A,
    pub beta: B,
}

impl<A: Field, B: Field> Field for KoszulField<'_, A, B> {
    fn components(&self) -> usize {
        self.geom.dim()
    }
    fn eval<T: Scalar>(&self, x: &[T]) -> EvalResult<Vec<T>> {
        koszul(
            self.geom.bivector(),
            &self.alpha,
            &self.beta,
            x,
            self.geom.strategy(),
        )
    }
    fn order(&self) -> usize {
        1 + self.alpha.order().max(self.beta.order())
    }
}

/// `r^{ij}` as an `n²`-component field.
#[derive(Clone, Copy, Debug)]
pub struct RicciPiField<'g> {
    pub geom: &'g Geometry,
}

impl Field for RicciPiField<'_> {
    fn components(&self) -> usize {
        self.geom.dim() * self.geom.dim()
    }
    fn eval<T: Scalar>(&self, x: &[T]) -> EvalResult<Vec<T>> {
        Ok(self.geom.r_pi_tensor_at(x)?.ricci().into_vec())
    }
    fn order(&self) -> usize {
        2
    }
}

/// `π^r` as an `n²`-component bivector field.
#[derive(Clone, Copy, Debug)]
pub struct PiRField<'g> {
    pub geom: &'g Geometry,
}

impl Field for PiRField<'_> {
    fn components(&self) -> usize {
        self.geom.dim() * self.geom.dim()
    }
    fn eval<T: Scalar>(&self, x: &[T]) -> EvalResult<Vec<T>> {
        Ok(self.geom.pi_r_matrix_at(x)?.into_vec())
    }
    fn order(&self) -> usize {
        2
    }
}

/// The fitted Einstein factor `λ` as a scalar field.
#[derive(Clone, Copy, Debug)]
pub struct LambdaField<'g> {
    pub geom: &'g Geometry,
}

impl Field for LambdaField<'_> {
    fn components(&self) -> usize {
        1
    }
    fn eval<T: Scalar>(&self, x: &[T]) -> EvalResult<Vec<T>> {
        Ok(vec![self.geom.einstein_fit_at(x)?.0])
    }
    fn order(&self) -> usize {
        2
    }
}

/// `ω_S = π^{-T}`, the leaf symplectic form on an invertible chart.
#[derive(Clone, Copy, Debug)]
struct OmegaField<'g> {
    geom: &'g Geometry,
}

impl Field for OmegaField<'_> {
    fn components(&self) -> usize {
        self.geom.dim() * self.geom.dim()
    }
    fn eval<T: Scalar>(&self, x: &[T]) -> EvalResult<Vec<T>> {
        let pi = invertible_pi(self.geom, x)?;
        Ok(pi.inverse()?.transpose().into_vec())
    }
}

fn invertible_pi<T: Scalar>(geom: &Geometry, x: &[T]) -> EvalResult<Mat<T>> {
    let pi = geom.pi_at(x)?;
    let det = pi.det().re();
    if det.abs() <= POISSON_FLOOR {
        return Err(EvalError::DegeneratePoisson { det });
    }
    Ok(pi)
}

fn row<T: Scalar>(m: &Mat<T>, i: usize) -> Vec<T> {
    (0..m.dim()).map(|j| m[(i, j)]).collect()
}

fn push_slots(
    report: &mut ResidualReport,
    names: &[&str],
    r: std::result::Result<&[f64], &Error>,
    tol: f64,
    ms: f64,
) {
    for (slot, name) in names.iter().enumerate() {
        let mut c = match r {
            Ok(v) => Check::new(*name, v[slot], tol),
            Err(e) => Check::failed(*name, tol, e),
        };
        c.wall_ms = ms;
        report.push(c);
    }
}

impl Geometry {
    // ---- Riemann tensor of g --------------------------------------------------

    pub fn riemann_at<T: Scalar>(&self, x: &[T]) -> EvalResult<Riemann<T>> {
        riemann_of(self.metric(), x, self.strategy())
    }

    /// `R(X, Y)Z` for vectors given at `p`.
    pub fn riemann(&self, x: &[f64], y: &[f64], z: &[f64], p: &Point) -> Result<Vec<f64>> {
        Ok(lift(&p.coords, self.riemann_at(&p.coords))?.apply(x, y, z))
    }

    /// `g(R(X, Y)Y, X) / (g(X, X) g(Y, Y) − g(X, Y)²)`.
    pub fn sectional_curvature(&self, x: &[f64], y: &[f64], p: &Point) -> Result<f64> {
        let g = lift(&p.coords, self.metric_at::<f64>(&p.coords))?;
        let r = self.riemann(x, y, y, p)?;
        let area = g.bilinear(x, x) * g.bilinear(y, y) - g.bilinear(x, y).powi(2);
        Ok(g.bilinear(&r, x) / area)
    }

    /// Largest first-Bianchi defect `R(X,Y)Z + R(Y,Z)X + R(Z,X)Y` and
    /// antisymmetry defect `g(R(X,Y)Z, W) + g(R(Y,X)Z, W)` on coordinate
    /// vectors at `x`.
    pub fn riemann_symmetry_at(&self, x: &[f64]) -> EvalResult<[f64; 2]> {
        let n = x.len();
        let r = self.riemann_at(x)?;
        let mut out = [0.0_f64; 2];
        for l in 0..n {
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        let b = r.get(l, k, i, j) + r.get(l, i, j, k) + r.get(l, j, k, i);
                        out[0] = out[0].max(b.abs());
                        out[1] = out[1].max((r.get(l, k, i, j) + r.get(l, k, j, i)).abs());
                    }
                }
            }
        }
        Ok(out)
    }

    // ---- contravariant curvature ----------------------------------------------

    /// `R^π(α, β)γ`, with `D^π_α (D^π_β γ)` obtained by differentiating the
    /// field `q ↦ D^π_β γ (q)`.
    pub fn r_pi_at<A: Field, B: Field, C: Field, T: Scalar>(
        &self,
        a: &A,
        b: &B,
        c: &C,
        x: &[T],
    ) -> EvalResult<Vec<T>> {
        let bracket = KoszulField {
            geom: self,
            alpha: a,
            beta: b,
        };
        let first = self.d_pi_table_at(&bracket, c, x)?;
        let ab = self.d_pi_table_at(
            a,
            &DField {
                geom: self,
                alpha: b,
                beta: c,
            },
            x,
        )?;
        let ba = self.d_pi_table_at(
            b,
            &DField {
                geom: self,
                alpha: a,
                beta: c,
            },
            x,
        )?;
        Ok(linalg::add(&linalg::sub(&first, &ab), &ba))
    }

    pub fn r_pi<A: Field, B: Field, C: Field>(
        &self,
        a: &A,
        b: &B,
        c: &C,
        p: &Point,
    ) -> Result<Vec<f64>> {
        self.check_field(a)?;
        self.check_field(b)?;
        self.check_field(c)?;
        lift(&p.coords, self.r_pi_at(a, b, c, &p.coords))
    }

    /// All components of `R^π` at `x`, from `Γ^{ij}_k` and its derivatives:
    ///
    /// `R^{ijk}_l = ∂_m π^{ij} Γ^{mk}_l − Γ^{jk}_m Γ^{im}_l − π^{ia} ∂_a Γ^{jk}_l
    ///            + Γ^{ik}_m Γ^{jm}_l + π^{ja} ∂_a Γ^{ik}_l`.
    pub fn r_pi_tensor_at<T: Scalar>(&self, x: &[T]) -> EvalResult<ContravariantCurvature<T>> {
        let n = x.len();
        let s = self.strategy();
        let table = self.contravariant_christoffel_at(x)?;
        let dtable = jacobian(&ContravariantChristoffelField { geom: self }, x, s)?;
        let dt = |a: usize, i: usize, j: usize, k: usize| dtable[a][(i * n + j) * n + k];
        let pi = self.pi_at(x)?;
        let dpi = jacobian(self.bivector(), x, s)?;
        let mut data = Vec::with_capacity(n.pow(4));
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut acc = T::zero();
                        for m in 0..n {
                            acc = acc + dpi[m][i * n + j] * table.get(m, k, l)
                                - table.get(j, k, m) * table.get(i, m, l)
                                + table.get(i, k, m) * table.get(j, m, l)
                                - pi[(i, m)] * dt(m, j, k, l)
                                + pi[(j, m)] * dt(m, i, k, l);
                        }
                        data.push(acc);
                    }
                }
            }
        }
        Ok(ContravariantCurvature { n, data })
    }

    pub fn r_pi_tensor(&self, p: &Point) -> Result<ContravariantCurvature<f64>> {
        lift(&p.coords, self.r_pi_tensor_at(&p.coords))
    }

    /// `r^π(α, β)`.
    pub fn ricci_pi(&self, a: &[f64], b: &[f64], p: &Point) -> Result<f64> {
        Ok(self.r_pi_tensor(p)?.ricci().bilinear(a, b))
    }

    /// `π^{ij} ↦ r^π(J dx^i, dx^j)` as a matrix.
    pub fn pi_r_matrix_at<T: Scalar>(&self, x: &[T]) -> EvalResult<Mat<T>> {
        let r = self.r_pi_tensor_at(x)?.ricci();
        Ok(self.j_matrix_at(x)?.transpose().mul(&r))
    }

    /// `π^r(α, β) = r^π(Jα, β)`.
    pub fn pi_r(&self, a: &[f64], b: &[f64], p: &Point) -> Result<f64> {
        Ok(lift(&p.coords, self.pi_r_matrix_at(&p.coords))?.bilinear(a, b))
    }

    /// Antisymmetry defect of `R^π` in its first two slots and the
    /// `J`-skewness defect `r^π(α, Jβ) + r^π(Jα, β)` at `x`.
    pub fn r_pi_symmetry_at(&self, x: &[f64]) -> EvalResult<[f64; 2]> {
        let n = x.len();
        let t = self.r_pi_tensor_at(x)?;
        let mut anti = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        anti = anti.max((t.get(i, j, k, l) + t.get(j, i, k, l)).abs());
                    }
                }
            }
        }
        let r = t.ricci();
        let j = self.j_matrix_at(x)?;
        let skew = r.mul(&j).add(&j.transpose().mul(&r)).max_abs();
        Ok([anti, skew])
    }

    /// `[π, π^r]_S` over all coordinate triples, and the antisymmetry
    /// defect of `π^r`, at `x`.
    pub fn pi_r_cocycle_at(&self, x: &[f64]) -> EvalResult<[f64; 2]> {
        let n = x.len();
        let pr = PiRField { geom: self };
        let m = square(pr.eval(x)?)?;
        let anti = m.add(&m.transpose()).max_abs();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let v = crate::poisson::schouten_mixed(
                        self.bivector(),
                        &pr,
                        &Basis::new(n, i),
                        &Basis::new(n, j),
                        &Basis::new(n, k),
                        x,
                        self.strategy(),
                    )?;
                    worst = worst.max(v.abs());
                }
            }
        }
        Ok([worst, anti])
    }

    /// Checks `pi_r_antisymmetry` and `pi_r_cocycle`. The bracket is a
    /// theorem only for `D^π`-compatible scenes; otherwise the report is
    /// flagged [`NOT_COMPATIBLE`] and the checks still run.
    pub fn check_pi_r_cocycle(&self, tol: f64) -> ResidualReport {
        crate::poisson::warn_tight_tolerance(self.strategy(), tol);
        let mut report = ResidualReport::new("pi_r_cocycle", self.chart());
        let compat = self.compat_residuals(tol).residual("d_pi");
        if !(compat < tol) {
            report.flags.push(NOT_COMPATIBLE.into());
            report.notes.push(format!(
                "D^pi compatibility residual {compat:e} exceeds {tol:e}"
            ));
        }
        let points = self.sample_points();
        let start = std::time::Instant::now();
        let r = sweep_max_many(&points, 2, |x| self.pi_r_cocycle_at(x).map(|a| a.to_vec()));
        let ms = start.elapsed().as_secs_f64() * 1e3;
        push_slots(
            &mut report,
            &["pi_r_cocycle", "pi_r_antisymmetry"],
            r.as_deref(),
            tol,
            ms,
        );
        report
    }

    // ---- leaves (invertible case) ----------------------------------------------

    /// `∇^S_X Y = #_π(D^π_α β)` with `α = #_π⁻¹X`, `β = #_π⁻¹Y`.
    pub fn leaf_connection_at<X: Field, Y: Field, T: Scalar>(
        &self,
        xf: &X,
        yf: &Y,
        x: &[T],
    ) -> EvalResult<Vec<T>> {
        let pi = invertible_pi(self, x)?;
        let a = InvSharpPi { geom: self, v: xf };
        let b = InvSharpPi { geom: self, v: yf };
        let d = self.d_pi_table_at(&a, &b, x)?;
        Ok(pi.vec_mul(&d))
    }

    pub fn leaf_connection<X: Field, Y: Field>(
        &self,
        xf: &X,
        yf: &Y,
        p: &Point,
    ) -> Result<Vec<f64>> {
        self.check_field(xf)?;
        self.check_field(yf)?;
        lift(&p.coords, self.leaf_connection_at(xf, yf, &p.coords))
    }

    /// Symbols `(∇^S_{∂_i} ∂_j)^k`, stored as `[k][i][j]`.
    fn leaf_symbols_at(&self, x: &[f64]) -> EvalResult<Vec<f64>> {
        let n = x.len();
        let mut out = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                let v = self.leaf_connection_at(&Basis::new(n, i), &Basis::new(n, j), x)?;
                for (k, vk) in v.into_iter().enumerate() {
                    out[(k * n + i) * n + j] = vk;
                }
            }
        }
        Ok(out)
    }

    /// Largest deviation of `∇^S` from the Levi-Civita symbols of
    /// `leaf_metric`, and the largest component of `∇^S ω_S`, at `x`.
    pub fn leaf_residuals_at<M: Field>(&self, leaf_metric: &M, x: &[f64]) -> EvalResult<[f64; 2]> {
        let n = x.len();
        let s = self.strategy();
        let sym = self.leaf_symbols_at(x)?;
        let lc = crate::connections::christoffel_of(leaf_metric, x, s)?;
        let levi = linalg::max_abs(&linalg::sub(&sym, lc.as_slice()));
        let om = OmegaField { geom: self };
        let w = square(om.eval(x)?)?;
        let dw = jacobian(&om, x, s)?;
        let g = |k: usize, i: usize, j: usize| sym[(k * n + i) * n + j];
        let mut par = 0.0_f64;
        for l in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut acc = dw[l][i * n + j];
                    for m in 0..n {
                        acc -= g(m, l, i) * w[(m, j)] + g(m, l, j) * w[(i, m)];
                    }
                    par = par.max(acc.abs());
                }
            }
        }
        Ok([levi, par])
    }

    /// Largest defect of `#_π(R^π(α, β)γ) = R^S(#_π α, #_π β)#_π γ` and
    /// of `r^π(α, β) = r^S(#_π α, #_π β)` on coordinate forms at `x`, with
    /// the leaf side computed from `leaf_metric` and `R^S = −R`.
    pub fn leaf_curvature_residuals_at<M: Field>(
        &self,
        leaf_metric: &M,
        x: &[f64],
    ) -> EvalResult<[f64; 2]> {
        let n = x.len();
        let pi = invertible_pi(self, x)?;
        let t = self.r_pi_tensor_at(x)?;
        let leaf = riemann_of(leaf_metric, x, self.strategy())?;
        let sharp: Vec<Vec<f64>> = (0..n).map(|i| row(&pi, i)).collect();
        let mut eq7 = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let cov: Vec<f64> = (0..n).map(|l| t.get(i, j, k, l)).collect();
                    let lhs = pi.vec_mul(&cov);
                    let rhs = leaf.apply(&sharp[i], &sharp[j], &sharp[k]);
                    eq7 = eq7.max(linalg::max_abs(&linalg::add(&lhs, &rhs)));
                }
            }
        }
        let lifted = pi.mul(&leaf.ricci()).mul(&pi.transpose());
        let eq8 = t.ricci().add(&lifted.scale(-1.0)).max_abs();
        Ok([eq7, eq8])
    }

    /// Curvature summary: antisymmetry of `R^π`, `J`-skewness of `r^π`,
    /// Bianchi and antisymmetry of the Riemann tensor, and, when `π` is
    /// invertible on the samples, the leaf cross-checks against the
    /// Levi-Civita data of the leaf metric `g^{J̃}` (`= g` when `J̃` is a
    /// `g`-isometry).
    pub fn curvature_report(&self, tol: f64) -> ResidualReport {
        crate::poisson::warn_tight_tolerance(self.strategy(), tol);
        let mut report = ResidualReport::new("curvature", self.chart());
        let points = self.sample_points();
        let start = std::time::Instant::now();
        let r = sweep_max_many(&points, 4, |x| {
            let a = self.r_pi_symmetry_at(x)?;
            let b = self.riemann_symmetry_at(x)?;
            Ok(vec![a[0], a[1], b[0], b[1]])
        });
        let ms = start.elapsed().as_secs_f64() * 1e3;
        let names = [
            "r_pi_antisymmetry",
            "r_pi_j_skew",
            "riemann_bianchi",
            "riemann_antisymmetry",
        ];
        push_slots(&mut report, &names, r.as_deref(), tol, ms);

        if self.pi_invertible_on_samples() {
            let leaf = JTildeMetric { geom: self };
            let start = std::time::Instant::now();
            let r = sweep_max_many(&points, 5, |x| {
                let a = self.leaf_curvature_residuals_at(&leaf, x)?;
                let b = self.leaf_residuals_at(&leaf, x)?;
                let g = self.metric_at::<f64>(x)?;
                let defect = leaf.eval(x)?;
                let d = linalg::max_abs(&linalg::sub(&defect, g.as_slice()));
                Ok(vec![a[0], a[1], b[0], b[1], d])
            });
            let ms = start.elapsed().as_secs_f64() * 1e3;
            let names = [
                "leaf_curvature",
                "leaf_ricci",
                "leaf_levi_civita",
                "leaf_omega_parallel",
            ];
            push_slots(&mut report, &names, r.as_deref().map(|v| &v[..4]), tol, ms);
            if let Ok(v) = &r {
                report
                    .notes
                    .push(format!("leaf metric deviates from g by at most {:e}", v[4]));
            }
        } else {
            report
                .notes
                .push("pi is singular on the samples; leaf checks skipped".into());
        }
        report
    }

    /// Whether `|det π| > ε_π` at every sample point.
    pub fn pi_invertible_on_samples(&self) -> bool {
        self.sample_points().iter().all(|p| {
            self.pi_at::<f64>(&p.coords)
                .map(|m| m.det().abs() > POISSON_FLOOR)
                .unwrap_or(false)
        })
    }

    // ---- diagnostics ----------------------------------------------------------

    /// `‖J³ + J‖` (largest entry) at `x`.
    pub fn j_cubed_residual_at(&self, x: &[f64]) -> EvalResult<f64> {
        let j = self.j_matrix_at(x)?;
        Ok(j.mul(&j).mul(&j).add(&j).max_abs())
    }

    /// `J³ + J` together with both compatibility residuals; flagged
    /// [`KAHLER_LEAVES`] when all three pass.
    pub fn kahler_diagnostic(&self, tol: f64) -> ResidualReport {
        let mut report = ResidualReport::new("kahler", self.chart());
        let points = self.sample_points();
        report.push(Check::timed("j_cubed", tol, || {
            sweep_max(&points, |x| self.j_cubed_residual_at(x))
        }));
        report.merge(self.compat_residuals(tol));
        if report.passed() {
            report.flags.push(KAHLER_LEAVES.into());
        }
        report
    }

    /// Least-squares `λ` in `r^π = λ g̃`, restricted to leaf directions, and
    /// the residual after the fit, at `x`.
    ///
    /// Leaf covectors are the `g̃`-orthogonal complement of `ker #_π`,
    /// spanned by the columns of `gπ`; on an invertible chart this is every
    /// covector.
    pub fn einstein_fit_at<T: Scalar>(&self, x: &[T]) -> EvalResult<(T, f64)> {
        let r = self.r_pi_tensor_at(x)?.ricci();
        let gi = self.cometric_at(x)?;
        let m = self.metric_at(x)?.mul(&self.pi_at(x)?);
        let rl = m.transpose().mul(&r).mul(&m);
        let gl = m.transpose().mul(&gi).mul(&m);
        let mut num = T::zero();
        let mut den = T::zero();
        for (a, b) in rl.as_slice().iter().zip(gl.as_slice()) {
            num = num + *a * *b;
            den = den + *b * *b;
        }
        if den.re() == 0.0 {
            return Ok((T::zero(), rl.max_abs()));
        }
        let lambda = num / den;
        let fit = rl.add(&gl.scale(-lambda)).max_abs();
        Ok((lambda, fit))
    }

    /// `λ` at every sample point.
    pub fn einstein_lambdas(&self) -> Result<Vec<f64>> {
        self.sample_points()
            .iter()
            .map(|p| lift(&p.coords, self.einstein_fit_at::<f64>(&p.coords)).map(|v| v.0))
            .collect()
    }

    /// Checks `einstein_fit` (residual of `r^π = λ g̃` on leaf directions)
    /// and `lambda_casimir` (`#_π dλ`).
    pub fn einstein_leaf_check(&self, tol: f64) -> ResidualReport {
        let mut report = ResidualReport::new("einstein", self.chart());
        let points = self.sample_points();
        let start = std::time::Instant::now();
        let lf = LambdaField { geom: self };
        let r = sweep_max_many(&points, 2, |x| {
            let (_, fit) = self.einstein_fit_at::<f64>(x)?;
            let dl: Vec<f64> = jacobian(&lf, x, self.strategy())?
                .into_iter()
                .map(|r| r[0])
                .collect();
            let cas = linalg::max_abs(&self.pi_at(x)?.vec_mul(&dl));
            Ok(vec![fit, cas])
        });
        let ms = start.elapsed().as_secs_f64() * 1e3;
        push_slots(
            &mut report,
            &["einstein_fit", "lambda_casimir"],
            r.as_deref(),
            tol,
            ms,
        );
        if let Ok(lams) = self.einstein_lambdas() {
            let lo = lams.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = lams.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            report
                .notes
                .push(format!("lambda ranges over [{lo}, {hi}]"));
        }
        if !report.passed() {
            warn!("einstein leaf check failed");
        }
        report
    }
}
