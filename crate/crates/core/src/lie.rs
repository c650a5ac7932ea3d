//! Finite-dimensional Lie algebras with exact structure constants,
//! invariant forms, and the two conditions on a vector `u`
//!
//! * `[[u, [x, u]], y] = 0` for all `x, y` (called condition 14 below), and
//! * `[[u, x], [u, y]] = 0` for all `x, y` (condition 15),
//!
//! which decide the two compatibility notions for a left-invariant Killing
//! field on a group with a bi-invariant metric.
//!
//! Everything is generic over [`LieScalar`]; the file format and the search
//! use [`Rational`]. Indices are 0-based in code and 1-based in files.

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::path::Path;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Exact (or at least ordered, signed) scalars for structure constants.
pub trait LieScalar: Signed + Clone + Debug + PartialOrd + Send + Sync {}

impl<T: Signed + Clone + Debug + PartialOrd + Send + Sync> LieScalar for T {}

/// Largest absolute value of an iterator of scalars; zero when empty.
fn max_abs<F: LieScalar>(it: impl IntoIterator<Item = F>) -> F {
    it.into_iter().fold(F::zero(), |m, v| {
        let a = v.abs();
        if a > m {
            a
        } else {
            m
        }
    })
}

fn basis<F: LieScalar>(d: usize, i: usize) -> Vec<F> {
    (0..d)
        .map(|k| if k == i { F::one() } else { F::zero() })
        .collect()
}

/// A Lie algebra given by structure constants `[e_i, e_j] = c^k_ij e_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct LieAlgebra<F> {
    name: String,
    dim: usize,
    /// `c[(i * d + j) * d + k] = c^k_ij`
    c: Vec<F>,
    /// Nonzero `(i, j, k, c^k_ij)`.
    nz: Vec<(usize, usize, usize, F)>,
}

impl<F: LieScalar> LieAlgebra<F> {
    /// From the dense table `c[(i*d + j)*d + k] = c^k_ij`; rejects tables that
    /// are not antisymmetric in `i, j`.
    pub fn from_constants(name: impl Into<String>, dim: usize, c: Vec<F>) -> Result<Self> {
        if c.len() != dim.pow(3) {
            return Err(Error::InvalidAlgebra(format!(
                "expected {} structure constants, got {}",
                dim.pow(3),
                c.len()
            )));
        }
        let at = |i: usize, j: usize, k: usize| &c[(i * dim + j) * dim + k];
        for i in 0..dim {
            for j in i..dim {
                for k in 0..dim {
                    if *at(i, j, k) != -at(j, i, k).clone() {
                        return Err(Error::InvalidAlgebra(format!(
                            "structure constants not antisymmetric at [e{}, e{}]",
                            i + 1,
                            j + 1
                        )));
                    }
                }
            }
        }
        let mut nz = Vec::new();
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    let v = at(i, j, k);
                    if !v.is_zero() {
                        nz.push((i, j, k, v.clone()));
                    }
                }
            }
        }
        Ok(Self {
            name: name.into(),
            dim,
            c,
            nz,
        })
    }

    /// From brackets `[e_i, e_j] = Σ v_k e_k`, completed antisymmetrically.
    /// A pair given in both orders must agree; `[e_i, e_i]` must vanish.
    pub fn from_brackets(
        name: impl Into<String>,
        dim: usize,
        brackets: &[((usize, usize), Vec<(usize, F)>)],
    ) -> Result<Self> {
        let mut c = vec![F::zero(); dim.pow(3)];
        let mut seen = vec![false; dim * dim];
        for ((i, j), terms) in brackets {
            let (i, j) = (*i, *j);
            if i >= dim || j >= dim || terms.iter().any(|(k, _)| *k >= dim) {
                return Err(Error::InvalidAlgebra(format!(
                    "bracket index out of range in [e{}, e{}]",
                    i + 1,
                    j + 1
                )));
            }
            let mut v = vec![F::zero(); dim];
            for (k, val) in terms {
                v[*k] = v[*k].clone() + val.clone();
            }
            if i == j {
                if v.iter().any(|x| !x.is_zero()) {
                    return Err(Error::InvalidAlgebra(format!(
                        "[e{}, e{}] must vanish",
                        i + 1,
                        i + 1
                    )));
                }
                continue;
            }
            for (k, vk) in v.into_iter().enumerate() {
                let here = (i * dim + j) * dim + k;
                let there = (j * dim + i) * dim + k;
                if seen[i * dim + j] && c[here] != vk {
                    return Err(Error::InvalidAlgebra(format!(
                        "conflicting entries for [e{}, e{}]",
                        i + 1,
                        j + 1
                    )));
                }
                c[there] = -vk.clone();
                c[here] = vk;
            }
            seen[i * dim + j] = true;
            seen[j * dim + i] = true;
        }
        Self::from_constants(name, dim, c)
    }

    pub fn abelian(name: impl Into<String>, dim: usize) -> Self {
        Self::from_constants(name, dim, vec![F::zero(); dim.pow(3)]).expect("zero table")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `c^k_ij`
    pub fn constant(&self, i: usize, j: usize, k: usize) -> &F {
        &self.c[(i * self.dim + j) * self.dim + k]
    }

    pub fn is_abelian(&self) -> bool {
        self.nz.is_empty()
    }

    pub fn bracket(&self, x: &[F], y: &[F]) -> Vec<F> {
        let mut out = vec![F::zero(); self.dim];
        for (i, j, k, c) in &self.nz {
            if x[*i].is_zero() || y[*j].is_zero() {
                continue;
            }
            out[*k] = out[*k].clone() + c.clone() * x[*i].clone() * y[*j].clone();
        }
        out
    }

    /// Columns of `ad_u`: `ad_u e_x = [u, e_x]`.
    pub fn ad_columns(&self, u: &[F]) -> Vec<Vec<F>> {
        (0..self.dim)
            .map(|x| self.bracket(u, &basis(self.dim, x)))
            .collect()
    }

    /// Largest component of the Jacobiator over basis triples.
    pub fn jacobi_residual(&self) -> F {
        let d = self.dim;
        let e: Vec<Vec<F>> = (0..d).map(|i| basis(d, i)).collect();
        let mut worst = F::zero();
        for i in 0..d {
            for j in (i + 1)..d {
                for k in (j + 1)..d {
                    let a = self.bracket(&e[i], &self.bracket(&e[j], &e[k]));
                    let b = self.bracket(&e[j], &self.bracket(&e[k], &e[i]));
                    let c = self.bracket(&e[k], &self.bracket(&e[i], &e[j]));
                    let m = max_abs((0..d).map(|l| a[l].clone() + b[l].clone() + c[l].clone()));
                    if m > worst {
                        worst = m;
                    }
                }
            }
        }
        worst
    }

    /// Largest component of `[[u, [x, u]], y]` over basis pairs.
    pub fn cond14_residual(&self, u: &[F]) -> F {
        let d = self.dim;
        let mut worst = F::zero();
        for x in 0..d {
            let w = self.bracket(u, &self.bracket(&basis(d, x), u));
            for y in 0..d {
                let m = max_abs(self.bracket(&w, &basis(d, y)));
                if m > worst {
                    worst = m;
                }
            }
        }
        worst
    }

    /// Largest component of `[[u, x], [u, y]]` over basis pairs.
    pub fn cond15_residual(&self, u: &[F]) -> F {
        let cols = self.ad_columns(u);
        let mut worst = F::zero();
        for x in 0..self.dim {
            for y in (x + 1)..self.dim {
                let m = max_abs(self.bracket(&cols[x], &cols[y]));
                if m > worst {
                    worst = m;
                }
            }
        }
        worst
    }

    /// `ad_u` as a column-major matrix: entry `x * d + k` is `[u, e_x]_k`.
    fn ad_matrix(&self, u: &[F]) -> Vec<F> {
        let d = self.dim;
        let mut a = vec![F::zero(); d * d];
        for (i, x, k, c) in &self.nz {
            if !u[*i].is_zero() {
                a[x * d + k] = a[x * d + k].clone() + c.clone() * u[*i].clone();
            }
        }
        a
    }

    /// Whether condition 14 holds; stops at the first failing basis vector.
    pub fn satisfies14(&self, u: &[F]) -> bool {
        let d = self.dim;
        let a = self.ad_matrix(u);
        let mut w = vec![F::zero(); d];
        let mut acc = vec![F::zero(); d * d];
        // [u, [x, u]] = −ad_u² x must be central.
        (0..d).all(|x| {
            for (k, wk) in w.iter_mut().enumerate() {
                *wk = (0..d).fold(F::zero(), |s, m| {
                    s + a[m * d + k].clone() * a[x * d + m].clone()
                });
            }
            acc.iter_mut().for_each(|v| *v = F::zero());
            for (i, y, k, c) in &self.nz {
                if !w[*i].is_zero() {
                    acc[y * d + k] = acc[y * d + k].clone() + c.clone() * w[*i].clone();
                }
            }
            acc.iter().all(Zero::is_zero)
        })
    }

    /// Whether condition 15 holds; stops at the first failing basis pair.
    pub fn satisfies15(&self, u: &[F]) -> bool {
        let d = self.dim;
        let a = self.ad_matrix(u);
        let mut acc = vec![F::zero(); d];
        (0..d).all(|x| {
            ((x + 1)..d).all(|y| {
                acc.iter_mut().for_each(|v| *v = F::zero());
                for (i, j, k, c) in &self.nz {
                    let (p, q) = (&a[x * d + i], &a[y * d + j]);
                    if !p.is_zero() && !q.is_zero() {
                        acc[*k] = acc[*k].clone() + c.clone() * p.clone() * q.clone();
                    }
                }
                acc.iter().all(Zero::is_zero)
            })
        })
    }

    pub fn classify(&self, u: &[F]) -> Classification {
        Classification::from_flags(self.satisfies14(u), self.satisfies15(u))
    }

    /// `self ⊕ other` with the second summand's basis appended.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let d = self.dim + other.dim;
        let mut c = vec![F::zero(); d.pow(3)];
        for (i, j, k, v) in &self.nz {
            c[(i * d + j) * d + k] = v.clone();
        }
        let o = self.dim;
        for (i, j, k, v) in &other.nz {
            c[((i + o) * d + j + o) * d + k + o] = v.clone();
        }
        Self::from_constants(format!("{} + {}", self.name, other.name), d, c)
            .expect("antisymmetric")
    }

    /// `T*g = g ⋉ g*` with the coadjoint action, basis `e_1..e_d, ε^1..ε^d`.
    pub fn cotangent_extension(&self) -> Self {
        let d = self.dim;
        let n = 2 * d;
        // [e_i, ε^k] = −c^k_ij ε^j
        let mut table = vec![F::zero(); n.pow(3)];
        for (i, j, k, v) in &self.nz {
            table[(i * n + j) * n + k] = table[(i * n + j) * n + k].clone() + v.clone();
            let a = (i * n + d + k) * n + d + j;
            let b = ((d + k) * n + i) * n + d + j;
            table[a] = table[a].clone() - v.clone();
            table[b] = table[b].clone() + v.clone();
        }
        Self::from_constants(format!("T*({})", self.name), n, table).expect("antisymmetric")
    }

    /// Apply `f` to every structure constant.
    pub fn map<G: LieScalar>(&self, f: impl Fn(&F) -> G) -> LieAlgebra<G> {
        LieAlgebra::from_constants(self.name.clone(), self.dim, self.c.iter().map(f).collect())
            .expect("map preserves antisymmetry")
    }
}

/// Which of the two conditions a vector satisfies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Both,
    Only14,
    Only15,
    Neither,
}

impl Classification {
    pub fn from_flags(c14: bool, c15: bool) -> Self {
        match (c14, c15) {
            (true, true) => Self::Both,
            (true, false) => Self::Only14,
            (false, true) => Self::Only15,
            (false, false) => Self::Neither,
        }
    }

    /// Exactly one of the two conditions holds.
    pub fn separates(self) -> bool {
        matches!(self, Self::Only14 | Self::Only15)
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Both => "both",
            Self::Only14 => "only-14",
            Self::Only15 => "only-15",
            Self::Neither => "neither",
        }
    }
}

/// A symmetric bilinear form `B_ij = B(e_i, e_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct InvariantForm<F> {
    dim: usize,
    b: Vec<F>,
}

impl<F: LieScalar> InvariantForm<F> {
    /// Row-major entries; rejects asymmetric or degenerate matrices.
    pub fn new(dim: usize, b: Vec<F>) -> Result<Self> {
        if b.len() != dim * dim {
            return Err(Error::InvalidAlgebra(format!("form must be {dim}×{dim}")));
        }
        for i in 0..dim {
            for j in i + 1..dim {
                if b[i * dim + j] != b[j * dim + i] {
                    return Err(Error::InvalidAlgebra(format!(
                        "form not symmetric at ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        if determinant(&b, dim).is_zero() {
            return Err(Error::InvalidAlgebra("form is degenerate".into()));
        }
        Ok(Self { dim, b })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> &F {
        &self.b[i * self.dim + j]
    }

    pub fn apply(&self, x: &[F], y: &[F]) -> F {
        let mut acc = F::zero();
        for i in 0..self.dim {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..self.dim {
                acc = acc + x[i].clone() * self.entry(i, j).clone() * y[j].clone();
            }
        }
        acc
    }

    /// Largest `|B([e_i, e_j], e_k) + B(e_j, [e_i, e_k])|`.
    pub fn ad_invariance_residual(&self, alg: &LieAlgebra<F>) -> F {
        let d = self.dim;
        let e: Vec<Vec<F>> = (0..d).map(|i| basis(d, i)).collect();
        let mut worst = F::zero();
        for i in 0..d {
            for j in 0..d {
                let ij = alg.bracket(&e[i], &e[j]);
                for k in 0..d {
                    let ik = alg.bracket(&e[i], &e[k]);
                    let v = (self.apply(&ij, &e[k]) + self.apply(&e[j], &ik)).abs();
                    if v > worst {
                        worst = v;
                    }
                }
            }
        }
        worst
    }

    /// Orthogonal direct sum.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let d = self.dim + other.dim;
        let mut b = vec![F::zero(); d * d];
        for i in 0..self.dim {
            for j in 0..self.dim {
                b[i * d + j] = self.entry(i, j).clone();
            }
        }
        for i in 0..other.dim {
            for j in 0..other.dim {
                b[(i + self.dim) * d + j + self.dim] = other.entry(i, j).clone();
            }
        }
        Self { dim: d, b }
    }

    /// The canonical pairing `B(e_i, ε^j) = δ_ij` on `T*g`.
    pub fn cotangent_pairing(d: usize) -> Self {
        let n = 2 * d;
        let mut b = vec![F::zero(); n * n];
        for i in 0..d {
            b[i * n + d + i] = F::one();
            b[(d + i) * n + i] = F::one();
        }
        Self { dim: n, b }
    }

    /// Euclidean form on `ℝ^d`.
    pub fn identity(d: usize) -> Self {
        Self {
            dim: d,
            b: (0..d * d)
                .map(|k| if k / d == k % d { F::one() } else { F::zero() })
                .collect(),
        }
    }
}

/// Determinant by fraction-free elimination; every division is exact, so
/// integer matrices stay integral.
pub fn determinant<F: LieScalar>(m: &[F], n: usize) -> F {
    let mut a = m.to_vec();
    let mut sign = F::one();
    let mut prev = F::one();
    for k in 0..n {
        let Some(p) = (k..n).find(|r| !a[r * n + k].is_zero()) else {
            return F::zero();
        };
        if p != k {
            for c in 0..n {
                a.swap(k * n + c, p * n + c);
            }
            sign = -sign;
        }
        for i in (k + 1)..n {
            for j in (k + 1)..n {
                let v = a[i * n + j].clone() * a[k * n + k].clone()
                    - a[i * n + k].clone() * a[k * n + j].clone();
                a[i * n + j] = v / prev.clone();
            }
            a[i * n + k] = F::zero();
        }
        prev = a[k * n + k].clone();
    }
    if n == 0 {
        F::one()
    } else {
        sign * a[n * n - 1].clone()
    }
}

// ---- rationals: parsing, files, search ------------------------------------------

pub fn rational(text: &str) -> Result<Rational> {
    let t = text.trim();
    let bad = || Error::InvalidAlgebra(format!("not a rational number: '{text}'"));
    let (num, den) = match t.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (t, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(num, den))
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// `p/q` or `p`.
pub fn rational_text(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// A rational in a file: an integer literal or a `"p/q"` string.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RationalText {
    Int(i64),
    Text(String),
}

impl RationalText {
    pub fn value(&self) -> Result<Rational> {
        match self {
            RationalText::Int(v) => Ok(int(*v)),
            RationalText::Text(s) => rational(s),
        }
    }

    pub fn from_rational(r: &Rational) -> Self {
        match (r.is_integer(), r.numer().to_i64()) {
            (true, Some(v)) => RationalText::Int(v),
            _ => RationalText::Text(rational_text(r)),
        }
    }
}

/// On-disk algebra: brackets keyed `"i,j"` with components keyed `"k"`,
/// all 1-based; omitted brackets are zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgebraFile {
    pub dimension: usize,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default)]
    pub brackets: BTreeMap<String, BTreeMap<String, RationalText>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub form: Option<Vec<Vec<RationalText>>>,
}

fn one_based(text: &str, dim: usize) -> Result<usize> {
    let i: usize = text
        .trim()
        .parse()
        .map_err(|_| Error::InvalidAlgebra(format!("bad index '{text}'")))?;
    if i == 0 || i > dim {
        return Err(Error::InvalidAlgebra(format!(
            "index {i} outside 1..={dim}"
        )));
    }
    Ok(i - 1)
}

impl AlgebraFile {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("algebra serializes")
    }

    pub fn algebra(&self) -> Result<LieAlgebra<Rational>> {
        let d = self.dimension;
        let mut entries = Vec::new();
        for (key, comps) in &self.brackets {
            let (a, b) = key.split_once(',').ok_or_else(|| {
                Error::InvalidAlgebra(format!("bracket key '{key}' is not 'i,j'"))
            })?;
            let (i, j) = (one_based(a, d)?, one_based(b, d)?);
            let terms = comps
                .iter()
                .map(|(k, v)| Ok((one_based(k, d)?, v.value()?)))
                .collect::<Result<Vec<_>>>()?;
            entries.push(((i, j), terms));
        }
        LieAlgebra::from_brackets(self.name.clone(), d, &entries)
    }

    pub fn form(&self) -> Result<Option<InvariantForm<Rational>>> {
        let Some(rows) = &self.form else {
            return Ok(None);
        };
        let d = self.dimension;
        if rows.len() != d || rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidAlgebra(format!("form must be {d}×{d}")));
        }
        let b = rows
            .iter()
            .flatten()
            .map(RationalText::value)
            .collect::<Result<Vec<_>>>()?;
        InvariantForm::new(d, b).map(Some)
    }

    pub fn from_algebra(
        alg: &LieAlgebra<Rational>,
        form: Option<&InvariantForm<Rational>>,
        description: Option<&str>,
    ) -> Self {
        let d = alg.dim();
        let mut brackets = BTreeMap::new();
        for i in 0..d {
            for j in (i + 1)..d {
                let comps: BTreeMap<String, RationalText> = (0..d)
                    .filter(|k| !alg.constant(i, j, *k).is_zero())
                    .map(|k| {
                        (
                            (k + 1).to_string(),
                            RationalText::from_rational(alg.constant(i, j, k)),
                        )
                    })
                    .collect();
                if !comps.is_empty() {
                    brackets.insert(format!("{},{}", i + 1, j + 1), comps);
                }
            }
        }
        let form = form.map(|f| {
            (0..d)
                .map(|i| {
                    (0..d)
                        .map(|j| RationalText::from_rational(f.entry(i, j)))
                        .collect()
                })
                .collect()
        });
        Self {
            dimension: d,
            name: alg.name().to_string(),
            description: description.map(str::to_string),
            brackets,
            form,
        }
    }
}

/// Structure constants scaled by the common denominator; zero tests are
/// unaffected by the scaling.
struct IntegerImage {
    alg: LieAlgebra<i128>,
}

impl LieAlgebra<Rational> {
    fn integer_image(&self) -> Result<IntegerImage> {
        let scale = self
            .c
            .iter()
            .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
        let too_big =
            || Error::InvalidAlgebra("structure constants too large for the search".into());
        let mut c = Vec::with_capacity(self.c.len());
        for r in &self.c {
            let v = r.numer() * (&scale / r.denom());
            c.push(v.to_i128().ok_or_else(too_big)?);
        }
        Ok(IntegerImage {
            alg: LieAlgebra::from_constants(self.name.clone(), self.dim, c)?,
        })
    }

    pub fn cond14(&self, u: &[Rational]) -> Rational {
        self.cond14_residual(u)
    }

    pub fn cond15(&self, u: &[Rational]) -> Rational {
        self.cond15_residual(u)
    }

    /// Classify every vector of `spec` and collect the vectors satisfying
    /// exactly one condition.
    pub fn search(&self, spec: &SearchSpec) -> Result<SearchOutcome> {
        let image = self.integer_image()?.alg;
        let d = self.dim;
        let plan = spec.plan(d);
        let vectors: Vec<(Vec<i128>, BigInt)> = match &plan {
            SearchPlan::Grid { .. } => Vec::new(),
            SearchPlan::Random { count } => spec.random_vectors(d, *count),
        };
        let classify = |u: &[i128]| image.classify(u);
        let classes: Vec<Classification> = match &plan {
            SearchPlan::Grid { count, axis } => (0..*count)
                .into_par_iter()
                .map(|idx| classify(&grid_vector(idx, d, axis)))
                .collect(),
            SearchPlan::Random { .. } => vectors.par_iter().map(|(u, _)| classify(u)).collect(),
        };
        let mut counts = BTreeMap::new();
        let mut witnesses = Vec::new();
        for (idx, class) in classes.iter().enumerate() {
            *counts.entry(*class).or_insert(0usize) += 1;
            if class.separates() && witnesses.len() < spec.witness_limit {
                let (u, den) = match &plan {
                    SearchPlan::Grid { axis, .. } => {
                        (grid_vector(idx, d, axis), spec.denominator())
                    }
                    SearchPlan::Random { .. } => vectors[idx].clone(),
                };
                witnesses.push(self.row(&u, &den, *class));
            }
        }
        Ok(SearchOutcome {
            algebra: self.name.clone(),
            dimension: d,
            exhaustive: matches!(plan, SearchPlan::Grid { .. }),
            vectors: classes.len(),
            counts: counts
                .into_iter()
                .map(|(k, v)| (k.label().to_string(), v))
                .collect(),
            witnesses,
        })
    }

    /// Every vector of `spec` with its residual for one condition, in
    /// enumeration order, up to `limit` entries.
    pub fn search_vectors(
        &self,
        condition: Condition,
        spec: &SearchSpec,
        limit: usize,
    ) -> Vec<(Vec<Rational>, Rational)> {
        let d = self.dim;
        let den = Rational::from_integer(spec.denominator());
        let vectors: Vec<Vec<Rational>> = match spec.plan(d) {
            SearchPlan::Grid { count, axis } => (0..count.min(limit))
                .map(|idx| {
                    grid_vector(idx, d, &axis)
                        .into_iter()
                        .map(|v| Rational::from_integer(BigInt::from(v)) / den.clone())
                        .collect()
                })
                .collect(),
            SearchPlan::Random { count } => spec
                .random_vectors(d, count.min(limit))
                .into_iter()
                .map(|(u, q)| {
                    let q = Rational::from_integer(q);
                    u.into_iter()
                        .map(|v| Rational::from_integer(BigInt::from(v)) / q.clone())
                        .collect()
                })
                .collect(),
        };
        vectors
            .into_par_iter()
            .map(|u| {
                let r = match condition {
                    Condition::Fourteen => self.cond14_residual(&u),
                    Condition::Fifteen => self.cond15_residual(&u),
                };
                (u, r)
            })
            .collect()
    }

    fn row(&self, u_scaled: &[i128], den: &BigInt, class: Classification) -> SearchRow {
        let den = Rational::from_integer(den.clone());
        let u: Vec<Rational> = u_scaled
            .iter()
            .map(|v| Rational::from_integer(BigInt::from(*v)) / den.clone())
            .collect();
        SearchRow {
            u: u.iter().map(rational_text).collect(),
            cond14: rational_text(&self.cond14_residual(&u)),
            cond15: rational_text(&self.cond15_residual(&u)),
            class,
        }
    }

    /// Left-invariant data for `U = u` on a group with bi-invariant metric
    /// `B`: `J̃x = ½[x, u]`, its `B`-skewness defect, both conditions, and
    /// the compatibility verdicts they decide.
    pub fn biinvariant_geometry(
        &self,
        form: &InvariantForm<Rational>,
        u: &[Rational],
    ) -> Result<LieGeometry> {
        let d = self.dim;
        if u.len() != d || form.dim() != d {
            return Err(Error::InvalidAlgebra(format!(
                "vector and form must have dimension {d}"
            )));
        }
        let jac = self.jacobi_residual();
        if !jac.is_zero() {
            return Err(Error::InvalidAlgebra(format!(
                "Jacobi identity fails by {}",
                rational_text(&jac)
            )));
        }
        let inv = form.ad_invariance_residual(self);
        if !inv.is_zero() {
            return Err(Error::NotInvariant(format!(
                "residual {}",
                rational_text(&inv)
            )));
        }
        let half = Rational::new(BigInt::one(), BigInt::from(2));
        let cols: Vec<Vec<Rational>> = (0..d)
            .map(|x| {
                self.bracket(&basis(d, x), u)
                    .into_iter()
                    .map(|v| v * half.clone())
                    .collect()
            })
            .collect();
        let mut skew = Rational::zero();
        for x in 0..d {
            for y in 0..d {
                let v =
                    (form.apply(&cols[x], &basis(d, y)) + form.apply(&basis(d, x), &cols[y])).abs();
                if v > skew {
                    skew = v;
                }
            }
        }
        let c14 = self.cond14_residual(u);
        let c15 = self.cond15_residual(u);
        Ok(LieGeometry {
            algebra: self.name.clone(),
            u: u.iter().map(rational_text).collect(),
            jtilde: (0..d)
                .map(|k| (0..d).map(|x| rational_text(&cols[x][k])).collect())
                .collect(),
            skewness: rational_text(&skew),
            cond14: rational_text(&c14),
            cond15: rational_text(&c15),
            nabla_compatible: c14.is_zero(),
            d_compatible: c15.is_zero(),
        })
    }
}

/// The two conditions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Condition {
    #[serde(rename = "14")]
    Fourteen,
    #[serde(rename = "15")]
    Fifteen,
}

/// Result of [`LieAlgebra::biinvariant_geometry`], with exact values
/// rendered as `p/q`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LieGeometry {
    pub algebra: String,
    pub u: Vec<String>,
    /// `J̃` as a matrix, `J̃[k][x]` the `k`-th component of `J̃ e_x`.
    pub jtilde: Vec<Vec<String>>,
    pub skewness: String,
    pub cond14: String,
    pub cond15: String,
    pub nabla_compatible: bool,
    pub d_compatible: bool,
}

/// Vectors to search: the grid `{lo, lo + step, …, hi}^d` when it has at
/// most `cap` points, otherwise `samples` seeded random rationals in
/// `[lo, hi]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchSpec {
    pub lo: Rational,
    pub hi: Rational,
    pub step: Rational,
    pub cap: usize,
    pub samples: usize,
    pub seed: u64,
    pub witness_limit: usize,
}

pub const GRID_CAP: usize = 1_000_000;

impl Default for SearchSpec {
    fn default() -> Self {
        Self {
            lo: int(-2),
            hi: int(2),
            step: int(1),
            cap: GRID_CAP,
            samples: 10_000,
            seed: crate::chart::DEFAULT_SEED,
            witness_limit: 20,
        }
    }
}

enum SearchPlan {
    Grid { count: usize, axis: Vec<i128> },
    Random { count: usize },
}

fn grid_vector(mut idx: usize, d: usize, axis: &[i128]) -> Vec<i128> {
    let m = axis.len();
    let mut u = vec![0; d];
    for slot in u.iter_mut().rev() {
        *slot = axis[idx % m];
        idx /= m;
    }
    u
}

impl SearchSpec {
    /// `a..b` or `a..b:step` with rational endpoints.
    pub fn parse_grid(text: &str) -> Result<Self> {
        let bad = || Error::InvalidAlgebra(format!("grid '{text}' is not 'a..b' or 'a..b:step'"));
        let (range, step) = match text.split_once(':') {
            Some((r, s)) => (r, rational(s)?),
            None => (text, int(1)),
        };
        let (lo, hi) = range.split_once("..").ok_or_else(bad)?;
        let spec = Self {
            lo: rational(lo)?,
            hi: rational(hi)?,
            step,
            ..Self::default()
        };
        if spec.hi < spec.lo || !spec.step.is_positive() {
            return Err(bad());
        }
        Ok(spec)
    }

    /// Common denominator of every grid value.
    fn denominator(&self) -> BigInt {
        self.lo.denom().lcm(self.step.denom())
    }

    /// Scaled axis values `q · (lo + k·step)`.
    fn axis(&self) -> Vec<i128> {
        let q = Rational::from_integer(self.denominator());
        let mut out = Vec::new();
        let mut v = self.lo.clone();
        while v <= self.hi {
            out.push(
                (v.clone() * q.clone())
                    .to_integer()
                    .to_i128()
                    .expect("grid value fits"),
            );
            v += self.step.clone();
        }
        out
    }

    fn plan(&self, d: usize) -> SearchPlan {
        let axis = self.axis();
        let total = (axis.len() as f64).powi(d as i32);
        if total <= self.cap as f64 {
            SearchPlan::Grid {
                count: axis.len().pow(d as u32),
                axis,
            }
        } else {
            SearchPlan::Random {
                count: self.samples,
            }
        }
    }

    /// Seeded random rationals `p/q ∈ [lo, hi]`, `q ≤ 8`, as scaled integer
    /// vectors with their common denominator.
    fn random_vectors(&self, d: usize, count: usize) -> Vec<(Vec<i128>, BigInt)> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..count)
            .map(|_| {
                let q: i64 = rng.gen_range(1..=8);
                let qr = int(q);
                let lo = (self.lo.clone() * qr.clone())
                    .ceil()
                    .to_integer()
                    .to_i64()
                    .expect("bound fits");
                let hi = (self.hi.clone() * qr)
                    .floor()
                    .to_integer()
                    .to_i64()
                    .expect("bound fits");
                let u = (0..d).map(|_| rng.gen_range(lo..=hi) as i128).collect();
                (u, BigInt::from(q))
            })
            .collect()
    }
}

/// A classified vector with its exact residuals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchRow {
    pub u: Vec<String>,
    pub cond14: String,
    pub cond15: String,
    pub class: Classification,
}

/// Classification table of one search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub algebra: String,
    pub dimension: usize,
    pub exhaustive: bool,
    pub vectors: usize,
    /// Number of vectors per class label.
    pub counts: BTreeMap<String, usize>,
    /// Vectors satisfying exactly one condition (at most the witness limit).
    pub witnesses: Vec<SearchRow>,
}

impl SearchOutcome {
    pub fn count(&self, class: Classification) -> usize {
        self.counts.get(class.label()).copied().unwrap_or(0)
    }

    pub fn separating(&self) -> usize {
        self.count(Classification::Only14) + self.count(Classification::Only15)
    }
}

// ---- catalog ----------------------------------------------------------------------

fn brackets(
    name: &str,
    dim: usize,
    entries: &[(usize, usize, &[(usize, i64)])],
) -> LieAlgebra<Rational> {
    let list: Vec<((usize, usize), Vec<(usize, Rational)>)> = entries
        .iter()
        .map(|(i, j, terms)| ((*i, *j), terms.iter().map(|(k, v)| (*k, int(*v))).collect()))
        .collect();
    LieAlgebra::from_brackets(name, dim, &list).expect("catalog algebra")
}

fn form(dim: usize, rows: &[&[i64]]) -> InvariantForm<Rational> {
    InvariantForm::new(
        dim,
        rows.iter()
            .flat_map(|r| r.iter().map(|v| int(*v)))
            .collect(),
    )
    .expect("catalog form")
}

/// `ℝ⁵` with `[e1,e5] = e4 − e3`, `[e2,e5] = −e1 + e3 + e4`,
/// `[e1,e2] = e3`.
pub fn medina_r5() -> LieAlgebra<Rational> {
    brackets(
        "medina-r5",
        5,
        &[
            (0, 4, &[(3, 1), (2, -1)]),
            (1, 4, &[(0, -1), (2, 1), (3, 1)]),
            (0, 1, &[(2, 1)]),
        ],
    )
}

/// The invariant form of [`medina_r5`], solved from ad-invariance.
pub fn medina_r5_form() -> InvariantForm<Rational> {
    form(
        5,
        &[
            &[-1, -1, 0, 0, 2],
            &[-1, 0, 0, -1, 0],
            &[0, 0, 0, 0, 1],
            &[0, -1, 0, 0, 1],
            &[2, 0, 1, 1, 0],
        ],
    )
}

/// `sl₂` on the basis `(e, f, h)`.
pub fn sl2() -> LieAlgebra<Rational> {
    brackets(
        "sl2",
        3,
        &[(2, 0, &[(0, 2)]), (2, 1, &[(1, -2)]), (0, 1, &[(2, 1)])],
    )
}

/// Killing form of [`sl2`].
pub fn sl2_killing() -> InvariantForm<Rational> {
    form(3, &[&[0, 4, 0], &[4, 0, 0], &[0, 0, 8]])
}

/// Oscillator algebra on `(t, x, y, z)`: `[x,y] = z`, `[t,x] = y`,
/// `[t,y] = −x`.
pub fn oscillator() -> LieAlgebra<Rational> {
    brackets(
        "oscillator",
        4,
        &[(1, 2, &[(3, 1)]), (0, 1, &[(2, 1)]), (0, 2, &[(1, -1)])],
    )
}

pub fn oscillator_form() -> InvariantForm<Rational> {
    form(
        4,
        &[&[0, 0, 0, 1], &[0, 1, 0, 0], &[0, 0, 1, 0], &[1, 0, 0, 0]],
    )
}

/// Oscillator with two planes rotated at frequencies 1 and 2, basis
/// `(t, x1, y1, x2, y2, z)`.
pub fn oscillator_2() -> LieAlgebra<Rational> {
    brackets(
        "oscillator-2",
        6,
        &[
            (0, 1, &[(2, 1)]),
            (0, 2, &[(1, -1)]),
            (1, 2, &[(5, 1)]),
            (0, 3, &[(4, 2)]),
            (0, 4, &[(3, -2)]),
            (3, 4, &[(5, 2)]),
        ],
    )
}

pub fn oscillator_2_form() -> InvariantForm<Rational> {
    let mut rows = vec![vec![0i64; 6]; 6];
    rows[0][5] = 1;
    rows[5][0] = 1;
    for i in 1..5 {
        rows[i][i] = 1;
    }
    let refs: Vec<&[i64]> = rows.iter().map(Vec::as_slice).collect();
    form(6, &refs)
}

/// Heisenberg algebra `[x, y] = z`.
pub fn heisenberg() -> LieAlgebra<Rational> {
    brackets("heis3", 3, &[(0, 1, &[(2, 1)])])
}

/// Four-dimensional filiform algebra `[e1,e2] = e3`, `[e1,e3] = e4`.
pub fn filiform4() -> LieAlgebra<Rational> {
    brackets("filiform4", 4, &[(0, 1, &[(2, 1)]), (0, 2, &[(3, 1)])])
}

/// One catalog entry.
#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub algebra: LieAlgebra<Rational>,
    pub form: InvariantForm<Rational>,
    pub description: &'static str,
}

/// Quadratic Lie algebras shipped for the search: each carries a
/// nondegenerate ad-invariant form.
pub fn catalog() -> Vec<CatalogEntry> {
    let e = |algebra: LieAlgebra<Rational>, form, description| CatalogEntry {
        algebra,
        form,
        description,
    };
    let abelian1 = LieAlgebra::<Rational>::abelian("R", 1);
    let id1 = InvariantForm::identity(1);
    vec![
        e(
            medina_r5(),
            medina_r5_form(),
            "five-dimensional nilpotent algebra with an indefinite invariant form",
        ),
        e(sl2(), sl2_killing(), "sl2 with its Killing form"),
        e(
            oscillator(),
            oscillator_form(),
            "oscillator (diamond) algebra",
        ),
        e(
            oscillator_2(),
            oscillator_2_form(),
            "oscillator algebra with two rotation planes",
        ),
        e(
            heisenberg().cotangent_extension().with_name("T*heis3"),
            InvariantForm::cotangent_pairing(3),
            "cotangent extension of the Heisenberg algebra with its canonical pairing",
        ),
        e(
            filiform4().cotangent_extension().with_name("T*filiform4"),
            InvariantForm::cotangent_pairing(4),
            "cotangent extension of the filiform algebra with its canonical pairing",
        ),
        e(
            sl2().cotangent_extension().with_name("T*sl2"),
            InvariantForm::cotangent_pairing(3),
            "cotangent extension of sl2 with its canonical pairing",
        ),
        e(
            sl2().direct_sum(&abelian1).with_name("sl2+R"),
            sl2_killing().direct_sum(&id1),
            "sl2 plus a one-dimensional abelian summand",
        ),
        e(
            oscillator().direct_sum(&abelian1).with_name("oscillator+R"),
            oscillator_form().direct_sum(&id1),
            "oscillator plus a one-dimensional abelian summand",
        ),
        e(
            LieAlgebra::abelian("abelian3", 3),
            InvariantForm::identity(3),
            "abelian algebra",
        ),
    ]
}
