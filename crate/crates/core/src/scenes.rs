//! Ready-made scenes used by tests, benchmarks and the command line.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chart::DEFAULT_SEED;
use crate::error::Result;
use crate::field::DiffStrategy;
use crate::poisson::Geometry;
use crate::scene::{CurveFile, SceneFile};

fn strings(rows: &[&[&str]]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| r.iter().map(|s| s.to_string()).collect())
        .collect()
}

fn names(n: usize) -> Vec<String> {
    if n <= 3 {
        ["x", "y", "z"][..n].iter().map(|s| s.to_string()).collect()
    } else {
        (1..=n).map(|i| format!("x{i}")).collect()
    }
}

fn scene(
    name: &str,
    coords: Vec<String>,
    domain: Vec<[f64; 2]>,
    metric: Vec<Vec<String>>,
    bivector: Vec<Vec<String>>,
) -> SceneFile {
    SceneFile {
        name: Some(name.into()),
        dimension: coords.len(),
        coordinates: coords,
        domain,
        metric,
        bivector,
        killing: None,
        sample_count: crate::chart::DEFAULT_SAMPLES,
        seed: DEFAULT_SEED,
        diff_strategy: DiffStrategy::ForwardAd,
        tolerances: None,
    }
}

/// Euclidean `ℝⁿ` on `[−1, 1]ⁿ` with the given upper entries of `π`.
pub fn flat(n: usize, upper: &[(usize, usize, &str)]) -> SceneFile {
    let metric = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { "1" } else { "0" }.to_string())
                .collect()
        })
        .collect();
    scene(
        "flat",
        names(n),
        vec![[-1.0, 1.0]; n],
        metric,
        antisymmetric(n, upper),
    )
}

fn antisymmetric(n: usize, upper: &[(usize, usize, &str)]) -> Vec<Vec<String>> {
    let mut m = vec![vec!["0".to_string(); n]; n];
    for &(i, j, e) in upper {
        m[i][j] = e.to_string();
        m[j][i] = format!("-({e})");
    }
    m
}

const S2_CONFORMAL: &str = "4/(1+x^2+y^2)^2";
const S2_PI: &str = "(1+x^2+y^2)^2/4";

/// Unit sphere in stereographic coordinates on `[−1, 1]²`, with `π` the
/// inverse of its area form.
pub fn s2_kahler() -> SceneFile {
    let mut s = scene(
        "s2-kahler",
        names(2),
        vec![[-1.0, 1.0]; 2],
        strings(&[&[S2_CONFORMAL, "0"], &["0", S2_CONFORMAL]]),
        antisymmetric(2, &[(0, 1, S2_PI)]),
    );
    s.killing = Some(vec!["-y".into(), "x".into()]);
    s
}

/// The sphere scene with `π` multiplied by a constant.
pub fn s2_scaled(c: f64) -> SceneFile {
    let mut s = s2_kahler();
    let e = format!("{c}*{S2_PI}");
    s.bivector = antisymmetric(2, &[(0, 1, &e)]);
    s.name = Some(format!("s2-scaled-{c}"));
    s
}

/// Flat plane with the nonparallel invertible bivector `(1 + x²) ∂_x ∧ ∂_y`.
pub fn nonparallel_flat() -> SceneFile {
    let mut s = flat(2, &[(0, 1, "1+x^2")]);
    s.name = Some("nonparallel-flat".into());
    s
}

/// Sphere scene times a flat line, with `π` extended by zero.
pub fn s2_times_line() -> SceneFile {
    let m = strings(&[
        &[S2_CONFORMAL, "0", "0"],
        &["0", S2_CONFORMAL, "0"],
        &["0", "0", "1"],
    ]);
    scene(
        "s2-times-line",
        names(3),
        vec![[-1.0, 1.0]; 3],
        m,
        antisymmetric(3, &[(0, 1, S2_PI)]),
    )
}

fn monomial(rng: &mut ChaCha8Rng, n: usize, max_degree: u32) -> String {
    let vars = names(n);
    let mut parts = Vec::new();
    let mut budget = rng.gen_range(0..=max_degree);
    while budget > 0 {
        let v = rng.gen_range(0..n);
        let e = rng.gen_range(1..=budget);
        budget -= e;
        parts.push(if e == 1 {
            vars[v].clone()
        } else {
            format!("{}^{e}", vars[v])
        });
    }
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("*")
    }
}

fn polynomial(rng: &mut ChaCha8Rng, n: usize, terms: usize, scale: f64) -> String {
    let mut out = String::new();
    for k in 0..terms {
        let c: f64 = rng.gen_range(-scale..scale);
        let m = monomial(rng, n, 3);
        if k > 0 {
            out.push_str(" + ");
        }
        out.push_str(&format!("({c:.6})*{m}"));
    }
    out
}

/// Seeded scene on `[−1, 1]ⁿ`: metric the identity plus a small symmetric
/// polynomial perturbation keeping `|det g| > 0.5`, bivector with cubic
/// polynomial entries.
pub fn random_polynomial(n: usize, seed: u64) -> SceneFile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut metric = vec![vec![String::new(); n]; n];
        for i in 0..n {
            for j in i..n {
                let p = polynomial(&mut rng, n, 3, 0.05);
                metric[i][j] = if i == j {
                    format!("1 + {p}")
                } else {
                    p.clone()
                };
                metric[j][i] = metric[i][j].clone();
            }
        }
        let mut upper = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let terms = rng.gen_range(1..=4);
                upper.push((i, j, polynomial(&mut rng, n, terms, 1.0)));
            }
        }
        let refs: Vec<(usize, usize, &str)> =
            upper.iter().map(|(i, j, e)| (*i, *j, e.as_str())).collect();
        let mut s = scene(
            &format!("random-{n}d-{seed}"),
            names(n),
            vec![[-1.0, 1.0]; n],
            metric,
            antisymmetric(n, &refs),
        );
        s.seed = seed;
        if det_bounded(&s, 0.5) {
            return s;
        }
    }
}

/// Seeded invertible scene on `[−1, 1]²`: perturbed metric, and a bivector
/// whose coefficient stays above `1` in absolute value.
pub fn random_invertible_plane(seed: u64) -> SceneFile {
    let mut s = random_polynomial(2, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    let p = polynomial(&mut rng, 2, 3, 0.3);
    s.bivector = antisymmetric(2, &[(0, 1, &format!("2 + {p}"))]);
    s.name = Some(format!("random-invertible-{seed}"));
    s
}

/// `|det g| > floor` on a fine lattice and the sample points.
fn det_bounded(s: &SceneFile, floor: f64) -> bool {
    let Ok(built) = s.build(None, None, None) else {
        return false;
    };
    let g = &built.geometry;
    let n = g.dim();
    let mut pts: Vec<Vec<f64>> = g.sample_points().into_iter().map(|p| p.coords).collect();
    let ticks = [-1.0, -0.5, 0.0, 0.5, 1.0];
    let total = ticks.len().pow(n as u32);
    for mut k in 0..total {
        let mut x = Vec::with_capacity(n);
        for _ in 0..n {
            x.push(ticks[k % ticks.len()]);
            k /= ticks.len();
        }
        pts.push(x);
    }
    pts.iter().all(|x| {
        g.metric_at::<f64>(x)
            .map(|m| m.det().abs() > floor)
            .unwrap_or(false)
    })
}

pub fn build(s: &SceneFile) -> Result<Geometry> {
    Ok(s.build(None, None, None)?.geometry)
}

/// A seeded cotangent curve on the sphere scene: a quadratic path inside
/// `[−0.9, 0.9]²` with `α = #_π⁻¹ γ'` written in closed form.
pub fn s2_curve(seed: u64) -> CurveFile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coef = || -> [f64; 3] {
        let a: f64 = rng.gen_range(-0.5..0.5);
        let b: f64 = rng.gen_range(-0.25..0.25);
        let c: f64 = rng.gen_range(-0.15..0.15);
        [a, b, c]
    };
    let [a1, b1, c1] = coef();
    let [a2, b2, c2] = coef();
    let gx = format!("({a1:.6}) + ({b1:.6})*t + ({c1:.6})*t^2");
    let gy = format!("({a2:.6}) + ({b2:.6})*t + ({c2:.6})*t^2");
    let dx = format!("(({b1:.6}) + 2*({c1:.6})*t)");
    let dy = format!("(({b2:.6}) + 2*({c2:.6})*t)");
    let p = format!("(1+({gx})^2+({gy})^2)^2/4");
    CurveFile {
        gamma: vec![gx.clone(), gy.clone()],
        alpha: vec![format!("{dy}/({p})"), format!("-{dx}/({p})")],
    }
}

/// Largest component of a seeded covector in `[−1, 1]ⁿ`.
pub fn random_covector(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}
