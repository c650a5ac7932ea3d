use poisson_compat::curvature::KoszulField;
use poisson_compat::field::{partial, ScalarField};
use poisson_compat::scenes::{self, build};
use poisson_compat::{Basis, CovectorField, DiffStrategy, Geometry, Point};
use proptest::prelude::*;

fn flat3(upper: &[(usize, usize, &str)]) -> Geometry {
    build(&scenes::flat(3, upper)).unwrap()
}

/// `[π, π]_S(dx^i, dx^j, dx^k) = −Σ_cyc π^{il} ∂_l π^{jk}`, by central
/// differences on the components.
fn schouten_oracle(g: &Geometry, i: usize, j: usize, k: usize, p: &Point) -> f64 {
    let n = g.dim();
    let pi = |a: usize, b: usize| -> ScalarField {
        g.bivector()
            .component(a, b)
            .clone()
            .with_strategy(DiffStrategy::CentralFd)
    };
    let term = |a: usize, b: usize, c: usize| -> f64 {
        (0..n)
            .map(|l| pi(a, l).value(p).unwrap() * partial(&pi(b, c), p, l).unwrap())
            .sum()
    };
    -(term(i, j, k) + term(j, k, i) + term(k, i, j))
}

#[test]
fn sharp_examples() {
    let g = build(&scenes::flat(2, &[(0, 1, "x")])).unwrap();
    assert_eq!(
        g.sharp_pi(&[0.0, 1.0], &Point::new(vec![2.0, 5.0]))
            .unwrap(),
        vec![-2.0, 0.0]
    );
    let c = build(&scenes::flat(2, &[(0, 1, "1")])).unwrap();
    assert_eq!(
        c.sharp_pi(&[1.0, 0.0], &Point::new(vec![0.1, 0.2]))
            .unwrap(),
        vec![0.0, 1.0]
    );
}

#[test]
fn lie_poisson_so3_is_poisson() {
    let g = flat3(&[(0, 1, "z"), (1, 2, "x"), (2, 0, "y")]);
    assert!(g.is_poisson(1e-12).passed());
}

#[test]
fn schouten_example_matches_oracle() {
    let g = flat3(&[(0, 1, "z"), (1, 2, "x")]);
    let p = Point::new(vec![1.0, 1.0, 1.0]);
    let lib = g
        .schouten_self(&Basis::new(3, 0), &Basis::new(3, 1), &Basis::new(3, 2), &p)
        .unwrap();
    assert!((lib - schouten_oracle(&g, 0, 1, 2, &p)).abs() < 1e-8);
    assert_eq!(
        g.is_poisson(1e-8).passed(),
        schouten_oracle(&g, 0, 1, 2, &p).abs() < 1e-8
    );
    // π^{12} = y z breaks the Jacobi identity.
    let h = flat3(&[(0, 1, "y*z"), (1, 2, "x")]);
    let lib = h
        .schouten_self(&Basis::new(3, 0), &Basis::new(3, 1), &Basis::new(3, 2), &p)
        .unwrap();
    let oracle = schouten_oracle(&h, 0, 1, 2, &p);
    assert!(oracle.abs() > 0.5);
    assert!((lib - oracle).abs() < 1e-8);
}

#[test]
fn every_plane_bivector_is_poisson() {
    for seed in 0..4 {
        let g = build(&scenes::random_polynomial(2, seed)).unwrap();
        assert_eq!(g.is_poisson(1e-12).residual("poisson_jacobi"), 0.0);
    }
}

fn coefficient() -> impl Strategy<Value = f64> {
    (-20i32..=20).prop_map(|c| c as f64 / 10.0)
}

fn covector_texts(n: usize) -> impl Strategy<Value = Vec<String>> {
    let names = ["x", "y", "z"];
    proptest::collection::vec((coefficient(), coefficient(), coefficient(), 0..n, 0..n), n)
        .prop_map(move |v| {
            v.into_iter()
                .map(|(a, b, c, i, j)| {
                    format!("{a} + {b}*{} + {c}*{}*{}", names[i], names[i], names[j])
                })
                .collect()
        })
}

fn field(texts: &[String], g: &Geometry) -> CovectorField {
    let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
    CovectorField::parse(&refs, g.chart()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn schouten_matches_oracle_on_random_scenes(seed in 0u64..1000) {
        let g = build(&scenes::random_polynomial(3, seed)).unwrap();
        for p in g.sample_points().iter().take(4) {
            let lib = g.schouten_self(&Basis::new(3, 0), &Basis::new(3, 1), &Basis::new(3, 2), p).unwrap();
            let oracle = schouten_oracle(&g, 0, 1, 2, p);
            prop_assert!((lib - oracle).abs() < 1e-8, "{lib} vs {oracle}");
        }
    }

    #[test]
    fn koszul_antisymmetric(seed in 0u64..1000, a in covector_texts(3), b in covector_texts(3)) {
        let g = build(&scenes::random_polynomial(3, seed)).unwrap();
        let (fa, fb) = (field(&a, &g), field(&b, &g));
        for p in g.sample_points().iter().take(4) {
            let ab = g.koszul_bracket(&fa, &fb, p).unwrap();
            let ba = g.koszul_bracket(&fb, &fa, p).unwrap();
            for k in 0..3 {
                prop_assert!((ab[k] + ba[k]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn koszul_leibniz_anchor(seed in 0u64..1000, a in covector_texts(2), b in covector_texts(2), f in covector_texts(1)) {
        let g = build(&scenes::random_polynomial(2, seed)).unwrap();
        let fs = f[0].replace('z', "y");
        let fb: Vec<String> = b.iter().map(|t| format!("({fs})*({t})")).collect();
        let (fa, fbeta, ffb) = (field(&a, &g), field(&b, &g), field(&fb, &g));
        let scalar = ScalarField::parse(&fs, g.chart()).unwrap().with_strategy(DiffStrategy::CentralFd);
        for p in g.sample_points().iter().take(4) {
            let lhs = g.koszul_bracket(&fa, &ffb, p).unwrap();
            let base = g.koszul_bracket(&fa, &fbeta, p).unwrap();
            let sharp = g.sharp_pi(&fa.at(p).unwrap(), p).unwrap();
            let df: f64 = (0..2).map(|i| sharp[i] * partial(&scalar, p, i).unwrap()).sum();
            let fv = scalar.value(p).unwrap();
            let beta = fbeta.at(p).unwrap();
            for k in 0..2 {
                let rhs = fv * base[k] + df * beta[k];
                prop_assert!((lhs[k] - rhs).abs() < 1e-8 * (1.0 + rhs.abs()), "{} vs {rhs}", lhs[k]);
            }
        }
    }

    #[test]
    fn koszul_jacobi_for_poisson_bivectors(a in covector_texts(3), b in covector_texts(3), c in covector_texts(3)) {
        let g = flat3(&[(0, 1, "z"), (1, 2, "x"), (2, 0, "y")]);
        prop_assert!(g.is_poisson(1e-10).passed());
        let (fa, fb, fc) = (field(&a, &g), field(&b, &g), field(&c, &g));
        let bc = KoszulField { geom: &g, alpha: &fb, beta: &fc };
        let ca = KoszulField { geom: &g, alpha: &fc, beta: &fa };
        let ab = KoszulField { geom: &g, alpha: &fa, beta: &fb };
        for p in g.sample_points().iter().take(3) {
            let x = g.koszul_bracket(&fa, &bc, p).unwrap();
            let y = g.koszul_bracket(&fb, &ca, p).unwrap();
            let z = g.koszul_bracket(&fc, &ab, p).unwrap();
            for k in 0..3 {
                prop_assert!((x[k] + y[k] + z[k]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn j_is_skew(seed in 0u64..1000) {
        let g = build(&scenes::random_polynomial(3, seed)).unwrap();
        let a = scenes::random_covector(3, seed);
        let b = scenes::random_covector(3, seed + 1);
        for p in g.sample_points().iter().take(4) {
            let ja = g.j_map(&a, p).unwrap();
            let jb = g.j_map(&b, p).unwrap();
            let v = g.cometric(&ja, &b, p).unwrap() + g.cometric(&a, &jb, p).unwrap();
            prop_assert!(v.abs() < 1e-10);
        }
    }
}
