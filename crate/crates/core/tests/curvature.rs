use poisson_compat::curvature::{KAHLER_LEAVES, NOT_COMPATIBLE};
use poisson_compat::scenes::{self, build};
use poisson_compat::{Basis, Geometry, Point, VectorField};
use proptest::prelude::*;

fn unit(i: usize) -> Vec<f64> {
    (0..2).map(|k| if k == i { 1.0 } else { 0.0 }).collect()
}

fn sphere() -> Geometry {
    build(&scenes::s2_kahler()).unwrap()
}

#[test]
fn sphere_sectional_curvature_is_one() {
    let g = sphere();
    for p in g.sample_points() {
        let k = g.sectional_curvature(&[1.0, 0.0], &[0.3, 1.0], &p).unwrap();
        assert!((k - 1.0).abs() < 1e-6);
    }
}

#[test]
fn sphere_ricci_pi_is_the_cometric() {
    let g = sphere();
    for p in g.sample_points() {
        for i in 0..2 {
            for j in 0..2 {
                let (a, b) = (unit(i), unit(j));
                let r = g.ricci_pi(&a, &b, &p).unwrap();
                let c = g.cometric(&a, &b, &p).unwrap();
                assert!((r - c).abs() < 1e-5 * c.abs().max(1.0));
            }
        }
    }
}

#[test]
fn sphere_ricci_pi_is_j_invariant() {
    let g = sphere();
    let a = [0.7, -0.2];
    let b = [0.1, 0.9];
    for p in g.sample_points() {
        let ja = g.j_map(&a, &p).unwrap();
        let jb = g.j_map(&b, &p).unwrap();
        let v = g.ricci_pi(&a, &jb, &p).unwrap() + g.ricci_pi(&ja, &b, &p).unwrap();
        assert!(v.abs() < 1e-6);
    }
}

#[test]
fn sphere_reports() {
    let g = sphere();
    let c = g.curvature_report(1e-5);
    assert!(c.passed(), "{:?}", c.checks);
    assert!(c.check("leaf_curvature").is_some() && c.check("leaf_levi_civita").is_some());
    assert!(g.check_pi_r_cocycle(1e-5).passed());
    let k = g.kahler_diagnostic(1e-7);
    assert!(k.has_flag(KAHLER_LEAVES) && k.residual("j_cubed") < 1e-8);
    let e = g.einstein_leaf_check(1e-5);
    assert!(e.passed());
    for l in g.einstein_lambdas().unwrap() {
        assert!((l - 1.0).abs() < 1e-5);
    }
}

#[test]
fn scaled_sphere_has_einstein_constant_c_squared() {
    for c in [0.5, 2.0, -3.0] {
        let g = build(&scenes::s2_scaled(c)).unwrap();
        for l in g.einstein_lambdas().unwrap() {
            assert!((l - c * c).abs() < 1e-5 * c * c, "c = {c}: λ = {l}");
        }
        assert!(g.curvature_report(1e-5).passed());
    }
}

#[test]
fn product_scene() {
    let g = build(&scenes::s2_times_line()).unwrap();
    let e = g.einstein_leaf_check(1e-6);
    assert!(e.passed(), "{:?}", e.checks);
    for l in g.einstein_lambdas().unwrap() {
        assert!((l - 1.0).abs() < 1e-5);
    }
    assert!(g.kahler_diagnostic(1e-7).has_flag(KAHLER_LEAVES));
    assert!(g.check_pi_r_cocycle(1e-5).passed());
}

#[test]
fn trivial_scenes() {
    let flat = build(&scenes::flat(2, &[(0, 1, "1")])).unwrap();
    let p = Point::new(vec![0.2, 0.1]);
    let e = [Basis::new(2, 0), Basis::new(2, 1)];
    assert_eq!(flat.r_pi(&e[0], &e[1], &e[0], &p).unwrap(), vec![0.0, 0.0]);
    assert_eq!(flat.pi_r(&[1.0, 0.0], &[0.0, 1.0], &p).unwrap(), 0.0);
    assert_eq!(flat.einstein_lambdas().unwrap(), vec![0.0; 32]);
    let zero = build(&scenes::flat(2, &[])).unwrap();
    assert!(zero.kahler_diagnostic(1e-8).has_flag(KAHLER_LEAVES));
    assert!(zero.check_pi_r_cocycle(1e-12).passed());
    let two = build(&scenes::flat(2, &[(0, 1, "2")])).unwrap();
    let k = two.kahler_diagnostic(1e-8);
    assert!((k.residual("j_cubed") - 6.0).abs() < 1e-12);
    assert!(!k.has_flag(KAHLER_LEAVES));
    let bent = build(&scenes::nonparallel_flat()).unwrap();
    assert!(bent.check_pi_r_cocycle(1e-5).has_flag(NOT_COMPATIBLE));
}

#[test]
fn flat_leaf_connection_is_the_directional_derivative() {
    let g = build(&scenes::flat(2, &[(0, 1, "3")])).unwrap();
    let c = g.chart();
    let x = VectorField::parse(&["1", "y"], c).unwrap();
    let y = VectorField::parse(&["x*y", "x^2"], c).unwrap();
    let p = Point::new(vec![0.3, 0.7]);
    let v = g.leaf_connection(&x, &y, &p).unwrap();
    // X^i ∂_i (xy, x²) = (y + xy, 2x)
    let want = [0.7 + 0.3 * 0.7, 0.6];
    assert!((v[0] - want[0]).abs() < 1e-12 && (v[1] - want[1]).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn leaf_equations_hold_on_invertible_planes(seed in 0u64..1000) {
        let g = build(&scenes::random_invertible_plane(seed)).unwrap();
        let r = g.curvature_report(1e-5);
        for name in ["r_pi_antisymmetry", "leaf_curvature", "leaf_ricci", "leaf_levi_civita"] {
            prop_assert!(r.check(name).unwrap().passed, "{name}: {:?}", r.check(name));
        }
    }

    #[test]
    fn r_pi_antisymmetric_on_random_scenes(seed in 0u64..1000) {
        let g = build(&scenes::random_polynomial(3, seed)).unwrap();
        prop_assert!(g.curvature_report(1e-7).check("r_pi_antisymmetry").unwrap().passed);
    }
}
