use poisson_compat::error::Error;
use poisson_compat::scenes::{self, build};
use poisson_compat::{Geometry, Point, VectorField};

fn rotation(g: &Geometry) -> VectorField {
    VectorField::parse(&["-y", "x"], g.chart()).unwrap()
}

#[test]
fn rotation_on_the_plane_gives_the_unit_bivector() {
    let g = build(&scenes::flat(2, &[])).unwrap();
    let pi = g.pi_from_killing(&rotation(&g)).unwrap();
    let induced = g.with_bivector(pi).unwrap();
    for p in g.sample_points() {
        let m = induced.pi_at::<f64>(&p.coords).unwrap();
        assert!((m[(0, 1)] - 1.0).abs() < 1e-12);
        assert!((m[(1, 0)] + 1.0).abs() < 1e-12);
    }
}

#[test]
fn zero_field_gives_zero_bivector() {
    let g = build(&scenes::s2_kahler()).unwrap();
    let u = VectorField::parse(&["0", "0"], g.chart()).unwrap();
    let induced = g.with_bivector(g.pi_from_killing(&u).unwrap()).unwrap();
    for p in g.sample_points() {
        assert_eq!(induced.pi_at::<f64>(&p.coords).unwrap().max_abs(), 0.0);
    }
    let report = g.prop41_check(&u, 1e-8).unwrap();
    assert!(report.passed(), "{report:?}");
}

#[test]
fn dilation_is_not_killing() {
    let g = build(&scenes::flat(2, &[])).unwrap();
    let u = VectorField::parse(&["x", "y"], g.chart()).unwrap();
    let r = g.killing_residual(&u, 1e-8);
    assert!((r.residual("killing") - 2.0).abs() < 1e-12);
    match g.prop41_check(&u, 1e-8) {
        Err(Error::NotKilling { residual, .. }) => assert!((residual - 2.0).abs() < 1e-12),
        other => panic!("expected NotKilling, got {other:?}"),
    }
}

#[test]
fn sphere_rotation_bivector_in_closed_form() {
    let g = build(&scenes::s2_kahler()).unwrap();
    let induced = g
        .with_bivector(g.pi_from_killing(&rotation(&g)).unwrap())
        .unwrap();
    for p in g.sample_points() {
        let r2 = p.coords[0].powi(2) + p.coords[1].powi(2);
        let want = (1.0 - r2) * (1.0 + r2) / 4.0;
        let got = induced.pi_at::<f64>(&p.coords).unwrap()[(0, 1)];
        assert!((got - want).abs() < 1e-10, "{got} vs {want}");
    }
}

#[test]
fn sphere_rotation_identity_and_verdicts() {
    let g = build(&scenes::s2_kahler()).unwrap();
    let report = g.prop41_check(&rotation(&g), 1e-5).unwrap();
    assert!(report.residual("killing_identity") < 1e-5);
    assert!(report.check("agrees_nabla").unwrap().passed);
    assert!(report.check("agrees_d").unwrap().passed);
}

#[test]
fn induced_jtilde_matches_the_covariant_derivative() {
    let g = build(&scenes::s2_kahler()).unwrap();
    let u = rotation(&g);
    let induced = g.with_bivector(g.pi_from_killing(&u).unwrap()).unwrap();
    for p in g.sample_points() {
        let a = g.jtilde_from_killing(&u, &p).unwrap();
        let b = induced.jtilde_matrix_at::<f64>(&p.coords).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((a[(i, j)] - b[(i, j)]).abs() < 1e-8);
            }
        }
    }
}

#[test]
fn killing_identity_on_a_product() {
    let g = build(&scenes::s2_times_line()).unwrap();
    let u = VectorField::parse(&["-y", "x", "1"], g.chart()).unwrap();
    assert!(g.killing_residual(&u, 1e-8).passed());
    let x = Point::new(vec![0.2, -0.4, 0.1]);
    assert!(g.killing_identity_at(&u, &x.coords).unwrap() < 1e-6);
}
