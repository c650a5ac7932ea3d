use poisson_compat::error::Error;
use poisson_compat::lie::{self, int, rational, AlgebraFile, Condition, Rational, SearchSpec};
use poisson_compat::scenes::{self, build};
use poisson_compat::{Classification, InvariantForm, LieAlgebra, VectorField};
use proptest::prelude::*;

fn vector(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|x| int(*x)).collect()
}

fn zero() -> Rational {
    int(0)
}

#[test]
fn catalog_is_quadratic() {
    for entry in lie::catalog() {
        let name = entry.algebra.name().to_string();
        assert_eq!(entry.algebra.jacobi_residual(), zero(), "{name}");
        assert_eq!(
            entry.form.ad_invariance_residual(&entry.algebra),
            zero(),
            "{name}"
        );
    }
}

#[test]
fn medina_grid_satisfies_fifteen() {
    let alg = lie::medina_r5();
    let rows = alg.search_vectors(Condition::Fifteen, &SearchSpec::default(), usize::MAX);
    assert_eq!(rows.len(), 3125);
    assert!(rows.iter().all(|(_, r)| *r == zero()));
}

#[test]
fn medina_random_rationals_satisfy_fifteen() {
    let alg = lie::medina_r5();
    let spec = SearchSpec {
        cap: 0,
        samples: 1000,
        ..SearchSpec::default()
    };
    let rows = alg.search_vectors(Condition::Fifteen, &spec, 1000);
    assert_eq!(rows.len(), 1000);
    assert!(rows.iter().any(|(u, _)| u.iter().any(|x| !x.is_integer())));
    assert!(rows.iter().all(|(_, r)| *r == zero()));
}

#[test]
fn medina_perturbation_breaks_jacobi() {
    let base = lie::medina_r5();
    let d = base.dim();
    let mut c: Vec<Rational> = (0..d * d * d)
        .map(|n| base.constant(n / (d * d), (n / d) % d, n % d).clone())
        .collect();
    // [e1, e2] = e3 + e1
    c[d] += int(1);
    c[d * d] -= int(1);
    let bent = LieAlgebra::from_constants("bent", d, c).unwrap();
    assert_ne!(bent.jacobi_residual(), zero());
    let geo = bent.biinvariant_geometry(&lie::medina_r5_form(), &vector(&[1, 0, 0, 0, 0]));
    assert!(matches!(geo, Err(Error::InvalidAlgebra(_))));
}

#[test]
fn sl2_negative_control() {
    let alg = lie::sl2();
    let e = vector(&[1, 0, 0]);
    assert_eq!(alg.cond14_residual(&e), int(4));
    assert_eq!(alg.cond15_residual(&e), int(4));
    // [e, [f, e]] = [h, e] = 2e, then [2e, h] = −4e; [[e, f], [e, h]] = [h, −2e] = −4e
    let (f, h) = (vector(&[0, 1, 0]), vector(&[0, 0, 1]));
    let inner = alg.bracket(&e, &alg.bracket(&f, &e));
    assert_eq!(inner, vector(&[2, 0, 0]));
    assert_eq!(alg.bracket(&inner, &h), vector(&[-4, 0, 0]));
    assert_eq!(alg.classify(&e), Classification::Neither);
    let geo = alg.biinvariant_geometry(&lie::sl2_killing(), &e).unwrap();
    assert!(!geo.nabla_compatible && !geo.d_compatible);
    assert_eq!(geo.skewness, "0");
}

#[test]
fn sl2_killing_form_matches_the_trace_form() {
    let alg = lie::sl2();
    let b = lie::sl2_killing();
    for i in 0..3 {
        for j in 0..3 {
            let ai = alg.ad_columns(&unit(3, i));
            let aj = alg.ad_columns(&unit(3, j));
            // tr(ad_i ad_j) = Σ_x (ad_i ad_j e_x)_x
            let mut tr = zero();
            for x in 0..3 {
                for m in 0..3 {
                    tr += ai[m][x].clone() * aj[x][m].clone();
                }
            }
            assert_eq!(&tr, b.entry(i, j));
        }
    }
}

fn unit(d: usize, i: usize) -> Vec<Rational> {
    (0..d).map(|k| int(i64::from(k == i))).collect()
}

#[test]
fn brackets_reject_conflicts_and_diagonals() {
    let conflict = LieAlgebra::from_brackets(
        "x",
        2,
        &[((0, 1), vec![(0, int(1))]), ((1, 0), vec![(0, int(1))])],
    );
    assert!(conflict.is_err());
    let diagonal = LieAlgebra::from_brackets("x", 2, &[((1, 1), vec![(0, int(1))])]);
    assert!(diagonal.is_err());
}

#[test]
fn degenerate_and_asymmetric_forms_are_rejected() {
    assert!(InvariantForm::new(2, vector(&[1, 1, 1, 1])).is_err());
    assert!(InvariantForm::new(2, vector(&[1, 2, 0, 1])).is_err());
    let heis = lie::heisenberg();
    let id = InvariantForm::identity(3);
    assert_ne!(id.ad_invariance_residual(&heis), zero());
    assert!(matches!(
        heis.biinvariant_geometry(&id, &vector(&[1, 0, 0])),
        Err(Error::NotInvariant(_))
    ));
}

#[test]
fn searches_are_deterministic() {
    let alg = lie::oscillator_2();
    let spec = SearchSpec {
        cap: 0,
        samples: 500,
        ..SearchSpec::default()
    };
    let a = alg.search(&spec).unwrap();
    let b = alg.search(&spec).unwrap();
    assert_eq!(a, b);
    assert!(!a.exhaustive);
    assert_eq!(a.vectors, 500);
    let grid = lie::sl2()
        .search(&SearchSpec::parse_grid("-1..1:1/2").unwrap())
        .unwrap();
    assert!(grid.exhaustive);
    assert_eq!(grid.vectors, 125);
    assert_eq!(grid.counts.values().sum::<usize>(), 125);
}

#[test]
fn search_agrees_with_exact_residuals() {
    for entry in lie::catalog().into_iter().filter(|e| e.algebra.dim() <= 5) {
        let alg = &entry.algebra;
        let spec = SearchSpec::parse_grid("-1..1").unwrap();
        let c14 = alg.search_vectors(Condition::Fourteen, &spec, usize::MAX);
        let c15 = alg.search_vectors(Condition::Fifteen, &spec, usize::MAX);
        let outcome = alg.search(&spec).unwrap();
        let mut both = 0;
        for ((u, r14), (_, r15)) in c14.iter().zip(&c15) {
            let class = Classification::from_flags(*r14 == zero(), *r15 == zero());
            assert_eq!(alg.classify(u), class);
            both += usize::from(class == Classification::Both);
        }
        assert_eq!(outcome.count(Classification::Both), both, "{}", alg.name());
    }
}

#[test]
fn grid_parsing() {
    let s = SearchSpec::parse_grid("-1/2..3:1/4").unwrap();
    assert_eq!(s.lo, rational("-1/2").unwrap());
    assert_eq!(s.step, rational("1/4").unwrap());
    assert!(SearchSpec::parse_grid("2..1").is_err());
    assert!(SearchSpec::parse_grid("0..1:0").is_err());
    assert!(SearchSpec::parse_grid("0,1").is_err());
}

#[test]
fn algebra_files_round_trip() {
    for entry in lie::catalog() {
        let file =
            AlgebraFile::from_algebra(&entry.algebra, Some(&entry.form), Some(entry.description));
        let back = AlgebraFile::from_json(&file.to_json()).unwrap();
        assert_eq!(back.algebra().unwrap(), entry.algebra);
        assert_eq!(back.form().unwrap().unwrap(), entry.form);
    }
}

#[test]
fn abelian_algebra_matches_a_flat_chart() {
    let alg = LieAlgebra::<Rational>::abelian("R3", 3);
    let u = vector(&[1, 2, -1]);
    let geo = alg
        .biinvariant_geometry(&InvariantForm::identity(3), &u)
        .unwrap();
    assert!(geo.jtilde.iter().flatten().all(|v| v == "0"));
    assert!(geo.nabla_compatible && geo.d_compatible);

    let g = build(&scenes::flat(3, &[])).unwrap();
    let field = VectorField::parse(&["1", "2", "-1"], g.chart()).unwrap();
    let induced = g.with_bivector(g.pi_from_killing(&field).unwrap()).unwrap();
    for p in g.sample_points() {
        assert_eq!(induced.pi_at::<f64>(&p.coords).unwrap().max_abs(), 0.0);
    }
    assert!(induced.compat_residuals(1e-12).passed());
}

fn small_vector(d: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec((-4i64..=4, 1i64..=4), d)
        .prop_map(|v| v.into_iter().map(|(p, q)| int(p) / int(q)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn residuals_scale_quadratically(u in small_vector(5), p in -5i64..=5, q in 1i64..=5) {
        let alg = lie::medina_r5().direct_sum(&LieAlgebra::abelian("R", 1));
        let mut u = u;
        u.push(int(1));
        let l = int(p) / int(q);
        let lu: Vec<Rational> = u.iter().map(|x| x.clone() * l.clone()).collect();
        let l2 = l.clone() * l;
        prop_assert_eq!(alg.cond14_residual(&lu), alg.cond14_residual(&u) * l2.clone());
        prop_assert_eq!(alg.cond15_residual(&lu), alg.cond15_residual(&u) * l2);
    }

    #[test]
    fn sl2_residuals_scale_quadratically(u in small_vector(3), p in -5i64..=5, q in 1i64..=5) {
        let alg = lie::sl2();
        let l = int(p) / int(q);
        let lu: Vec<Rational> = u.iter().map(|x| x.clone() * l.clone()).collect();
        let l2 = l.clone() * l;
        prop_assert_eq!(alg.cond14_residual(&lu), alg.cond14_residual(&u) * l2.clone());
        prop_assert_eq!(alg.cond15_residual(&lu), alg.cond15_residual(&u) * l2);
    }

    #[test]
    fn bracket_is_bilinear_and_antisymmetric(
        x in small_vector(6), y in small_vector(6), z in small_vector(6), p in -3i64..=3,
    ) {
        let alg = lie::oscillator_2();
        let a = int(p);
        let xa: Vec<Rational> = x.iter().zip(&z).map(|(s, t)| s.clone() + a.clone() * t.clone()).collect();
        let lhs = alg.bracket(&xa, &y);
        let (bx, bz) = (alg.bracket(&x, &y), alg.bracket(&z, &y));
        let rhs: Vec<Rational> = bx.iter().zip(&bz).map(|(s, t)| s.clone() + a.clone() * t.clone()).collect();
        prop_assert_eq!(lhs, rhs);
        let yx: Vec<Rational> = alg.bracket(&y, &x).into_iter().map(|v| -v).collect();
        prop_assert_eq!(alg.bracket(&x, &y), yx);
    }

    #[test]
    fn forms_are_invariant_on_random_vectors(x in small_vector(5), y in small_vector(5), z in small_vector(5)) {
        let alg = lie::medina_r5();
        let b = lie::medina_r5_form();
        // B([x, y], z) = B(x, [y, z])
        prop_assert_eq!(b.apply(&alg.bracket(&x, &y), &z), b.apply(&x, &alg.bracket(&y, &z)));
    }

    #[test]
    fn quadratic_algebras_never_separate(u in small_vector(4)) {
        for alg in [lie::oscillator(), lie::filiform4().cotangent_extension().map(Clone::clone)] {
            let u: Vec<Rational> = u.iter().cycle().take(alg.dim()).cloned().collect();
            prop_assert!(!alg.classify(&u).separates());
        }
    }
}
