use poisson_compat::field::{partial, second_partial};
use poisson_compat::{Chart, DiffStrategy, Point, ScalarField};
use proptest::prelude::*;

fn chart() -> Chart {
    Chart::cube(2, -1.0, 1.0).unwrap().with_sampling(100, 7)
}

fn at(x: f64, y: f64) -> Point {
    Point::new(vec![x, y])
}

#[test]
fn parse_examples() {
    let c = Chart::cube(2, -5.0, 5.0).unwrap();
    let f = ScalarField::parse("x^2 + y", &c).unwrap();
    assert_eq!(f.value(&at(2.0, 3.0)).unwrap(), 7.0);
    let g = ScalarField::parse("4/(1+x^2+y^2)^2", &c).unwrap();
    assert_eq!(g.value(&at(0.0, 0.0)).unwrap(), 4.0);
    let h = ScalarField::parse("sin(x)*cos(x)", &c).unwrap();
    assert_eq!(partial(&h, &at(0.0, 0.0), 0).unwrap(), 1.0);
}

#[test]
fn partial_examples() {
    let c = Chart::cube(2, -5.0, 5.0).unwrap();
    let f = ScalarField::parse("x*y", &c).unwrap();
    assert_eq!(partial(&f, &at(3.0, 5.0), 0).unwrap(), 5.0);
    assert_eq!(second_partial(&f, &at(0.3, -2.0), 0, 1).unwrap(), 1.0);
    let k = ScalarField::constant(7.0, &c);
    assert_eq!(partial(&k, &at(1.0, 1.0), 1).unwrap(), 0.0);
    let e = ScalarField::parse("exp(x)", &c).unwrap();
    let ad = partial(&e, &at(1.0, 0.0), 0).unwrap();
    let fd = partial(
        &e.clone().with_strategy(DiffStrategy::CentralFd),
        &at(1.0, 0.0),
        0,
    )
    .unwrap();
    assert!((ad - std::f64::consts::E).abs() < 1e-15);
    assert!((ad - fd).abs() < 1e-6);
    let q = ScalarField::parse("x^2*y", &c).unwrap();
    assert_eq!(second_partial(&q, &at(1.0, 2.0), 0, 0).unwrap(), 4.0);
    let lin = ScalarField::parse("3*x - 2*y + 1", &c).unwrap();
    assert_eq!(second_partial(&lin, &at(0.5, 0.5), 0, 1).unwrap(), 0.0);
}

fn leaf() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("x".to_string()),
        Just("y".to_string()),
        (-3i32..=3).prop_map(|c| format!("{c}")),
        (1u32..9).prop_map(|c| format!("0.{c}")),
    ]
}

/// Smooth expressions on `[−1, 1]²`; quotients and logs are kept away
/// from their singularities.
fn expression() -> impl Strategy<Value = String> {
    leaf().prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) + ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) - ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) * ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) / (2 + ({b})^2)")),
            (inner.clone(), 2u32..4).prop_map(|(a, n)| format!("({a})^{n}")),
            inner.clone().prop_map(|a| format!("sin({a})")),
            inner.clone().prop_map(|a| format!("cos({a})")),
            inner.clone().prop_map(|a| format!("exp(0.1*({a}))")),
            inner.prop_map(|a| format!("log(3 + sin({a}))")),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn clairaut_symmetry(text in expression()) {
        let c = chart();
        let f = ScalarField::parse(&text, &c).unwrap();
        for p in c.sample_points() {
            let a = second_partial(&f, &p, 0, 1).unwrap();
            let b = second_partial(&f, &p, 1, 0).unwrap();
            prop_assert!((a - b).abs() < 1e-6, "{text}: {a} vs {b}");
        }
    }

    #[test]
    fn strategies_agree(text in expression()) {
        let c = chart();
        let f = ScalarField::parse(&text, &c).unwrap();
        let fd = f.clone().with_strategy(DiffStrategy::CentralFd);
        for p in c.sample_points() {
            if f.value(&p).unwrap().abs() >= 1e3 {
                continue;
            }
            for i in 0..2 {
                let a = partial(&f, &p, i).unwrap();
                let b = partial(&fd, &p, i).unwrap();
                prop_assert!((a - b).abs() < 1e-6, "{text} ∂{i}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn pretty_print_reparses(text in expression()) {
        let c = chart();
        let f = ScalarField::parse(&text, &c).unwrap();
        let g = ScalarField::parse(&f.pretty().unwrap(), &c).unwrap();
        for p in c.sample_points() {
            prop_assert_eq!(f.value(&p).unwrap().to_bits(), g.value(&p).unwrap().to_bits());
            prop_assert_eq!(partial(&f, &p, 0).unwrap().to_bits(), partial(&g, &p, 0).unwrap().to_bits());
        }
    }
}
