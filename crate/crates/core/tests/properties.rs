use proptest::prelude::*;

use weylforge_core::bridge::{assertion_check, UnivariatePdeRhs};
use weylforge_core::coframe::{gtilde, gtilde_from_coframe, lift_matrix, BundlePoint};
use weylforge_core::invariants::{monge, scaled_invariants, PdeRhs};
use weylforge_core::jet::variables;
use weylforge_core::weyl::{bianchi_check, ew_residual, gauge_transform_factor, maxwell_form};
use weylforge_core::{Expression, Jet, JetSpace, ScalarField, WeylPair, Q};

fn q(n: i64) -> Q {
    Q::from(n)
}

/// Polynomial text in `vars` with the given small integer coefficients,
/// one per monomial of degree ≤ 2, plus a few cubic terms.
fn poly_text(vars: &[&str], coeffs: &[i64]) -> String {
    let mut monos: Vec<String> = vec!["1".into()];
    for (i, a) in vars.iter().enumerate() {
        monos.push((*a).into());
        for b in &vars[i..] {
            monos.push(format!("{a}*{b}"));
        }
        monos.push(format!("{a}^3"));
    }
    let mut out = String::from("0");
    for (c, m) in coeffs.iter().zip(monos) {
        if *c != 0 {
            out.push_str(&format!(" + ({c})*{m}"));
        }
    }
    out
}

fn coeffs(n: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-3i64..=3, n)
}

fn small_q() -> impl Strategy<Value = Q> {
    (-9i64..=9, 1i64..=5).prop_map(|(n, d)| Q::new(n, d))
}

fn field3(text: &str) -> ScalarField<Q> {
    ScalarField::from_expression(Expression::parse(text, &["x", "y", "z"]).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn leibniz_rule(a in coeffs(13), b in coeffs(13), pt in prop::array::uniform3(small_q())) {
        let space = JetSpace::new(3, 4);
        let c = variables(&space, &pt).unwrap();
        let f = Expression::parse(&poly_text(&["x", "y", "z"], &a), &["x", "y", "z"]).unwrap().eval_jet(&c).unwrap();
        let g = Expression::parse(&poly_text(&["x", "y", "z"], &b), &["x", "y", "z"]).unwrap().eval_jet(&c).unwrap();
        for v in 0..3 {
            let lhs = (&f * &g).d(v).unwrap();
            let rhs = &f.d(v).unwrap() * &g + &f * &g.d(v).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn truncation_commutes_with_products(a in coeffs(13), b in coeffs(13), k in 0usize..4) {
        let space = JetSpace::new(3, 4);
        let c = variables(&space, &[q(1), q(-2), Q::new(1, 3)]).unwrap();
        let e = |cs: &[i64]| Expression::parse(&poly_text(&["x", "y", "z"], cs), &["x", "y", "z"]).unwrap().eval_jet(&c).unwrap();
        let (f, g) = (e(&a), e(&b));
        prop_assert_eq!((&f * &g).truncate(k), &f.truncate(k) * &g.truncate(k));
    }

    #[test]
    fn finite_difference_agreement(x0 in -1.0f64..1.0, y0 in -1.0f64..1.0) {
        let e = Expression::parse("sin(x*y) + exp(x - y^2) / (2 + x^2)", &["x", "y"]).unwrap();
        let space = JetSpace::new(2, 2);
        let j = e.eval_jet(&variables(&space, &[x0, y0]).unwrap()).unwrap();
        let h = 1e-5;
        let f = |x: f64, y: f64| e.eval(&[x, y]).unwrap();
        let fx = (f(x0 + h, y0) - f(x0 - h, y0)) / (2.0 * h);
        let fy = (f(x0, y0 + h) - f(x0, y0 - h)) / (2.0 * h);
        let fxy = (f(x0 + h, y0 + h) - f(x0 + h, y0 - h) - f(x0 - h, y0 + h) + f(x0 - h, y0 - h)) / (4.0 * h * h);
        prop_assert!((j.d(0).unwrap().value() - fx).abs() < 1e-6);
        prop_assert!((j.d(1).unwrap().value() - fy).abs() < 1e-6);
        prop_assert!((j.d(0).unwrap().d(1).unwrap().value() - fxy).abs() < 1e-4);
    }

    #[test]
    fn parser_round_trip(a in coeffs(13), pt in prop::array::uniform3(small_q())) {
        let vars = ["x", "y", "z"];
        let e = Expression::parse(&poly_text(&vars, &a), &vars).unwrap();
        let again = Expression::parse(&e.to_string(), &vars).unwrap();
        prop_assert_eq!(e.eval::<Q>(&pt).unwrap(), again.eval::<Q>(&pt).unwrap());
        prop_assert_eq!(again.to_string(), Expression::parse(&again.to_string(), &vars).unwrap().to_string());
    }

    #[test]
    fn monge_ignores_affine_terms_in_p(a in coeffs(13), b in coeffs(13), pt in prop::array::uniform4(small_q())) {
        let base = "p^4/3 + z*p^3 - x*p^2";
        let f = PdeRhs::<Q>::parse(base).unwrap();
        let shifted = format!("{base} + {} + ({})*p", poly_text(&["x", "y", "z"], &a), poly_text(&["x", "y", "z"], &b));
        let g = PdeRhs::<Q>::parse(&shifted).unwrap();
        prop_assert_eq!(monge(&f, &pt).unwrap().value, monge(&g, &pt).unwrap().value);
    }

    #[test]
    fn scaled_invariants_vanish_together(m in small_q(), k in small_q(), fpp in small_q(), u3 in small_q(), u5 in small_q()) {
        match scaled_invariants(&m, &k, &fpp, &u3, &u5) {
            Ok((a1, c1)) => {
                prop_assert_eq!(a1 == q(0), m == q(0));
                prop_assert_eq!(c1 == q(0), k == q(0));
            }
            Err(_) => prop_assert!(fpp == q(0) || u3 == q(0) || u5 == q(0)),
        }
    }

    #[test]
    fn bianchi_for_random_pairs(g in coeffs(13), a in coeffs(13), pt in prop::array::uniform3(small_q())) {
        let vars = ["x", "y", "z"];
        // diagonal-dominant Lorentzian metric with polynomial perturbation
        let pert = poly_text(&vars, &g);
        let pair = WeylPair::from_components(
            "random",
            [
                field3(&format!("3 + ({pert})^2")),
                field3("x*z/7"),
                field3(&format!("({pert})/11")),
                field3("2 + y^2"),
                field3("1/5"),
                field3("-1 - x^2"),
            ],
            [field3(&poly_text(&vars, &a)), field3("x*y"), field3(&format!("z - ({pert})"))],
        );
        if let Ok(r) = bianchi_check(&pair, &pt) {
            prop_assert_eq!(r, q(0));
        }
    }

    #[test]
    fn gauge_preserves_einstein_weyl(phi in coeffs(13), pt in prop::array::uniform3(small_q())) {
        let flat = WeylPair::from_components(
            "flat",
            [field3("1"), field3("0"), field3("0"), field3("1"), field3("0"), field3("-1")],
            [field3("0"), field3("0"), field3("0")],
        );
        let psi = format!("1 + ({})^2", poly_text(&["x", "y", "z"], &phi));
        let gauged = gauge_transform_factor(&flat, field3(&psi));
        prop_assert_eq!(ew_residual(&gauged, &pt).unwrap().max_abs, q(0));
        let f = maxwell_form(&gauged, &pt).unwrap();
        prop_assert!(f.iter().flatten().all(|v| *v == q(0)));
    }

    #[test]
    fn gtilde_routes_and_scaling(c in coeffs(13), u in prop::array::uniform3(small_q()), base in prop::array::uniform4(small_q())) {
        prop_assume!(u[0] != q(0) && u[1] != q(0));
        let text = format!("p^3/3 + p^2 + ({})*p", poly_text(&["x", "y", "z"], &c));
        let f = PdeRhs::<Q>::parse(&text).unwrap();
        let [x, y, z, p] = base;
        let pt = BundlePoint::new([x, y, z, p, u[0].clone(), u[1].clone(), u[2].clone()]).unwrap();
        let Ok(explicit) = gtilde(&f, &pt) else { return Ok(()); };
        prop_assert_eq!(&explicit, &gtilde_from_coframe(&f, &pt).unwrap());
        let h = lift_matrix(&pt).unwrap();
        let det = h[0][0].clone() * h[1][1].clone() * h[2][2].clone() * h[3][3].clone();
        prop_assert_eq!(det, u[0].clone() * u[1].clone() * u[1].clone() * u[1].clone());
    }

    #[test]
    fn bridge_assertion_on_polynomials(c in prop::collection::vec(-4i64..=4, 5), t in small_q(), w in prop::array::uniform3(small_q())) {
        let text = format!("p^2 + ({})*p^3 + ({})*p^4 + ({})*p^5 + ({})*p^6 + ({})*p", c[0], c[1], c[2], c[3], c[4]);
        let f = UnivariatePdeRhs::parse(&text).unwrap();
        let r = assertion_check(&f, &[[t, w[0].clone(), w[1].clone(), w[2].clone()]], 0.0);
        prop_assert!(r.samples.is_empty() || r.passed);
    }
}

#[test]
fn jet_ring_is_exact() {
    let space = JetSpace::new(2, 3);
    let c = variables(&space, &[q(2), Q::new(-1, 3)]).unwrap();
    let a = &c[0] * &c[1] + c[0].add_scalar(&q(1));
    let b: Jet<Q> = &c[1] * &c[1] - c[0].scale(&q(3));
    assert_eq!(&a * &b, &b * &a);
    assert_eq!(&(&a * &b) * &a, &a * &(&b * &a));
    assert_eq!(&a * &(&b + &a), &(&a * &b) + &(&a * &a));
}
