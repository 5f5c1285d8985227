use proptest::prelude::*;
use realcert::poly::{jacobian, minors, Monomial, PolyMatrix, Polynomial, PolynomialSystem};

const N: usize = 3;

fn poly() -> impl Strategy<Value = Polynomial> {
    prop::collection::vec((prop::collection::vec(0u32..4, N), -3.0f64..3.0), 0..8)
        .prop_map(|terms| Polynomial::from_terms(N, terms.into_iter().map(|(e, c)| (Monomial::new(e), c))))
}

fn point() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.5f64..1.5, N)
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn product_evaluates_to_product(p in poly(), q in poly(), x in point()) {
        let pq = &p * &q;
        let lhs = pq.evaluate(&x).unwrap();
        let rhs = p.evaluate(&x).unwrap() * q.evaluate(&x).unwrap();
        prop_assert!(close(lhs, rhs, 1e-10), "{lhs} vs {rhs}");
    }

    #[test]
    fn sum_and_difference_evaluate(p in poly(), q in poly(), x in point()) {
        let (pv, qv) = (p.evaluate(&x).unwrap(), q.evaluate(&x).unwrap());
        prop_assert!(close((&p + &q).evaluate(&x).unwrap(), pv + qv, 1e-10));
        prop_assert!(close((&p - &q).evaluate(&x).unwrap(), pv - qv, 1e-10));
    }

    #[test]
    fn power_matches_repeated_product(p in poly(), e in 0u32..4, x in point()) {
        let mut r = Polynomial::constant(N, 1.0);
        for _ in 0..e {
            r = &r * &p;
        }
        let pe = p.pow(e);
        prop_assert!(close(pe.evaluate(&x).unwrap(), r.evaluate(&x).unwrap(), 1e-10));
        prop_assert!(close(pe.evaluate(&x).unwrap(), p.evaluate(&x).unwrap().powi(e as i32), 1e-10));
    }

    #[test]
    fn gradient_matches_finite_differences(p in poly(), x in point()) {
        let h = 1e-6;
        for (i, g) in p.gradient().iter().enumerate() {
            let (mut a, mut b) = (x.clone(), x.clone());
            a[i] += h;
            b[i] -= h;
            let fd = (p.evaluate(&a).unwrap() - p.evaluate(&b).unwrap()) / (2.0 * h);
            let exact = g.evaluate(&x).unwrap();
            prop_assert!((fd - exact).abs() <= 1e-6 * (1.0 + exact.abs()), "d/dx{i}: {fd} vs {exact}");
        }
    }

    #[test]
    fn product_rule(p in poly(), q in poly(), x in point()) {
        let lhs = (&p * &q).derivative(0);
        let rhs = &(&p.derivative(0) * &q) + &(&p * &q.derivative(0));
        prop_assert!(close(lhs.evaluate(&x).unwrap(), rhs.evaluate(&x).unwrap(), 1e-10));
    }

    #[test]
    fn minors_of_transpose_agree(a in poly(), b in poly(), c in poly(), x in point()) {
        let sys = PolynomialSystem::with_default_names(N, vec![a, b, c]).unwrap();
        let j: PolyMatrix = jacobian(&sys);
        for l in 0..N {
            let m = minors(&j, l).unwrap();
            let mt = minors(&j.transpose(), l).unwrap();
            prop_assert_eq!(m.len(), mt.len());
            // minor (R, C) of J is minor (C, R) of J^T
            let k = m.len();
            let side = (k as f64).sqrt().round() as usize;
            for r in 0..side {
                for s in 0..side {
                    let u = m[r * side + s].evaluate(&x).unwrap();
                    let v = mt[s * side + r].evaluate(&x).unwrap();
                    prop_assert!(close(u, v, 1e-10), "{u} vs {v}");
                }
            }
        }
    }
}
