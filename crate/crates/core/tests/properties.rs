use proptest::prelude::*;
use randers_core::catalog::{random_metric, Geometry, Rational, Surd, SurdField};
use randers_core::diffcore::{
    evaluate_jet, finite_difference_jet, jet_agreement, symmetry_residual, Backend, Scalar,
    SmoothMap,
};
use randers_core::error::EvalError;
use randers_core::finsler::{structure_defects, DirectionJet, FinslerMetric, SprayJet};
use randers_core::metricdsl::{parse, BinOp, Expr, Func, MetricSpec};
use randers_core::riemann::{divergence_residual, point_data, Ring};

fn random_spec(seed: u64, n: usize) -> MetricSpec {
    match random_metric(seed, n, 2).unwrap().geometry {
        Geometry::Coordinate(s) => s,
        Geometry::Frame(_) => unreachable!(),
    }
}

/// A seeded random metric with a point inside its domain and a direction.
fn metric_point_direction() -> impl Strategy<Value = (MetricSpec, Vec<f64>, Vec<f64>)> {
    (0u64..10_000, 2usize..=4).prop_flat_map(|(seed, n)| {
        (
            Just(random_spec(seed, n)),
            prop::collection::vec(-0.8f64..0.8, n),
            prop::collection::vec(-1.0f64..1.0, n)
                .prop_filter("nonzero", |y| y.iter().map(|v| v * v).sum::<f64>() > 1e-2),
        )
    })
}

/// Constants are non-negative, as the parser reads `-c` as a negation.
fn leaf(n: usize) -> impl Strategy<Value = Expr> {
    prop_oneof![
        (0.0f64..3.0).prop_map(|c| Expr::Const((c * 8.0).round() / 8.0)),
        (0..n).prop_map(Expr::Var),
    ]
}

/// Expression trees that are smooth on all of `ℝⁿ`.
fn smooth_expr(n: usize) -> impl Strategy<Value = Expr> {
    leaf(n).prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            (
                prop::sample::select(vec![Func::Sin, Func::Cos, Func::Atan]),
                inner.clone()
            )
                .prop_map(|(f, e)| Expr::Func(f, Box::new(e))),
            (
                prop::sample::select(vec![BinOp::Add, BinOp::Sub, BinOp::Mul]),
                inner.clone(),
                inner.clone()
            )
                .prop_map(|(op, l, r)| Expr::binary(op, l, r)),
            (inner, 0i32..4).prop_map(|(e, k)| Expr::Pow(Box::new(e), 2 * k)),
        ]
    })
}

struct Single(Expr, usize);

impl SmoothMap for Single {
    fn arity_in(&self) -> usize {
        self.1
    }

    fn arity_out(&self) -> usize {
        1
    }

    fn eval<T: Scalar>(&self, x: &[T]) -> Result<Vec<T>, EvalError> {
        Ok(vec![self.0.eval(x)?])
    }
}

fn surd(field: SurdField) -> impl Strategy<Value = Surd> {
    prop::array::uniform4(-6i64..6).prop_map(move |c| {
        let r = |v: i64| field.rational(Rational::from(v));
        r(c[0])
            + r(c[1]) * field.epsilon()
            + r(c[2]) * field.delta()
            + r(c[3]) * field.epsilon() * field.delta()
    })
}

fn field() -> impl Strategy<Value = SurdField> {
    (2i64..9, prop::bool::ANY).prop_map(|(k, s)| SurdField {
        k: Rational::from(k),
        delta_sign: if s { 1 } else { -1 },
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn homogeneity_and_structure_identities((spec, x, y) in metric_point_direction(), lambda in 0.25f64..4.0) {
        let m = FinslerMetric::randers(spec);
        for d in structure_defects(&m, &x, &y, lambda, Backend::Dual).unwrap() {
            let tol = match d.quantity {
                "g(y,y) - F^2" | "I y" | "J y" => 1e-10,
                _ => 1e-8,
            };
            prop_assert!(d.defect < tol, "{}: {:e}", d.quantity, d.defect);
        }
    }

    #[test]
    fn reversal_splits_f_into_alpha_and_beta((spec, x, y) in metric_point_direction()) {
        let (alpha, beta) = point_data(&spec, &x, Backend::Dual).unwrap();
        let m = FinslerMetric::randers(spec);
        let minus: Vec<f64> = y.iter().map(|v| -v).collect();
        let (fp, fm) = (m.eval(&x, &y).unwrap(), m.eval(&x, &minus).unwrap());
        let b: f64 = beta.b.iter().zip(&y).map(|(b, v)| b * v).sum();
        prop_assert!((fp + fm - 2.0 * alpha.norm(&y)).abs() < 1e-12 * (1.0 + fp));
        prop_assert!((fp - fm - 2.0 * b).abs() < 1e-12 * (1.0 + fp));
    }

    #[test]
    fn flag_curvature_depends_on_the_flag_only((spec, x, y) in metric_point_direction(), c in -2.0f64..2.0, scale in 0.1f64..5.0) {
        let m = FinslerMetric::randers(spec);
        let jet = DirectionJet::from_spray(&SprayJet::new(&m, &x, &y, 2, Backend::Dual).unwrap()).unwrap();
        let u: Vec<f64> = (0..y.len()).map(|i| if i == 0 { y[1] } else { 1.0 + y[0] * i as f64 }).collect();
        let moved: Vec<f64> = u.iter().zip(&y).map(|(a, b)| scale * (a + c * b)).collect();
        let (k1, k2) = (jet.flag_curvature(&u).unwrap(), jet.flag_curvature(&moved).unwrap());
        prop_assert!((k1 - k2).abs() < 1e-9 * (1.0 + k1.abs()), "{} vs {}", k1, k2);
    }

    #[test]
    fn divergence_identity_on_random_pairs((spec, x, y) in metric_point_direction()) {
        prop_assert!(divergence_residual(&spec, &x, &y).unwrap() < 1e-10);
    }

    #[test]
    fn printed_expressions_parse_back(e in smooth_expr(3)) {
        prop_assert_eq!(parse(&e.to_string()).unwrap(), e);
    }

    #[test]
    fn dual_jets_are_symmetric_and_match_finite_differences(e in smooth_expr(3), x in prop::collection::vec(-1.0f64..1.0, 3)) {
        let map = Single(e, 3);
        let dual = evaluate_jet(&map, &x, 3, Backend::Dual).unwrap();
        prop_assert!(symmetry_residual(&dual) < 1e-12);
        let fd = finite_difference_jet(|p| map.eval(p), &x, 1, 1).unwrap();
        let agree = jet_agreement(&dual, &fd);
        prop_assert!(agree[0] == 0.0 && agree[1] < 1e-6, "{:?}", agree);
    }
}

proptest! {
    #[test]
    fn surds_form_a_commutative_ring((a, b, c) in field().prop_flat_map(|f| (surd(f), surd(f), surd(f)))) {
        prop_assert_eq!((a * b) * c, a * (b * c));
        prop_assert_eq!(a * (b + c), a * b + a * c);
        prop_assert_eq!(a * b, b * a);
        prop_assert_eq!(a - a, Surd::zero());
        let close = |p: f64, q: f64| (p - q).abs() < 1e-9 * (1.0 + p.abs().max(q.abs()));
        prop_assert!(close((a * b).to_f64(), a.to_f64() * b.to_f64()));
        prop_assert!(close((a + b).to_f64(), a.to_f64() + b.to_f64()));
    }
}
