use proptest::prelude::*;

use indicvex::convex::UnivariateConvex;
use indicvex::disjunctive::hull::subset_piece_count;
use indicvex::disjunctive::{LinExpr, VarId};
use indicvex::envelope::{envelope, envelope_free, envelope_numeric, EnvelopePoint, RankOneInstance};
use indicvex::instances::export::{num, sanitize};
use indicvex::instances::metrics::{initial_gap, root_improvement};

fn family() -> impl Strategy<Value = UnivariateConvex> {
    prop_oneof![
        (0.1..3.0f64).prop_map(|c| UnivariateConvex::quadratic(c).unwrap()),
        (0.2..2.0f64).prop_map(|d| UnivariateConvex::huber(d).unwrap()),
        (1.2..3.0f64).prop_map(|p| UnivariateConvex::power_abs(p).unwrap()),
        Just(UnivariateConvex::AbsoluteValue),
    ]
}

fn coefficient() -> impl Strategy<Value = f64> {
    (0.2..2.0f64, any::<bool>()).prop_map(|(m, s)| if s { m } else { -m })
}

fn free_case() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
    (1..5usize).prop_flat_map(|n| {
        (prop::collection::vec(coefficient(), n), prop::collection::vec(-1.0..1.0f64, n), prop::collection::vec(0.05..1.0f64, n))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn perspective_decreases_in_lambda(g in family(), v in -3.0..3.0f64, l in 1e-3..2.0f64, d in 0.0..2.0f64) {
        let a = g.perspective(v, l).unwrap().to_f64();
        let b = g.perspective(v, l + d).unwrap().to_f64();
        prop_assert!(b <= a + 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn envelope_at_integral_z_is_f(g in family(), (a, x, _) in free_case()) {
        let n = a.len();
        let inst = RankOneInstance::homogeneous(a, vec![], g).unwrap();
        let p = EnvelopePoint::new(x.clone(), vec![1.0; n]).unwrap();
        let e = envelope(&inst, &p).unwrap().to_f64();
        let f = inst.f(&x);
        prop_assert!((e - f).abs() <= 1e-9 * (1.0 + f.abs()), "{} vs {}", e, f);
    }

    #[test]
    fn envelope_nonincreasing_in_z(g in family(), (a, x, z) in free_case(), bump in 0.0..1.0f64) {
        let inst = RankOneInstance::homogeneous(a, vec![], g).unwrap();
        let up: Vec<f64> = z.iter().map(|v| v + bump * (1.0 - v)).collect();
        let lo = envelope_free(&inst, &EnvelopePoint::new(x.clone(), z).unwrap()).unwrap().to_f64();
        let hi = envelope_free(&inst, &EnvelopePoint::new(x, up).unwrap()).unwrap().to_f64();
        prop_assert!(hi <= lo + 1e-9 * (1.0 + lo.abs()), "{} after raising z, {} before", hi, lo);
    }

    #[test]
    fn free_closed_form_matches_numeric(c in 0.2..2.0f64, (a, x, z) in free_case()) {
        let inst = RankOneInstance::homogeneous(a, vec![], UnivariateConvex::quadratic(c).unwrap()).unwrap();
        let p = EnvelopePoint::new(x, z).unwrap();
        let closed = envelope_free(&inst, &p).unwrap().to_f64();
        let numeric = envelope_numeric(&inst, &p, 1e-9).unwrap().value.to_f64();
        prop_assert!((closed - numeric).abs() <= 1e-6 * (1.0 + closed.abs()), "{} vs {}", closed, numeric);
    }

    #[test]
    fn subset_pieces_bounded_by_power_set(n in 1..12usize, k in 1..4usize) {
        prop_assume!(k <= n);
        let count = subset_piece_count(n, k);
        prop_assert!(count >= 1 && count <= 1u128 << n);
        if k == 1 {
            prop_assert_eq!(count, n as u128 + 1);
        }
    }

    #[test]
    fn canonical_preserves_value(terms in prop::collection::vec((0..6usize, -3.0..3.0f64), 0..12), x in prop::collection::vec(-2.0..2.0f64, 6), c in -1.0..1.0f64) {
        let mut e = LinExpr::constant(c);
        for &(v, w) in &terms {
            e.add_term(VarId(v), w);
        }
        let k = e.canonical();
        prop_assert!((e.eval(&x) - k.eval(&x)).abs() <= 1e-12 * (1.0 + terms.len() as f64 * 6.0));
        prop_assert!(k.terms.windows(2).all(|w| w[0].0 < w[1].0));
        prop_assert_eq!(k.canonical(), k);
    }

    #[test]
    fn metrics_in_range(best in 0.5..5.0f64, frac in 0.0..1.0f64, t in 0.0..1.0f64) {
        let cont = best * (1.0 - frac);
        let gap = initial_gap(best, cont).unwrap();
        prop_assert!((-1e-9..=100.0 + 1e-9).contains(&gap));
        let r2 = cont + t * (best - cont);
        if let Some(ri) = root_improvement(best, cont, r2) {
            prop_assert!((ri - 100.0 * t).abs() <= 1e-6);
        }
    }

    #[test]
    fn printed_numbers_parse_back(v in prop::num::f64::NORMAL) {
        prop_assert_eq!(num(v).parse::<f64>().unwrap(), v);
    }

    #[test]
    fn sanitized_names_are_plain(s in "[a-z:\\[\\]{}() ,0-9_]{1,16}") {
        let t = sanitize(&s);
        prop_assert!(!t.contains(' ') && !t.contains(':'));
        prop_assert_eq!(sanitize(&t), t.clone());
    }
}
