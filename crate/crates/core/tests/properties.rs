//! Randomized invariants of dilations, the Delta distance and the curve.

use std::sync::Arc;

use mstruct_core::group::GroupContext;
use mstruct_core::manhattan::{ExactCurve, ThetaSource};
use mstruct_core::metrics::{letter_weight_provider, Provider};
use mstruct_core::structures::{delta_distance, dilation_estimate, ClosedForm};
use proptest::prelude::*;

fn lw(ctx: &GroupContext, w: [f64; 2]) -> Provider {
    Arc::new(letter_weight_provider(ctx, &w).unwrap())
}

fn weights() -> impl Strategy<Value = [f64; 2]> {
    (0.2f64..5.0, 0.2f64..5.0).prop_map(|(a, b)| [a, b])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn dilation_is_attained_on_a_letter(u in weights(), v in weights()) {
        let ctx = GroupContext::new(2).unwrap();
        let e = dilation_estimate(&ctx, lw(&ctx, u).as_ref(), lw(&ctx, v).as_ref(), 6).unwrap();
        let expect = (u[0] / v[0]).max(u[1] / v[1]);
        prop_assert!((e.value - expect).abs() <= 1e-12 * expect);
        prop_assert!(e.plateau);
    }

    #[test]
    fn delta_is_a_symmetric_pseudo_metric(u in weights(), v in weights(), w in weights(), k in 0.1f64..10.0) {
        let ctx = GroupContext::new(2).unwrap();
        let (pu, pv, pw) = (lw(&ctx, u), lw(&ctx, v), lw(&ctx, w));
        let uv = delta_distance(&ctx, pu.as_ref(), pv.as_ref(), 5).unwrap();
        prop_assert_eq!(uv, delta_distance(&ctx, pv.as_ref(), pu.as_ref(), 5).unwrap());
        prop_assert!(uv >= -1e-12);
        let uw = delta_distance(&ctx, pu.as_ref(), pw.as_ref(), 5).unwrap();
        let wv = delta_distance(&ctx, pw.as_ref(), pv.as_ref(), 5).unwrap();
        prop_assert!(uv <= uw + wv + 1e-12);
        let ku = lw(&ctx, [k * u[0], k * u[1]]);
        prop_assert!(delta_distance(&ctx, pu.as_ref(), ku.as_ref(), 5).unwrap().abs() < 1e-12);
    }

    #[test]
    fn closed_form_is_additive(u in weights(), v in weights(), r in -2.0f64..2.0, gap1 in 0.05f64..1.5, gap2 in 0.05f64..1.5) {
        let ctx = GroupContext::new(2).unwrap();
        prop_assume!((u[0] / u[1] - v[0] / v[1]).abs() > 0.05);
        let (p, ps) = (lw(&ctx, u), lw(&ctx, v));
        let curve = ExactCurve::new(&ctx, ps.clone(), p.clone()).unwrap();
        let f = dilation_estimate(&ctx, p.as_ref(), ps.as_ref(), 4).unwrap().value;
        let b = dilation_estimate(&ctx, ps.as_ref(), p.as_ref(), 4).unwrap().value;
        let form = ClosedForm::new(curve.h_d(), curve.h_dstar(), f, b).unwrap();
        let (s, t) = (r + gap1, r + gap1 + gap2);
        let th = |x: f64| curve.theta(x).unwrap().theta;
        let dd = |a: f64, b: f64| form.delta_between(a, th(a), b, th(b));
        prop_assert!((dd(r, t) - dd(r, s) - dd(s, t)).abs() < 1e-9);
    }

    #[test]
    fn theta_is_convex_and_decreasing(u in weights(), v in weights(), t in -3.0f64..3.0, step in 0.01f64..1.0) {
        let ctx = GroupContext::new(2).unwrap();
        let curve = ExactCurve::new(&ctx, lw(&ctx, v), lw(&ctx, u)).unwrap();
        let th = |x: f64| curve.theta(x).unwrap().theta;
        let (a, m, b) = (th(t - step), th(t), th(t + step));
        prop_assert!(a > m && m > b);
        prop_assert!(m <= 0.5 * (a + b) + 1e-8);
    }
}
