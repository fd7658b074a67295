use std::sync::Arc;

use super::*;
use crate::group::BasisAutomorphism;
use crate::metrics::{coned_off_provider, letter_count_provider, letter_weight_provider, ConedOffSettings, Pullback};

fn f2() -> GroupContext {
    GroupContext::new(2).unwrap()
}

fn lw(w: &[f64]) -> Provider {
    Arc::new(letter_weight_provider(&f2(), w).unwrap())
}

fn count(g: usize, k: f64) -> Provider {
    let p: Provider = Arc::new(letter_count_provider(&f2(), g).unwrap());
    if k == 1.0 {
        p
    } else {
        Arc::new(linear_combination(k, 0.0, p.clone(), p).unwrap())
    }
}

fn class(s: &str) -> CyclicWord {
    f2().parse_class(s).unwrap()
}

/// `d = {a:2,b:1}`, `d* = {a:1,b:2}`.
fn pair() -> (Provider, Provider) {
    (lw(&[2.0, 1.0]), lw(&[1.0, 2.0]))
}

/// Brute-force sup over the two basis classes, valid for letter-linear pairs
/// with nonnegative weights.
fn linear_dil(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a / b).fold(0.0, f64::max)
}

#[test]
fn dilation_examples() {
    let ctx = f2();
    let d = lw(&[2.0, 1.0]);
    let e = dilation_estimate(&ctx, d.as_ref(), lw(&[4.0, 2.0]).as_ref(), 4).unwrap();
    assert_eq!(e.value, 0.5);
    assert_eq!(e.witness, Some(class("a")));
    assert!(e.plateau);
    assert_eq!(e.per_length.len(), 4);

    let (d, ds) = pair();
    let f = dilation_estimate(&ctx, d.as_ref(), ds.as_ref(), 10).unwrap();
    let b = dilation_estimate(&ctx, ds.as_ref(), d.as_ref(), 10).unwrap();
    assert_eq!((f.value, b.value), (2.0, 2.0));
    assert_eq!(f.witness, Some(class("a")));
    assert_eq!(b.witness, Some(class("b")));
    assert!(f.per_length.windows(2).all(|w| w[0] <= w[1]));
    assert!(f.per_length.iter().all(|&v| v == 2.0));

    let set: Vec<_> = ["a", "a-", "b", "b-"].iter().map(|w| ctx.parse_word(w).unwrap()).collect();
    let cone = coned_off_provider(&ctx, &set, &ctx.parse_word("b").unwrap(), ConedOffSettings::default()).unwrap();
    let basis = lw(&[1.0, 1.0]);
    let e = dilation_estimate(&ctx, basis.as_ref(), &cone, 4).unwrap();
    assert!(e.is_infinite());
    assert_eq!(e.witness, Some(class("b")));
    let zero = count(0, 1.0);
    let both = linear_combination(0.0, 0.0, zero.clone(), zero).unwrap();
    assert!(matches!(dilation_estimate(&ctx, &both, &both, 4), Err(Error::DegeneratePair(_))));
    assert!(dilation_estimate(&ctx, basis.as_ref(), basis.as_ref(), 1).is_err());
}

#[test]
fn coned_off_infinite() {
    let ctx = f2();
    let s: Vec<_> = ["a", "a-", "b", "b-"].iter().map(|x| ctx.parse_word(x).unwrap()).collect();
    let cone = coned_off_provider(&ctx, &s, &ctx.parse_word("b").unwrap(), ConedOffSettings::default()).unwrap();
    let e = dilation_estimate(&ctx, lw(&[1.0, 1.0]).as_ref(), &cone, 3).unwrap();
    assert!(e.is_infinite());
    assert_eq!(e.witness, Some(class("b")));
    assert!(matches!(delta_distance(&ctx, lw(&[1.0, 1.0]).as_ref(), &cone, 3), Err(Error::BoundaryPair(_))));
}

#[test]
fn delta_examples() {
    let ctx = f2();
    let (d, ds) = pair();
    assert_eq!(delta_distance(&ctx, d.as_ref(), lw(&[4.0, 2.0]).as_ref(), 6).unwrap(), 0.0);
    let x = delta_distance(&ctx, d.as_ref(), ds.as_ref(), 8).unwrap();
    assert!((x - 4f64.ln()).abs() < 1e-12);
    assert_eq!(x, delta_distance(&ctx, ds.as_ref(), d.as_ref(), 8).unwrap());
}

#[test]
fn geodesic_points() {
    let ctx = f2();
    let (d, ds) = pair();
    let curve = ExactCurve::new(&ctx, ds.clone(), d.clone()).unwrap();
    let p0 = geodesic_point(d.clone(), ds.clone(), &curve, 0.0).unwrap();
    let rho = MetricStructurePoint::normalized(&ctx, d.clone(), Provenance::Endpoint).unwrap();
    assert!(projective_defect(&ctx, p0.functional.as_ref(), rho.functional.as_ref(), 8, 50).unwrap() < 1e-9);
    let w = p0.letter_weights().unwrap();
    let h = curve.h_d();
    assert!((w[0] - 2.0 * h).abs() < 1e-9 && (w[1] - h).abs() < 1e-9);
    let ph = geodesic_point(d.clone(), ds.clone(), &curve, curve.h_dstar()).unwrap();
    let w = ph.letter_weights().unwrap();
    assert!((w[0] - curve.h_dstar()).abs() < 1e-8 && (w[1] - 2.0 * curve.h_dstar()).abs() < 1e-8);
    // t = -1 stays nonnegative on every class.
    let pm = geodesic_point(d, ds, &curve, -1.0).unwrap();
    for c in ClassCatalog::shared(&ctx, 10).unwrap().classes() {
        assert!(pm.length(c).unwrap() >= 0.0);
    }
    // Curve points have growth rate 1.
    let g = growth_rate_exact(pm.functional.as_ref(), &ctx).unwrap().value;
    assert!((g - 1.0).abs() < 1e-9);
}

#[test]
fn closed_form_matches_letter_weights() {
    let ctx = f2();
    let (d, ds) = pair();
    let curve = ExactCurve::new(&ctx, ds, d).unwrap();
    let form = ClosedForm::new(curve.h_d(), curve.h_dstar(), 2.0, 2.0).unwrap();
    let weights = |t: f64| {
        let th = curve.theta(t).unwrap().theta;
        (th, vec![t + 2.0 * th, 2.0 * t + th])
    };
    let hs = curve.h_dstar();
    let ts = [-3.0, -1.0, -0.5, 0.3, hs / 2.0, hs, 2.0 * hs, 5.0];
    for &s in &ts {
        for &t in &ts {
            let (ths, ws) = weights(s);
            let (tht, wt) = weights(t);
            let direct = if s == t { 1.0 } else { linear_dil(&ws, &wt) };
            let closed = form.between(s, ths, t, tht);
            assert!((direct - closed).abs() < 1e-9 * direct, "s={s} t={t} {direct} {closed}");
        }
        let (ths, ws) = weights(s);
        let m = form.dilations(s, ths);
        let (_, w0) = weights(0.0);
        let (_, wh) = weights(hs);
        if s != 0.0 {
            assert!((m.d_0t - linear_dil(&w0, &ws)).abs() < 1e-9);
            assert!((m.d_t0 - linear_dil(&ws, &w0)).abs() < 1e-9);
        }
        if s != hs {
            assert!((m.d_hstar_t - linear_dil(&wh, &ws)).abs() < 1e-8, "s={s}");
            assert!((m.d_t_hstar - linear_dil(&ws, &wh)).abs() < 1e-8, "s={s}");
        }
    }
}

#[test]
fn closed_form_identities() {
    let ctx = f2();
    let (d, ds) = pair();
    let curve = ExactCurve::new(&ctx, ds, d).unwrap();
    let (h, hs) = (curve.h_d(), curve.h_dstar());
    let form = ClosedForm::new(h, hs, 2.0, 2.0).unwrap();
    let th = |t: f64| curve.theta(t).unwrap().theta;
    let m = form.dilations(hs, 0.0);
    assert!((m.d_0t - h * 2.0 / hs).abs() < 1e-12);
    assert_eq!((m.d_hstar_t, m.d_t_hstar, m.delta_t_hstar), (1.0, 1.0, 0.0));
    assert_eq!(form.dilations(0.0, h).delta_t0, 0.0);
    assert!(form.dilations(1e-9, th(1e-9)).delta_t0 < 1e-7);
    assert!((form.dilations(hs, 0.0).delta_t0 - 4f64.ln()).abs() < 1e-9);
    // Additivity along the geodesic.
    for (r, s, t) in [(-1.0, 0.0, 1.0), (0.0, hs / 2.0, hs), (-2.0, 0.7, 3.0), (1.0, 2.0, 4.0)] {
        let dd = |a: f64, b: f64| form.delta_between(a, th(a), b, th(b));
        assert!((dd(r, t) - dd(r, s) - dd(s, t)).abs() < 1e-9);
    }
    let u: Vec<f64> = [10.0, 20.0, 40.0].iter().map(|&t| form.dilations(t, th(t)).delta_t_hstar).collect();
    assert!(u[0] < u[1] && u[1] < u[2]);
}

#[test]
fn enumerated_multiplicativity() {
    let ctx = f2();
    let (d, ds) = pair();
    let curve = ExactCurve::new(&ctx, ds.clone(), d.clone()).unwrap();
    let hs = curve.h_dstar();
    for rst in [(-1.0, 0.0, 1.0), (0.0, hs / 2.0, hs)] {
        let r = multiplicativity_check(&ctx, d.clone(), ds.clone(), &curve, rst, 10).unwrap();
        assert!(r.defect <= 1e-9, "{r:?}");
    }
    let r = multiplicativity_check(&ctx, d.clone(), ds.clone(), &curve, (0.5, 0.5, 1.0), 6).unwrap();
    assert!(r.defect < 1e-12);
    assert!(multiplicativity_check(&ctx, d, ds, &curve, (1.0, 0.0, 2.0), 6).is_err());
}

#[test]
fn arclength_contract() {
    let ctx = f2();
    let (d, ds) = pair();
    let g = exact_geodesic(&ctx, d.clone(), ds.clone(), 8).unwrap();
    assert!((g.delta - 4f64.ln()).abs() < 1e-12);
    assert_eq!(g.gamma(0.0).unwrap(), 0.0);
    assert!((g.gamma(g.delta).unwrap() - g.curve().h_dstar()).abs() < 1e-6);
    let s0 = g.sigma(0.0).unwrap();
    for t in [-0.5, -0.1, 0.1, 0.5] {
        let gt = g.gamma(t).unwrap();
        assert!(gt * t > 0.0);
        let st = g.sigma(t).unwrap();
        let x = delta_distance(&ctx, s0.functional.as_ref(), st.functional.as_ref(), 8).unwrap();
        assert!((x - t.abs()).abs() < 1e-6, "t={t} {x}");
    }
    assert!(matches!(g.gamma(1e9), Err(Error::OutOfRange { .. })));
    let same = exact_geodesic(&ctx, d.clone(), d, 6);
    assert!(matches!(same, Err(Error::DegeneratePair(_))));
}

#[test]
fn consistency_formula() {
    assert_eq!(consistency_t(0.0, 2.0, 2.0, 1.3).unwrap(), 1.3);
    assert_eq!(consistency_t(0.4, 2.0, 1.5, 0.0).unwrap(), 0.4);
    assert!(matches!(consistency_t(1.0, 1.0, 1.0, 0.5), Err(Error::ZeroDenominator(_))));
    assert!(consistency_t(0.0, 1.0, 0.0, 0.5).is_err());

    let ctx = f2();
    let (d, ds) = pair();
    let rho = exact_geodesic(&ctx, d, ds, 8).unwrap();
    let (s, s_star) = (0.2 * rho.delta, 0.7 * rho.delta);
    let tau = rho.sigma(s).unwrap().functional;
    let tau_star = rho.sigma(s_star).unwrap().functional;
    let second = exact_geodesic(&ctx, tau, tau_star, 8).unwrap();
    for t in [-0.3, 0.0, 0.25, 0.9] {
        let a = second.sigma(t).unwrap();
        let b = rho.sigma(consistency_t(s, s_star, second.delta, t).unwrap()).unwrap();
        let defect = projective_defect(&ctx, a.functional.as_ref(), b.functional.as_ref(), 10, 50).unwrap();
        assert!(defect <= 1e-6, "t={t} {defect}");
    }
}

#[test]
fn boundary_examples() {
    let ctx = f2();
    let (d, ds) = pair();
    let lim = boundary_limits(&ctx, d.clone(), ds.clone(), 2.0, 2.0, 10).unwrap();
    let (b3, a3) = (count(1, 3.0), count(0, 3.0));
    for c in ClassCatalog::shared(&ctx, 10).unwrap().classes() {
        assert_eq!(lim.plus.translation_length(c).unwrap().value, b3.translation_length(c).unwrap().value);
        assert_eq!(lim.minus.translation_length(c).unwrap().value, a3.translation_length(c).unwrap().value);
    }
    assert_eq!(lim.plus.translation_length(&class("a")).unwrap().value, 0.0);
    assert!(matches!(
        boundary_limits(&ctx, d.clone(), ds.clone(), 1.5, 2.0, 4),
        Err(Error::NegativeLength { .. })
    ));
    let curve = ExactCurve::new(&ctx, ds.clone(), d.clone()).unwrap();
    let check = boundary_limit_check(&ctx, d, ds, &curve, &lim, 100.0, 10, 20).unwrap();
    assert!(check.max_relative_error < 0.01, "{check:?}");
}

#[test]
fn transversality_examples() {
    let ctx = f2();
    let r = transversality_check(&ctx, count(1, 3.0), count(0, 3.0), 10).unwrap();
    assert_eq!(r.positivity_proxy, 3.0);
    assert_eq!((r.dil_forward.value, r.dil_backward.value), (2.0, 2.0));
    assert_eq!(r.dil_forward.witness, Some(class("a")));
    assert_eq!(r.dil_backward.witness, Some(class("b")));
    assert_eq!(r.recovery_defect, 0.0);
    assert!(r.boundary_signature && r.transverse);

    let r = transversality_check(&ctx, count(1, 1.0), count(1, 1.0), 8).unwrap();
    assert_eq!(r.positivity_proxy, 0.0);
    assert_eq!(r.positivity_witness, Some(class("a")));
    assert!(!r.transverse);

    let r = transversality_check(&ctx, lw(&[1.0, 1.0]), count(0, 1.0), 8).unwrap();
    assert!(!r.boundary_signature);
    assert_eq!((r.dil_forward.value, r.dil_backward.value), (1.0, 2.0));

    let zero = Arc::new(linear_combination(0.0, 0.0, count(0, 1.0), count(1, 1.0)).unwrap());
    assert!(matches!(transversality_check(&ctx, zero, count(0, 1.0), 6), Err(Error::DegeneratePair(_))));
}

#[test]
fn recovery() {
    let ctx = f2();
    let basis = lw(&[1.0, 1.0]);
    let r = recover_interior(&ctx, basis.clone(), count(1, 1.0), 10).unwrap();
    assert_eq!(r.dil.value, 1.0);
    assert_eq!(r.dil.witness, Some(class("a")));
    assert_eq!(r.reproduction_defect, 0.0);
    assert!(!r.degenerate_boundary);
    assert_eq!(r.point.provenance, Provenance::Recovered);
    let zero: Provider = Arc::new(linear_combination(0.0, 0.0, count(0, 1.0), count(1, 1.0)).unwrap());
    let r = recover_interior(&ctx, basis.clone(), zero, 6).unwrap();
    assert!(r.degenerate_boundary);
    // An interior functional is not a boundary one.
    assert!(matches!(
        recover_interior(&ctx, count(0, 1.0), basis, 6),
        Err(Error::InconsistentBoundary { .. })
    ));
}

#[test]
fn scaling_invariance() {
    let ctx = f2();
    let (d, ds) = pair();
    let k = 3.7;
    let (kd, kds) = (lw(&[2.0 * k, k]), lw(&[k, 2.0 * k]));
    let f = dilation_estimate(&ctx, d.as_ref(), ds.as_ref(), 8).unwrap();
    let fk = dilation_estimate(&ctx, kd.as_ref(), kds.as_ref(), 8).unwrap();
    assert!((f.value - fk.value).abs() < 1e-12 && f.witness == fk.witness);
    let a = exact_geodesic(&ctx, d, ds, 8).unwrap();
    let b = exact_geodesic(&ctx, kd, kds, 8).unwrap();
    assert!((a.delta - b.delta).abs() < 1e-12);
    for t in [-0.4, 0.3] {
        let (pa, pb) = (a.sigma(t).unwrap(), b.sigma(t).unwrap());
        for c in ClassCatalog::shared(&ctx, 6).unwrap().classes() {
            let (x, y) = (pa.length(c).unwrap(), pb.length(c).unwrap());
            assert!((x - y).abs() <= 1e-9 * x.max(1.0), "{x} {y}");
        }
    }
    let na = MetricStructurePoint::normalized(&ctx, lw(&[2.0, 1.0]), Provenance::Endpoint).unwrap();
    let nb = MetricStructurePoint::normalized(&ctx, lw(&[2.0 * k, k]), Provenance::Endpoint).unwrap();
    let (wa, wb) = (na.letter_weights().unwrap(), nb.letter_weights().unwrap());
    assert!(wa.iter().zip(&wb).all(|(x, y)| (x - y).abs() < 1e-12));
}

#[test]
fn swap_invariance() {
    let ctx = f2();
    let (d, ds) = pair();
    let phi = BasisAutomorphism::swap(&ctx, 0, 1).unwrap();
    let pd: Provider = Arc::new(Pullback::new(d.clone(), phi.clone()));
    let pds: Provider = Arc::new(Pullback::new(ds.clone(), phi));
    let f = dilation_estimate(&ctx, d.as_ref(), ds.as_ref(), 8).unwrap();
    let b = dilation_estimate(&ctx, ds.as_ref(), d.as_ref(), 8).unwrap();
    let pf = dilation_estimate(&ctx, pd.as_ref(), pds.as_ref(), 8).unwrap();
    let pb = dilation_estimate(&ctx, pds.as_ref(), pd.as_ref(), 8).unwrap();
    assert_eq!((pf.value, pb.value), (b.value, f.value));
    let lim = boundary_limits(&ctx, d, ds, 2.0, 2.0, 8).unwrap();
    let plim = boundary_limits(&ctx, pd, pds, 2.0, 2.0, 8).unwrap();
    for c in ClassCatalog::shared(&ctx, 8).unwrap().classes() {
        assert_eq!(plim.plus.translation_length(c).unwrap().value, lim.minus.translation_length(c).unwrap().value);
    }
}

#[test]
fn geodesic_csv() {
    let ctx = f2();
    let (d, ds) = pair();
    let g = exact_geodesic(&ctx, d, ds, 6).unwrap();
    let samples: Vec<_> = [-0.5, 0.0, 0.5, g.delta].iter().map(|&t| g.sample(t).unwrap()).collect();
    assert!((samples[3].delta_from_rhostar).abs() < 1e-6);
    let mut buf = Vec::new();
    write_geodesic_csv(&samples, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("t,gamma_t,delta_from_rho,delta_from_rhostar\n"));
    assert_eq!(text.lines().count(), 5);
}
