//! The `core` verification battery on the rank-2 fixtures.

use std::collections::BTreeMap;
use std::sync::Arc;

use mstruct_core::automaton::{
    axial_witness, basis_axiality, component_analysis, max_spectral_radius, validate_bijection,
    StronglyMarkovStructure,
};
use mstruct_core::group::{enumerate_ball, ClassCatalog, CyclicWord, GroupContext, ReducedWord, DEFAULT_BUDGET};
use mstruct_core::manhattan::{asymptotic_slopes, build_curve, grid, theta_empirical, CurveMethod, ExactCurve, ThetaSource};
use mstruct_core::metrics::{
    coned_off_provider, growth_rate_empirical, growth_rate_exact, letter_count_provider, letter_weight_provider,
    linear_combination, verify_qi_bounds, ConedOffSettings, MetricProvider, Provider,
};
use mstruct_core::structures::{
    boundary_limit_check, boundary_limits, consistency_t, delta_distance, dilation_estimate, exact_geodesic,
    geodesic_point, multiplicativity_check, projective_defect, recover_interior, transversality_check,
    write_geodesic_csv, ClosedForm,
};
use mstruct_core::Result;
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    /// Measured quantities, keyed by name.
    pub values: BTreeMap<String, serde_json::Value>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub passed: bool,
    pub checks: Vec<Check>,
}

/// Files written next to the report.
pub struct SuiteArtifacts {
    pub report: SuiteReport,
    pub files: Vec<(String, String)>,
}

struct Recorder {
    id: usize,
    name: &'static str,
    ok: bool,
    values: BTreeMap<String, serde_json::Value>,
}

impl Recorder {
    fn new(id: usize, name: &'static str) -> Self {
        Recorder { id, name, ok: true, values: BTreeMap::new() }
    }

    fn value(&mut self, key: &str, v: impl Serialize) {
        self.values.insert(key.to_string(), serde_json::to_value(v).expect("value serializes"));
    }

    /// Records `measured` and requires `|measured - expected| <= tol`.
    fn close(&mut self, key: &str, measured: f64, expected: f64, tol: f64) {
        self.value(key, measured);
        self.ok &= (measured - expected).abs() <= tol;
    }

    fn require(&mut self, key: &str, cond: bool) {
        self.value(key, cond);
        self.ok &= cond;
    }

    fn finish(self) -> Check {
        Check { id: self.id, name: self.name, passed: self.ok, values: self.values }
    }

    /// An error inside a check fails that check instead of the suite.
    fn run(id: usize, name: &'static str, body: impl FnOnce(&mut Recorder) -> Result<()>) -> Check {
        let mut r = Recorder::new(id, name);
        if let Err(e) = body(&mut r) {
            r.value("error", e.to_string());
            r.ok = false;
        }
        r.finish()
    }
}

struct Fixtures {
    ctx: GroupContext,
    basis: Provider,
    /// `{a:2, b:1}`.
    d: Provider,
    /// `{a:1, b:2}`.
    d_star: Provider,
    a_count: Provider,
    b_count: Provider,
    curve: ExactCurve,
}

fn scaled(p: &Provider, k: f64) -> Result<Provider> {
    Ok(Arc::new(linear_combination(k, 0.0, p.clone(), p.clone())?))
}

impl Fixtures {
    fn new() -> Result<Fixtures> {
        let ctx = GroupContext::new(2)?;
        let d: Provider = Arc::new(letter_weight_provider(&ctx, &[2.0, 1.0])?.named("d"));
        let d_star: Provider = Arc::new(letter_weight_provider(&ctx, &[1.0, 2.0])?.named("dStar"));
        Ok(Fixtures {
            basis: Arc::new(letter_weight_provider(&ctx, &[1.0, 1.0])?.named("basis")),
            a_count: Arc::new(letter_count_provider(&ctx, 0)?),
            b_count: Arc::new(letter_count_provider(&ctx, 1)?),
            curve: ExactCurve::new(&ctx, d_star.clone(), d.clone())?,
            d,
            d_star,
            ctx,
        })
    }

    fn class(&self, s: &str) -> Result<CyclicWord> {
        self.ctx.parse_class(s)
    }
}

fn growth(f: &Fixtures) -> Check {
    Recorder::run(1, "growth exactness", |r| {
        let exact = growth_rate_exact(f.basis.as_ref(), &f.ctx)?;
        r.close("h_exact", exact.value, 3f64.ln(), 1e-9);
        let emp = growth_rate_empirical(f.basis.as_ref(), &f.ctx, 14)?;
        r.close("h_empirical_r14", emp.value, exact.value, 0.02);
        Ok(())
    })
}

fn endpoints(f: &Fixtures) -> Check {
    Recorder::run(2, "manhattan endpoints", |r| {
        let (h, hs) = (f.curve.h_d(), f.curve.h_dstar());
        r.value("h_d", h);
        r.value("h_dstar", hs);
        r.close("theta_exact_0", f.curve.theta(0.0)?.theta, h, 1e-9);
        r.close("theta_exact_hstar", f.curve.theta(hs)?.theta, 0.0, 1e-9);
        let e0 = theta_empirical(&f.ctx, f.d_star.as_ref(), f.d.as_ref(), 0.0, 12)?;
        let eh = theta_empirical(&f.ctx, f.d_star.as_ref(), f.d.as_ref(), hs, 12)?;
        r.close("theta_empirical_0", e0.theta, h, 0.05);
        r.close("theta_empirical_hstar", eh.theta, 0.0, 0.05);
        Ok(())
    })
}

fn curve_shape(f: &Fixtures, csv: &mut String) -> Check {
    Recorder::run(3, "curve shape", |r| {
        let g = grid(-2.0, 4.0, 0.1)?;
        let m = build_curve(&f.ctx, f.d_star.clone(), f.d.clone(), &g, CurveMethod::Exact, 0)?;
        r.value("points", g.len());
        r.require("monotone", m.validation.monotone);
        r.require("midpoint_convex", m.validation.midpoint_convex);
        r.require("certified", m.validation.certified);
        r.value("max_residual", m.residual.iter().copied().fold(0.0, f64::max));
        let inv = f.curve.inverse();
        let mut worst: f64 = 0.0;
        for (&t, &th) in g.iter().zip(&m.theta) {
            worst = worst.max((inv.theta(th)?.theta - t).abs());
        }
        r.close("inverse_round_trip", worst, 0.0, 1e-6);
        let mut buf = Vec::new();
        m.write_csv(&mut buf)?;
        *csv = String::from_utf8(buf).expect("csv is utf-8");
        Ok(())
    })
}

fn slopes(f: &Fixtures) -> Check {
    Recorder::run(4, "asymptotic slopes", |r| {
        let fwd = dilation_estimate(&f.ctx, f.d.as_ref(), f.d_star.as_ref(), 10)?;
        let bwd = dilation_estimate(&f.ctx, f.d_star.as_ref(), f.d.as_ref(), 10)?;
        r.close("dil_d_dstar", fwd.value, 2.0, 0.0);
        r.close("dil_dstar_d", bwd.value, 2.0, 0.0);
        r.require("witness_forward_a", fwd.witness == Some(f.class("a")?));
        r.require("witness_backward_b", bwd.witness == Some(f.class("b")?));
        r.require("plateau_by_length_2", fwd.per_length[1] == fwd.value && bwd.per_length[1] == bwd.value);
        let m = build_curve(&f.ctx, f.d_star.clone(), f.d.clone(), &grid(-50.0, 50.0, 25.0)?, CurveMethod::Exact, 0)?;
        let s = asymptotic_slopes(&m, 50.0)?;
        r.close("slope_plus", s.slope_plus, 1.0 / fwd.value, 0.01 / fwd.value);
        r.close("slope_minus", s.slope_minus, bwd.value, 0.01 * bwd.value);
        Ok(())
    })
}

fn qi_bounds(f: &Fixtures) -> Check {
    Recorder::run(5, "optimal QI constants", |r| {
        let good = verify_qi_bounds(f.d.as_ref(), f.d_star.as_ref(), &f.ctx, 2.0, 2.0, 8)?;
        r.require("plateau_at_true_dilations", good.plateau);
        r.close("c8_minus_c6", good.per_radius[8] - good.per_radius[6], 0.0, 1e-6);
        let bad = verify_qi_bounds(f.d.as_ref(), f.d_star.as_ref(), &f.ctx, 1.0, 1.0, 8)?;
        r.require("no_plateau_at_unit_dilations", !bad.plateau);
        r.value("c8_unit", bad.per_radius[8]);
        Ok(())
    })
}

fn closed_forms(f: &Fixtures) -> Check {
    Recorder::run(6, "closed-form dilations", |r| {
        let form = ClosedForm::new(f.curve.h_d(), f.curve.h_dstar(), 2.0, 2.0)?;
        let hs = f.curve.h_dstar();
        let rho = geodesic_point(f.d.clone(), f.d_star.clone(), &f.curve, 0.0)?;
        let rho_star = geodesic_point(f.d.clone(), f.d_star.clone(), &f.curve, hs)?;
        for (label, t) in [("t_minus_half", -0.5), ("t_half_hstar", hs / 2.0), ("t_two_hstar", 2.0 * hs)] {
            let m = form.dilations(t, f.curve.theta(t)?.theta);
            let p = geodesic_point(f.d.clone(), f.d_star.clone(), &f.curve, t)?;
            let dil = |a: &Provider, b: &Provider| -> Result<f64> {
                Ok(dilation_estimate(&f.ctx, a.as_ref(), b.as_ref(), 12)?.value)
            };
            let e0 = dil(&rho.functional, &p.functional)? * dil(&p.functional, &rho.functional)?;
            let eh = dil(&rho_star.functional, &p.functional)? * dil(&p.functional, &rho_star.functional)?;
            let c0 = m.delta_t0.exp();
            let ch = m.delta_t_hstar.exp();
            r.close(&format!("{label}_rel_err_origin"), (c0 / e0 - 1.0).abs(), 0.0, 0.02);
            r.close(&format!("{label}_rel_err_endpoint"), (ch / eh - 1.0).abs(), 0.0, 0.02);
        }
        Ok(())
    })
}

fn multiplicativity(f: &Fixtures) -> Check {
    Recorder::run(7, "multiplicativity", |r| {
        let hs = f.curve.h_dstar();
        for (label, rst) in [("m1_0_1", (-1.0, 0.0, 1.0)), ("0_half_hstar", (0.0, hs / 2.0, hs))] {
            let m = multiplicativity_check(&f.ctx, f.d.clone(), f.d_star.clone(), &f.curve, rst, 12)?;
            r.close(&format!("defect_{label}"), m.defect, 0.0, 0.02);
        }
        Ok(())
    })
}

fn arclength(f: &Fixtures, csv: &mut String) -> Check {
    Recorder::run(8, "arc-length contract", |r| {
        let g = exact_geodesic(&f.ctx, f.d.clone(), f.d_star.clone(), 10)?;
        let s0 = g.sigma(0.0)?;
        for t in [-0.5, -0.1, 0.1, 0.5] {
            let st = g.sigma(t)?;
            let x = delta_distance(&f.ctx, s0.functional.as_ref(), st.functional.as_ref(), 10)?;
            r.close(&format!("delta_sigma_{t}"), x, t.abs(), 1e-6);
        }
        r.close("gamma_at_delta", g.gamma(g.delta)?, f.curve.h_dstar(), 1e-6);
        let (s, s_star) = (0.2 * g.delta, 0.7 * g.delta);
        let second = exact_geodesic(&f.ctx, g.sigma(s)?.functional, g.sigma(s_star)?.functional, 10)?;
        let mut worst: f64 = 0.0;
        for t in [-0.5, 0.0, 0.3, 1.0] {
            let a = second.sigma(t)?;
            let b = g.sigma(consistency_t(s, s_star, second.delta, t)?)?;
            worst = worst.max(projective_defect(&f.ctx, a.functional.as_ref(), b.functional.as_ref(), 10, 50)?);
        }
        r.close("consistency_projective_defect", worst, 0.0, 1e-6);
        let samples = grid(-1.0, 1.0, 0.1)?.into_iter().map(|t| g.sample(t)).collect::<Result<Vec<_>>>()?;
        let mut buf = Vec::new();
        write_geodesic_csv(&samples, &mut buf)?;
        *csv = String::from_utf8(buf).expect("csv is utf-8");
        Ok(())
    })
}

fn boundary(f: &Fixtures) -> Check {
    Recorder::run(9, "boundary limits", |r| {
        let lim = boundary_limits(&f.ctx, f.d.clone(), f.d_star.clone(), 2.0, 2.0, 12)?;
        let (mut exact, mut zero_set) = (true, true);
        for c in ClassCatalog::shared(&f.ctx, 12)?.classes() {
            let li = lim.plus.translation_length(c)?.value;
            let lm = lim.minus.translation_length(c)?.value;
            exact &= li == 3.0 * f.b_count.translation_length(c)?.value;
            exact &= lm == 3.0 * f.a_count.translation_length(c)?.value;
            let a_power = c.letters().iter().all(|l| l.generator() == 0);
            zero_set &= li >= 0.0 && ((li == 0.0) == a_power);
        }
        r.require("counts_exact_to_12", exact);
        r.require("zero_exactly_on_a_powers", zero_set);
        let check = boundary_limit_check(&f.ctx, f.d.clone(), f.d_star.clone(), &f.curve, &lim, 100.0, 12, 20)?;
        r.close("limit_rel_err_t100", check.max_relative_error, 0.0, 0.01);
        Ok(())
    })
}

fn transversality(f: &Fixtures) -> Check {
    Recorder::run(10, "transversality round trip", |r| {
        let (b3, a3) = (scaled(&f.b_count, 3.0)?, scaled(&f.a_count, 3.0)?);
        let t = transversality_check(&f.ctx, b3.clone(), a3, 12)?;
        r.close("dil_forward", t.dil_forward.value, 2.0, 0.0);
        r.close("dil_backward", t.dil_backward.value, 2.0, 0.0);
        r.close("recovery_defect", t.recovery_defect, 0.0, 0.0);
        r.close("positivity_proxy", t.positivity_proxy, 3.0, 0.0);
        let rec = recover_interior(&f.ctx, f.d.clone(), b3, 12)?;
        r.close("dil_d_d_plus_inf", rec.dil.value, 1.0, 1e-12);
        r.close("reproduction_defect", rec.reproduction_defect, 0.0, 0.0);
        Ok(())
    })
}

fn automaton(f: &Fixtures) -> Check {
    Recorder::run(11, "shortlex automaton", |r| {
        let s = StronglyMarkovStructure::shortlex(&f.ctx);
        let b = validate_bijection(&s, &f.ctx, 8);
        r.require("bijection_r8", b.passed());
        let counts_ok = b.path_counts.iter().enumerate().all(|(n, &c)| c == if n == 0 { 1 } else { 4 * 3u64.pow(n as u32 - 1) });
        r.require("path_counts", counts_ok);
        let comps = component_analysis(&s)?;
        r.close("max_spectral_radius", max_spectral_radius(&comps), 3.0, 1e-9);
        let mut all = true;
        let mut count = 0;
        for x in enumerate_ball(&f.ctx, 3, DEFAULT_BUDGET)?.filter(|x| !x.is_identity()) {
            let w = axial_witness(&s, &comps, &f.ctx, &x, 2, 8)?;
            let displacement = (&x.inverse() * &w.gamma).len() as f64;
            let axiality = basis_axiality(&w.gamma, 8);
            all &= w.certified()
                && displacement == w.displacement
                && axiality == w.axiality
                && displacement <= w.displacement_bound
                && axiality <= w.axiality_bound;
            count += 1;
        }
        r.value("witnesses", count);
        r.require("witnesses_recheck_m8", all);
        Ok(())
    })
}

fn coned_off(f: &Fixtures) -> Check {
    Recorder::run(12, "coned-off fixture", |r| {
        let set: Vec<ReducedWord> =
            ["a", "a-", "b", "b-"].iter().map(|s| f.ctx.parse_word(s)).collect::<Result<_>>()?;
        let g = f.ctx.parse_word("b")?;
        let cone = coned_off_provider(&f.ctx, &set, &g, ConedOffSettings::default())?;
        r.close("l_b", cone.translation_length(&f.class("b")?)?.value, 0.0, 0.0);
        for k in [4, 6] {
            let settings = ConedOffSettings { fattening: k, ..ConedOffSettings::default() };
            let c = coned_off_provider(&f.ctx, &set, &g, settings)?;
            r.close(&format!("l_a_k{k}"), c.translation_length(&f.class("a")?)?.value, 1.0, 1e-12);
        }
        let e = dilation_estimate(&f.ctx, f.basis.as_ref(), &cone, 6)?;
        r.require("dilation_infinite", e.is_infinite());
        r.require("witness_b", e.witness == Some(f.class("b")?));
        Ok(())
    })
}

fn render(f: &Fixtures) -> (Vec<Check>, Vec<(String, String)>) {
    let (mut theta_csv, mut geodesic_csv) = (String::new(), String::new());
    let checks = vec![
        growth(f),
        endpoints(f),
        curve_shape(f, &mut theta_csv),
        slopes(f),
        qi_bounds(f),
        closed_forms(f),
        multiplicativity(f),
        arclength(f, &mut geodesic_csv),
        boundary(f),
        transversality(f),
        automaton(f),
        coned_off(f),
    ];
    (checks, vec![("theta.csv".into(), theta_csv), ("geodesic.csv".into(), geodesic_csv)])
}

fn report_json(report: &SuiteReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

/// Runs the battery. The determinism check renders everything twice and
/// compares the bytes.
pub fn core_suite() -> Result<SuiteArtifacts> {
    let f = Fixtures::new()?;
    let (mut checks, files) = render(&f);
    let (again, files_again) = render(&f);
    let mut r = Recorder::new(13, "determinism");
    let first = report_json(&SuiteReport { suite: "core", passed: true, checks: checks.clone() });
    let second = report_json(&SuiteReport { suite: "core", passed: true, checks: again });
    r.require("report_identical", first == second);
    r.require("artifacts_identical", files == files_again);
    checks.push(r.finish());
    let passed = checks.iter().all(|c| c.passed);
    let report = SuiteReport { suite: "core", passed, checks };
    let mut out = vec![("verify_core.json".to_string(), report_json(&report))];
    out.extend(files);
    Ok(SuiteArtifacts { report, files: out })
}

/// One line per check.
pub fn summary(report: &SuiteReport) -> String {
    report
        .checks
        .iter()
        .map(|c| format!("[{}] {:>2} {}\n", if c.passed { "PASS" } else { "FAIL" }, c.id, c.name))
        .collect()
}
