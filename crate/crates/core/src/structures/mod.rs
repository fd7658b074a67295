//! Points of the space of metric structures, the symmetrized dilation
//! distance, Manhattan geodesics and their boundary limits.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::group::{ClassCatalog, CyclicWord, GroupContext};
use crate::manhattan::{ExactCurve, ThetaSource};
use crate::metrics::{
    boundary_difference, growth_rate_exact, linear_combination, positive_weights, LinearCombination,
    MetricProvider, Provider,
};

/// Lengths at or below this magnitude count as zero.
pub const ZERO_TOL: f64 = 1e-12;
/// Per-length maxima closer than this form a plateau.
pub const PLATEAU_TOL: f64 = 1e-12;
/// Largest `gamma` the arc-length solver will search.
pub const GAMMA_CAP: f64 = 1e6;

fn display<T: fmt::Display, S: Serializer>(v: &Option<T>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.serialize_str(&v.to_string()),
        None => s.serialize_none(),
    }
}

/// Serializes infinities as strings so reports stay valid JSON.
fn extended<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_str(if *v > 0.0 { "inf" } else { "-inf" })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DilationEstimate {
    /// `max l1/l2` over the enumerated classes; `+inf` when some class has
    /// `l2 = 0 < l1`.
    #[serde(serialize_with = "extended")]
    pub value: f64,
    #[serde(serialize_with = "display")]
    pub witness: Option<CyclicWord>,
    /// Running maxima after each cyclic length `1, 2, ...`.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub per_length: Vec<f64>,
    pub plateau: bool,
    /// Classes on which `l2` vanishes (skipped in the ratio).
    pub zero_denominator: usize,
    /// Classes on which both lengths vanish.
    pub both_zero: usize,
    pub max_length: usize,
}

impl DilationEstimate {
    pub fn is_infinite(&self) -> bool {
        self.value.is_infinite()
    }
}

/// Exact maximum of `l1/l2` over conjugacy classes of cyclic length at most
/// `max_length`.
pub fn dilation_estimate(
    ctx: &GroupContext,
    l1: &dyn MetricProvider,
    l2: &dyn MetricProvider,
    max_length: usize,
) -> Result<DilationEstimate> {
    if max_length < 2 {
        return Err(Error::InvalidInput(format!("max_length must be at least 2, got {max_length}")));
    }
    let catalog = ClassCatalog::shared(ctx, max_length)?;
    let mut best = f64::NEG_INFINITY;
    let mut witness: Option<&CyclicWord> = None;
    let mut per_length = Vec::with_capacity(max_length);
    let (mut zero_denominator, mut both_zero, mut seen) = (0, 0, 0);
    for n in 1..=max_length {
        for c in catalog.of_length(n) {
            seen += 1;
            let a = l1.translation_length(c)?.value;
            let b = l2.translation_length(c)?.value;
            if b.abs() <= ZERO_TOL {
                zero_denominator += 1;
                if a.abs() <= ZERO_TOL {
                    both_zero += 1;
                } else if best < f64::INFINITY {
                    best = f64::INFINITY;
                    witness = Some(c);
                }
                continue;
            }
            let r = a / b;
            if r > best {
                best = r;
                witness = Some(c);
            }
        }
        per_length.push(best);
        if best == f64::INFINITY {
            break;
        }
    }
    if both_zero == seen {
        return Err(Error::DegeneratePair("both lengths vanish on every enumerated class".into()));
    }
    let k = per_length.len().min(3);
    let tail = &per_length[per_length.len() - k..];
    let plateau = tail.iter().all(|v| {
        (v == &tail[0]) || (v - tail[0]).abs() <= PLATEAU_TOL * tail[0].abs().max(1.0)
    });
    Ok(DilationEstimate {
        value: best,
        witness: witness.cloned(),
        per_length,
        plateau,
        zero_denominator,
        both_zero,
        max_length,
    })
}

/// `log(Dil(l1, l2) Dil(l2, l1))` by enumeration.
pub fn delta_distance(
    ctx: &GroupContext,
    l1: &dyn MetricProvider,
    l2: &dyn MetricProvider,
    max_length: usize,
) -> Result<f64> {
    let f = dilation_estimate(ctx, l1, l2, max_length)?;
    let b = dilation_estimate(ctx, l2, l1, max_length)?;
    if f.is_infinite() || b.is_infinite() {
        return Err(Error::BoundaryPair("a dilation is infinite".into()));
    }
    Ok((f.value * b.value).ln())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Provenance {
    Interior { t: f64, theta: f64 },
    Endpoint,
    Recovered,
}

/// How a point was brought to growth rate 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Normalization {
    /// Multiplied by its exact growth rate.
    ExactGrowth { h: f64 },
    /// A curve point `t l* + theta(t) l`, which has growth rate 1.
    Curve,
    /// Left as given (no exact growth rate available).
    Unscaled,
}

/// A metric structure represented by a length functional.
#[derive(Clone, Debug)]
pub struct MetricStructurePoint {
    pub functional: Provider,
    pub normalization: Normalization,
    pub provenance: Provenance,
}

impl MetricStructurePoint {
    /// Scales by the exact growth rate when `p` is a positive letter-weight
    /// functional, otherwise keeps it as is.
    pub fn normalized(ctx: &GroupContext, p: Provider, provenance: Provenance) -> Result<Self> {
        if positive_weights(p.as_ref()).is_err() {
            return Ok(MetricStructurePoint { functional: p, normalization: Normalization::Unscaled, provenance });
        }
        let h = growth_rate_exact(p.as_ref(), ctx)?.value;
        let name = p.name().to_string();
        let scaled = linear_combination(h, 0.0, p.clone(), p)?.named(format!("{h}*{name}"));
        Ok(MetricStructurePoint {
            functional: Arc::new(scaled),
            normalization: Normalization::ExactGrowth { h },
            provenance,
        })
    }

    pub fn length(&self, c: &CyclicWord) -> Result<f64> {
        Ok(self.functional.translation_length(c)?.value)
    }

    pub fn letter_weights(&self) -> Option<Vec<f64>> {
        self.functional.letter_weights()
    }
}

/// `l_t = t l_{d*} + theta(t) l_d`.
pub fn geodesic_point(
    p: Provider,
    p_star: Provider,
    curve: &dyn ThetaSource,
    t: f64,
) -> Result<MetricStructurePoint> {
    let theta = curve.theta(t)?.theta;
    let c = linear_combination(t, theta, p_star, p)?;
    let name = format!("l_{t}");
    Ok(MetricStructurePoint {
        functional: Arc::new(c.named(name)),
        normalization: Normalization::Curve,
        provenance: Provenance::Interior { t, theta },
    })
}

/// The data the closed-form dilations along a Manhattan geodesic depend on.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ClosedForm {
    pub h_d: f64,
    pub h_dstar: f64,
    /// `Dil(d, d*)`.
    pub dil_ddstar: f64,
    /// `Dil(d*, d)`.
    pub dil_dstard: f64,
}

/// Dilations between `rho_t` and the two reference points. `D_{s,t}` is
/// `Dil(d_s, d_t)`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MancompDilations {
    pub t: f64,
    pub d_0t: f64,
    pub d_t0: f64,
    pub d_hstar_t: f64,
    pub d_t_hstar: f64,
    pub delta_t0: f64,
    pub delta_t_hstar: f64,
}

impl ClosedForm {
    pub fn new(h_d: f64, h_dstar: f64, dil_ddstar: f64, dil_dstard: f64) -> Result<Self> {
        for (v, what) in [(h_d, "h(d)"), (h_dstar, "h(d*)"), (dil_ddstar, "Dil(d,d*)"), (dil_dstard, "Dil(d*,d)")] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidInput(format!("{what} must be positive and finite, got {v}")));
            }
        }
        Ok(ClosedForm { h_d, h_dstar, dil_ddstar, dil_dstard })
    }

    /// `(D_{0,t}, D_{t,0})`.
    pub fn about_origin(&self, t: f64, theta: f64) -> (f64, f64) {
        let h = self.h_d;
        if t > 0.0 {
            (h / (t / self.dil_ddstar + theta), (t * self.dil_dstard + theta) / h)
        } else if t < 0.0 {
            (h / (t * self.dil_dstard + theta), (t / self.dil_ddstar + theta) / h)
        } else {
            (1.0, 1.0)
        }
    }

    /// `(D_{h*,t}, D_{t,h*})`.
    pub fn about_endpoint(&self, t: f64, theta: f64) -> (f64, f64) {
        let hs = self.h_dstar;
        if t < hs {
            (hs / (theta / self.dil_dstard + t), (theta * self.dil_ddstar + t) / hs)
        } else if t > hs {
            (hs / (theta * self.dil_ddstar + t), (theta / self.dil_dstard + t) / hs)
        } else {
            (1.0, 1.0)
        }
    }

    pub fn dilations(&self, t: f64, theta: f64) -> MancompDilations {
        let (d_0t, d_t0) = self.about_origin(t, theta);
        let (d_hstar_t, d_t_hstar) = self.about_endpoint(t, theta);
        MancompDilations {
            t,
            d_0t,
            d_t0,
            d_hstar_t,
            d_t_hstar,
            delta_t0: (d_0t * d_t0).ln(),
            delta_t_hstar: (d_hstar_t * d_t_hstar).ln(),
        }
    }

    /// `D_{s,t}` for any two parameters, chained through the origin.
    pub fn between(&self, s: f64, theta_s: f64, t: f64, theta_t: f64) -> f64 {
        if s == t {
            return 1.0;
        }
        let (d_0s, d_s0) = self.about_origin(s, theta_s);
        let (d_0t, d_t0) = self.about_origin(t, theta_t);
        let origin_between = s.min(t) <= 0.0 && 0.0 <= s.max(t);
        match (s < t, origin_between) {
            (_, true) => d_s0 * d_0t,
            (true, false) if s > 0.0 => d_0t / d_0s,
            (true, false) => d_s0 / d_t0,
            (false, false) if t > 0.0 => d_s0 / d_t0,
            (false, false) => d_0t / d_0s,
        }
    }

    /// `Delta(rho_s, rho_t)` from the closed forms.
    pub fn delta_between(&self, s: f64, theta_s: f64, t: f64, theta_t: f64) -> f64 {
        (self.between(s, theta_s, t, theta_t) * self.between(t, theta_t, s, theta_s)).ln()
    }
}

/// Evaluates the closed-form dilations at `t` using `curve` for `theta(t)`.
pub fn mancomp_dilations(form: &ClosedForm, curve: &dyn ThetaSource, t: f64) -> Result<MancompDilations> {
    Ok(form.dilations(t, curve.theta(t)?.theta))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct MultiplicativityReport {
    pub r: f64,
    pub s: f64,
    pub t: f64,
    pub d_rs: f64,
    pub d_st: f64,
    pub d_rt: f64,
    /// `|D_{r,s} D_{s,t} / D_{r,t} - 1|`.
    pub defect: f64,
}

/// Enumerated check of `D_{r,t} = D_{r,s} D_{s,t}` for `r <= s <= t`.
pub fn multiplicativity_check(
    ctx: &GroupContext,
    p: Provider,
    p_star: Provider,
    curve: &dyn ThetaSource,
    (r, s, t): (f64, f64, f64),
    max_length: usize,
) -> Result<MultiplicativityReport> {
    if !(r <= s && s <= t) {
        return Err(Error::InvalidInput(format!("expected r <= s <= t, got ({r}, {s}, {t})")));
    }
    let point = |u: f64| geodesic_point(p.clone(), p_star.clone(), curve, u);
    let (pr, ps, pt) = (point(r)?, point(s)?, point(t)?);
    let dil = |a: &MetricStructurePoint, b: &MetricStructurePoint, same: bool| -> Result<f64> {
        if same {
            return Ok(1.0);
        }
        Ok(dilation_estimate(ctx, a.functional.as_ref(), b.functional.as_ref(), max_length)?.value)
    };
    let d_rs = dil(&pr, &ps, r == s)?;
    let d_st = dil(&ps, &pt, s == t)?;
    let d_rt = dil(&pr, &pt, r == t)?;
    Ok(MultiplicativityReport { r, s, t, d_rs, d_st, d_rt, defect: (d_rs * d_st / d_rt - 1.0).abs() })
}

/// Arc-length parametrization `sigma_t = rho_{gamma(t)}` of a Manhattan
/// geodesic.
#[derive(Clone)]
pub struct GeodesicParam {
    p: Provider,
    p_star: Provider,
    curve: Arc<dyn ThetaSource>,
    pub form: ClosedForm,
    /// `Delta(rho, rho*)`.
    pub delta: f64,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct GeodesicSample {
    pub t: f64,
    pub gamma_t: f64,
    pub delta_from_rho: f64,
    pub delta_from_rhostar: f64,
}

/// Builds the arc-length parametrization from the curve and the two
/// dilations of the pair.
pub fn arclength_param(
    p: Provider,
    p_star: Provider,
    curve: Arc<dyn ThetaSource>,
    dil_ddstar: f64,
    dil_dstard: f64,
) -> Result<GeodesicParam> {
    let form = ClosedForm::new(curve.h_d(), curve.h_dstar(), dil_ddstar, dil_dstard)?;
    let delta = (dil_ddstar * dil_dstard).ln();
    if !(delta > ZERO_TOL) {
        return Err(Error::DegeneratePair("the pair is roughly similar".into()));
    }
    Ok(GeodesicParam { p, p_star, curve, form, delta })
}

/// Exact-curve pair with dilations enumerated up to `max_length`.
pub fn exact_geodesic(
    ctx: &GroupContext,
    p: Provider,
    p_star: Provider,
    max_length: usize,
) -> Result<GeodesicParam> {
    let f = dilation_estimate(ctx, p.as_ref(), p_star.as_ref(), max_length)?;
    let b = dilation_estimate(ctx, p_star.as_ref(), p.as_ref(), max_length)?;
    if f.is_infinite() || b.is_infinite() {
        return Err(Error::BoundaryPair("a dilation is infinite".into()));
    }
    let curve = ExactCurve::new(ctx, p_star.clone(), p.clone())?;
    arclength_param(p, p_star, Arc::new(curve), f.value, b.value)
}

impl GeodesicParam {
    pub fn curve(&self) -> &dyn ThetaSource {
        self.curve.as_ref()
    }

    pub fn providers(&self) -> (&Provider, &Provider) {
        (&self.p, &self.p_star)
    }

    /// `Delta(rho_0, rho_u)` by the closed form.
    pub fn delta_from_rho(&self, u: f64) -> Result<f64> {
        Ok(self.form.dilations(u, self.curve.theta(u)?.theta).delta_t0)
    }

    pub fn delta_from_rhostar(&self, u: f64) -> Result<f64> {
        Ok(self.form.dilations(u, self.curve.theta(u)?.theta).delta_t_hstar)
    }

    /// The curve parameter at arc length `t`.
    pub fn gamma(&self, t: f64) -> Result<f64> {
        if t == 0.0 {
            return Ok(0.0);
        }
        if !t.is_finite() {
            return Err(Error::InvalidInput(format!("arc length must be finite, got {t}")));
        }
        let sign = t.signum();
        let target = t.abs();
        let mut hi = 1.0;
        let out = || Error::OutOfRange { value: t, lo: -GAMMA_CAP, hi: GAMMA_CAP };
        // Far out the closed form loses all precision to cancellation, and
        // a curve that cannot be evaluated there is out of range too.
        let delta = |u: f64| match self.delta_from_rho(u) {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(out()),
        };
        while delta(sign * hi)? < target {
            hi *= 2.0;
            if hi > GAMMA_CAP {
                return Err(out());
            }
        }
        let mut lo = 0.0;
        while hi - lo > 1e-14 * hi.max(1.0) {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if delta(sign * mid)? < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(sign * 0.5 * (lo + hi))
    }

    pub fn sigma(&self, t: f64) -> Result<MetricStructurePoint> {
        geodesic_point(self.p.clone(), self.p_star.clone(), self.curve.as_ref(), self.gamma(t)?)
    }

    pub fn sample(&self, t: f64) -> Result<GeodesicSample> {
        let g = self.gamma(t)?;
        let m = self.form.dilations(g, self.curve.theta(g)?.theta);
        Ok(GeodesicSample { t, gamma_t: g, delta_from_rho: m.delta_t0, delta_from_rhostar: m.delta_t_hstar })
    }
}

pub fn write_geodesic_csv<W: Write>(samples: &[GeodesicSample], mut out: W) -> Result<()> {
    writeln!(out, "t,gamma_t,delta_from_rho,delta_from_rhostar")?;
    for s in samples {
        writeln!(out, "{},{},{},{}", s.t, s.gamma_t, s.delta_from_rho, s.delta_from_rhostar)?;
    }
    Ok(())
}

/// Reparametrization between the geodesic through `tau = sigma_s`,
/// `tau* = sigma_{s*}` and the one through `rho`, `rho*`.
pub fn consistency_t(s: f64, s_star: f64, delta_tau: f64, t: f64) -> Result<f64> {
    if s == s_star {
        return Err(Error::ZeroDenominator("s = s*"));
    }
    if !(delta_tau > 0.0) {
        return Err(Error::ZeroDenominator("Delta(tau, tau*)"));
    }
    Ok(t * (s_star - s) / delta_tau + s)
}

/// `max |log(l1/l2) - median|` over a deterministic sample of classes;
/// zero when the two functionals are proportional on the sample.
pub fn projective_defect(
    ctx: &GroupContext,
    l1: &dyn MetricProvider,
    l2: &dyn MetricProvider,
    max_length: usize,
    count: usize,
) -> Result<f64> {
    let catalog = ClassCatalog::shared(ctx, max_length)?;
    let mut logs = Vec::with_capacity(count);
    for c in catalog.sample(count) {
        let a = l1.translation_length(c)?.value;
        let b = l2.translation_length(c)?.value;
        if a.abs() <= ZERO_TOL && b.abs() <= ZERO_TOL {
            continue;
        }
        if a.abs() <= ZERO_TOL || b.abs() <= ZERO_TOL {
            return Ok(f64::INFINITY);
        }
        logs.push((a / b).ln());
    }
    if logs.is_empty() {
        return Err(Error::DegeneratePair("both functionals vanish on the sample".into()));
    }
    let mut sorted = logs.clone();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = if n % 2 == 1 { sorted[n / 2] } else { 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]) };
    Ok(logs.iter().map(|l| (l - median).abs()).fold(0.0, f64::max))
}

#[derive(Clone, Debug)]
pub struct BoundaryLimits {
    /// `Dil(d, d*) l_{d*} - l_d`.
    pub plus: Arc<LinearCombination>,
    /// `Dil(d*, d) l_d - l_{d*}`.
    pub minus: Arc<LinearCombination>,
}

/// Endpoints of the Manhattan geodesic, checked nonnegative on every class
/// up to `max_length`.
pub fn boundary_limits(
    ctx: &GroupContext,
    p: Provider,
    p_star: Provider,
    dil_ddstar: f64,
    dil_dstard: f64,
    max_length: usize,
) -> Result<BoundaryLimits> {
    if !dil_ddstar.is_finite() || !dil_dstard.is_finite() {
        return Err(Error::BoundaryPair("boundary limits need finite dilations".into()));
    }
    let plus = boundary_difference(p.clone(), p_star.clone(), dil_ddstar)?.named("l_inf");
    let minus = boundary_difference(p_star, p, dil_dstard)?.named("l_-inf");
    let catalog = ClassCatalog::shared(ctx, max_length)?;
    for c in catalog.classes() {
        plus.translation_length(c)?;
        minus.translation_length(c)?;
    }
    Ok(BoundaryLimits { plus: Arc::new(plus), minus: Arc::new(minus) })
}

#[derive(Clone, Debug, Serialize)]
pub struct LimitCheck {
    pub t: f64,
    pub theta: f64,
    pub classes: usize,
    /// `max |l_t/(-theta) - l_inf| / (l_inf + l_-inf)` over the sample.
    pub max_relative_error: f64,
}

/// Compares `l_t / (-theta(t))` with `l_inf` on `count` sampled classes.
pub fn boundary_limit_check(
    ctx: &GroupContext,
    p: Provider,
    p_star: Provider,
    curve: &dyn ThetaSource,
    limits: &BoundaryLimits,
    t: f64,
    max_length: usize,
    count: usize,
) -> Result<LimitCheck> {
    let point = geodesic_point(p, p_star, curve, t)?;
    let Provenance::Interior { theta, .. } = point.provenance else { unreachable!() };
    if !(theta < 0.0) {
        return Err(Error::InvalidInput(format!("theta({t}) = {theta} is not negative")));
    }
    let catalog = ClassCatalog::shared(ctx, max_length)?;
    let sample = catalog.sample(count);
    let mut worst: f64 = 0.0;
    for c in &sample {
        let lt = point.length(c)? / -theta;
        let li = limits.plus.translation_length(c)?.value;
        let scale = li + limits.minus.translation_length(c)?.value;
        if scale <= ZERO_TOL {
            return Err(Error::InvalidInput(format!("boundary pair vanishes on {c}")));
        }
        worst = worst.max((lt - li).abs() / scale);
    }
    Ok(LimitCheck { t, theta, classes: sample.len(), max_relative_error: worst })
}

#[derive(Clone, Debug, Serialize)]
pub struct TransversalityReport {
    /// `min (l_inf + l_-inf) / |x|` over the enumerated classes.
    pub positivity_proxy: f64,
    #[serde(serialize_with = "display")]
    pub positivity_witness: Option<CyclicWord>,
    /// `Dil(d, d*)` for `d = l_inf + 2 l_-inf`, `d* = 2 l_inf + l_-inf`.
    pub dil_forward: DilationEstimate,
    pub dil_backward: DilationEstimate,
    /// `max |2 l_{d*} - l_d - 3 l_inf|`.
    pub recovery_defect: f64,
    /// Both dilations equal 2, as for a genuine boundary pair.
    pub boundary_signature: bool,
    pub transverse: bool,
}

pub fn transversality_check(
    ctx: &GroupContext,
    l_inf: Provider,
    l_minf: Provider,
    max_length: usize,
) -> Result<TransversalityReport> {
    let catalog = ClassCatalog::shared(ctx, max_length)?;
    let mut proxy = f64::INFINITY;
    let mut witness = None;
    let (mut plus_zero, mut minus_zero) = (true, true);
    for c in catalog.classes() {
        let a = l_inf.translation_length(c)?.value;
        let b = l_minf.translation_length(c)?.value;
        if a < -ZERO_TOL || b < -ZERO_TOL {
            return Err(Error::NegativeLength { class: c.to_string(), value: a.min(b) });
        }
        plus_zero &= a <= ZERO_TOL;
        minus_zero &= b <= ZERO_TOL;
        let r = (a + b) / c.len() as f64;
        if r < proxy {
            proxy = r;
            witness = Some(c.clone());
        }
    }
    if plus_zero || minus_zero {
        return Err(Error::DegeneratePair("a boundary functional vanishes on every enumerated class".into()));
    }
    let d = linear_combination(1.0, 2.0, l_inf.clone(), l_minf.clone())?.named("d");
    let d_star = linear_combination(2.0, 1.0, l_inf.clone(), l_minf)?.named("d*");
    let dil_forward = dilation_estimate(ctx, &d, &d_star, max_length)?;
    let dil_backward = dilation_estimate(ctx, &d_star, &d, max_length)?;
    let mut defect: f64 = 0.0;
    for c in catalog.classes() {
        let v = 2.0 * d_star.translation_length(c)?.value
            - d.translation_length(c)?.value
            - 3.0 * l_inf.translation_length(c)?.value;
        defect = defect.max(v.abs());
    }
    let two = |v: f64| (v - 2.0).abs() <= PLATEAU_TOL;
    Ok(TransversalityReport {
        positivity_proxy: proxy,
        positivity_witness: witness,
        boundary_signature: two(dil_forward.value) && two(dil_backward.value),
        transverse: proxy > ZERO_TOL,
        dil_forward,
        dil_backward,
        recovery_defect: defect,
    })
}

#[derive(Clone, Debug)]
pub struct RecoveredInterior {
    pub point: MetricStructurePoint,
    pub dil: DilationEstimate,
    /// `l_inf` vanished on every enumerated class.
    pub degenerate_boundary: bool,
    /// `max |(l_{d*} - l_d) - l_inf|`.
    pub reproduction_defect: f64,
}

/// `d* = d + d_inf`; the enumerated `Dil(d, d*)` must be 1.
pub fn recover_interior(
    ctx: &GroupContext,
    l_d: Provider,
    l_inf: Provider,
    max_length: usize,
) -> Result<RecoveredInterior> {
    let d_star: Provider = Arc::new(linear_combination(1.0, 1.0, l_d.clone(), l_inf.clone())?.named("d+d_inf"));
    let dil = dilation_estimate(ctx, l_d.as_ref(), d_star.as_ref(), max_length)?;
    if !((dil.value - 1.0).abs() <= PLATEAU_TOL) {
        return Err(Error::InconsistentBoundary { dil: dil.value });
    }
    let catalog = ClassCatalog::shared(ctx, max_length)?;
    let back = linear_combination(1.0, -1.0, d_star.clone(), l_d)?;
    let (mut defect, mut degenerate): (f64, bool) = (0.0, true);
    for c in catalog.classes() {
        let li = l_inf.translation_length(c)?.value;
        degenerate &= li.abs() <= ZERO_TOL;
        defect = defect.max((back.translation_length(c)?.value - li).abs());
    }
    Ok(RecoveredInterior {
        point: MetricStructurePoint::normalized(ctx, d_star, Provenance::Recovered)?,
        dil,
        degenerate_boundary: degenerate,
        reproduction_defect: defect,
    })
}

#[cfg(test)]
mod tests;
