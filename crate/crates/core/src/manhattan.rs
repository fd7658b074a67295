//! Manhattan curves `theta_{d*/d}`: the abscissa of convergence `s = theta(t)`
//! of `sum_x exp(-t d*(o,x) - s d(o,x))`.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{GroupContext, ReducedWord};
use crate::metrics::{growth_rate_exact, positive_weights, slope_fit, MetricProvider, Provider};
use crate::transfer::{critical_exponent, log_spectral_radius};

/// Largest Perron residual accepted as a certificate on exact curves.
pub const EXACT_CERTIFICATE_TOL: f64 = 1e-9;
/// Midpoint-convexity slack on exact curves.
pub const EXACT_CONVEXITY_TOL: f64 = 1e-8;
/// Distance from a straight line below which an exact curve is called linear.
pub const LINEARITY_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveMethod {
    Exact,
    Empirical,
}

impl CurveMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            CurveMethod::Exact => "exact",
            CurveMethod::Empirical => "empirical",
        }
    }
}

impl std::str::FromStr for CurveMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(CurveMethod::Exact),
            "empirical" => Ok(CurveMethod::Empirical),
            other => Err(Error::InvalidInput(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThetaValue {
    pub theta: f64,
    /// `|rho - 1|` for the exact method, slope standard error otherwise.
    pub residual: f64,
    pub method: CurveMethod,
}

/// Anything that can evaluate `theta(t)` for a fixed pair.
pub trait ThetaSource: Send + Sync {
    fn theta(&self, t: f64) -> Result<ThetaValue>;
    /// `h(d) = theta(0)`.
    fn h_d(&self) -> f64;
    /// `h(d*)`, the zero of `theta`.
    fn h_dstar(&self) -> f64;
}

/// Exact Manhattan curve of two letter-weight metrics.
#[derive(Clone, Debug)]
pub struct ExactCurve {
    ctx: GroupContext,
    p_star: Provider,
    p: Provider,
    w_star: Vec<f64>,
    w: Vec<f64>,
    h_d: f64,
    h_dstar: f64,
}

impl ExactCurve {
    pub fn new(ctx: &GroupContext, p_star: Provider, p: Provider) -> Result<Self> {
        let w_star = positive_weights(p_star.as_ref())?;
        let w = positive_weights(p.as_ref())?;
        if w.len() != ctx.rank() || w_star.len() != ctx.rank() {
            return Err(Error::InvalidInput("providers and context disagree on rank".into()));
        }
        let h_d = growth_rate_exact(p.as_ref(), ctx)?.value;
        let h_dstar = growth_rate_exact(p_star.as_ref(), ctx)?.value;
        Ok(ExactCurve { ctx: *ctx, p_star, p, w_star, w, h_d, h_dstar })
    }

    /// The curve of the swapped pair, `theta_{d/d*}`.
    pub fn inverse(&self) -> ExactCurve {
        ExactCurve {
            ctx: self.ctx,
            p_star: self.p.clone(),
            p: self.p_star.clone(),
            w_star: self.w.clone(),
            w: self.w_star.clone(),
            h_d: self.h_dstar,
            h_dstar: self.h_d,
        }
    }

    pub fn p_star(&self) -> &Provider {
        &self.p_star
    }

    pub fn p(&self) -> &Provider {
        &self.p
    }

    pub fn context(&self) -> &GroupContext {
        &self.ctx
    }

    /// `|rho(M(t, s)) - 1|`, recomputed independently of the solver.
    pub fn perron_residual(&self, t: f64, s: f64) -> Result<f64> {
        let costs: Vec<f64> = self.w_star.iter().zip(&self.w).map(|(a, b)| t * a + s * b).collect();
        Ok(log_spectral_radius(&self.ctx, &costs)?.log_rho.exp_m1().abs())
    }
}

impl ThetaSource for ExactCurve {
    fn theta(&self, t: f64) -> Result<ThetaValue> {
        let ratio = self
            .w_star
            .iter()
            .zip(&self.w)
            .map(|(a, b)| a / b)
            .fold(0.0, f64::max);
        let base: Vec<f64> = self.w_star.iter().map(|a| t * a).collect();
        let bracket = (-t.abs() * ratio - 1.0, self.h_d + t.abs() * ratio + 1.0);
        let r = critical_exponent(&self.ctx, &base, &self.w, bracket)?;
        Ok(ThetaValue { theta: r.s, residual: r.residual, method: CurveMethod::Exact })
    }

    fn h_d(&self) -> f64 {
        self.h_d
    }

    fn h_dstar(&self) -> f64 {
        self.h_dstar
    }
}

/// Exact `theta(t)` for a pair of letter-weight providers.
pub fn theta_exact(ctx: &GroupContext, p_star: Provider, p: Provider, t: f64) -> Result<ThetaValue> {
    ExactCurve::new(ctx, p_star, p)?.theta(t)
}

/// Slope of `log a_R` against `R`, where `a_R` sums `exp(-t d*(o,x))` over
/// `ceil(d(o,x)) = R`, fitted over the top half of `0..=radius`.
pub fn theta_empirical(
    ctx: &GroupContext,
    p_star: &dyn MetricProvider,
    p: &dyn MetricProvider,
    t: f64,
    radius: usize,
) -> Result<ThetaValue> {
    if radius < 6 {
        return Err(Error::RadiusTooSmall { radius, minimum: 6 });
    }
    // Per-shell log-sum-exp accumulators (running max, scaled sum).
    let mut shells = vec![(f64::NEG_INFINITY, 0.0f64); radius + 1];
    let mut err = None;
    p.for_each_within(ctx, radius as f64, &mut |x, d| {
        if err.is_some() {
            return;
        }
        let ds = match p_star.distance(&ReducedWord::from_reduced(x.to_vec())) {
            Ok(v) => v,
            Err(e) => {
                err = Some(e);
                return;
            }
        };
        let bin = ((d - 1e-9).ceil().max(0.0) as usize).min(radius);
        let e = -t * ds;
        let (m, s) = &mut shells[bin];
        if e > *m {
            *s = *s * (*m - e).exp() + 1.0;
            *m = e;
        } else {
            *s += (e - *m).exp();
        }
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (r, &(m, s)) in shells.iter().enumerate().skip(radius.div_ceil(2)) {
        if s > 0.0 {
            xs.push(r as f64);
            ys.push(m + s.ln());
        }
    }
    if xs.len() < 2 {
        return Err(Error::AllZeroShells);
    }
    let (theta, residual) = slope_fit(&xs, &ys);
    Ok(ThetaValue { theta, residual, method: CurveMethod::Empirical })
}

/// Evenly spaced grid `lo, lo + step, ..., hi`.
pub fn grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(hi >= lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidInput(format!("bad grid {lo}:{hi}:{step}")));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| {
        let t = lo + i as f64 * step;
        // Snap values like 0.30000000000000004 to the decimal grid.
        (t * 1e12).round() / 1e12
    }).collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct CurveValidation {
    /// `theta` strictly decreasing along the grid.
    pub monotone: bool,
    pub midpoint_convex: bool,
    /// Exact points all have Perron residual within tolerance.
    pub certified: bool,
    /// Within [`LINEARITY_TOL`] of the chord (roughly similar pair).
    pub linear: bool,
    /// Largest jump of `theta'` between neighbours.
    pub max_derivative_jump: f64,
    /// `max_derivative_jump <= 10 * step`.
    pub c1_proxy: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ManhattanCurveModel {
    pub d_star: String,
    pub d: String,
    pub grid: Vec<f64>,
    pub theta: Vec<f64>,
    pub theta_prime: Vec<f64>,
    pub method: Vec<CurveMethod>,
    pub residual: Vec<f64>,
    pub validation: CurveValidation,
}

/// Evaluates the curve on `grid` (sorted, at least 5 points) and validates
/// its shape. Validation failures are recorded, not raised.
pub fn build_curve(
    ctx: &GroupContext,
    p_star: Provider,
    p: Provider,
    grid: &[f64],
    method: CurveMethod,
    radius: usize,
) -> Result<ManhattanCurveModel> {
    if grid.len() < 5 {
        return Err(Error::GridTooSmall { got: grid.len(), minimum: 5 });
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidInput("grid must be strictly increasing".into()));
    }
    let exact = match method {
        CurveMethod::Exact => Some(ExactCurve::new(ctx, p_star.clone(), p.clone())?),
        CurveMethod::Empirical => None,
    };
    let mut values = Vec::with_capacity(grid.len());
    for &t in grid {
        values.push(match &exact {
            Some(c) => c.theta(t)?,
            None => theta_empirical(ctx, p_star.as_ref(), p.as_ref(), t, radius)?,
        });
    }
    let theta: Vec<f64> = values.iter().map(|v| v.theta).collect();
    let residual: Vec<f64> = values.iter().map(|v| v.residual).collect();
    let n = grid.len();
    let theta_prime: Vec<f64> = (0..n)
        .map(|i| {
            let (a, b) = (i.saturating_sub(1), (i + 1).min(n - 1));
            (theta[b] - theta[a]) / (grid[b] - grid[a])
        })
        .collect();

    let monotone = theta.windows(2).all(|w| w[0] > w[1]);
    let mut midpoint_convex = true;
    let scale = grid[n - 1] - grid[0];
    for i in 0..n {
        for k in i + 2..n {
            let mid = 0.5 * (grid[i] + grid[k]);
            let j = grid.partition_point(|&g| g < mid - 1e-9 * scale);
            if j < n && (grid[j] - mid).abs() <= 1e-9 * scale {
                let slack = match method {
                    CurveMethod::Exact => EXACT_CONVEXITY_TOL,
                    CurveMethod::Empirical => 2.0 * residual[i].max(residual[j]).max(residual[k]),
                };
                if theta[j] > 0.5 * (theta[i] + theta[k]) + slack {
                    midpoint_convex = false;
                }
            }
        }
    }
    let certified = method == CurveMethod::Exact && residual.iter().all(|&r| r <= EXACT_CERTIFICATE_TOL);
    let chord = (theta[n - 1] - theta[0]) / scale;
    let linear = method == CurveMethod::Exact
        && (0..n).all(|i| (theta[i] - theta[0] - chord * (grid[i] - grid[0])).abs() <= LINEARITY_TOL);
    let max_derivative_jump = theta_prime.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
    let step = grid.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    Ok(ManhattanCurveModel {
        d_star: p_star.name().to_string(),
        d: p.name().to_string(),
        grid: grid.to_vec(),
        method: vec![method; n],
        theta,
        theta_prime,
        residual,
        validation: CurveValidation {
            monotone,
            midpoint_convex,
            certified,
            linear,
            max_derivative_jump,
            c1_proxy: max_derivative_jump <= 10.0 * step,
        },
    })
}

impl ManhattanCurveModel {
    fn lookup(&self, t: f64) -> Option<usize> {
        let scale = (self.grid[self.grid.len() - 1] - self.grid[0]).max(1.0);
        self.grid.iter().position(|&g| (g - t).abs() <= 1e-9 * scale)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,theta,theta_prime,method,residual")?;
        for i in 0..self.grid.len() {
            writeln!(
                out,
                "{},{},{},{},{}",
                self.grid[i],
                self.theta[i],
                self.theta_prime[i],
                self.method[i].as_str(),
                self.residual[i]
            )?;
        }
        Ok(())
    }
}

/// Piecewise-linear reading of a sampled curve inside its grid.
impl ThetaSource for ManhattanCurveModel {
    fn theta(&self, t: f64) -> Result<ThetaValue> {
        let n = self.grid.len();
        let (lo, hi) = (self.grid[0], self.grid[n - 1]);
        if !(lo..=hi).contains(&t) {
            return Err(Error::OutOfRange { value: t, lo, hi });
        }
        if let Some(i) = self.lookup(t) {
            return Ok(ThetaValue { theta: self.theta[i], residual: self.residual[i], method: self.method[i] });
        }
        let j = self.grid.partition_point(|&g| g < t);
        let u = (t - self.grid[j - 1]) / (self.grid[j] - self.grid[j - 1]);
        Ok(ThetaValue {
            theta: self.theta[j - 1] + u * (self.theta[j] - self.theta[j - 1]),
            residual: self.residual[j - 1].max(self.residual[j]),
            method: self.method[j],
        })
    }

    fn h_d(&self) -> f64 {
        self.theta(0.0).map_or(f64::NAN, |v| v.theta)
    }

    fn h_dstar(&self) -> f64 {
        let n = self.grid.len();
        for i in 1..n {
            let (a, b) = (self.theta[i - 1], self.theta[i]);
            if a >= 0.0 && b <= 0.0 && a > b {
                return self.grid[i - 1] + (self.grid[i] - self.grid[i - 1]) * a / (a - b);
            }
        }
        f64::NAN
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct AsymptoticSlopes {
    /// `theta(-t_far) / t_far`, estimating `Dil(d*, d)`.
    pub slope_minus: f64,
    /// `-theta(t_far) / t_far`, estimating `1 / Dil(d, d*)`.
    pub slope_plus: f64,
}

pub fn asymptotic_slopes(model: &ManhattanCurveModel, t_far: f64) -> Result<AsymptoticSlopes> {
    if !(t_far > 0.0) {
        return Err(Error::InvalidInput("t_far must be positive".into()));
    }
    let n = model.grid.len();
    let range = || Error::OutOfRange { value: t_far, lo: model.grid[0], hi: model.grid[n - 1] };
    let plus = model.lookup(t_far).ok_or_else(range)?;
    let minus = model.lookup(-t_far).ok_or_else(range)?;
    Ok(AsymptoticSlopes {
        slope_minus: model.theta[minus] / t_far,
        slope_plus: -model.theta[plus] / t_far,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::metrics::{growth_rate_empirical, letter_weight_provider, word_metric_provider};

    fn f2() -> GroupContext {
        GroupContext::new(2).unwrap()
    }

    fn lw(w: &[f64]) -> Provider {
        Arc::new(letter_weight_provider(&f2(), w).unwrap())
    }

    fn reference() -> ExactCurve {
        ExactCurve::new(&f2(), lw(&[1.0, 2.0]), lw(&[2.0, 1.0])).unwrap()
    }

    #[test]
    fn identical_and_scaled_pairs() {
        let d = lw(&[2.0, 1.0]);
        let same = ExactCurve::new(&f2(), d.clone(), d.clone()).unwrap();
        let h = same.h_d();
        for t in [-1.0, 0.0, 1.0, 2.0] {
            assert!((same.theta(t).unwrap().theta - (h - t)).abs() < 1e-10);
        }
        let doubled = ExactCurve::new(&f2(), lw(&[4.0, 2.0]), d).unwrap();
        for t in [-1.0, 0.5, 2.0] {
            assert!((doubled.theta(t).unwrap().theta - (h - 2.0 * t)).abs() < 1e-10);
        }
    }

    #[test]
    fn endpoints() {
        let c = reference();
        let at0 = c.theta(0.0).unwrap();
        assert!((at0.theta - c.h_d()).abs() < 1e-9);
        assert!(c.theta(c.h_dstar()).unwrap().theta.abs() < 1e-9);
        assert!(at0.residual <= EXACT_CERTIFICATE_TOL);
        assert!(c.perron_residual(0.0, at0.theta).unwrap() <= EXACT_CERTIFICATE_TOL);
    }

    #[test]
    fn empirical_matches_exact() {
        let ctx = f2();
        let basis = lw(&[1.0, 1.0]);
        let e = theta_empirical(&ctx, basis.as_ref(), basis.as_ref(), 0.5, 12).unwrap();
        assert!((e.theta - (3f64.ln() - 0.5)).abs() < 0.05);
        let c = reference();
        let e = theta_empirical(&ctx, c.p_star().as_ref(), c.p().as_ref(), 1.0, 12).unwrap();
        assert!((e.theta - c.theta(1.0).unwrap().theta).abs() < 0.05, "{e:?}");
        assert!(matches!(
            theta_empirical(&ctx, basis.as_ref(), basis.as_ref(), 0.0, 5),
            Err(Error::RadiusTooSmall { .. })
        ));
    }

    #[test]
    fn empirical_word_metric_growth() {
        let ctx = f2();
        let s: Vec<ReducedWord> =
            ["a", "a-", "b", "b-", "ab", "b-a-"].iter().map(|x| ctx.parse_word(x).unwrap()).collect();
        let ws = word_metric_provider(&ctx, &s).unwrap();
        let basis = letter_weight_provider(&ctx, &[1.0, 1.0]).unwrap();
        let th = theta_empirical(&ctx, &basis, &ws, 0.0, 7).unwrap();
        let h = growth_rate_empirical(&ws, &ctx, 7).unwrap();
        assert!((th.theta - h.value).abs() < 0.05, "{th:?} {h:?}");
    }

    #[test]
    fn curve_shape() {
        let ctx = f2();
        let c = reference();
        let g = grid(-2.0, 4.0, 0.1).unwrap();
        assert_eq!(g.len(), 61);
        let m = build_curve(&ctx, c.p_star().clone(), c.p().clone(), &g, CurveMethod::Exact, 0).unwrap();
        let v = &m.validation;
        assert!(v.monotone && v.midpoint_convex && v.certified && !v.linear && v.c1_proxy);
        assert!(m.theta_prime.iter().all(|&d| d < 0.0));
        let inv = c.inverse();
        for (&t, &th) in m.grid.iter().zip(&m.theta) {
            assert!((inv.theta(th).unwrap().theta - t).abs() < 1e-6);
        }
        let d = lw(&[2.0, 1.0]);
        let flat = build_curve(&ctx, d.clone(), d, &grid(-2.0, 2.0, 0.5).unwrap(), CurveMethod::Exact, 0).unwrap();
        assert!(flat.validation.linear);
        assert!(matches!(
            build_curve(&ctx, c.p_star().clone(), c.p().clone(), &[0.0, 1.0, 2.0], CurveMethod::Exact, 0),
            Err(Error::GridTooSmall { got: 3, minimum: 5 })
        ));
    }

    #[test]
    fn slopes() {
        let ctx = f2();
        let d = lw(&[2.0, 1.0]);
        let g = grid(-50.0, 50.0, 25.0).unwrap();
        let same = build_curve(&ctx, d.clone(), d.clone(), &g, CurveMethod::Exact, 0).unwrap();
        let s = asymptotic_slopes(&same, 50.0).unwrap();
        assert!((s.slope_plus - 1.0).abs() < 0.05 && (s.slope_minus - 1.0).abs() < 0.05);
        // d* = 2d: theta(t) = h - 2t, so -theta(t)/t -> 2 = 1 / Dil(d, 2d).
        let doubled = build_curve(&ctx, lw(&[4.0, 2.0]), d, &g, CurveMethod::Exact, 0).unwrap();
        let s = asymptotic_slopes(&doubled, 50.0).unwrap();
        assert!((s.slope_plus - 2.0).abs() < 0.05 && (s.slope_minus - 2.0).abs() < 0.05);
        let c = reference();
        let m = build_curve(&ctx, c.p_star().clone(), c.p().clone(), &g, CurveMethod::Exact, 0).unwrap();
        let s = asymptotic_slopes(&m, 50.0).unwrap();
        assert!((s.slope_plus - 0.5).abs() <= 0.005 && (s.slope_minus - 2.0).abs() <= 0.02);
        assert!(asymptotic_slopes(&m, 60.0).is_err());
    }

    #[test]
    fn csv_layout() {
        let ctx = f2();
        let c = reference();
        let m = build_curve(&ctx, c.p_star().clone(), c.p().clone(), &grid(0.0, 1.0, 0.25).unwrap(), CurveMethod::Exact, 0)
            .unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,theta,theta_prime,method,residual"));
        assert_eq!(lines.clone().count(), 5);
        assert!(lines.all(|l| l.split(',').nth(3) == Some("exact")));
    }

    #[test]
    fn sampled_model_reads_back() {
        let ctx = f2();
        let c = reference();
        let m = build_curve(&ctx, c.p_star().clone(), c.p().clone(), &grid(-1.0, 2.0, 0.01).unwrap(), CurveMethod::Exact, 0)
            .unwrap();
        assert!((m.h_d() - c.h_d()).abs() < 1e-9);
        assert!((m.h_dstar() - c.h_dstar()).abs() < 1e-4);
        assert!(m.theta(5.0).is_err());
    }
}
