//! Pseudo-metric providers and the quantities derived from them: stable
//! translation lengths, growth rates, Gromov products and hyperbolicity
//! diagnostics.

mod combination;
mod letter;
mod search;

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{BallIndex, CyclicWord, GroupContext, Letter, ReducedWord, DEFAULT_BUDGET};
use crate::transfer::critical_exponent;

pub use combination::{boundary_difference, linear_combination, LinearCombination, Pullback};
pub use letter::{letter_count_provider, letter_weight_provider, LetterLinearProvider};
pub use search::{
    coned_off_provider, word_metric_provider, ConedDistance, ConedOffProvider, ConedOffSettings,
    WordMetricProvider,
};

/// Default power bound for Fekete estimates of stable length.
pub const DEFAULT_FEKETE_POWER: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Capabilities {
    pub has_distance: bool,
    pub exact_translation_length: bool,
}

/// A stable translation length, either exact or a Fekete estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LengthValue {
    pub value: f64,
    pub residual: f64,
    pub exact: bool,
}

impl LengthValue {
    pub fn exact(value: f64) -> Self {
        LengthValue { value, residual: 0.0, exact: true }
    }

    pub fn estimate(value: f64, residual: f64) -> Self {
        LengthValue { value, residual, exact: false }
    }
}

/// A left-invariant pseudo metric on `F_k`, seen through `d(o, .)` and/or
/// its stable translation length function.
pub trait MetricProvider: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;

    fn rank(&self) -> usize;

    fn capabilities(&self) -> Capabilities;

    /// `d(o, x)`.
    fn distance(&self, _x: &ReducedWord) -> Result<f64> {
        Err(missing(self.name(), "distance"))
    }

    /// `d(x, y) = d(o, x^-1 y)`.
    fn distance_between(&self, x: &ReducedWord, y: &ReducedWord) -> Result<f64> {
        self.distance(&(&x.inverse() * y))
    }

    /// `l[c]`, a function of the conjugacy class only.
    fn translation_length(&self, c: &CyclicWord) -> Result<LengthValue>;

    /// Per-generator weights `w` when `l[c] = sum_g w_g * count_g(c)` exactly
    /// (and, if the provider has a distance, `d(o,x)` is the same sum over the
    /// reduced word).
    fn letter_weights(&self) -> Option<Vec<f64>> {
        None
    }

    /// A constant `c > 0` with `d(o,x) >= c |x|`, when one is known.
    fn length_lower_bound(&self) -> Option<f64> {
        None
    }

    /// Calls `f(x, d(o,x))` for every `x` with `d(o,x) <= radius`.
    fn for_each_within(
        &self,
        ctx: &GroupContext,
        radius: f64,
        f: &mut dyn FnMut(&[Letter], f64),
    ) -> Result<()> {
        let c = self
            .length_lower_bound()
            .filter(|c| *c > 0.0)
            .ok_or_else(|| missing(self.name(), "bounded balls"))?;
        let basis_radius = (radius / c + 1e-9).floor() as usize;
        check_ball(ctx, basis_radius)?;
        let mut err = None;
        for_each_reduced(ctx, basis_radius, &mut |w| {
            if err.is_some() {
                return;
            }
            match self.distance(&ReducedWord::from_reduced(w.to_vec())) {
                Ok(d) if d <= radius + 1e-12 => f(w, d),
                Ok(_) => {}
                Err(e) => err = Some(e),
            }
        });
        err.map_or(Ok(()), Err)
    }

    /// `d(o, x)` for every `x` in the basis ball, indexed by [`BallIndex`].
    fn distance_table(&self, ctx: &GroupContext, radius: usize) -> Result<Arc<Vec<f64>>> {
        let index = BallIndex::new(ctx, radius, DEFAULT_BUDGET)?;
        let mut buf = Vec::new();
        let mut out = Vec::with_capacity(index.size());
        for i in 0..index.size() {
            index.unrank(i, &mut buf);
            out.push(self.distance(&ReducedWord::from_reduced(buf.clone()))?);
        }
        Ok(Arc::new(out))
    }
}

/// Shared handle to a provider.
pub type Provider = Arc<dyn MetricProvider>;

pub(crate) fn missing(provider: &str, capability: &'static str) -> Error {
    Error::MissingCapability { provider: provider.to_string(), capability }
}

fn check_ball(ctx: &GroupContext, radius: usize) -> Result<()> {
    let size = ctx.ball_size(radius);
    if size > DEFAULT_BUDGET {
        return Err(Error::BudgetExceeded { requested: size, budget: DEFAULT_BUDGET });
    }
    Ok(())
}

/// Depth-first walk over reduced words of length `<= radius` (prefix order),
/// without allocating per word.
pub(crate) fn for_each_reduced(ctx: &GroupContext, radius: usize, f: &mut dyn FnMut(&[Letter])) {
    fn walk(ctx: &GroupContext, radius: usize, word: &mut Vec<Letter>, f: &mut dyn FnMut(&[Letter])) {
        f(word);
        if word.len() == radius {
            return;
        }
        for l in ctx.letters() {
            if word.last().is_some_and(|p| p.cancels(l)) {
                continue;
            }
            word.push(l);
            walk(ctx, radius, word, f);
            word.pop();
        }
    }
    walk(ctx, radius, &mut Vec::with_capacity(radius), f);
}

/// Fekete estimate `min_{1 <= n <= N} d(o, x^n) / n` for the stored
/// representative `x` of `c`. The residual is the drop of the running minimum
/// between `floor(N/2)` and `N`.
pub fn stable_length(p: &dyn MetricProvider, c: &CyclicWord, max_power: usize) -> Result<LengthValue> {
    if max_power < 2 {
        return Err(Error::InvalidInput("stable_length needs N >= 2".into()));
    }
    if !p.capabilities().has_distance {
        return Err(missing(p.name(), "distance"));
    }
    let x = c.as_word();
    let mut best = f64::INFINITY;
    let mut at_half = f64::INFINITY;
    for n in 1..=max_power {
        best = best.min(p.distance(&x.pow(n as i64))? / n as f64);
        if n == max_power / 2 {
            at_half = best;
        }
    }
    Ok(LengthValue::estimate(best, at_half - best))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GrowthMethod {
    ExactTransferMatrix,
    EmpiricalBall,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct GrowthRate {
    pub value: f64,
    pub method: GrowthMethod,
    pub residual: f64,
}

/// Exact growth rate of a letter-weight metric: the `h` at which the
/// transfer matrix with entries `exp(-h w)` has spectral radius 1.
pub fn growth_rate_exact(p: &dyn MetricProvider, ctx: &GroupContext) -> Result<GrowthRate> {
    let w = positive_weights(p)?;
    let wmin = w.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ((2 * ctx.rank() - 1) as f64).ln() / wmin;
    let r = critical_exponent(ctx, &vec![0.0; w.len()], &w, (0.0, hi))?;
    Ok(GrowthRate { value: r.s, method: GrowthMethod::ExactTransferMatrix, residual: r.residual })
}

pub fn positive_weights(p: &dyn MetricProvider) -> Result<Vec<f64>> {
    let w = p.letter_weights().ok_or_else(|| missing(p.name(), "letter weights"))?;
    if w.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::InvalidInput(format!(
            "provider `{}` has a nonpositive letter weight",
            p.name()
        )));
    }
    Ok(w)
}

/// Least-squares slope of `ys` against `xs` with its standard error.
pub fn slope_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    if xs.len() < 3 {
        return (slope, 0.0);
    }
    let icept = my - slope * mx;
    let sse: f64 = xs.iter().zip(ys).map(|(x, y)| (y - icept - slope * x).powi(2)).sum();
    (slope, (sse / (n - 2.0) / sxx).sqrt())
}

/// Slope of `log #{x : d(o,x) <= T}` against integer `T`, fitted over the
/// top half of `1..=radius`.
pub fn growth_rate_empirical(
    p: &dyn MetricProvider,
    ctx: &GroupContext,
    radius: usize,
) -> Result<GrowthRate> {
    if radius < 4 {
        return Err(Error::RadiusTooSmall { radius, minimum: 4 });
    }
    let mut shells = vec![0u64; radius + 1];
    p.for_each_within(ctx, radius as f64, &mut |_, d| {
        let bin = (d - 1e-9).ceil().max(0.0) as usize;
        shells[bin.min(radius)] += 1;
    })?;
    let mut cumulative = 0u64;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (t, &count) in shells.iter().enumerate() {
        cumulative += count;
        if t >= radius.div_ceil(2) && t >= 1 {
            xs.push(t as f64);
            ys.push((cumulative as f64).ln());
        }
    }
    let (value, residual) = slope_fit(&xs, &ys);
    Ok(GrowthRate { value, method: GrowthMethod::EmpiricalBall, residual })
}

/// `(x|y)_o = (d(o,x) + d(o,y) - d(x,y)) / 2`.
pub fn gromov_product(p: &dyn MetricProvider, x: &ReducedWord, y: &ReducedWord) -> Result<f64> {
    Ok(0.5 * (p.distance(x)? + p.distance(y)? - p.distance_between(x, y)?))
}

/// Gromov products at the identity for all pairs in a basis ball.
pub(crate) enum GromovOracle {
    /// Tree metric: the product is the weight of the common prefix.
    Tree { prefix: Vec<Vec<f64>> },
    /// General: distances from a table over the doubled ball.
    Table { dist: Arc<Vec<f64>>, index: BallIndex, to_o: Vec<f64> },
}

impl GromovOracle {
    pub(crate) fn new(p: &dyn MetricProvider, ctx: &GroupContext, ball: &[ReducedWord], radius: usize) -> Result<Self> {
        if !p.capabilities().has_distance {
            return Err(missing(p.name(), "distance"));
        }
        if let Some(w) = p.letter_weights().filter(|w| w.iter().all(|&x| x >= 0.0)) {
            let prefix = ball
                .iter()
                .map(|x| {
                    let mut acc = vec![0.0];
                    for l in x.letters() {
                        acc.push(acc.last().unwrap() + w[l.generator()]);
                    }
                    acc
                })
                .collect();
            return Ok(GromovOracle::Tree { prefix });
        }
        let dist = p.distance_table(ctx, 2 * radius)?;
        let index = BallIndex::new(ctx, 2 * radius, DEFAULT_BUDGET)?;
        let to_o = ball
            .iter()
            .map(|x| dist[index.rank(x.letters()).expect("inside ball")])
            .collect();
        Ok(GromovOracle::Table { dist, index, to_o })
    }

    /// Product of `ball[i]` and `ball[j]`.
    pub(crate) fn product(&self, ball: &[ReducedWord], i: usize, j: usize, buf: &mut Vec<Letter>) -> f64 {
        match self {
            GromovOracle::Tree { prefix } => {
                let k = ball[i].common_prefix_len(&ball[j]);
                prefix[i][k]
            }
            GromovOracle::Table { dist, index, to_o } => {
                let (x, y) = (ball[i].letters(), ball[j].letters());
                let k = ball[i].common_prefix_len(&ball[j]);
                buf.clear();
                buf.extend(x[k..].iter().rev().map(|l| l.inverse()));
                buf.extend_from_slice(&y[k..]);
                let dxy = dist[index.rank(buf).expect("inside doubled ball")];
                0.5 * (to_o[i] + to_o[j] - dxy)
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HyperbolicityDiagnostic {
    pub delta_hat: f64,
    pub alpha_hat: f64,
    pub radius: usize,
}

/// Four-point defect `max min((x|w),(y|w)) - (x|y)` over all triples of the
/// basis ball (base point `o`), and the rough-geodesic defect
/// `max_n d(o, g^n) - n l[g]` along powers of short classes.
pub fn estimate_hyperbolicity(
    p: &dyn MetricProvider,
    ctx: &GroupContext,
    radius: usize,
) -> Result<HyperbolicityDiagnostic> {
    let ball: Vec<ReducedWord> = crate::group::enumerate_ball(ctx, radius, DEFAULT_BUDGET)?.collect();
    let oracle = GromovOracle::new(p, ctx, &ball, radius)?;
    let n = ball.len();
    let mut g = vec![0.0f64; n * n];
    let mut buf = Vec::new();
    for i in 0..n {
        for j in i..n {
            let v = oracle.product(&ball, i, j, &mut buf);
            g[i * n + j] = v;
            g[j * n + i] = v;
        }
    }
    let mut delta = 0.0f64;
    for i in 0..n {
        let gi = &g[i * n..(i + 1) * n];
        for j in i..n {
            let gj = &g[j * n..(j + 1) * n];
            let best = gi.iter().zip(gj).map(|(a, b)| a.min(*b)).fold(f64::NEG_INFINITY, f64::max);
            delta = delta.max(best - gi[j]);
        }
    }

    let mut alpha = 0.0f64;
    let power_len = radius.max(2);
    for c in crate::group::enumerate_conj_classes(ctx, 2, DEFAULT_BUDGET)? {
        let l = stable_length(p, &c, power_len)?.value;
        let x = c.as_word();
        for k in 1..=power_len {
            alpha = alpha.max(p.distance(&x.pow(k as i64))? - k as f64 * l);
        }
    }
    Ok(HyperbolicityDiagnostic { delta_hat: delta, alpha_hat: alpha, radius })
}

#[derive(Clone, Debug, Serialize)]
pub struct QiBoundsReport {
    pub dil_forward: f64,
    pub dil_backward: f64,
    /// `C(r)` for `r = 0..=radius`.
    pub per_radius: Vec<f64>,
    pub plateau: bool,
}

/// Plateau tolerance for [`verify_qi_bounds`].
pub const QI_PLATEAU_TOL: f64 = 1e-6;

/// Smallest `C(r)` with
/// `(x|y)_d / dil_forward - C <= (x|y)_{d*} <= dil_backward (x|y)_d + C`
/// for all `x, y` in the basis ball of radius `r`.
pub fn verify_qi_bounds(
    p: &dyn MetricProvider,
    p_star: &dyn MetricProvider,
    ctx: &GroupContext,
    dil_forward: f64,
    dil_backward: f64,
    radius: usize,
) -> Result<QiBoundsReport> {
    let ball: Vec<ReducedWord> = crate::group::enumerate_ball(ctx, radius, DEFAULT_BUDGET)?.collect();
    let gd = GromovOracle::new(p, ctx, &ball, radius)?;
    let gs = GromovOracle::new(p_star, ctx, &ball, radius)?;
    let mut buckets = vec![0.0f64; radius + 1];
    let mut buf = Vec::new();
    for i in 0..ball.len() {
        let li = ball[i].len();
        for j in i..ball.len() {
            let a = gd.product(&ball, i, j, &mut buf);
            let b = gs.product(&ball, i, j, &mut buf);
            let v = (a / dil_forward - b).max(b - dil_backward * a);
            let slot = &mut buckets[li.max(ball[j].len())];
            if v > *slot {
                *slot = v;
            }
        }
    }
    for r in 1..=radius {
        buckets[r] = buckets[r].max(buckets[r - 1]);
    }
    let plateau = radius >= 2
        && (buckets[radius] - buckets[radius - 1]).abs() <= QI_PLATEAU_TOL
        && (buckets[radius - 1] - buckets[radius - 2]).abs() <= QI_PLATEAU_TOL;
    Ok(QiBoundsReport { dil_forward, dil_backward, per_radius: buckets, plateau })
}
