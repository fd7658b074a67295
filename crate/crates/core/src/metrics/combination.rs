//! Providers built from other providers: linear combinations at the level of
//! translation lengths, boundary differences, and pullbacks by basis
//! automorphisms.

use crate::error::{Error, Result};
use crate::group::{BasisAutomorphism, CyclicWord, ReducedWord};

use super::{missing, Capabilities, LengthValue, MetricProvider, Provider};

/// Relative band below zero that is treated as rounding noise.
pub const NEGATIVITY_TOL: f64 = 1e-12;

/// `l = s l1 + t l2`, with `d = s d1 + t d2` when that is a metric.
#[derive(Clone, Debug)]
pub struct LinearCombination {
    name: String,
    s: f64,
    t: f64,
    p1: Provider,
    p2: Provider,
}

pub fn linear_combination(s: f64, t: f64, p1: Provider, p2: Provider) -> Result<LinearCombination> {
    if !s.is_finite() || !t.is_finite() {
        return Err(Error::InvalidInput("combination coefficients must be finite".into()));
    }
    if p1.rank() != p2.rank() {
        return Err(Error::InvalidInput("providers live on different groups".into()));
    }
    let name = format!("{s}*{}+{t}*{}", p1.name(), p2.name());
    Ok(LinearCombination { name, s, t, p1, p2 })
}

/// `l = dil * l_{p*} - l_p`; negativity means `dil` under-estimates the
/// dilation.
pub fn boundary_difference(p: Provider, p_star: Provider, dil: f64) -> Result<LinearCombination> {
    if !(dil > 0.0) || !dil.is_finite() {
        return Err(Error::InvalidInput(format!("dilation must be positive and finite, got {dil}")));
    }
    let mut c = linear_combination(-1.0, dil, p, p_star)?;
    c.name = format!("{dil}*{}-{}", c.p2.name(), c.p1.name());
    Ok(c)
}

impl LinearCombination {
    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn coefficients(&self) -> (f64, f64) {
        (self.s, self.t)
    }

    fn metric_combination(&self) -> bool {
        self.s >= 0.0
            && self.t >= 0.0
            && self.p1.capabilities().has_distance
            && self.p2.capabilities().has_distance
    }

    fn check(&self, raw: f64, scale: f64, what: impl FnOnce() -> String) -> Result<f64> {
        if raw < -NEGATIVITY_TOL * scale.max(1.0) {
            return Err(Error::NegativeLength { class: what(), value: raw });
        }
        Ok(raw.max(0.0))
    }
}

impl MetricProvider for LinearCombination {
    fn name(&self) -> &str {
        &self.name
    }

    fn rank(&self) -> usize {
        self.p1.rank()
    }

    fn capabilities(&self) -> Capabilities {
        let c1 = self.p1.capabilities();
        let c2 = self.p2.capabilities();
        Capabilities {
            has_distance: self.metric_combination(),
            exact_translation_length: c1.exact_translation_length && c2.exact_translation_length,
        }
    }

    fn distance(&self, x: &ReducedWord) -> Result<f64> {
        if !self.metric_combination() {
            return Err(missing(&self.name, "distance"));
        }
        Ok(self.s * self.p1.distance(x)? + self.t * self.p2.distance(x)?)
    }

    fn translation_length(&self, c: &CyclicWord) -> Result<LengthValue> {
        let a = self.p1.translation_length(c)?;
        let b = self.p2.translation_length(c)?;
        let raw = self.s * a.value + self.t * b.value;
        let scale = (self.s * a.value).abs() + (self.t * b.value).abs();
        let value = self.check(raw, scale, || c.to_string())?;
        Ok(LengthValue {
            value,
            residual: self.s.abs() * a.residual + self.t.abs() * b.residual,
            exact: a.exact && b.exact,
        })
    }

    fn letter_weights(&self) -> Option<Vec<f64>> {
        let w1 = self.p1.letter_weights()?;
        let w2 = self.p2.letter_weights()?;
        Some(w1.iter().zip(&w2).map(|(a, b)| self.s * a + self.t * b).collect())
    }

    fn length_lower_bound(&self) -> Option<f64> {
        if !self.metric_combination() {
            return None;
        }
        let a = self.p1.length_lower_bound().unwrap_or(0.0);
        let b = self.p2.length_lower_bound().unwrap_or(0.0);
        let c = self.s * a + self.t * b;
        (c > 0.0).then_some(c)
    }
}

/// `d_phi(o, x) = d(o, phi(x))` for a basis automorphism `phi`.
#[derive(Clone, Debug)]
pub struct Pullback {
    name: String,
    inner: Provider,
    phi: BasisAutomorphism,
}

impl Pullback {
    pub fn new(inner: Provider, phi: BasisAutomorphism) -> Self {
        Pullback { name: format!("{}.phi", inner.name()), inner, phi }
    }
}

impl MetricProvider for Pullback {
    fn name(&self) -> &str {
        &self.name
    }

    fn rank(&self) -> usize {
        self.inner.rank()
    }

    fn capabilities(&self) -> Capabilities {
        self.inner.capabilities()
    }

    fn distance(&self, x: &ReducedWord) -> Result<f64> {
        self.inner.distance(&self.phi.apply(x))
    }

    fn translation_length(&self, c: &CyclicWord) -> Result<LengthValue> {
        self.inner.translation_length(&self.phi.apply_class(c))
    }

    fn letter_weights(&self) -> Option<Vec<f64>> {
        let w = self.inner.letter_weights()?;
        Some(
            (0..w.len())
                .map(|g| w[self.phi.apply_letter(crate::group::Letter::new(g, false)).generator()])
                .collect(),
        )
    }

    fn length_lower_bound(&self) -> Option<f64> {
        self.inner.length_lower_bound()
    }
}
