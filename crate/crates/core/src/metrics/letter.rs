//! Metrics that are linear in letter counts: weighted tree metrics and the
//! single-generator letter counts.

use crate::error::{Error, Result};
use crate::group::{CyclicWord, GroupContext, Letter, ReducedWord};

use super::{Capabilities, LengthValue, MetricProvider};

/// `d(o,x) = sum of w(l)` over the letters of the reduced word `x`.
#[derive(Clone, Debug, PartialEq)]
pub struct LetterLinearProvider {
    name: String,
    weights: Vec<f64>,
}

/// Weighted word metric with positive per-generator weights.
pub fn letter_weight_provider(ctx: &GroupContext, weights: &[f64]) -> Result<LetterLinearProvider> {
    if weights.len() != ctx.rank() {
        return Err(Error::InvalidInput(format!(
            "expected {} weights, got {}",
            ctx.rank(),
            weights.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
        return Err(Error::InvalidInput(format!("letter weights must be positive, got {w}")));
    }
    let name = format!("weights{weights:?}");
    Ok(LetterLinearProvider { name, weights: weights.to_vec() })
}

/// Number of occurrences of `generator^{+-1}` in the reduced word.
pub fn letter_count_provider(ctx: &GroupContext, generator: usize) -> Result<LetterLinearProvider> {
    if generator >= ctx.rank() {
        return Err(Error::ContextMismatch { index: generator, rank: ctx.rank() });
    }
    let mut weights = vec![0.0; ctx.rank()];
    weights[generator] = 1.0;
    let name = format!("count[{}]", Letter::new(generator, false));
    Ok(LetterLinearProvider { name, weights })
}

impl LetterLinearProvider {
    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// The same metric multiplied by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Self {
        LetterLinearProvider {
            name: format!("{}*{factor}", self.name),
            weights: self.weights.iter().map(|w| w * factor).collect(),
        }
    }

    fn weigh(&self, letters: &[Letter]) -> f64 {
        letters.iter().map(|l| self.weights[l.generator()]).sum()
    }
}

impl MetricProvider for LetterLinearProvider {
    fn name(&self) -> &str {
        &self.name
    }

    fn rank(&self) -> usize {
        self.weights.len()
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities { has_distance: true, exact_translation_length: true }
    }

    fn distance(&self, x: &ReducedWord) -> Result<f64> {
        Ok(self.weigh(x.letters()))
    }

    fn distance_between(&self, x: &ReducedWord, y: &ReducedWord) -> Result<f64> {
        let k = x.common_prefix_len(y);
        Ok(self.weigh(&x.letters()[k..]) + self.weigh(&y.letters()[k..]))
    }

    fn translation_length(&self, c: &CyclicWord) -> Result<LengthValue> {
        Ok(LengthValue::exact(self.weigh(c.letters())))
    }

    fn letter_weights(&self) -> Option<Vec<f64>> {
        Some(self.weights.clone())
    }

    fn length_lower_bound(&self) -> Option<f64> {
        let m = self.weights.iter().copied().fold(f64::INFINITY, f64::min);
        (m > 0.0).then_some(m)
    }

    fn for_each_within(
        &self,
        ctx: &GroupContext,
        radius: f64,
        f: &mut dyn FnMut(&[Letter], f64),
    ) -> Result<()> {
        let Some(wmin) = self.length_lower_bound() else {
            return Err(super::missing(&self.name, "bounded balls"));
        };
        let size = ctx.ball_size((radius / wmin + 1e-9).floor() as usize);
        if size > crate::group::DEFAULT_BUDGET {
            return Err(Error::BudgetExceeded { requested: size, budget: crate::group::DEFAULT_BUDGET });
        }
        fn walk(
            p: &LetterLinearProvider,
            ctx: &GroupContext,
            radius: f64,
            word: &mut Vec<Letter>,
            d: f64,
            f: &mut dyn FnMut(&[Letter], f64),
        ) {
            f(word, d);
            for l in ctx.letters() {
                if word.last().is_some_and(|p| p.cancels(l)) {
                    continue;
                }
                let next = d + p.weights[l.generator()];
                if next <= radius + 1e-12 {
                    word.push(l);
                    walk(p, ctx, radius, word, next, f);
                    word.pop();
                }
            }
        }
        walk(self, ctx, radius, &mut Vec::new(), 0.0, f);
        Ok(())
    }
}
