//! Metrics computed by breadth-first search in a Cayley-type graph: word
//! metrics for finite generating sets and coned-off metrics.
//!
//! A search for `x` runs inside the `K`-neighbourhood of the basis geodesic
//! from `o` to `x`, so the value is an upper bound depending only on `x` and
//! `K`. Bulk tables over a basis ball instead search the whole ball of radius
//! `n + K` once per sphere `n`; that region contains every such neighbourhood,
//! so table entries never exceed point values.

use std::collections::{HashMap, HashSet};
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::group::{BallIndex, CyclicWord, GroupContext, Letter, ReducedWord};

use super::{missing, stable_length, Capabilities, LengthValue, MetricProvider, DEFAULT_FEKETE_POWER};

/// Largest ball searched with a dense visited array.
const DENSE_LIMIT: u128 = 1 << 24;
/// Node budget for unrestricted searches.
const NODE_BUDGET: usize = 20_000_000;

fn multiply_into(g: &[Letter], s: &[Letter], out: &mut Vec<Letter>) {
    out.clear();
    out.extend_from_slice(g);
    for &l in s {
        if out.last().is_some_and(|p| p.cancels(l)) {
            out.pop();
        } else {
            out.push(l);
        }
    }
}

/// Unit-cost moves out of a vertex.
#[derive(Clone, Debug)]
struct Steps {
    words: Vec<Vec<Letter>>,
    /// `w^m` for `m = 1, -1, 2, -2, ...`.
    jumps: Vec<Vec<Letter>>,
}

impl Steps {
    fn neighbors(&self, g: &[Letter], bound: usize, buf: &mut Vec<Letter>, f: &mut dyn FnMut(&[Letter])) {
        for s in &self.words {
            multiply_into(g, s, buf);
            if buf.len() <= bound {
                f(buf);
            }
        }
        for j in &self.jumps {
            // |g w^m| >= |w^m| - |g|, and jump lengths only grow.
            if j.len() > g.len() + bound {
                break;
            }
            multiply_into(g, j, buf);
            if buf.len() <= bound {
                f(buf);
            }
        }
    }

    /// Distance from the identity to `target` inside the `k`-neighbourhood
    /// of the basis geodesic `[o, target]`, or `None` when unreachable there.
    ///
    /// A vertex `u` lies in the neighbourhood when `|u| - cp(u, target) <= k`;
    /// it is stored densely as `(cp, tail)` with `tail` ranked in the ball of
    /// radius `k`.
    fn distance(&self, ctx: &GroupContext, target: &[Letter], k: usize) -> Result<Option<u32>> {
        if target.is_empty() {
            return Ok(Some(0));
        }
        let tails = BallIndex::new(ctx, k, DENSE_LIMIT)?;
        let slots = (target.len() + 1) as u128 * tails.size() as u128;
        if slots > DENSE_LIMIT * 16 {
            return Err(Error::BudgetExceeded { requested: slots, budget: DENSE_LIMIT * 16 });
        }
        let locate = |u: &[Letter]| -> Option<usize> {
            let cp = u.iter().zip(target).take_while(|(a, b)| a == b).count();
            let tail = tails.rank(&u[cp..])?;
            Some(cp * tails.size() + tail)
        };
        let goal = locate(target).expect("target in its own tube");
        let mut seen = vec![false; slots as usize];
        seen[0] = true;
        let bound = target.len() + k;
        let mut frontier: Vec<Vec<Letter>> = vec![Vec::new()];
        let mut buf = Vec::new();
        let mut depth = 0;
        while !frontier.is_empty() {
            depth += 1;
            let mut next = Vec::new();
            let mut hit = false;
            for v in &frontier {
                self.neighbors(v, bound, &mut buf, &mut |u| {
                    if let Some(i) = locate(u) {
                        if !seen[i] {
                            seen[i] = true;
                            hit |= i == goal;
                            next.push(u.to_vec());
                        }
                    }
                });
                if hit {
                    return Ok(Some(depth));
                }
            }
            frontier = next;
        }
        Ok(None)
    }

    /// Distances from the identity to every vertex of the ball of radius
    /// `bound` (`u8::MAX` when unreachable).
    fn full_table(&self, ctx: &GroupContext, bound: usize) -> Result<(BallIndex, Vec<u8>)> {
        let index = BallIndex::new(ctx, bound, DENSE_LIMIT)?;
        let mut dist = vec![u8::MAX; index.size()];
        dist[0] = 0;
        let mut frontier = vec![0usize];
        let (mut word, mut buf) = (Vec::new(), Vec::new());
        let mut depth = 0u8;
        while !frontier.is_empty() {
            depth = depth.checked_add(1).ok_or_else(|| Error::InvalidInput("search depth overflow".into()))?;
            let mut next = Vec::new();
            for &v in &frontier {
                index.unrank(v, &mut word);
                self.neighbors(&word, bound, &mut buf, &mut |u| {
                    let i = index.rank(u).expect("bounded");
                    if dist[i] == u8::MAX {
                        dist[i] = depth;
                        next.push(i);
                    }
                });
            }
            frontier = next;
        }
        Ok((index, dist))
    }
}

#[derive(Debug, Default)]
struct DistanceCache {
    points: Mutex<HashMap<Vec<Letter>, f64>>,
    tables: Mutex<HashMap<usize, Arc<Vec<f64>>>>,
}

fn parse_steps(ctx: &GroupContext, set: &[ReducedWord]) -> Result<Vec<Vec<Letter>>> {
    let mut words: Vec<Vec<Letter>> = Vec::new();
    for s in set {
        ctx.check_word(s)?;
        if !s.is_identity() && !words.iter().any(|w| w == s.letters()) {
            words.push(s.letters().to_vec());
        }
    }
    words.sort();
    Ok(words)
}

fn check_symmetric(words: &[Vec<Letter>]) -> Result<()> {
    for w in words {
        let inv: Vec<Letter> = w.iter().rev().map(|l| l.inverse()).collect();
        if !words.contains(&inv) {
            return Err(Error::NotSymmetric(ReducedWord::from_reduced(w.clone()).to_string()));
        }
    }
    Ok(())
}

/// Word metric `d_S(o,x) = |x|_S` for a finite symmetric generating set.
#[derive(Debug)]
pub struct WordMetricProvider {
    name: String,
    ctx: GroupContext,
    steps: Steps,
    fattening: usize,
    fekete_power: usize,
    cache: DistanceCache,
}

/// Builds the word metric of `set`. The fattening defaults to `max |s|`.
pub fn word_metric_provider(ctx: &GroupContext, set: &[ReducedWord]) -> Result<WordMetricProvider> {
    let words = parse_steps(ctx, set)?;
    if words.is_empty() {
        return Err(Error::NotGenerating("empty generating set".into()));
    }
    check_symmetric(&words)?;
    let longest = words.iter().map(Vec::len).max().unwrap_or(1);
    let steps = Steps { words, jumps: Vec::new() };
    // Every basis letter must be reachable inside a modest ball.
    let probe = 4 * longest;
    for l in ctx.letters() {
        if steps.distance(ctx, &[l], probe)?.is_none() {
            return Err(Error::NotGenerating(l.to_string()));
        }
    }
    let name = format!(
        "S{{{}}}",
        steps
            .words
            .iter()
            .map(|w| ReducedWord::from_reduced(w.clone()).to_string())
            .collect::<Vec<_>>()
            .join(",")
    );
    Ok(WordMetricProvider {
        name,
        ctx: *ctx,
        steps,
        fattening: longest,
        fekete_power: DEFAULT_FEKETE_POWER,
        cache: DistanceCache::default(),
    })
}

impl WordMetricProvider {
    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_fattening(mut self, k: usize) -> Self {
        self.fattening = k;
        self.cache = DistanceCache::default();
        self
    }

    pub fn with_fekete_power(mut self, n: usize) -> Self {
        self.fekete_power = n.max(2);
        self
    }

    pub fn fattening(&self) -> usize {
        self.fattening
    }
}

impl MetricProvider for WordMetricProvider {
    fn name(&self) -> &str {
        &self.name
    }

    fn rank(&self) -> usize {
        self.ctx.rank()
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities { has_distance: true, exact_translation_length: false }
    }

    fn distance(&self, x: &ReducedWord) -> Result<f64> {
        if let Some(d) = self.cache.points.lock().expect("cache").get(x.letters()) {
            return Ok(*d);
        }
        let d = self
            .steps
            .distance(&self.ctx, x.letters(), self.fattening)?
            .ok_or_else(|| Error::NotGenerating(x.to_string()))? as f64;
        self.cache.points.lock().expect("cache").insert(x.letters().to_vec(), d);
        Ok(d)
    }

    fn translation_length(&self, c: &CyclicWord) -> Result<LengthValue> {
        stable_length(self, c, self.fekete_power)
    }

    fn length_lower_bound(&self) -> Option<f64> {
        let longest = self.steps.words.iter().map(Vec::len).max()?;
        Some(1.0 / longest as f64)
    }

    /// Exact balls by unrestricted breadth-first layers.
    fn for_each_within(
        &self,
        _ctx: &GroupContext,
        radius: f64,
        f: &mut dyn FnMut(&[Letter], f64),
    ) -> Result<()> {
        let depth = (radius + 1e-9).floor() as usize;
        let mut seen: HashSet<Vec<Letter>> = HashSet::from([Vec::new()]);
        let mut frontier: Vec<Vec<Letter>> = vec![Vec::new()];
        f(&[], 0.0);
        let mut buf = Vec::new();
        for n in 1..=depth {
            let mut next = Vec::new();
            for v in &frontier {
                self.steps.neighbors(v, usize::MAX, &mut buf, &mut |u| {
                    if !seen.contains(u) {
                        seen.insert(u.to_vec());
                        next.push(u.to_vec());
                    }
                });
            }
            if seen.len() > NODE_BUDGET {
                return Err(Error::BudgetExceeded { requested: seen.len() as u128, budget: NODE_BUDGET as u128 });
            }
            next.sort();
            for u in &next {
                f(u, n as f64);
            }
            frontier = next;
        }
        Ok(())
    }

    fn distance_table(&self, ctx: &GroupContext, radius: usize) -> Result<Arc<Vec<f64>>> {
        if let Some(t) = self.cache.tables.lock().expect("cache").get(&radius) {
            return Ok(t.clone());
        }
        let index = BallIndex::new(ctx, radius, crate::group::DEFAULT_BUDGET)?;
        let mut out = vec![0.0; index.size()];
        let mut start = 0;
        for n in 0..=radius {
            let end = start + ctx.sphere_size(n) as usize;
            let (_, dist) = self.steps.full_table(ctx, n + self.fattening)?;
            for i in start..end {
                if dist[i] == u8::MAX {
                    let mut w = Vec::new();
                    index.unrank(i, &mut w);
                    return Err(Error::NotGenerating(ReducedWord::from_reduced(w).to_string()));
                }
                out[i] = dist[i] as f64;
            }
            start = end;
        }
        let out = Arc::new(out);
        self.cache.tables.lock().expect("cache").insert(radius, out.clone());
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConedOffSettings {
    pub fattening: usize,
    pub jump_cap: usize,
    pub stability_step: usize,
    pub fekete_power: usize,
}

impl Default for ConedOffSettings {
    fn default() -> Self {
        ConedOffSettings { fattening: 4, jump_cap: 32, stability_step: 2, fekete_power: 4 }
    }
}

/// Word metric of `S` with every coset `g<w>` joined to a cone point by
/// half-edges, so that `g -> g w^m` costs 1.
#[derive(Debug)]
pub struct ConedOffProvider {
    name: String,
    ctx: GroupContext,
    steps: Steps,
    subgroup: CyclicWord,
    settings: ConedOffSettings,
    cache: DistanceCache,
}

pub fn coned_off_provider(
    ctx: &GroupContext,
    set: &[ReducedWord],
    generator: &ReducedWord,
    settings: ConedOffSettings,
) -> Result<ConedOffProvider> {
    ctx.check_word(generator)?;
    if generator.is_identity() || !generator.is_cyclically_reduced() {
        return Err(Error::InvalidInput(format!(
            "subgroup generator {generator} must be nontrivial and cyclically reduced"
        )));
    }
    let words = parse_steps(ctx, set)?;
    check_symmetric(&words)?;
    let mut jumps = Vec::new();
    for m in 1..=settings.jump_cap as i64 {
        jumps.push(generator.pow(m).into_letters());
        jumps.push(generator.pow(-m).into_letters());
    }
    let name = format!("coned<{generator}>");
    Ok(ConedOffProvider {
        name,
        ctx: *ctx,
        steps: Steps { words, jumps },
        subgroup: CyclicWord::of(generator)?,
        settings,
        cache: DistanceCache::default(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConedDistance {
    pub value: f64,
    /// Unchanged when the fattening grows by the stability step.
    pub stable: bool,
}

impl ConedOffProvider {
    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn settings(&self) -> ConedOffSettings {
        self.settings
    }

    /// The same provider with a different fattening.
    pub fn with_fattening(&self, k: usize) -> Self {
        ConedOffProvider {
            name: self.name.clone(),
            ctx: self.ctx,
            steps: self.steps.clone(),
            subgroup: self.subgroup.clone(),
            settings: ConedOffSettings { fattening: k, ..self.settings },
            cache: DistanceCache::default(),
        }
    }

    fn search(&self, x: &[Letter], k: usize) -> Result<f64> {
        Ok(self
            .steps
            .distance(&self.ctx, x, k)?
            .map_or(f64::INFINITY, |d| d as f64))
    }

    /// Distance with the stability re-check at the enlarged fattening.
    pub fn distance_checked(&self, x: &ReducedWord) -> Result<ConedDistance> {
        let value = self.distance(x)?;
        let wider = self.search(x.letters(), self.settings.fattening + self.settings.stability_step)?;
        Ok(ConedDistance { value, stable: wider == value })
    }

    /// Whether `c` is conjugate into the coned subgroup up to powers, in
    /// which case its orbit is bounded.
    pub fn is_elliptic(&self, c: &CyclicWord) -> bool {
        let root = self.subgroup.primitive_root();
        let own = c.primitive_root();
        own == root || own == root.inverse()
    }
}

impl MetricProvider for ConedOffProvider {
    fn name(&self) -> &str {
        &self.name
    }

    fn rank(&self) -> usize {
        self.ctx.rank()
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities { has_distance: true, exact_translation_length: false }
    }

    fn distance(&self, x: &ReducedWord) -> Result<f64> {
        if let Some(d) = self.cache.points.lock().expect("cache").get(x.letters()) {
            return Ok(*d);
        }
        let d = self.search(x.letters(), self.settings.fattening)?;
        self.cache.points.lock().expect("cache").insert(x.letters().to_vec(), d);
        Ok(d)
    }

    fn translation_length(&self, c: &CyclicWord) -> Result<LengthValue> {
        if self.is_elliptic(c) {
            return Ok(LengthValue::exact(0.0));
        }
        if self.settings.fekete_power < 2 {
            return Err(missing(&self.name, "Fekete power >= 2"));
        }
        stable_length(self, c, self.settings.fekete_power)
    }
}
