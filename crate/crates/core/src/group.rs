//! Exact combinatorics of the free group `F_k` on a fixed basis.
//!
//! Letters are ordered `a < a- < b < b- < ...` (the letter code is
//! `2 * generator + inverse`). Words are always stored freely reduced;
//! conjugacy classes are stored as their lexicographically least rotation.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// Default cap on the number of elements an enumeration may produce.
pub const DEFAULT_BUDGET: u128 = 10_000_000;

const MAX_RANK: usize = 26;

#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Letter(u8);

impl Letter {
    pub fn new(generator: usize, inverse: bool) -> Letter {
        assert!(generator < MAX_RANK, "generator index {generator} out of range");
        Letter((2 * generator + inverse as usize) as u8)
    }

    pub fn from_code(code: usize) -> Letter {
        assert!(code < 2 * MAX_RANK);
        Letter(code as u8)
    }

    #[inline]
    pub fn code(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn generator(self) -> usize {
        (self.0 >> 1) as usize
    }

    #[inline]
    pub fn is_inverse(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn sign(self) -> i8 {
        if self.is_inverse() {
            -1
        } else {
            1
        }
    }

    #[inline]
    pub fn inverse(self) -> Letter {
        Letter(self.0 ^ 1)
    }

    /// True when `self` and `other` are mutually inverse.
    #[inline]
    pub fn cancels(self, other: Letter) -> bool {
        self.0 ^ 1 == other.0
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = (b'a' + self.generator() as u8) as char;
        if self.is_inverse() {
            write!(f, "{c}-")
        } else {
            write!(f, "{c}")
        }
    }
}

impl FromStr for Letter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Letter> {
        let word = parse_letters(s)?;
        match word.as_slice() {
            [l] => Ok(*l),
            _ => Err(Error::Parse(format!("`{s}` is not a single letter"))),
        }
    }
}

/// Parses `ab-a` style text into raw (unreduced) letters. `1` and the empty
/// string denote the identity; whitespace is ignored.
pub fn parse_letters(s: &str) -> Result<Vec<Letter>> {
    let s = s.trim();
    if s.is_empty() || s == "1" {
        return Ok(Vec::new());
    }
    let mut out: Vec<Letter> = Vec::new();
    for c in s.chars() {
        match c {
            'a'..='z' => out.push(Letter::new((c as u8 - b'a') as usize, false)),
            '-' => match out.last_mut() {
                Some(l) if !l.is_inverse() => *l = l.inverse(),
                _ => return Err(Error::Parse(format!("misplaced `-` in `{s}`"))),
            },
            c if c.is_whitespace() => {}
            _ => return Err(Error::Parse(format!("unexpected character `{c}` in `{s}`"))),
        }
    }
    Ok(out)
}

/// Free reduction with a stack.
pub fn free_reduce<I: IntoIterator<Item = Letter>>(letters: I) -> Vec<Letter> {
    let mut out: Vec<Letter> = Vec::new();
    for l in letters {
        if out.last().is_some_and(|&p| p.cancels(l)) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

/// The ambient free group `F_k`.
#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug)]
pub struct GroupContext {
    rank: usize,
}

impl GroupContext {
    pub fn new(rank: usize) -> Result<Self> {
        if !(2..=MAX_RANK).contains(&rank) {
            return Err(Error::InvalidInput(format!(
                "rank must lie in [2, {MAX_RANK}], got {rank}"
            )));
        }
        Ok(GroupContext { rank })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Number of letters in the symmetric basis, `2k`.
    pub fn alphabet_size(&self) -> usize {
        2 * self.rank
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> {
        (0..self.alphabet_size()).map(Letter::from_code)
    }

    pub fn check_letter(&self, l: Letter) -> Result<()> {
        if l.generator() >= self.rank {
            return Err(Error::ContextMismatch { index: l.generator(), rank: self.rank });
        }
        Ok(())
    }

    pub fn check_word(&self, w: &ReducedWord) -> Result<()> {
        w.letters().iter().try_for_each(|&l| self.check_letter(l))
    }

    pub fn reduce(&self, letters: &[Letter]) -> Result<ReducedWord> {
        letters.iter().try_for_each(|&l| self.check_letter(l))?;
        Ok(ReducedWord { letters: free_reduce(letters.iter().copied()) })
    }

    pub fn parse_word(&self, s: &str) -> Result<ReducedWord> {
        self.reduce(&parse_letters(s)?)
    }

    pub fn parse_class(&self, s: &str) -> Result<CyclicWord> {
        CyclicWord::of(&self.parse_word(s)?)
    }

    /// Product `uv`, checking both factors belong to this group.
    pub fn concat(&self, u: &ReducedWord, v: &ReducedWord) -> Result<ReducedWord> {
        self.check_word(u)?;
        self.check_word(v)?;
        Ok(u * v)
    }

    /// Number of reduced words of length exactly `n`.
    pub fn sphere_size(&self, n: usize) -> u128 {
        if n == 0 {
            return 1;
        }
        let m = self.alphabet_size() as u128;
        (m - 1).saturating_pow(n as u32 - 1).saturating_mul(m)
    }

    /// Number of reduced words of length at most `radius`.
    pub fn ball_size(&self, radius: usize) -> u128 {
        (0..=radius).fold(0u128, |acc, n| acc.saturating_add(self.sphere_size(n)))
    }

    pub fn letter_word(&self, l: Letter) -> ReducedWord {
        ReducedWord { letters: vec![l] }
    }
}

/// A freely reduced word; the empty word is the identity `o`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct ReducedWord {
    letters: Vec<Letter>,
}

impl ReducedWord {
    pub fn identity() -> Self {
        ReducedWord { letters: Vec::new() }
    }

    /// Wraps letters that are already reduced. Panics in debug builds otherwise.
    pub fn from_reduced(letters: Vec<Letter>) -> Self {
        debug_assert!(letters.windows(2).all(|w| !w[0].cancels(w[1])));
        ReducedWord { letters }
    }

    pub fn from_letters<I: IntoIterator<Item = Letter>>(letters: I) -> Self {
        ReducedWord { letters: free_reduce(letters) }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn into_letters(self) -> Vec<Letter> {
        self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> ReducedWord {
        ReducedWord { letters: self.letters.iter().rev().map(|l| l.inverse()).collect() }
    }

    pub fn pow(&self, n: i64) -> ReducedWord {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut out = ReducedWord::identity();
        for _ in 0..n.unsigned_abs() {
            out = &out * &base;
        }
        out
    }

    /// Number of letters cancelled when forming `self * other`.
    pub fn cancellation_depth(&self, other: &ReducedWord) -> usize {
        self.letters
            .iter()
            .rev()
            .zip(other.letters.iter())
            .take_while(|(a, b)| a.cancels(**b))
            .count()
    }

    pub fn common_prefix_len(&self, other: &ReducedWord) -> usize {
        self.letters.iter().zip(other.letters.iter()).take_while(|(a, b)| a == b).count()
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.letters.first(), self.letters.last()) {
            (Some(f), Some(l)) => self.letters.len() == 1 || !l.cancels(*f),
            _ => true,
        }
    }

    /// Number of occurrences of the generator (either sign).
    pub fn generator_count(&self, generator: usize) -> usize {
        self.letters.iter().filter(|l| l.generator() == generator).count()
    }
}

impl std::ops::Mul<&ReducedWord> for &ReducedWord {
    type Output = ReducedWord;

    fn mul(self, rhs: &ReducedWord) -> ReducedWord {
        let k = self.cancellation_depth(rhs);
        let mut letters = Vec::with_capacity(self.len() + rhs.len() - 2 * k);
        letters.extend_from_slice(&self.letters[..self.len() - k]);
        letters.extend_from_slice(&rhs.letters[k..]);
        ReducedWord { letters }
    }
}

/// Shortlex: shorter words first, then lexicographic in the letter order.
impl Ord for ReducedWord {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| self.letters.cmp(&other.letters))
    }
}

impl PartialOrd for ReducedWord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return f.write_str("1");
        }
        self.letters.iter().try_for_each(|l| write!(f, "{l}"))
    }
}

/// Index of the lexicographically least rotation (smallest index on ties).
pub fn least_rotation(letters: &[Letter]) -> usize {
    let n = letters.len();
    let mut best = 0;
    for i in 1..n {
        for k in 0..n {
            let a = letters[(i + k) % n];
            let b = letters[(best + k) % n];
            match a.cmp(&b) {
                Ordering::Less => {
                    best = i;
                    break;
                }
                Ordering::Greater => break,
                Ordering::Equal => {}
            }
        }
    }
    best
}

fn is_least_rotation(letters: &[Letter]) -> bool {
    let n = letters.len();
    (1..n).all(|i| {
        for k in 0..n {
            match letters[(i + k) % n].cmp(&letters[k]) {
                Ordering::Less => return false,
                Ordering::Greater => return true,
                Ordering::Equal => {}
            }
        }
        true
    })
}

fn primitive_period(letters: &[Letter]) -> usize {
    let n = letters.len();
    (1..=n)
        .find(|&p| n % p == 0 && (p..n).all(|i| letters[i] == letters[i - p]))
        .unwrap_or(n)
}

/// A conjugacy class of a nontrivial element, stored as the canonical
/// (least) rotation of a cyclically reduced representative.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct CyclicWord {
    letters: Vec<Letter>,
    root_power: usize,
}

impl CyclicWord {
    /// The class of `u`.
    pub fn of(u: &ReducedWord) -> Result<CyclicWord> {
        cyclic_reduce(u).map(|(c, _)| c)
    }

    /// Builds the class from letters that are already cyclically reduced.
    fn from_cyclically_reduced(core: &[Letter]) -> CyclicWord {
        let r = least_rotation(core);
        let mut letters = Vec::with_capacity(core.len());
        letters.extend_from_slice(&core[r..]);
        letters.extend_from_slice(&core[..r]);
        let p = primitive_period(&letters);
        CyclicWord { root_power: letters.len() / p, letters }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    /// Cyclic length, i.e. the basis translation length.
    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// `n` such that the stored word is the `n`-th power of a primitive word.
    pub fn root_power(&self) -> usize {
        self.root_power
    }

    /// Free groups are torsion-free.
    pub fn is_non_torsion(&self) -> bool {
        true
    }

    pub fn as_word(&self) -> ReducedWord {
        ReducedWord { letters: self.letters.clone() }
    }

    pub fn primitive_root(&self) -> CyclicWord {
        let p = self.letters.len() / self.root_power;
        CyclicWord { letters: self.letters[..p].to_vec(), root_power: 1 }
    }

    /// The class of `x^n`, `n >= 1`.
    pub fn power(&self, n: usize) -> CyclicWord {
        assert!(n >= 1);
        let mut letters = Vec::with_capacity(self.letters.len() * n);
        for _ in 0..n {
            letters.extend_from_slice(&self.letters);
        }
        CyclicWord { letters, root_power: self.root_power * n }
    }

    pub fn inverse(&self) -> CyclicWord {
        let inv: Vec<Letter> = self.letters.iter().rev().map(|l| l.inverse()).collect();
        CyclicWord::from_cyclically_reduced(&inv)
    }

    pub fn generator_count(&self, generator: usize) -> usize {
        self.letters.iter().filter(|l| l.generator() == generator).count()
    }

    /// All rotations of the stored representative, as reduced words.
    pub fn rotations(&self) -> impl Iterator<Item = ReducedWord> + '_ {
        let n = self.letters.len();
        (0..n).map(move |i| {
            let mut v = self.letters[i..].to_vec();
            v.extend_from_slice(&self.letters[..i]);
            ReducedWord { letters: v }
        })
    }
}

impl fmt::Display for CyclicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        self.letters.iter().try_for_each(|l| write!(f, "{l}"))?;
        write!(f, "]")
    }
}

/// Writes `u = c w c^-1` with `w` the canonical rotation of the cyclic core.
pub fn cyclic_reduce(u: &ReducedWord) -> Result<(CyclicWord, ReducedWord)> {
    if u.is_identity() {
        return Err(Error::EmptyClass);
    }
    let l = u.letters();
    let mut i = 0;
    let mut j = l.len();
    while j - i >= 2 && l[i].cancels(l[j - 1]) {
        i += 1;
        j -= 1;
    }
    let core = &l[i..j];
    let class = CyclicWord::from_cyclically_reduced(core);
    // The canonical rotation is p^-1 core p with p = core[..r]; recover r.
    let n = core.len();
    let r = (0..n)
        .find(|&r| (0..n).all(|k| core[(r + k) % n] == class.letters[k]))
        .expect("canonical rotation is a rotation of the core");
    let conj = ReducedWord::from_letters(l[..i].iter().chain(core[..r].iter()).copied());
    Ok((class, conj))
}

/// Advances `word` to the next reduced word of the same length in
/// lexicographic order. Returns `false` after the last one.
fn next_reduced(word: &mut [Letter], alphabet: usize) -> bool {
    let n = word.len();
    let mut pos = n;
    while pos > 0 {
        pos -= 1;
        let mut c = word[pos].code() + 1;
        if pos > 0 && c == (word[pos - 1].code() ^ 1) {
            c += 1;
        }
        if c < alphabet {
            word[pos] = Letter::from_code(c);
            for q in pos + 1..n {
                let first = if word[q - 1].code() ^ 1 == 0 { 1 } else { 0 };
                word[q] = Letter::from_code(first);
            }
            return true;
        }
    }
    false
}

fn first_reduced(n: usize) -> Vec<Letter> {
    // a a a ... is reduced and lexicographically least.
    vec![Letter::from_code(0); n]
}

/// Reduced words of exactly one length, in lexicographic order.
pub struct SphereIter {
    alphabet: usize,
    current: Option<Vec<Letter>>,
}

impl SphereIter {
    pub fn new(ctx: &GroupContext, length: usize) -> Self {
        SphereIter { alphabet: ctx.alphabet_size(), current: Some(first_reduced(length)) }
    }
}

impl Iterator for SphereIter {
    type Item = ReducedWord;

    fn next(&mut self) -> Option<ReducedWord> {
        let cur = self.current.as_mut()?;
        let out = ReducedWord { letters: cur.clone() };
        if cur.is_empty() || !next_reduced(cur, self.alphabet) {
            self.current = None;
        }
        Some(out)
    }
}

fn check_budget(requested: u128, budget: u128) -> Result<()> {
    if requested > budget {
        return Err(Error::BudgetExceeded { requested, budget });
    }
    Ok(())
}

/// All reduced words of length `<= radius`, each once, in shortlex order.
pub fn enumerate_ball(
    ctx: &GroupContext,
    radius: usize,
    budget: u128,
) -> Result<impl Iterator<Item = ReducedWord>> {
    check_budget(ctx.ball_size(radius), budget)?;
    let ctx = *ctx;
    Ok((0..=radius).flat_map(move |n| SphereIter::new(&ctx, n)))
}

/// Canonical representatives of every conjugacy class of cyclic length
/// `1..=max_cyclic_length`, grouped by length and shortlex within a length.
pub fn enumerate_conj_classes(
    ctx: &GroupContext,
    max_cyclic_length: usize,
    budget: u128,
) -> Result<impl Iterator<Item = CyclicWord>> {
    if max_cyclic_length == 0 {
        return Err(Error::InvalidInput("max_cyclic_length must be >= 1".into()));
    }
    let scanned = ctx.ball_size(max_cyclic_length) - 1;
    check_budget(scanned, budget)?;
    let ctx = *ctx;
    Ok((1..=max_cyclic_length).flat_map(move |n| {
        SphereIter::new(&ctx, n).filter_map(|w| {
            let l = w.letters();
            if (l.len() > 1 && l[l.len() - 1].cancels(l[0])) || !is_least_rotation(l) {
                return None;
            }
            let p = primitive_period(l);
            Some(CyclicWord { root_power: l.len() / p, letters: w.into_letters() })
        })
    }))
}

/// A materialized list of conjugacy classes up to a cyclic length,
/// with per-length offsets.
#[derive(Debug)]
pub struct ClassCatalog {
    rank: usize,
    classes: Vec<CyclicWord>,
    /// `offsets[n]` is the index of the first class of length `n + 1`.
    offsets: Vec<usize>,
}

impl ClassCatalog {
    pub fn new(ctx: &GroupContext, max_length: usize) -> Result<Self> {
        let mut classes = Vec::new();
        let mut offsets = Vec::with_capacity(max_length + 1);
        let mut current = 0;
        for c in enumerate_conj_classes(ctx, max_length, DEFAULT_BUDGET)? {
            while current < c.len() {
                offsets.push(classes.len());
                current += 1;
            }
            classes.push(c);
        }
        while offsets.len() <= max_length {
            offsets.push(classes.len());
        }
        Ok(ClassCatalog { rank: ctx.rank(), classes, offsets })
    }

    /// Process-wide cached catalog.
    pub fn shared(ctx: &GroupContext, max_length: usize) -> Result<Arc<ClassCatalog>> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<ClassCatalog>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        let key = (ctx.rank(), max_length);
        if let Some(c) = cache.lock().expect("catalog cache poisoned").get(&key) {
            return Ok(c.clone());
        }
        let built = Arc::new(ClassCatalog::new(ctx, max_length)?);
        let mut guard = cache.lock().expect("catalog cache poisoned");
        Ok(guard.entry(key).or_insert(built).clone())
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn max_length(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn classes(&self) -> &[CyclicWord] {
        &self.classes
    }

    /// Classes of cyclic length exactly `n` (`1 <= n <= max_length`).
    pub fn of_length(&self, n: usize) -> &[CyclicWord] {
        &self.classes[self.offsets[n - 1]..self.offsets[n]]
    }

    /// Deterministic sample of about `count` classes spread over the catalog.
    pub fn sample(&self, count: usize) -> Vec<&CyclicWord> {
        let n = self.classes.len();
        if count >= n {
            return self.classes.iter().collect();
        }
        (0..count).map(|i| &self.classes[i * n / count]).collect()
    }
}

/// An automorphism of `F_k` permuting and/or inverting basis letters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisAutomorphism {
    images: Vec<Letter>,
}

impl BasisAutomorphism {
    /// `images[i]` is the image of generator `i`; must hit every generator once.
    pub fn new(ctx: &GroupContext, images: Vec<Letter>) -> Result<Self> {
        let mut seen = vec![false; ctx.rank()];
        if images.len() != ctx.rank() {
            return Err(Error::InvalidInput("one image per generator required".into()));
        }
        for l in &images {
            ctx.check_letter(*l)?;
            if std::mem::replace(&mut seen[l.generator()], true) {
                return Err(Error::InvalidInput("images must permute the generators".into()));
            }
        }
        Ok(BasisAutomorphism { images })
    }

    pub fn swap(ctx: &GroupContext, i: usize, j: usize) -> Result<Self> {
        let mut images: Vec<Letter> = (0..ctx.rank()).map(|g| Letter::new(g, false)).collect();
        images.swap(i, j);
        Self::new(ctx, images)
    }

    pub fn invert(ctx: &GroupContext, i: usize) -> Result<Self> {
        let mut images: Vec<Letter> = (0..ctx.rank()).map(|g| Letter::new(g, false)).collect();
        images[i] = images[i].inverse();
        Self::new(ctx, images)
    }

    pub fn apply_letter(&self, l: Letter) -> Letter {
        let img = self.images[l.generator()];
        if l.is_inverse() {
            img.inverse()
        } else {
            img
        }
    }

    pub fn apply(&self, w: &ReducedWord) -> ReducedWord {
        ReducedWord::from_reduced(w.letters().iter().map(|&l| self.apply_letter(l)).collect())
    }

    pub fn apply_class(&self, c: &CyclicWord) -> CyclicWord {
        let img: Vec<Letter> = c.letters().iter().map(|&l| self.apply_letter(l)).collect();
        CyclicWord::from_cyclically_reduced(&img)
    }
}

/// Dense shortlex ranking of the reduced words in a ball, used for
/// array-backed searches.
#[derive(Clone, Debug)]
pub struct BallIndex {
    alphabet: usize,
    radius: usize,
    offsets: Vec<usize>,
    size: usize,
}

impl BallIndex {
    pub fn new(ctx: &GroupContext, radius: usize, budget: u128) -> Result<Self> {
        let size = ctx.ball_size(radius);
        check_budget(size, budget)?;
        let mut offsets = Vec::with_capacity(radius + 2);
        let mut acc = 0usize;
        for n in 0..=radius {
            offsets.push(acc);
            acc += ctx.sphere_size(n) as usize;
        }
        offsets.push(acc);
        Ok(BallIndex { alphabet: ctx.alphabet_size(), radius, offsets, size: acc })
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Index of `letters` (assumed reduced), or `None` outside the ball.
    pub fn rank(&self, letters: &[Letter]) -> Option<usize> {
        let n = letters.len();
        if n > self.radius {
            return None;
        }
        if n == 0 {
            return Some(0);
        }
        let base = self.alphabet - 1;
        let mut idx = letters[0].code();
        for w in letters.windows(2) {
            let c = w[1].code();
            let forbidden = w[0].code() ^ 1;
            let digit = if c > forbidden { c - 1 } else { c };
            idx = idx * base + digit;
        }
        Some(self.offsets[n] + idx)
    }

    /// Writes the word with index `idx` into `out`.
    pub fn unrank(&self, idx: usize, out: &mut Vec<Letter>) {
        out.clear();
        let n = self.offsets.partition_point(|&o| o <= idx) - 1;
        if n == 0 {
            return;
        }
        let base = self.alphabet - 1;
        let mut rem = idx - self.offsets[n];
        let mut digits = [0usize; 64];
        for slot in digits[1..n].iter_mut().rev() {
            *slot = rem % base;
            rem /= base;
        }
        digits[0] = rem;
        out.push(Letter::from_code(digits[0]));
        for &d in &digits[1..n] {
            let forbidden = out.last().expect("nonempty").code() ^ 1;
            let c = if d >= forbidden { d + 1 } else { d };
            out.push(Letter::from_code(c));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn f2() -> GroupContext {
        GroupContext::new(2).unwrap()
    }

    fn w(s: &str) -> ReducedWord {
        f2().parse_word(s).unwrap()
    }

    #[test]
    fn reduce_examples() {
        let ctx = f2();
        assert_eq!(ctx.parse_word("abb-a").unwrap(), w("aa"));
        assert!(ctx.reduce(&[]).unwrap().is_identity());
        assert!(ctx.parse_word("aa-").unwrap().is_identity());
        let bad = [Letter::new(2, false)];
        assert!(matches!(ctx.reduce(&bad), Err(Error::ContextMismatch { index: 2, rank: 2 })));
    }

    #[test]
    fn concat_examples() {
        let ctx = f2();
        assert_eq!(ctx.concat(&w("ab"), &w("b-a")).unwrap(), w("aa"));
        let u = w("ab-ab");
        assert_eq!(ctx.concat(&u, &ReducedWord::identity()).unwrap(), u);
        assert!(ctx.concat(&u, &u.inverse()).unwrap().is_identity());
        let f3 = GroupContext::new(3).unwrap();
        let c = f3.parse_word("c").unwrap();
        assert!(ctx.concat(&u, &c).is_err());
    }

    #[test]
    fn concat_length_formula() {
        let u = w("abab-");
        let v = w("ba-b-a");
        let k = u.cancellation_depth(&v);
        assert_eq!((&u * &v).len(), u.len() + v.len() - 2 * k);
    }

    #[test]
    fn cyclic_reduce_examples() {
        let (c, g) = cyclic_reduce(&w("aba-")).unwrap();
        assert_eq!(c.as_word(), w("b"));
        assert_eq!(g, w("a"));
        let (c, g) = cyclic_reduce(&w("ab")).unwrap();
        assert_eq!(c.as_word(), w("ab"));
        assert!(g.is_identity());
        assert_eq!(cyclic_reduce(&ReducedWord::identity()), Err(Error::EmptyClass));
    }

    /// Brute force: minimal-length conjugate among all `g u g^-1` with
    /// `|g| <= 6`, then the least rotation by direct comparison.
    #[test]
    fn cyclic_reduce_matches_brute_force() {
        let ctx = f2();
        let u = w("ababa-b-a-");
        let (class, conj) = cyclic_reduce(&u).unwrap();
        let mut best: Option<ReducedWord> = None;
        for g in enumerate_ball(&ctx, 6, DEFAULT_BUDGET).unwrap() {
            let v = &(&g * &u) * &g.inverse();
            if best.as_ref().map_or(true, |b| v < *b) {
                best = Some(v);
            }
        }
        let best = best.unwrap();
        assert_eq!(best, w("b"));
        assert_eq!(class.as_word(), best);
        assert_eq!(conj, w("aba"));
        assert_eq!(&(&conj * &class.as_word()) * &conj.inverse(), u);
    }

    #[test]
    fn canonical_rotation_and_power() {
        let c = f2().parse_class("bab").unwrap();
        assert_eq!(c.as_word(), w("abb"));
        let c = f2().parse_class("abab").unwrap();
        assert_eq!(c.root_power(), 2);
        assert_eq!(c.primitive_root().as_word(), w("ab"));
        assert_eq!(c.power(3).len(), 12);
        assert!(c.is_non_torsion());
    }

    #[test]
    fn ball_examples() {
        let ctx = f2();
        let b0: Vec<_> = enumerate_ball(&ctx, 0, DEFAULT_BUDGET).unwrap().collect();
        assert_eq!(b0, vec![ReducedWord::identity()]);
        assert_eq!(enumerate_ball(&ctx, 1, DEFAULT_BUDGET).unwrap().count(), 5);
        let b3: Vec<_> = enumerate_ball(&ctx, 3, DEFAULT_BUDGET).unwrap().collect();
        assert!(b3.windows(2).all(|p| p[0] < p[1]), "shortlex order");
        assert!(matches!(
            enumerate_ball(&ctx, 20, 1000),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    /// Naive oracle: all letter sequences up to length n, reduced, deduped.
    #[test]
    fn ball_sizes_match_naive_oracle() {
        let ctx = f2();
        let mut seqs: Vec<Vec<Letter>> = vec![vec![]];
        let mut frontier: Vec<Vec<Letter>> = vec![vec![]];
        for n in 1..=6 {
            let mut next = Vec::new();
            for s in &frontier {
                for l in ctx.letters() {
                    let mut t = s.clone();
                    t.push(l);
                    next.push(t);
                }
            }
            seqs.extend(next.iter().cloned());
            frontier = next;
            let naive: BTreeSet<ReducedWord> = seqs
                .iter()
                .map(|s| ReducedWord::from_letters(s.iter().copied()))
                .filter(|r| r.len() <= n)
                .collect();
            let got: Vec<_> = enumerate_ball(&ctx, n, DEFAULT_BUDGET).unwrap().collect();
            assert_eq!(got.len(), naive.len());
            assert_eq!(got.len() as u128, 1 + 2 * (3u128.pow(n as u32) - 1));
            assert!(got.iter().eq(naive.iter()));
        }
    }

    #[test]
    fn conj_class_examples() {
        let ctx = f2();
        let c1: Vec<String> = enumerate_conj_classes(&ctx, 1, DEFAULT_BUDGET)
            .unwrap()
            .map(|c| c.to_string())
            .collect();
        assert_eq!(c1, ["[a]", "[a-]", "[b]", "[b-]"]);

        // Oracle: all 12 reduced length-2 words are cyclically reduced; dedupe by rotation.
        let words: Vec<ReducedWord> = SphereIter::new(&ctx, 2).collect();
        assert_eq!(words.len(), 12);
        assert!(words.iter().all(|w| w.is_cyclically_reduced()));
        let classes: BTreeSet<Vec<Letter>> = words
            .iter()
            .map(|w| {
                let l = w.letters();
                std::cmp::min(l.to_vec(), vec![l[1], l[0]])
            })
            .collect();
        assert_eq!(classes.len(), 8);
        let len2 = enumerate_conj_classes(&ctx, 2, DEFAULT_BUDGET)
            .unwrap()
            .filter(|c| c.len() == 2)
            .count();
        assert_eq!(len2, 8);

        let b = f2().parse_class("aba-").unwrap();
        let all: Vec<_> = enumerate_conj_classes(&ctx, 3, DEFAULT_BUDGET).unwrap().collect();
        assert_eq!(all.iter().filter(|c| **c == b).count(), 1);
        assert_eq!(b.len(), 1);
    }

    #[test]
    fn catalog_offsets() {
        let ctx = f2();
        let cat = ClassCatalog::new(&ctx, 4).unwrap();
        assert_eq!(cat.of_length(1).len(), 4);
        assert_eq!(cat.of_length(2).len(), 8);
        assert!(cat.of_length(4).iter().all(|c| c.len() == 4));
        assert_eq!(cat.max_length(), 4);
        assert_eq!(cat.sample(10).len(), 10);
    }

    #[test]
    fn ball_index_round_trip() {
        let ctx = f2();
        let idx = BallIndex::new(&ctx, 5, DEFAULT_BUDGET).unwrap();
        let mut buf = Vec::new();
        for (i, w) in enumerate_ball(&ctx, 5, DEFAULT_BUDGET).unwrap().enumerate() {
            assert_eq!(idx.rank(w.letters()), Some(i));
            idx.unrank(i, &mut buf);
            assert_eq!(buf.as_slice(), w.letters());
        }
        assert_eq!(idx.size() as u128, ctx.ball_size(5));
        assert_eq!(idx.rank(w("aaaaaa").letters()), None);
    }

    #[test]
    fn automorphism_swap() {
        let ctx = f2();
        let phi = BasisAutomorphism::swap(&ctx, 0, 1).unwrap();
        assert_eq!(phi.apply(&w("ab-a")), w("ba-b"));
        assert_eq!(phi.apply_class(&f2().parse_class("ab").unwrap()).as_word(), w("ab"));
        assert_eq!(phi.apply_class(&f2().parse_class("a").unwrap()).as_word(), w("b"));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn raw_letters(max: usize) -> impl Strategy<Value = Vec<Letter>> {
            proptest::collection::vec((0usize..4).prop_map(Letter::from_code), 0..=max)
        }

        fn word(max: usize) -> impl Strategy<Value = ReducedWord> {
            raw_letters(max).prop_map(ReducedWord::from_letters)
        }

        proptest! {
            #[test]
            fn reduce_idempotent(s in raw_letters(16)) {
                let once = free_reduce(s.iter().copied());
                let twice = free_reduce(once.iter().copied());
                prop_assert_eq!(once, twice);
            }

            #[test]
            fn concat_associative(u in word(8), v in word(8), x in word(8)) {
                prop_assert_eq!(&(&u * &v) * &x, &u * &(&v * &x));
            }

            #[test]
            fn class_is_conjugation_invariant(u in word(6), g in word(6)) {
                prop_assume!(!u.is_identity());
                let conj = &(&g * &u) * &g.inverse();
                prop_assert_eq!(CyclicWord::of(&conj).unwrap(), CyclicWord::of(&u).unwrap());
            }

            #[test]
            fn cyclic_reduce_reconstructs(u in word(10)) {
                prop_assume!(!u.is_identity());
                let (c, g) = cyclic_reduce(&u).unwrap();
                prop_assert_eq!(&(&g * &c.as_word()) * &g.inverse(), u);
            }
        }

        #[test]
        fn emitted_classes_are_canonical_under_rotation() {
            let ctx = GroupContext::new(2).unwrap();
            for c in enumerate_conj_classes(&ctx, 6, DEFAULT_BUDGET).unwrap() {
                for r in c.rotations() {
                    assert_eq!(CyclicWord::of(&r).unwrap(), c);
                }
            }
        }
    }
}
