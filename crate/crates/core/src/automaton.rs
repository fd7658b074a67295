//! Strongly Markov structures: ingestion, bijection checks, component
//! analysis and axial witnesses.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::path::Path;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{enumerate_ball, GroupContext, Letter, ReducedWord, DEFAULT_BUDGET};
use crate::metrics::MetricProvider;
use crate::perron::{perron_root, DenseMatrix, PowerIteration};

/// Relative tolerance for deciding that a component attains the maximal
/// spectral radius.
pub const MAXIMAL_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub label: Letter,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StronglyMarkovStructure {
    vertex_count: usize,
    initial: usize,
    edges: Vec<Edge>,
}

#[derive(Serialize, Deserialize)]
struct EdgeRecord {
    from: usize,
    to: usize,
    label: String,
}

#[derive(Serialize, Deserialize)]
struct StructureRecord {
    vertices: usize,
    initial: usize,
    edges: Vec<EdgeRecord>,
}

impl StronglyMarkovStructure {
    pub fn new(
        ctx: &GroupContext,
        vertex_count: usize,
        initial: usize,
        edges: Vec<Edge>,
    ) -> Result<Self> {
        if initial >= vertex_count {
            return Err(Error::InvalidStructure(format!(
                "initial vertex {initial} out of range for {vertex_count} vertices"
            )));
        }
        for e in &edges {
            if e.from >= vertex_count || e.to >= vertex_count {
                return Err(Error::InvalidStructure(format!(
                    "dangling vertex id in edge {} -> {}",
                    e.from, e.to
                )));
            }
            if e.label.generator() >= ctx.rank() {
                return Err(Error::InvalidStructure(format!(
                    "label {} outside the alphabet of rank {}",
                    e.label,
                    ctx.rank()
                )));
            }
        }
        Ok(StronglyMarkovStructure { vertex_count, initial, edges })
    }

    /// The shortlex geodesic structure of `F_k`: vertex 0 is the initial
    /// vertex and vertex `1 + code(l)` remembers the last letter `l`.
    pub fn shortlex(ctx: &GroupContext) -> Self {
        let mut edges = Vec::new();
        for l in ctx.letters() {
            edges.push(Edge { from: 0, to: 1 + l.code(), label: l });
        }
        for l in ctx.letters() {
            for m in ctx.letters() {
                if !l.cancels(m) {
                    edges.push(Edge { from: 1 + l.code(), to: 1 + m.code(), label: m });
                }
            }
        }
        StronglyMarkovStructure { vertex_count: 1 + ctx.alphabet_size(), initial: 0, edges }
    }

    pub fn from_json_str(ctx: &GroupContext, text: &str) -> Result<Self> {
        let rec: StructureRecord = serde_json::from_str(text)?;
        let mut edges = Vec::with_capacity(rec.edges.len());
        for e in rec.edges {
            let label: Letter = e.label.parse().map_err(|_| {
                Error::InvalidStructure(format!("unreadable label `{}`", e.label))
            })?;
            edges.push(Edge { from: e.from, to: e.to, label });
        }
        Self::new(ctx, rec.vertices, rec.initial, edges)
    }

    pub fn to_json_string(&self) -> String {
        let rec = StructureRecord {
            vertices: self.vertex_count,
            initial: self.initial,
            edges: self
                .edges
                .iter()
                .map(|e| EdgeRecord { from: e.from, to: e.to, label: e.label.to_string() })
                .collect(),
        };
        serde_json::to_string_pretty(&rec).expect("structure serializes")
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    fn out_edges(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.vertex_count];
        for (i, e) in self.edges.iter().enumerate() {
            out[e.from].push(i);
        }
        out
    }
}

pub fn load_structure(ctx: &GroupContext, path: impl AsRef<Path>) -> Result<StronglyMarkovStructure> {
    let text = std::fs::read_to_string(path)?;
    StronglyMarkovStructure::from_json_str(ctx, &text)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum BijectionFailure {
    /// The label word of the path is not freely reduced.
    NotLengthPreserving,
    /// Two paths carry the same group element.
    NotInjective { other_path: Vec<usize> },
    /// Some element of the ball is not the image of a path.
    NotSurjective { missing: String },
}

#[derive(Clone, Debug, Serialize)]
pub struct Counterexample {
    /// Edge indices of the offending path.
    pub path: Vec<usize>,
    pub labels: String,
    pub failure: BijectionFailure,
}

#[derive(Clone, Debug, Serialize)]
pub struct BijectionReport {
    pub radius: usize,
    /// Number of paths from the initial vertex of each length `0..=radius`.
    pub path_counts: Vec<u64>,
    pub counterexample: Option<Counterexample>,
}

impl BijectionReport {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

/// Checks that paths of length `<= radius` from the initial vertex biject,
/// length-preservingly, onto the ball of that radius.
pub fn validate_bijection(
    s: &StronglyMarkovStructure,
    ctx: &GroupContext,
    radius: usize,
) -> BijectionReport {
    struct Walk<'a> {
        s: &'a StronglyMarkovStructure,
        out: Vec<Vec<usize>>,
        radius: usize,
        path: Vec<usize>,
        labels: Vec<Letter>,
        seen: std::collections::HashMap<Vec<Letter>, Vec<usize>>,
        counts: Vec<u64>,
        failure: Option<Counterexample>,
    }

    impl Walk<'_> {
        fn visit(&mut self, v: usize) {
            let n = self.path.len();
            self.counts[n] += 1;
            let word = ReducedWord::from_letters(self.labels.iter().copied());
            let fail = if word.len() != n {
                Some(BijectionFailure::NotLengthPreserving)
            } else if let Some(other) = self.seen.get(word.letters()) {
                Some(BijectionFailure::NotInjective { other_path: other.clone() })
            } else {
                self.seen.insert(word.into_letters(), self.path.clone());
                None
            };
            if let Some(failure) = fail {
                let labels = self.labels.iter().map(|l| l.to_string()).collect();
                self.failure = Some(Counterexample { path: self.path.clone(), labels, failure });
                return;
            }
            if n == self.radius {
                return;
            }
            for k in 0..self.out[v].len() {
                let ei = self.out[v][k];
                let e = self.s.edges[ei];
                self.path.push(ei);
                self.labels.push(e.label);
                self.visit(e.to);
                self.path.pop();
                self.labels.pop();
                if self.failure.is_some() {
                    return;
                }
            }
        }
    }

    let mut walk = Walk {
        s,
        out: s.out_edges(),
        radius,
        path: Vec::new(),
        labels: Vec::new(),
        seen: Default::default(),
        counts: vec![0; radius + 1],
        failure: None,
    };
    walk.visit(s.initial);
    if walk.failure.is_none() && walk.seen.len() as u128 != ctx.ball_size(radius) {
        // Injective and length preserving into the ball but short of it.
        if let Ok(ball) = enumerate_ball(ctx, radius, DEFAULT_BUDGET) {
            if let Some(m) = ball.into_iter().find(|w| !walk.seen.contains_key(w.letters())) {
                walk.failure = Some(Counterexample {
                    path: Vec::new(),
                    labels: String::new(),
                    failure: BijectionFailure::NotSurjective { missing: m.to_string() },
                });
            }
        }
    }
    BijectionReport { radius, path_counts: walk.counts, counterexample: walk.failure }
}

#[derive(Clone, Debug, Serialize)]
pub struct ComponentReport {
    pub id: usize,
    pub vertices: Vec<usize>,
    /// False for a single vertex without a self-loop.
    pub recurrent: bool,
    pub spectral_radius: f64,
    /// Perron residual `||Mv - rho v|| / ||v||`.
    pub residual: f64,
    pub is_maximal: bool,
}

/// Strongly connected components with the spectral radii of their
/// transition submatrices (edge multiplicities counted). The initial vertex
/// is skipped when no path returns to it.
pub fn component_analysis(s: &StronglyMarkovStructure) -> Result<Vec<ComponentReport>> {
    let mut g: DiGraph<(), ()> = DiGraph::new();
    let nodes: Vec<_> = (0..s.vertex_count).map(|_| g.add_node(())).collect();
    for e in &s.edges {
        g.add_edge(nodes[e.from], nodes[e.to], ());
    }
    let mut sccs: Vec<Vec<usize>> = tarjan_scc(&g)
        .into_iter()
        .map(|c| {
            let mut v: Vec<usize> = c.into_iter().map(|n| n.index()).collect();
            v.sort_unstable();
            v
        })
        .collect();
    sccs.sort();

    let mut reports = Vec::new();
    for vertices in sccs {
        let has_loop = |v: usize| s.edges.iter().any(|e| e.from == v && e.to == v);
        let recurrent = vertices.len() > 1 || has_loop(vertices[0]);
        if !recurrent && vertices == [s.initial] {
            continue;
        }
        let (spectral_radius, residual) = if recurrent {
            let pos = |v: usize| vertices.binary_search(&v).ok();
            let mut m = DenseMatrix::zeros(vertices.len());
            for e in &s.edges {
                if let (Some(i), Some(j)) = (pos(e.from), pos(e.to)) {
                    m.add(i, j, 1.0);
                }
            }
            let r = perron_root(&m, PowerIteration::default())?;
            (r.value, r.residual)
        } else {
            (0.0, 0.0)
        };
        reports.push(ComponentReport {
            id: reports.len(),
            vertices,
            recurrent,
            spectral_radius,
            residual,
            is_maximal: false,
        });
    }
    let top = reports.iter().map(|r| r.spectral_radius).fold(0.0, f64::max);
    for r in &mut reports {
        r.is_maximal = top > 0.0 && r.spectral_radius >= top * (1.0 - MAXIMAL_TOL);
    }
    Ok(reports)
}

/// Largest component spectral radius (0 when nothing recurs).
pub fn max_spectral_radius(reports: &[ComponentReport]) -> f64 {
    reports.iter().map(|r| r.spectral_radius).fold(0.0, f64::max)
}

/// Shortest paths inside one component.
struct ComponentPaths<'a> {
    s: &'a StronglyMarkovStructure,
    vertices: &'a [usize],
}

impl ComponentPaths<'_> {
    fn contains(&self, v: usize) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }

    /// Label word of a shortest path `from -> to` staying in the component.
    fn shortest(&self, from: usize, to: usize) -> Option<Vec<Letter>> {
        let mut prev: std::collections::HashMap<usize, (usize, Letter)> = Default::default();
        let mut queue = VecDeque::from([from]);
        let mut seen = HashSet::from([from]);
        while let Some(u) = queue.pop_front() {
            if u == to {
                let mut labels = Vec::new();
                let mut cur = to;
                while cur != from {
                    let (p, l) = prev[&cur];
                    labels.push(l);
                    cur = p;
                }
                labels.reverse();
                return Some(labels);
            }
            for e in self.s.edges.iter().filter(|e| e.from == u && self.contains(e.to)) {
                if seen.insert(e.to) {
                    prev.insert(e.to, (u, e.label));
                    queue.push_back(e.to);
                }
            }
        }
        None
    }

    /// Longest shortest return path between two component vertices.
    fn diameter(&self) -> usize {
        let mut n = 0;
        for &a in self.vertices {
            for &b in self.vertices {
                if let Some(p) = self.shortest(a, b) {
                    n = n.max(p.len());
                }
            }
        }
        n
    }

    /// Start/end vertex pairs of paths in the component reading `word`.
    fn readings(&self, word: &[Letter]) -> BTreeSet<(usize, usize)> {
        let mut states: BTreeSet<(usize, usize)> = self.vertices.iter().map(|&v| (v, v)).collect();
        for &l in word {
            let mut next = BTreeSet::new();
            for &(start, cur) in &states {
                for e in &self.s.edges {
                    if e.from == cur && e.label == l && self.contains(e.to) {
                        next.insert((start, e.to));
                    }
                }
            }
            states = next;
            if states.is_empty() {
                break;
            }
        }
        states
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AxialWitness {
    pub input: String,
    pub witness: String,
    pub prefix: String,
    pub core: String,
    pub suffix: String,
    pub return_word: String,
    /// `d_S(x, gamma_x)` computed from the words.
    pub displacement: f64,
    /// `|s1| + |s2| + |w|`.
    pub displacement_bound: f64,
    /// `max_{0 <= m, n <= M} (gamma^-m | gamma^n)_S` computed from the words.
    pub axiality: f64,
    /// `3 |s1|`.
    pub axiality_bound: f64,
    pub check_power: usize,
    /// Return-path bound inside the component.
    pub component_diameter: usize,
    #[serde(skip)]
    pub gamma: ReducedWord,
}

impl AxialWitness {
    pub fn certified(&self) -> bool {
        self.displacement <= self.displacement_bound && self.axiality <= self.axiality_bound
    }
}

/// `max_{0 <= m, n <= M} (g^-m | g^n)` for the basis word length.
pub fn basis_axiality(g: &ReducedWord, max_power: usize) -> f64 {
    let lens: Vec<usize> = (0..=2 * max_power).map(|k| g.pow(k as i64).len()).collect();
    let mut best = 0.0f64;
    for m in 0..=max_power {
        for n in 0..=max_power {
            let gp = (lens[m] + lens[n]) as f64 - lens[m + n] as f64;
            best = best.max(0.5 * gp);
        }
    }
    best
}

/// Finds `gamma_x = s1 r w s1^-1` close to `x` whose powers are uniformly
/// close to geodesic, using the first maximal component.
pub fn axial_witness(
    s: &StronglyMarkovStructure,
    components: &[ComponentReport],
    ctx: &GroupContext,
    x: &ReducedWord,
    search_radius: usize,
    check_power: usize,
) -> Result<AxialWitness> {
    if x.is_identity() {
        return Err(Error::InvalidInput("axial witness of the identity".into()));
    }
    let comp = components
        .iter()
        .find(|c| c.is_maximal)
        .ok_or_else(|| Error::InvalidStructure("no maximal component".into()))?;
    let paths = ComponentPaths { s, vertices: &comp.vertices };

    let read = |r: &ReducedWord| -> Option<(usize, Vec<Letter>)> {
        if r.is_identity() {
            return None;
        }
        paths
            .readings(r.letters())
            .into_iter()
            .filter_map(|(start, end)| paths.shortest(end, start).map(|w| (w.len(), w)))
            .min_by_key(|(len, _)| *len)
    };

    let letters = x.letters();
    let n = letters.len();
    let mut found: Option<(ReducedWord, ReducedWord, ReducedWord, Vec<Letter>)> = None;
    // Prefix/suffix splits first, by increasing |s1| + |s2|.
    'split: for total in 0..=2 * search_radius {
        for i in 0..=total.min(search_radius) {
            let j = total - i;
            if j > search_radius || i + j >= n {
                continue;
            }
            let r = ReducedWord::from_reduced(letters[i..n - j].to_vec());
            if let Some((_, w)) = read(&r) {
                found = Some((
                    ReducedWord::from_reduced(letters[..i].to_vec()),
                    r,
                    ReducedWord::from_reduced(letters[n - j..].to_vec()),
                    w,
                ));
                break 'split;
            }
        }
    }
    if found.is_none() {
        let ball: Vec<ReducedWord> = enumerate_ball(ctx, search_radius, DEFAULT_BUDGET)?.collect();
        'general: for s1 in &ball {
            for s2 in &ball {
                let r = &(&s1.inverse() * x) * &s2.inverse();
                if let Some((_, w)) = read(&r) {
                    found = Some((s1.clone(), r, s2.clone(), w));
                    break 'general;
                }
            }
        }
    }
    let (s1, r, s2, w) = found.ok_or(Error::WitnessNotFound { radius: search_radius })?;
    let w = ReducedWord::from_letters(w);
    let gamma = &(&(&s1 * &r) * &w) * &s1.inverse();
    let displacement = (&x.inverse() * &gamma).len() as f64;
    Ok(AxialWitness {
        input: x.to_string(),
        witness: gamma.to_string(),
        prefix: s1.to_string(),
        core: r.to_string(),
        suffix: s2.to_string(),
        return_word: w.to_string(),
        displacement,
        displacement_bound: (s1.len() + s2.len() + w.len()) as f64,
        axiality: basis_axiality(&gamma, check_power),
        axiality_bound: 3.0 * s1.len() as f64,
        check_power,
        component_diameter: paths.diameter(),
        gamma,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DistanceLengthReport {
    /// Running maximum of `d(o,x) - max_u l[xu]` over the ball of each radius.
    pub per_radius: Vec<f64>,
    pub constant: f64,
}

/// Empirical constant in `d(o,x) <= max_{u in B} l[xu] + C`.
pub fn distance_vs_length_check(
    provider: &dyn MetricProvider,
    ctx: &GroupContext,
    thickening: &[ReducedWord],
    radius: usize,
) -> Result<DistanceLengthReport> {
    if thickening.is_empty() {
        return Err(Error::InvalidInput("thickening set B must be nonempty".into()));
    }
    let mut per_radius = vec![f64::NEG_INFINITY; radius + 1];
    for x in enumerate_ball(ctx, radius, DEFAULT_BUDGET)? {
        let d = provider.distance(&x)?;
        let mut best = f64::NEG_INFINITY;
        for u in thickening {
            let xu = &x * u;
            let l = if xu.is_identity() {
                0.0
            } else {
                provider.translation_length(&crate::group::CyclicWord::of(&xu)?)?.value
            };
            best = best.max(l);
        }
        let slot = &mut per_radius[x.len()];
        *slot = slot.max(d - best);
    }
    for r in 1..=radius {
        per_radius[r] = per_radius[r].max(per_radius[r - 1]);
    }
    Ok(DistanceLengthReport { constant: per_radius[radius], per_radius })
}
