//! Subcommand bodies. Each renders its artifact to a string so that the
//! binary, the task runner and the verification battery share one path.

use std::fmt::Write as _;
use std::path::Path;

use mstruct_core::automaton::{
    axial_witness, component_analysis, load_structure, max_spectral_radius, validate_bijection,
    StronglyMarkovStructure,
};
use mstruct_core::group::{enumerate_ball, ClassCatalog, GroupContext, DEFAULT_BUDGET};
use mstruct_core::manhattan::{build_curve, grid, CurveMethod};
use mstruct_core::metrics::MetricProvider;
use mstruct_core::structures::{
    boundary_limits, delta_distance, dilation_estimate, exact_geodesic, transversality_check, write_geodesic_csv,
};
use mstruct_core::{Error, Result};
use serde::Serialize;
use serde_json::json;

use crate::config::{Env, TaskSpec};

/// Process exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NonConvergence { .. }
        | Error::BracketFailure { .. }
        | Error::AllZeroShells
        | Error::WitnessNotFound { .. }
        | Error::NegativeLength { .. }
        | Error::InconsistentBoundary { .. } => 3,
        Error::DegeneratePair(_) | Error::BoundaryPair(_) => 4,
        Error::BudgetExceeded { .. } => 5,
        _ => 2,
    }
}

#[derive(Clone, Debug)]
pub struct Options {
    pub max_length: Option<usize>,
    pub radius: Option<usize>,
    pub budget: u128,
    pub method: CurveMethod,
    pub grid: Option<String>,
    pub structure: Option<String>,
}

impl Default for Options {
    fn default() -> Self {
        Options { max_length: None, radius: None, budget: DEFAULT_BUDGET, method: CurveMethod::Exact, grid: None, structure: None }
    }
}

impl Options {
    pub fn from_task(task: &TaskSpec) -> Result<Options> {
        Ok(Options {
            max_length: task.max_length,
            radius: task.radius,
            method: task.method.as_deref().map(str::parse).transpose()?.unwrap_or(CurveMethod::Exact),
            grid: task.grid.clone(),
            structure: task.structure.clone(),
            ..Options::default()
        })
    }

    fn length(&self, ctx: &GroupContext, default: usize) -> Result<usize> {
        let n = self.max_length.unwrap_or(default);
        check_budget(ctx, n, self.budget)?;
        Ok(n)
    }

    fn radius(&self, ctx: &GroupContext, default: usize) -> Result<usize> {
        let r = self.radius.unwrap_or(default);
        check_budget(ctx, r, self.budget)?;
        Ok(r)
    }

    fn grid(&self, default: &str) -> Result<Vec<f64>> {
        parse_grid(self.grid.as_deref().unwrap_or(default))
    }
}

/// Rejects work whose ball of the given radius exceeds `budget` elements.
pub fn check_budget(ctx: &GroupContext, radius: usize, budget: u128) -> Result<()> {
    let requested = ctx.ball_size(radius);
    if requested > budget {
        return Err(Error::BudgetExceeded { requested, budget });
    }
    Ok(())
}

/// `lo:hi:step`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [lo, hi, step] = parts[..] else {
        return Err(Error::InvalidInput(format!("grid `{spec}` is not lo:hi:step")));
    };
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| Error::InvalidInput(format!("bad grid number `{s}`")));
    grid(num(lo)?, num(hi)?, num(step)?)
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

/// Stable lengths of every class up to the max length.
pub fn ell(env: &Env, provider: &str, opts: &Options) -> Result<String> {
    let p = env.provider(provider)?;
    let n = opts.length(&env.ctx, 6)?;
    let mut out = String::from("class,value,method,residual\n");
    for c in ClassCatalog::shared(&env.ctx, n)?.classes() {
        let v = p.translation_length(c)?;
        let method = if v.exact { "exact" } else { "fekete" };
        writeln!(out, "{c},{},{method},{}", v.value, v.residual).unwrap();
    }
    Ok(out)
}

pub fn dil(env: &Env, a: &str, b: &str, opts: &Options) -> Result<String> {
    let n = opts.length(&env.ctx, 10)?;
    let e = dilation_estimate(&env.ctx, env.provider(a)?.as_ref(), env.provider(b)?.as_ref(), n)?;
    Ok(to_json(&json!({
        "pair": [a, b],
        "method": "enumeration",
        "residual": 0.0,
        "estimate": e,
    })))
}

pub fn delta(env: &Env, a: &str, b: &str, opts: &Options) -> Result<String> {
    let n = opts.length(&env.ctx, 10)?;
    let (pa, pb) = (env.provider(a)?, env.provider(b)?);
    let value = delta_distance(&env.ctx, pa.as_ref(), pb.as_ref(), n)?;
    Ok(to_json(&json!({
        "pair": [a, b],
        "method": "enumeration",
        "residual": 0.0,
        "max_length": n,
        "delta": value,
    })))
}

/// Manhattan curve CSV for the pair `(d*, d)`.
pub fn theta(env: &Env, d_star: &str, d: &str, opts: &Options) -> Result<String> {
    let g = opts.grid("-2:4:0.1")?;
    let radius = match opts.method {
        CurveMethod::Exact => 0,
        CurveMethod::Empirical => opts.radius(&env.ctx, 12)?,
    };
    let model = build_curve(&env.ctx, env.provider(d_star)?, env.provider(d)?, &g, opts.method, radius)?;
    let mut buf = Vec::new();
    model.write_csv(&mut buf)?;
    Ok(String::from_utf8(buf).expect("csv is utf-8"))
}

/// Arc-length samples of the geodesic from `[d]` towards `[d*]`.
pub fn geodesic(env: &Env, d_star: &str, d: &str, opts: &Options) -> Result<String> {
    let n = opts.length(&env.ctx, 10)?;
    let g = exact_geodesic(&env.ctx, env.provider(d)?, env.provider(d_star)?, n)?;
    let samples = opts
        .grid("-1:1:0.1")?
        .into_iter()
        .map(|t| g.sample(t))
        .collect::<Result<Vec<_>>>()?;
    let mut buf = Vec::new();
    write_geodesic_csv(&samples, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv is utf-8"))
}

/// `l_inf` and `l_-inf` of the geodesic through `(d*, d)` on every class.
pub fn boundary(env: &Env, d_star: &str, d: &str, opts: &Options) -> Result<String> {
    let n = opts.length(&env.ctx, 8)?;
    let (p, ps) = (env.provider(d)?, env.provider(d_star)?);
    let f = dilation_estimate(&env.ctx, p.as_ref(), ps.as_ref(), n)?;
    let b = dilation_estimate(&env.ctx, ps.as_ref(), p.as_ref(), n)?;
    let lim = boundary_limits(&env.ctx, p, ps, f.value, b.value, n)?;
    let mut out = String::from("class,l_inf,l_minus_inf,method,residual\n");
    for c in ClassCatalog::shared(&env.ctx, n)?.classes() {
        let a = lim.plus.translation_length(c)?;
        let m = lim.minus.translation_length(c)?;
        let method = if a.exact && m.exact { "exact" } else { "fekete" };
        writeln!(out, "{c},{},{},{method},{}", a.value, m.value, a.residual.max(m.residual)).unwrap();
    }
    Ok(out)
}

pub fn transversal(env: &Env, l_inf: &str, l_minf: &str, opts: &Options) -> Result<String> {
    let n = opts.length(&env.ctx, 10)?;
    let r = transversality_check(&env.ctx, env.provider(l_inf)?, env.provider(l_minf)?, n)?;
    Ok(to_json(&json!({
        "pair": [l_inf, l_minf],
        "method": "enumeration",
        "residual": r.recovery_defect,
        "report": r,
    })))
}

/// Bijection, component and axial-witness report for a structure file, or
/// the built-in shortlex structure.
pub fn automaton(env: &Env, opts: &Options) -> Result<String> {
    let ctx = &env.ctx;
    let radius = opts.radius(ctx, 8)?;
    let (name, s) = match &opts.structure {
        Some(path) => (path.clone(), load_structure(ctx, path)?),
        None => ("shortlex".to_string(), StronglyMarkovStructure::shortlex(ctx)),
    };
    let bijection = validate_bijection(&s, ctx, radius);
    let components = component_analysis(&s)?;
    let rho = max_spectral_radius(&components);
    let mut witnesses = Vec::new();
    for x in enumerate_ball(ctx, 2.min(radius), opts.budget)?.filter(|x| !x.is_identity()) {
        let w = axial_witness(&s, &components, ctx, &x, 2, 8)?;
        let certified = w.certified();
        witnesses.push(json!({ "witness": w, "certified": certified }));
    }
    let residual = components.iter().filter(|c| c.is_maximal).map(|c| c.residual).fold(0.0, f64::max);
    Ok(to_json(&json!({
        "structure": name,
        "method": "power-iteration",
        "residual": residual,
        "bijection": bijection,
        "bijection_passed": bijection.passed(),
        "components": components,
        "max_spectral_radius": rho,
        "growth_rate": rho.ln(),
        "witnesses": witnesses,
    })))
}

fn pair(task: &TaskSpec) -> Result<(&str, &str)> {
    match task.pair.as_deref() {
        Some([a, b]) => Ok((a, b)),
        _ => Err(Error::InvalidInput(format!("task `{}` needs a two-element pair", task.command))),
    }
}

/// Runs one config task; returns the artifact file name and its contents.
pub fn run_task(env: &Env, task: &TaskSpec) -> Result<(String, String)> {
    let opts = Options::from_task(task)?;
    let (text, ext) = match task.command.as_str() {
        "ell" => {
            let p = task.provider.as_deref().ok_or_else(|| Error::InvalidInput("`ell` task needs a provider".into()))?;
            (ell(env, p, &opts)?, "csv")
        }
        "dil" => pair(task).and_then(|(a, b)| dil(env, a, b, &opts)).map(|t| (t, "json"))?,
        "delta" => pair(task).and_then(|(a, b)| delta(env, a, b, &opts)).map(|t| (t, "json"))?,
        "theta" => pair(task).and_then(|(a, b)| theta(env, a, b, &opts)).map(|t| (t, "csv"))?,
        "geodesic" => pair(task).and_then(|(a, b)| geodesic(env, a, b, &opts)).map(|t| (t, "csv"))?,
        "boundary" => pair(task).and_then(|(a, b)| boundary(env, a, b, &opts)).map(|t| (t, "csv"))?,
        "transversal" => pair(task).and_then(|(a, b)| transversal(env, a, b, &opts)).map(|t| (t, "json"))?,
        "automaton" => (automaton(env, &opts)?, "json"),
        other => return Err(Error::InvalidInput(format!("unknown task command `{other}`"))),
    };
    let name = task.out.clone().unwrap_or_else(|| format!("{}.{ext}", task.command));
    Ok((name, text))
}

/// Writes `text` to `out`, or to stdout when no path is given.
pub fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(path, text)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

/// Runs every task of the config in order, writing into `dir`.
pub fn run_all_tasks(env: &Env, dir: &Path) -> Result<Vec<String>> {
    let mut written = Vec::new();
    for task in &env.doc.tasks {
        let (name, text) = run_task(env, task)?;
        emit(Some(&dir.join(&name)), &text)?;
        written.push(name);
    }
    Ok(written)
}
