//! JSON config documents: a group, named providers and a task list.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;

use mstruct_core::group::{BasisAutomorphism, GroupContext, ReducedWord};
use mstruct_core::metrics::{
    boundary_difference, coned_off_provider, letter_count_provider, letter_weight_provider, linear_combination,
    word_metric_provider, ConedOffSettings, Provider, Pullback,
};
use mstruct_core::{Error, Result};
use serde::Deserialize;
use serde_json::Value;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    pub rank: usize,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProviderDef {
    pub name: String,
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default)]
    pub params: Value,
}

/// One entry of the `tasks` list; the fields mirror the command-line flags.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSpec {
    pub command: String,
    pub provider: Option<String>,
    pub pair: Option<Vec<String>>,
    pub grid: Option<String>,
    pub method: Option<String>,
    pub max_length: Option<usize>,
    pub radius: Option<usize>,
    pub structure: Option<String>,
    pub out: Option<String>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    pub group: GroupSpec,
    #[serde(default)]
    pub providers: Vec<ProviderDef>,
    #[serde(default)]
    pub tasks: Vec<TaskSpec>,
}

/// A loaded config with its providers built, in config order.
#[derive(Debug)]
pub struct Env {
    pub ctx: GroupContext,
    pub doc: ConfigDocument,
    providers: Vec<(String, Provider)>,
    index: HashMap<String, usize>,
}

impl Env {
    pub fn load(path: impl AsRef<Path>) -> Result<Env> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.as_ref().display())))?;
        Env::from_str(&text)
    }

    pub fn from_str(text: &str) -> Result<Env> {
        let doc: ConfigDocument = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let ctx = GroupContext::new(doc.group.rank)?;
        let mut env = Env { ctx, doc: doc.clone(), providers: Vec::new(), index: HashMap::new() };
        for def in &doc.providers {
            if env.index.contains_key(&def.name) {
                return Err(Error::InvalidInput(format!("provider `{}` defined twice", def.name)));
            }
            let p = env.build(def)?;
            env.index.insert(def.name.clone(), env.providers.len());
            env.providers.push((def.name.clone(), p));
        }
        for task in &doc.tasks {
            for name in task.pair.iter().flatten().chain(task.provider.iter()) {
                env.provider(name)?;
            }
        }
        Ok(env)
    }

    pub fn provider(&self, name: &str) -> Result<Provider> {
        self.index
            .get(name)
            .map(|&i| self.providers[i].1.clone())
            .ok_or_else(|| Error::InvalidInput(format!("unknown provider `{name}`")))
    }

    pub fn provider_names(&self) -> impl Iterator<Item = &str> {
        self.providers.iter().map(|(n, _)| n.as_str())
    }

    fn build(&self, def: &ProviderDef) -> Result<Provider> {
        let ctx = &self.ctx;
        let p = Params { owner: &def.name, value: &def.params };
        let provider: Provider = match def.kind.as_str() {
            "basis" => Arc::new(letter_weight_provider(ctx, &vec![1.0; ctx.rank()])?.named(&def.name)),
            "letter_weights" => Arc::new(letter_weight_provider(ctx, &p.floats("weights")?)?.named(&def.name)),
            "letter_count" => {
                let g = p.word("generator", ctx)?;
                let [l] = g.letters() else {
                    return Err(p.bad("generator", "a single letter"));
                };
                Arc::new(letter_count_provider(ctx, l.generator())?.named(&def.name))
            }
            "word_metric" => Arc::new(word_metric_provider(ctx, &p.words("generators", ctx)?)?.named(&def.name)),
            "coned_off" => {
                let mut settings = ConedOffSettings::default();
                if let Some(k) = p.opt_usize("fattening")? {
                    settings.fattening = k;
                }
                let set = p.words("generators", ctx)?;
                let g = p.word("subgroup", ctx)?;
                Arc::new(coned_off_provider(ctx, &set, &g, settings)?.named(&def.name))
            }
            "combination" => {
                let c = linear_combination(p.float("s")?, p.float("t")?, self.provider(&p.string("p1")?)?, self.provider(&p.string("p2")?)?)?;
                Arc::new(c.named(&def.name))
            }
            "boundary_difference" => {
                let c = boundary_difference(self.provider(&p.string("p")?)?, self.provider(&p.string("p_star")?)?, p.float("dil")?)?;
                Arc::new(c.named(&def.name))
            }
            "pullback" => {
                let pair = p.usizes("swap")?;
                let [i, j] = pair[..] else {
                    return Err(p.bad("swap", "two generator indices"));
                };
                let phi = BasisAutomorphism::swap(ctx, i, j)?;
                Arc::new(Pullback::new(self.provider(&p.string("inner")?)?, phi))
            }
            other => return Err(Error::InvalidInput(format!("provider `{}`: unknown type `{other}`", def.name))),
        };
        Ok(provider)
    }
}

struct Params<'a> {
    owner: &'a str,
    value: &'a Value,
}

impl Params<'_> {
    fn bad(&self, key: &str, expected: &str) -> Error {
        Error::InvalidInput(format!("provider `{}`: parameter `{key}` must be {expected}", self.owner))
    }

    fn get(&self, key: &str) -> Option<&Value> {
        self.value.get(key)
    }

    fn float(&self, key: &str) -> Result<f64> {
        self.get(key).and_then(Value::as_f64).ok_or_else(|| self.bad(key, "a number"))
    }

    fn floats(&self, key: &str) -> Result<Vec<f64>> {
        let arr = self.get(key).and_then(Value::as_array).ok_or_else(|| self.bad(key, "an array of numbers"))?;
        arr.iter().map(|v| v.as_f64().ok_or_else(|| self.bad(key, "an array of numbers"))).collect()
    }

    fn usizes(&self, key: &str) -> Result<Vec<usize>> {
        let arr = self.get(key).and_then(Value::as_array).ok_or_else(|| self.bad(key, "an array of indices"))?;
        arr.iter()
            .map(|v| v.as_u64().map(|x| x as usize).ok_or_else(|| self.bad(key, "an array of indices")))
            .collect()
    }

    fn opt_usize(&self, key: &str) -> Result<Option<usize>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v.as_u64().map(|x| Some(x as usize)).ok_or_else(|| self.bad(key, "a nonnegative integer")),
        }
    }

    fn string(&self, key: &str) -> Result<String> {
        self.get(key).and_then(Value::as_str).map(str::to_string).ok_or_else(|| self.bad(key, "a string"))
    }

    fn word(&self, key: &str, ctx: &GroupContext) -> Result<ReducedWord> {
        ctx.parse_word(&self.string(key)?)
    }

    fn words(&self, key: &str, ctx: &GroupContext) -> Result<Vec<ReducedWord>> {
        let arr = self.get(key).and_then(Value::as_array).ok_or_else(|| self.bad(key, "an array of words"))?;
        arr.iter()
            .map(|v| v.as_str().ok_or_else(|| self.bad(key, "an array of words")).and_then(|s| ctx.parse_word(s)))
            .collect()
    }
}
