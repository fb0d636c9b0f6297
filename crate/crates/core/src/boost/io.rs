use std::str::FromStr;

use crate::error::{Error, Result};
use crate::factstore::Universe;
use crate::real::Real;
use crate::treelearn::{validate_tree, TreeNode, TreeParams};

use super::gradient::CostParams;
use super::model::{BoostedModel, TrainConfig};

pub const MODEL_MAGIC: &str = "relboost-model 1";

/// Text form of a model. Floats use the shortest representation that
/// parses back to the same value, so the round trip is bit-exact.
pub fn render_model<T: Real>(model: &BoostedModel<T>, universe: &Universe) -> String {
    let schema = universe.schema();
    let c = &model.config;
    let mut out = String::new();
    out.push_str(MODEL_MAGIC);
    out.push('\n');
    let mut kv = |k: &str, v: String| {
        out.push_str(k);
        out.push(' ');
        out.push_str(&v);
        out.push('\n');
    };
    kv("target", schema.predicate(model.target).name.clone());
    kv(
        "mask",
        model
            .mask
            .map_or_else(|| "-".to_string(), |m| schema.predicate(m).name.clone()),
    );
    kv("psi0", model.psi0.to_string());
    kv("alpha", c.cost.alpha.to_string());
    kv("beta", c.cost.beta.to_string());
    kv("step", c.step.to_string());
    kv("n_stages", c.n_stages.to_string());
    kv("max_depth", c.tree.max_depth.to_string());
    kv("min_leaf", c.tree.min_leaf_examples.to_string());
    kv("max_literals", c.tree.max_literals_per_node.to_string());
    kv("const_cap", c.tree.const_candidates_cap.to_string());
    kv("seed", c.seed.to_string());
    kv("trees", model.stages.len().to_string());
    for tree in &model.stages {
        out.push_str(&tree.render(universe));
        out.push('\n');
    }
    out
}

struct Lines<'a> {
    iter: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<(usize, &'a str)> {
        self.iter
            .next()
            .map(|(i, l)| (i + 1, l))
            .ok_or_else(|| Error::Model("model file ends early".into()))
    }

    fn field<V: FromStr>(&mut self, key: &str) -> Result<V> {
        let (n, line) = self.next()?;
        let value = line
            .strip_prefix(key)
            .and_then(|r| r.strip_prefix(' '))
            .ok_or_else(|| Error::parse(n, format!("expected `{key} <value>`")))?;
        value
            .parse()
            .map_err(|_| Error::parse(n, format!("bad value for `{key}`: `{value}`")))
    }
}

pub fn parse_model<T: Real>(text: &str, universe: &mut Universe) -> Result<BoostedModel<T>> {
    let mut lines = Lines {
        iter: text.lines().enumerate(),
    };
    let (_, magic) = lines.next()?;
    if magic != MODEL_MAGIC {
        return Err(Error::Model(format!("unsupported model header `{magic}`")));
    }
    let target: String = lines.field("target")?;
    let target = universe.schema().require_pred(&target)?;
    let mask: String = lines.field("mask")?;
    let mask = match mask.as_str() {
        "-" => None,
        name => Some(universe.schema().require_pred(name)?),
    };
    let psi0: T = lines.field("psi0")?;
    let alpha: T = lines.field("alpha")?;
    let beta: T = lines.field("beta")?;
    let step: T = lines.field("step")?;
    let n_stages = lines.field("n_stages")?;
    let tree = TreeParams {
        max_depth: lines.field("max_depth")?,
        min_leaf_examples: lines.field("min_leaf")?,
        max_literals_per_node: lines.field("max_literals")?,
        const_candidates_cap: lines.field("const_cap")?,
    };
    let seed = lines.field("seed")?;
    let n_trees: usize = lines.field("trees")?;
    let config = TrainConfig {
        tree,
        cost: CostParams { alpha, beta },
        n_stages,
        seed,
        step,
        psi0,
    };
    config
        .validate()
        .map_err(|e| Error::Model(format!("invalid model settings: {e}")))?;
    let arity = universe.schema().predicate(target).arity();
    let mut stages = Vec::with_capacity(n_trees);
    for _ in 0..n_trees {
        let (n, line) = lines.next()?;
        let tree =
            TreeNode::parse(line, universe).map_err(|e| Error::Model(format!("line {n}: {e}")))?;
        validate_tree(&tree, universe, arity)
            .map_err(|e| Error::Model(format!("line {n}: {e}")))?;
        stages.push(tree);
    }
    if let Ok((n, extra)) = lines.next() {
        if !extra.trim().is_empty() {
            return Err(Error::Model(format!(
                "line {n}: unexpected content after the last tree"
            )));
        }
    }
    Ok(BoostedModel {
        target,
        mask,
        psi0,
        stages,
        config,
    })
}
