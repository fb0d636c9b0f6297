use std::sync::Mutex;

use rayon::prelude::*;
use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::factstore::{Exclusion, FactBase, GroundAtom, Literal, PredId, Term, Universe, Var};
use crate::real::Real;

use super::mode::ModeDecl;
use super::refine::{Candidate, PathContext, Refiner};
use super::tree::{TreeNode, TreeParams};

/// A target grounding with the functional-gradient value to fit.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionExample<T> {
    pub target: GroundAtom,
    pub value: T,
}

/// Relative tolerance under which two split scores count as tied.
pub const SCORE_TIE_TOLERANCE: f64 = 1e-12;

/// True when `score` beats `best` by more than the tie tolerance.
pub fn improves<T: Real>(score: T, best: T) -> bool {
    let scale = score.abs().max(best.abs()).max(T::one());
    score - best > scale * T::lit(SCORE_TIE_TOLERANCE)
}

/// Sum of squared deviations from the mean, two-pass.
pub fn sse<T: Real>(values: impl Iterator<Item = T> + Clone) -> T {
    let (n, sum) = values
        .clone()
        .fold((0usize, T::zero()), |(n, s), v| (n + 1, s + v));
    if n == 0 {
        return T::zero();
    }
    let mean = sum / T::from_usize_lossy(n);
    values.fold(T::zero(), |acc, v| acc + (v - mean) * (v - mean))
}

pub fn mean<T: Real>(values: impl Iterator<Item = T>) -> T {
    let (n, sum) = values.fold((0usize, T::zero()), |(n, s), v| (n + 1, s + v));
    if n == 0 {
        T::zero()
    } else {
        sum / T::from_usize_lossy(n)
    }
}

/// Memory bound for cached test outcomes.
const CACHE_BUDGET_BYTES: usize = 256 << 20;

/// Outcome bits of one query for a fixed example list.
#[derive(Debug, Clone)]
struct Outcomes {
    known: Vec<u64>,
    truth: Vec<u64>,
}

impl Outcomes {
    fn new(n: usize) -> Self {
        let words = n.div_ceil(64);
        Self {
            known: vec![0; words],
            truth: vec![0; words],
        }
    }

    #[inline]
    fn get(&self, i: usize) -> Option<bool> {
        let (w, b) = (i / 64, 1u64 << (i % 64));
        (self.known[w] & b != 0).then(|| self.truth[w] & b != 0)
    }

    #[inline]
    fn set(&mut self, i: usize, v: bool) {
        let (w, b) = (i / 64, 1u64 << (i % 64));
        self.known[w] |= b;
        if v {
            self.truth[w] |= b;
        }
    }

    fn bytes(&self) -> usize {
        16 * self.known.len()
    }
}

/// Query outcomes keyed by variable-canonical conjunction. Outcomes depend
/// only on the example's target and the fact base, so they stay valid
/// across boosting stages as long as the example list is unchanged.
#[derive(Debug, Default)]
struct EvalCache {
    targets: Vec<GroundAtom>,
    entries: FxHashMap<Vec<Literal>, Outcomes>,
    bytes: usize,
}

/// Renumbers non-target variables by first appearance, so equal queries
/// reached at different nodes share one cache key.
fn canonical(conj: Vec<Literal>, arity: usize) -> Vec<Literal> {
    let mut map: Vec<(Var, Var)> = Vec::new();
    let mut next = arity as u32;
    conj.into_iter()
        .map(|mut lit| {
            for t in &mut lit.terms {
                if let Term::Var(v) = t {
                    if (v.0 as usize) < arity {
                        continue;
                    }
                    let to = match map.iter().find(|(from, _)| from == v) {
                        Some(&(_, to)) => to,
                        None => {
                            let to = Var(next);
                            next += 1;
                            map.push((*v, to));
                            to
                        }
                    };
                    *v = to;
                }
            }
            lit
        })
        .collect()
}

/// Learns one relational regression tree by greedy variance reduction.
#[derive(Debug)]
pub struct TreeLearner<'a> {
    universe: &'a Universe,
    fb: &'a FactBase,
    target: PredId,
    params: TreeParams,
    mask: Option<PredId>,
    refiner: Refiner,
    cache: Mutex<EvalCache>,
}

impl<'a> TreeLearner<'a> {
    /// `mask`, when set, names a predicate whose fact with the example's own
    /// arguments is hidden while that example is evaluated.
    pub fn new(
        universe: &'a Universe,
        fb: &'a FactBase,
        target: PredId,
        modes: &[ModeDecl],
        params: TreeParams,
        mask: Option<PredId>,
    ) -> Result<Self> {
        params.validate()?;
        let schema = universe.schema();
        if !schema.contains_pred(target) {
            return Err(Error::Schema(format!(
                "unknown target predicate id {}",
                target.0
            )));
        }
        for m in modes {
            if !schema.contains_pred(m.pred) {
                return Err(Error::Schema(format!(
                    "mode references unknown predicate id {}",
                    m.pred.0
                )));
            }
            if m.pred == target {
                return Err(Error::Schema(format!(
                    "mode over the target predicate `{}` is not allowed",
                    schema.predicate(target).name
                )));
            }
            if m.args.len() != schema.predicate(m.pred).arity() {
                return Err(Error::Schema(format!(
                    "mode for `{}` has wrong arity",
                    schema.predicate(m.pred).name
                )));
            }
        }
        if let Some(mp) = mask {
            if !schema.contains_pred(mp)
                || schema.predicate(mp).arg_types != schema.predicate(target).arg_types
            {
                return Err(Error::Schema(
                    "mask predicate must share the target's signature".into(),
                ));
            }
        }
        if !fb.is_frozen() {
            return Err(Error::Training(
                "fact base must be frozen before learning".into(),
            ));
        }
        let refiner = Refiner::new(schema, fb, modes, &params);
        Ok(Self {
            universe,
            fb,
            target,
            params,
            mask,
            refiner,
            cache: Mutex::default(),
        })
    }

    pub fn params(&self) -> &TreeParams {
        &self.params
    }

    pub fn learn<T: Real>(&self, examples: &[RegressionExample<T>]) -> Result<TreeNode<T>> {
        if examples.is_empty() {
            return Err(Error::Training("no examples to fit".into()));
        }
        for ex in examples {
            if ex.target.pred != self.target {
                return Err(Error::Training(
                    "example is not a grounding of the target predicate".into(),
                ));
            }
            self.universe.check_atom(&ex.target)?;
            if !ex.value.is_finite() {
                return Err(Error::Training("non-finite regression value".into()));
            }
        }
        {
            let mut cache = self.cache.lock().expect("cache lock");
            if cache.targets.len() != examples.len()
                || cache
                    .targets
                    .iter()
                    .zip(examples)
                    .any(|(a, e)| *a != e.target)
            {
                *cache = EvalCache {
                    targets: examples.iter().map(|e| e.target.clone()).collect(),
                    ..Default::default()
                };
            }
        }
        let idx: Vec<usize> = (0..examples.len()).collect();
        let ctx = PathContext::for_target(self.universe.schema(), self.target);
        Ok(self.grow(examples, &idx, &ctx, 0))
    }

    fn grow<T: Real>(
        &self,
        ex: &[RegressionExample<T>],
        idx: &[usize],
        ctx: &PathContext,
        depth: usize,
    ) -> TreeNode<T> {
        let leaf = TreeNode::Leaf(mean(idx.iter().map(|&i| ex[i].value)));
        if depth >= self.params.max_depth || idx.len() < self.params.min_leaf_examples {
            return leaf;
        }
        let Some((cand, yes)) = self.best_split(ex, idx, ctx) else {
            return leaf;
        };
        let (yes_idx, no_idx): (Vec<usize>, Vec<usize>) = {
            let mut y = Vec::new();
            let mut n = Vec::new();
            for (k, &i) in idx.iter().enumerate() {
                if yes[k] {
                    y.push(i);
                } else {
                    n.push(i);
                }
            }
            (y, n)
        };
        let yes_node = self.grow(ex, &yes_idx, &ctx.extend(&cand), depth + 1);
        let no_node = self.grow(ex, &no_idx, &ctx.skip(&cand), depth + 1);
        TreeNode::Internal {
            test: cand.literals,
            yes: Box::new(yes_node),
            no: Box::new(no_node),
        }
    }

    /// Best candidate by variance reduction; earlier candidates win ties.
    /// Returns `None` unless the reduction is strictly positive.
    fn best_split<T: Real>(
        &self,
        ex: &[RegressionExample<T>],
        idx: &[usize],
        ctx: &PathContext,
    ) -> Option<(Candidate, Vec<bool>)> {
        let parent = sse(idx.iter().map(|&i| ex[i].value));
        if parent <= T::zero() {
            return None;
        }
        let cands = self.refiner.propose(ctx);
        let outcomes = self.outcomes(ex, idx, ctx, &cands);
        let yes_of = |k: usize| -> Vec<bool> {
            let o = &outcomes[k];
            idx.iter()
                .map(|&i| o.get(i).expect("outcome computed"))
                .collect()
        };
        let scores: Vec<T> = (0..cands.len())
            .into_par_iter()
            .map(|k| parent - split_sse(ex, idx, &yes_of(k)))
            .collect();
        let mut best: Option<(usize, T)> = None;
        for (k, &s) in scores.iter().enumerate() {
            if best.is_none_or(|(_, b)| improves(s, b)) {
                best = Some((k, s));
            }
        }
        let (k, score) = best?;
        if !improves(score, T::zero()) {
            return None;
        }
        Some((cands[k].clone(), yes_of(k)))
    }

    /// The conjunction whose satisfiability decides `cand` at `ctx`.
    fn query(ctx: &PathContext, cand: &Candidate) -> Vec<Literal> {
        // Examples at this node already satisfy the path, so a candidate that
        // shares no path variable can be checked on its own.
        if ctx.depends_on_path(cand) {
            ctx.conj.iter().chain(&cand.literals).cloned().collect()
        } else {
            cand.literals.clone()
        }
    }

    /// Outcomes of every candidate on the examples in `idx`, filled from and
    /// saved back to the cache.
    fn outcomes<T: Sync>(
        &self,
        ex: &[RegressionExample<T>],
        idx: &[usize],
        ctx: &PathContext,
        cands: &[Candidate],
    ) -> Vec<Outcomes> {
        let n = ex.len();
        let arity = ctx.target_arity;
        let keys: Vec<Vec<Literal>> = cands
            .iter()
            .map(|c| canonical(Self::query(ctx, c), arity))
            .collect();
        let mut work: Vec<(Vec<Literal>, Outcomes)> = {
            let mut cache = self.cache.lock().expect("cache lock");
            keys.into_iter()
                .map(|k| {
                    let o = cache.entries.remove(&k);
                    if let Some(o) = &o {
                        cache.bytes -= o.bytes();
                    }
                    let o = o.unwrap_or_else(|| Outcomes::new(n));
                    (k, o)
                })
                .collect()
        };
        work.par_iter_mut()
            .for_each(|(query, out)| self.fill(ex, query, idx, arity, out));
        let mut cache = self.cache.lock().expect("cache lock");
        let mut result = Vec::with_capacity(work.len());
        for (k, o) in work {
            if cache.bytes + o.bytes() <= CACHE_BUDGET_BYTES && !cache.entries.contains_key(&k) {
                cache.bytes += o.bytes();
                cache.entries.insert(k, o.clone());
            }
            result.push(o);
        }
        result
    }

    fn fill<T>(
        &self,
        ex: &[RegressionExample<T>],
        query: &[Literal],
        idx: &[usize],
        arity: usize,
        out: &mut Outcomes,
    ) {
        let width = query
            .iter()
            .flat_map(Literal::vars)
            .map(|v| v.0 as usize + 1)
            .max()
            .unwrap_or(0)
            .max(arity);
        let mut slots = vec![u32::MAX; width];
        for &i in idx {
            if out.get(i).is_some() {
                continue;
            }
            let t = &ex[i].target;
            slots.fill(u32::MAX);
            for (s, c) in slots[..arity].iter_mut().zip(&t.args) {
                *s = c.0;
            }
            let excl = self.mask.map(|pred| Exclusion {
                pred,
                args: &t.args,
            });
            out.set(i, self.fb.search(query, &mut slots, excl));
        }
    }
}

fn split_sse<T: Real>(ex: &[RegressionExample<T>], idx: &[usize], yes: &[bool]) -> T {
    let side = |want: bool| {
        idx.iter()
            .zip(yes)
            .filter(move |(_, &y)| y == want)
            .map(|(&i, _)| ex[i].value)
    };
    sse(side(true)) + sse(side(false))
}

/// Learns a tree with no leave-one-out mask; the target predicate is taken
/// from the first example.
pub fn learn_tree<T: Real>(
    examples: &[RegressionExample<T>],
    fb: &FactBase,
    universe: &Universe,
    modes: &[ModeDecl],
    params: TreeParams,
) -> Result<TreeNode<T>> {
    let first = examples
        .first()
        .ok_or_else(|| Error::Training("no examples to fit".into()))?;
    TreeLearner::new(universe, fb, first.target.pred, modes, params, None)?.learn(examples)
}
