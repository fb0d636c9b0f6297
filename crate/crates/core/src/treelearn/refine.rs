use crate::factstore::{ConstId, FactBase, Literal, PredId, Schema, Term, TypeId, Var};

use super::mode::{ArgMode, ModeDecl};
use super::tree::TreeParams;

/// Variables in scope at a tree node and the conjunction of the tests on
/// the true-branch path leading to it.
#[derive(Debug, Clone, PartialEq)]
pub struct PathContext {
    pub conj: Vec<Literal>,
    pub bound: Vec<(Var, TypeId)>,
    pub target_arity: usize,
    pub next_var: u32,
}

impl PathContext {
    /// Root context: `V0..Vk` bound to the target predicate's arguments.
    pub fn for_target(schema: &Schema, target: PredId) -> Self {
        let types = &schema.predicate(target).arg_types;
        let bound: Vec<(Var, TypeId)> = types
            .iter()
            .enumerate()
            .map(|(i, t)| (Var(i as u32), *t))
            .collect();
        Self {
            conj: Vec::new(),
            target_arity: bound.len(),
            next_var: bound.len() as u32,
            bound,
        }
    }

    /// Context of the true branch after accepting `cand`.
    pub fn extend(&self, cand: &Candidate) -> Self {
        let mut next = self.clone();
        next.conj.extend(cand.literals.iter().cloned());
        next.bound.extend(cand.fresh.iter().copied());
        next.next_var += cand.fresh.len() as u32;
        next
    }

    /// Context of the false branch: nothing new comes into scope.
    pub fn skip(&self, cand: &Candidate) -> Self {
        let mut next = self.clone();
        next.next_var += cand.fresh.len() as u32;
        next
    }

    /// Whether `cand` mentions a variable introduced on the path (as opposed
    /// to a target variable or one of its own fresh variables).
    pub fn depends_on_path(&self, cand: &Candidate) -> bool {
        let path_vars = &self.bound[self.target_arity..];
        cand.literals
            .iter()
            .flat_map(Literal::vars)
            .any(|v| path_vars.iter().any(|(w, _)| *w == v))
    }
}

/// A candidate node test and the variables it introduces.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub literals: Vec<Literal>,
    pub fresh: Vec<(Var, TypeId)>,
}

/// Mode-directed refinement operator.
#[derive(Debug, Clone)]
pub struct Refiner {
    modes: Vec<ModeDecl>,
    /// Constant pool per mode and argument position (empty unless `#`).
    consts: Vec<Vec<Vec<ConstId>>>,
    arg_types: Vec<Vec<TypeId>>,
    max_literals: usize,
}

impl Refiner {
    pub fn new(schema: &Schema, fb: &FactBase, modes: &[ModeDecl], params: &TreeParams) -> Self {
        let mut modes: Vec<ModeDecl> = modes.to_vec();
        modes.sort_by(|a, b| {
            schema
                .predicate(a.pred)
                .name
                .cmp(&schema.predicate(b.pred).name)
        });
        let consts = modes
            .iter()
            .map(|m| {
                m.args
                    .iter()
                    .enumerate()
                    .map(|(pos, a)| match a {
                        ArgMode::Const => {
                            let mut top =
                                fb.frequent_constants(m.pred, pos, params.const_candidates_cap);
                            top.sort_unstable();
                            top
                        }
                        _ => Vec::new(),
                    })
                    .collect()
            })
            .collect();
        let arg_types = modes
            .iter()
            .map(|m| schema.predicate(m.pred).arg_types.clone())
            .collect();
        Self {
            modes,
            consts,
            arg_types,
            max_literals: params.max_literals_per_node.max(1),
        }
    }

    /// All mode-legal tests at `ctx`, single literals and chains where each
    /// added literal consumes a variable introduced earlier in the chain.
    pub fn propose(&self, ctx: &PathContext) -> Vec<Candidate> {
        let mut out = Vec::new();
        for (lit, fresh) in self.singles(&ctx.bound, ctx.next_var) {
            if ctx.conj.contains(&lit) {
                continue;
            }
            let cand = Candidate {
                literals: vec![lit],
                fresh,
            };
            self.chain(ctx, cand, &mut out);
        }
        out
    }

    fn chain(&self, ctx: &PathContext, cand: Candidate, out: &mut Vec<Candidate>) {
        let extendable = cand.literals.len() < self.max_literals && !cand.fresh.is_empty();
        out.push(cand);
        if !extendable {
            return;
        }
        let cand = out.last().unwrap().clone();
        let mut bound = ctx.bound.clone();
        bound.extend(cand.fresh.iter().copied());
        let next = ctx.next_var + cand.fresh.len() as u32;
        for (lit, fresh) in self.singles(&bound, next) {
            let uses_chain_var = lit.vars().any(|v| {
                cand.fresh.iter().any(|(w, _)| *w == v) && !fresh.iter().any(|(w, _)| *w == v)
            });
            if !uses_chain_var || cand.literals.contains(&lit) || ctx.conj.contains(&lit) {
                continue;
            }
            let mut ext = cand.clone();
            ext.literals.push(lit);
            ext.fresh.extend(fresh);
            self.chain(ctx, ext, out);
        }
    }

    /// Single literals in mode order, then argument pattern, then constant id.
    fn singles(
        &self,
        bound: &[(Var, TypeId)],
        next_var: u32,
    ) -> Vec<(Literal, Vec<(Var, TypeId)>)> {
        let mut out = Vec::new();
        for (mi, mode) in self.modes.iter().enumerate() {
            if !mode.args.contains(&ArgMode::Input) {
                continue;
            }
            let types = &self.arg_types[mi];
            let mut fresh = Vec::new();
            let mut options: Vec<Vec<Term>> = Vec::with_capacity(mode.args.len());
            for (pos, (&am, &ty)) in mode.args.iter().zip(types).enumerate() {
                let opts: Vec<Term> = match am {
                    ArgMode::Input => bound
                        .iter()
                        .filter(|(_, t)| *t == ty)
                        .map(|(v, _)| Term::Var(*v))
                        .collect(),
                    ArgMode::Output => {
                        let v = Var(next_var + fresh.len() as u32);
                        fresh.push((v, ty));
                        vec![Term::Var(v)]
                    }
                    ArgMode::Const => self.consts[mi][pos]
                        .iter()
                        .map(|c| Term::Const(*c))
                        .collect(),
                };
                if opts.is_empty() {
                    options.clear();
                    break;
                }
                options.push(opts);
            }
            if options.len() != mode.args.len() {
                continue;
            }
            let mut idx = vec![0usize; options.len()];
            loop {
                let terms: Vec<Term> = idx.iter().zip(&options).map(|(&i, o)| o[i]).collect();
                out.push((Literal::positive(mode.pred, terms), fresh.clone()));
                // Odometer increment, last position fastest.
                let mut k = options.len();
                loop {
                    if k == 0 {
                        break;
                    }
                    k -= 1;
                    idx[k] += 1;
                    if idx[k] < options[k].len() {
                        break;
                    }
                    idx[k] = 0;
                }
                if idx.iter().all(|&i| i == 0) {
                    break;
                }
            }
        }
        out
    }
}

/// Candidate tests at `ctx` under `modes`.
pub fn propose_splits(
    ctx: &PathContext,
    modes: &[ModeDecl],
    fb: &FactBase,
    schema: &Schema,
    params: &TreeParams,
) -> Vec<Candidate> {
    Refiner::new(schema, fb, modes, params).propose(ctx)
}
