use std::collections::HashSet;

use super::schema::{ConstId, GroundAtom, PredId, TypeId, Universe};
use super::store::{pack, FactBase};
use crate::error::{Error, Result};

/// Clause variable. Within a learned tree, variables `0..arity` stand for the
/// target atom's arguments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Term {
    Var(Var),
    Const(ConstId),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Literal {
    pub pred: PredId,
    pub terms: Vec<Term>,
    pub negated: bool,
}

impl Literal {
    pub fn positive(pred: PredId, terms: Vec<Term>) -> Self {
        Self {
            pred,
            terms,
            negated: false,
        }
    }

    pub fn negative(pred: PredId, terms: Vec<Term>) -> Self {
        Self {
            pred,
            terms,
            negated: true,
        }
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.terms.iter().filter_map(|t| match t {
            Term::Var(v) => Some(*v),
            Term::Const(_) => None,
        })
    }

    /// Checks arity and that constants and variables fit the schema types.
    /// `var_types` accumulates the type of each variable at first use.
    pub fn type_check(
        &self,
        universe: &Universe,
        var_types: &mut Vec<(Var, TypeId)>,
    ) -> Result<()> {
        let schema = universe.schema();
        if !schema.contains_pred(self.pred) {
            return Err(Error::Schema(format!(
                "unknown predicate id {}",
                self.pred.0
            )));
        }
        let p = schema.predicate(self.pred);
        if p.arity() != self.terms.len() {
            return Err(Error::Schema(format!(
                "literal `{}` has wrong arity",
                p.name
            )));
        }
        for (pos, (term, &ty)) in self.terms.iter().zip(&p.arg_types).enumerate() {
            match *term {
                Term::Const(c) => {
                    if universe.const_type(c) != ty {
                        return Err(Error::Schema(format!(
                            "literal `{}` position {pos}: constant `{}` is not `{}`",
                            p.name,
                            universe.const_name(c),
                            schema.type_name(ty)
                        )));
                    }
                }
                Term::Var(v) => match var_types.iter().find(|(w, _)| *w == v) {
                    Some(&(_, t)) if t != ty => {
                        return Err(Error::Schema(format!(
                            "literal `{}` position {pos}: variable V{} is `{}`, expected `{}`",
                            p.name,
                            v.0,
                            schema.type_name(t),
                            schema.type_name(ty)
                        )))
                    }
                    Some(_) => {}
                    None => var_types.push((v, ty)),
                },
            }
        }
        Ok(())
    }
}

const UNBOUND: u32 = u32::MAX;

/// Partial assignment of constants to variables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Binding {
    slots: Vec<u32>,
}

impl Binding {
    pub fn new() -> Self {
        Self::default()
    }

    /// Binds `Var(i)` to the `i`-th argument of `atom`.
    pub fn for_target(atom: &GroundAtom) -> Self {
        Self {
            slots: atom.args.iter().map(|c| c.0).collect(),
        }
    }

    pub fn bind(&mut self, v: Var, c: ConstId) {
        let i = v.0 as usize;
        if self.slots.len() <= i {
            self.slots.resize(i + 1, UNBOUND);
        }
        self.slots[i] = c.0;
    }

    pub fn get(&self, v: Var) -> Option<ConstId> {
        match self.slots.get(v.0 as usize) {
            Some(&c) if c != UNBOUND => Some(ConstId(c)),
            _ => None,
        }
    }

    fn bound_vars(&self) -> HashSet<Var> {
        self.slots
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != UNBOUND)
            .map(|(i, _)| Var(i as u32))
            .collect()
    }
}

/// A single fact hidden from a query, used for leave-one-out evaluation.
#[derive(Debug, Clone, Copy)]
pub struct Exclusion<'a> {
    pub pred: PredId,
    pub args: &'a [ConstId],
}

impl Exclusion<'_> {
    #[inline]
    fn hides(&self, pred: PredId, args: &[ConstId]) -> bool {
        self.pred == pred && self.args == args
    }
}

/// Verifies that every variable of a negated literal is bound by `initially`
/// or by an earlier positive literal.
pub fn check_range_restricted(
    conj: &[Literal],
    initially: impl IntoIterator<Item = Var>,
) -> Result<()> {
    let mut bound: HashSet<Var> = initially.into_iter().collect();
    for (i, lit) in conj.iter().enumerate() {
        if lit.negated {
            if let Some(v) = lit.vars().find(|v| !bound.contains(v)) {
                return Err(Error::Clause(format!(
                    "variable V{} of negated literal {i} is not bound by an earlier literal",
                    v.0
                )));
            }
        } else {
            bound.extend(lit.vars());
        }
    }
    Ok(())
}

impl FactBase {
    /// True iff some extension of `binding` makes every positive literal a
    /// fact and no negated literal a fact (negation as failure).
    pub fn satisfiable(&self, conj: &[Literal], binding: &Binding) -> Result<bool> {
        self.satisfiable_excluding(conj, binding, None)
    }

    /// As [`FactBase::satisfiable`], treating `exclude` as absent.
    pub fn satisfiable_excluding(
        &self,
        conj: &[Literal],
        binding: &Binding,
        exclude: Option<Exclusion<'_>>,
    ) -> Result<bool> {
        check_range_restricted(conj, binding.bound_vars())?;
        for lit in conj {
            let rel = self
                .relations
                .get(lit.pred.0 as usize)
                .ok_or_else(|| Error::Schema(format!("unknown predicate id {}", lit.pred.0)))?;
            if rel.arity != lit.terms.len() {
                return Err(Error::Schema(format!(
                    "literal over predicate {} has wrong arity",
                    lit.pred.0
                )));
            }
        }
        let width = conj
            .iter()
            .flat_map(Literal::vars)
            .map(|v| v.0 as usize + 1)
            .max()
            .unwrap_or(0)
            .max(binding.slots.len());
        let mut slots = binding.slots.clone();
        slots.resize(width, UNBOUND);
        Ok(self.search(conj, &mut slots, exclude))
    }

    /// Backtracking search, literals left to right. The caller guarantees
    /// range restriction and that `slots` covers every variable id.
    pub(crate) fn search(
        &self,
        conj: &[Literal],
        slots: &mut [u32],
        exclude: Option<Exclusion<'_>>,
    ) -> bool {
        let Some((lit, rest)) = conj.split_first() else {
            return true;
        };
        let rel = &self.relations[lit.pred.0 as usize];
        let arity = lit.terms.len();
        let mut key = [ConstId(0); 4];
        let mut bound = [false; 4];
        for (pos, t) in lit.terms.iter().enumerate() {
            match *t {
                Term::Const(c) => {
                    key[pos] = c;
                    bound[pos] = true;
                }
                Term::Var(v) => {
                    let s = slots[v.0 as usize];
                    if s != UNBOUND {
                        key[pos] = ConstId(s);
                        bound[pos] = true;
                    }
                }
            }
        }
        let all_bound = bound[..arity].iter().all(|&b| b);
        if all_bound {
            let args = &key[..arity];
            let present = rel.members.contains(&pack(args))
                && !exclude.is_some_and(|e| e.hides(lit.pred, args));
            return present != lit.negated && self.search(rest, slots, exclude);
        }
        debug_assert!(!lit.negated, "range restriction violated");

        let check_row = |row: &[ConstId], slots: &mut [u32]| -> bool {
            // Bind fresh variables, respecting repeated occurrences.
            let mut newly: [usize; 4] = [usize::MAX; 4];
            let mut n_new = 0;
            let mut ok = true;
            for (pos, t) in lit.terms.iter().enumerate() {
                match *t {
                    Term::Const(c) => {
                        if row[pos] != c {
                            ok = false;
                            break;
                        }
                    }
                    Term::Var(v) => {
                        let s = &mut slots[v.0 as usize];
                        if *s == UNBOUND {
                            *s = row[pos].0;
                            newly[n_new] = v.0 as usize;
                            n_new += 1;
                        } else if *s != row[pos].0 {
                            ok = false;
                            break;
                        }
                    }
                }
            }
            if ok && exclude.is_some_and(|e| e.hides(lit.pred, row)) {
                ok = false;
            }
            let found = ok && self.search(rest, slots, exclude);
            for &i in &newly[..n_new] {
                slots[i] = UNBOUND;
            }
            found
        };

        // The shortest posting list among bound positions drives the probe.
        let probe = (0..arity)
            .filter(|&pos| bound[pos])
            .map(|pos| rel.postings(pos, key[pos]))
            .min_by_key(|p| p.len());
        match probe {
            Some(postings) => {
                for &r in postings {
                    if check_row(rel.row(r), slots) {
                        return true;
                    }
                }
                false
            }
            None => {
                for row in rel.rows.chunks_exact(arity) {
                    if check_row(row, slots) {
                        return true;
                    }
                }
                false
            }
        }
    }

    /// Every distinct assignment to `vars` that satisfies `conj` under `binding`.
    ///
    /// Enumerates by full relation scans without touching the indexes, which
    /// makes it a reference for the indexed search.
    pub fn solutions(
        &self,
        conj: &[Literal],
        binding: &Binding,
        vars: &[Var],
        exclude: Option<Exclusion<'_>>,
    ) -> Result<Vec<Vec<ConstId>>> {
        check_range_restricted(conj, binding.bound_vars())?;
        let width = conj
            .iter()
            .flat_map(Literal::vars)
            .chain(vars.iter().copied())
            .map(|v| v.0 as usize + 1)
            .max()
            .unwrap_or(0)
            .max(binding.slots.len());
        let mut slots = binding.slots.clone();
        slots.resize(width, UNBOUND);
        let mut out = HashSet::new();
        self.enumerate(conj, &mut slots, exclude, &mut |s| {
            out.insert(
                vars.iter()
                    .map(|v| ConstId(s[v.0 as usize]))
                    .collect::<Vec<_>>(),
            );
        });
        let mut out: Vec<_> = out.into_iter().collect();
        out.sort();
        Ok(out)
    }

    fn enumerate(
        &self,
        conj: &[Literal],
        slots: &mut [u32],
        exclude: Option<Exclusion<'_>>,
        emit: &mut dyn FnMut(&[u32]),
    ) {
        let Some((lit, rest)) = conj.split_first() else {
            emit(slots);
            return;
        };
        let rel = &self.relations[lit.pred.0 as usize];
        let arity = lit.terms.len();
        let resolve = |t: &Term, slots: &[u32]| match *t {
            Term::Const(c) => Some(c),
            Term::Var(v) => {
                let s = slots[v.0 as usize];
                (s != UNBOUND).then_some(ConstId(s))
            }
        };
        if lit.terms.iter().all(|t| resolve(t, slots).is_some()) {
            let args: Vec<ConstId> = lit
                .terms
                .iter()
                .map(|t| resolve(t, slots).unwrap())
                .collect();
            let present = rel.members.contains(&pack(&args))
                && !exclude.is_some_and(|e| e.hides(lit.pred, &args));
            if present != lit.negated {
                self.enumerate(rest, slots, exclude, emit);
            }
            return;
        }
        let rows: Vec<u32> = (0..(rel.rows.len() / arity) as u32).collect();
        for r in rows {
            let row = rel.row(r);
            if exclude.is_some_and(|e| e.hides(lit.pred, row)) {
                continue;
            }
            let mut newly = Vec::new();
            let mut ok = true;
            for (pos, t) in lit.terms.iter().enumerate() {
                match resolve(t, slots) {
                    Some(c) if c != row[pos] => {
                        ok = false;
                        break;
                    }
                    Some(_) => {}
                    None => {
                        if let Term::Var(v) = t {
                            slots[v.0 as usize] = row[pos].0;
                            newly.push(v.0 as usize);
                        }
                    }
                }
            }
            if ok {
                self.enumerate(rest, slots, exclude, emit);
            }
            for i in newly {
                slots[i] = UNBOUND;
            }
        }
    }
}
