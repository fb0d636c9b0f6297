use rustc_hash::{FxHashMap, FxHashSet};

use super::schema::{ConstId, GroundAtom, PredId, Universe, MAX_ARITY};
use crate::error::{Error, Result};

pub(crate) type Key = u128;

pub(crate) fn pack(args: &[ConstId]) -> Key {
    debug_assert!(args.len() <= MAX_ARITY);
    args.iter().fold(0u128, |acc, c| (acc << 32) | c.0 as u128)
}

/// Tuples of one predicate with a membership set and per-position indexes.
#[derive(Debug, Clone, Default)]
pub(crate) struct Relation {
    pub(crate) arity: usize,
    /// Row-major tuple storage.
    pub(crate) rows: Vec<ConstId>,
    pub(crate) members: FxHashSet<Key>,
    /// `index[pos][c]` lists the row numbers with constant `c` at `pos`.
    pub(crate) index: Vec<FxHashMap<ConstId, Vec<u32>>>,
}

impl Relation {
    fn new(arity: usize) -> Self {
        Self {
            arity,
            index: vec![FxHashMap::default(); arity],
            ..Default::default()
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.members.len()
    }

    #[inline]
    pub(crate) fn row(&self, r: u32) -> &[ConstId] {
        let start = r as usize * self.arity;
        &self.rows[start..start + self.arity]
    }

    fn push(&mut self, args: &[ConstId]) -> bool {
        if !self.members.insert(pack(args)) {
            return false;
        }
        let r = (self.rows.len() / self.arity) as u32;
        self.rows.extend_from_slice(args);
        for (pos, c) in args.iter().enumerate() {
            self.index[pos].entry(*c).or_default().push(r);
        }
        true
    }

    /// Sorts rows lexicographically by constant id and rebuilds the indexes,
    /// so every posting list enumerates in interned-id order.
    fn canonicalize(&mut self) {
        let n = self.rows.len() / self.arity.max(1);
        let mut order: Vec<u32> = (0..n as u32).collect();
        order.sort_unstable_by(|&a, &b| self.row(a).cmp(self.row(b)));
        let mut rows = Vec::with_capacity(self.rows.len());
        for r in order {
            rows.extend_from_slice(self.row(r));
        }
        self.rows = rows;
        for idx in &mut self.index {
            idx.clear();
        }
        for r in 0..n as u32 {
            let start = r as usize * self.arity;
            for pos in 0..self.arity {
                let c = self.rows[start + pos];
                self.index[pos].entry(c).or_default().push(r);
            }
        }
    }

    #[inline]
    pub(crate) fn postings(&self, pos: usize, c: ConstId) -> &[u32] {
        self.index[pos].get(&c).map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Set of ground facts, indexed per predicate and argument position.
///
/// Mutable while loading. After [`FactBase::freeze`] it is read-only and can
/// be shared across threads.
#[derive(Debug, Clone)]
pub struct FactBase {
    pub(crate) relations: Vec<Relation>,
    frozen: bool,
}

impl FactBase {
    /// Creates an empty fact base with one relation per schema predicate.
    pub fn new(universe: &Universe) -> Self {
        let relations = universe
            .schema()
            .predicates()
            .map(|(_, p)| Relation::new(p.arity()))
            .collect();
        Self {
            relations,
            frozen: false,
        }
    }

    /// Adds a type-checked fact. Returns `true` if it was not already present.
    pub fn add_fact(&mut self, universe: &Universe, atom: &GroundAtom) -> Result<bool> {
        if self.frozen {
            return Err(Error::Schema("fact base is frozen".into()));
        }
        universe.check_atom(atom)?;
        let rel = self
            .relations
            .get_mut(atom.pred.0 as usize)
            .ok_or_else(|| Error::Schema(format!("unknown predicate id {}", atom.pred.0)))?;
        Ok(rel.push(&atom.args))
    }

    /// Adds a fact given by names, interning its constants.
    pub fn add(&mut self, universe: &mut Universe, pred: &str, args: &[&str]) -> Result<bool> {
        let atom = universe.atom(pred, args)?;
        self.add_fact(universe, &atom)
    }

    /// Canonicalizes row order and disallows further mutation.
    pub fn freeze(&mut self) {
        if !self.frozen {
            for rel in &mut self.relations {
                rel.canonicalize();
            }
            self.frozen = true;
        }
    }

    /// Re-opens the fact base for additions; the next freeze re-sorts rows.
    pub fn thaw(&mut self) {
        self.frozen = false;
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    pub fn len(&self) -> usize {
        self.relations.iter().map(Relation::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn count(&self, pred: PredId) -> usize {
        self.relations.get(pred.0 as usize).map_or(0, Relation::len)
    }

    pub fn contains(&self, atom: &GroundAtom) -> bool {
        self.contains_args(atom.pred, &atom.args)
    }

    pub fn contains_args(&self, pred: PredId, args: &[ConstId]) -> bool {
        self.relations
            .get(pred.0 as usize)
            .is_some_and(|r| r.arity == args.len() && r.members.contains(&pack(args)))
    }

    /// Facts of `pred` whose argument at `pos` is `c`, via the index.
    pub fn lookup(
        &self,
        pred: PredId,
        pos: usize,
        c: ConstId,
    ) -> impl Iterator<Item = GroundAtom> + '_ {
        let rel = &self.relations[pred.0 as usize];
        let postings = if pos < rel.arity {
            rel.postings(pos, c)
        } else {
            &[]
        };
        postings
            .iter()
            .map(move |&r| GroundAtom::new(pred, rel.row(r).to_vec()))
    }

    /// All argument tuples of `pred` in storage order.
    pub fn tuples(&self, pred: PredId) -> impl Iterator<Item = &[ConstId]> + '_ {
        let rel = &self.relations[pred.0 as usize];
        rel.rows.chunks_exact(rel.arity.max(1))
    }

    /// Every fact, grouped by predicate id.
    pub fn facts(&self) -> impl Iterator<Item = GroundAtom> + '_ {
        self.relations.iter().enumerate().flat_map(|(p, rel)| {
            rel.rows
                .chunks_exact(rel.arity.max(1))
                .map(move |args| GroundAtom::new(PredId(p as u16), args.to_vec()))
        })
    }

    /// Constants at `pos` of `pred`, most frequent first, ties by id.
    pub fn frequent_constants(&self, pred: PredId, pos: usize, cap: usize) -> Vec<ConstId> {
        let rel = &self.relations[pred.0 as usize];
        let mut counts: Vec<(ConstId, usize)> = rel.index[pos]
            .iter()
            .map(|(c, rows)| (*c, rows.len()))
            .collect();
        counts.sort_unstable_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        counts.into_iter().take(cap).map(|(c, _)| c).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factstore::schema::Schema;

    fn universe() -> Universe {
        let schema = Schema::parse(
            "type user.\ntype skill.\ntype job.\npred userSkill(user, skill).\npred jobSkill(job, skill).\n",
        )
        .unwrap();
        Universe::new(schema)
    }

    #[test]
    fn duplicate_add_is_idempotent() {
        let mut u = universe();
        let mut fb = FactBase::new(&u);
        assert!(fb.add(&mut u, "userSkill", &["u1", "s1"]).unwrap());
        assert!(!fb.add(&mut u, "userSkill", &["u1", "s1"]).unwrap());
        assert_eq!(fb.len(), 1);
    }

    #[test]
    fn type_mismatch_is_schema_error() {
        let mut u = universe();
        let mut fb = FactBase::new(&u);
        u.intern_typed("j1", "job").unwrap();
        let err = fb.add(&mut u, "userSkill", &["u1", "j1"]).unwrap_err();
        assert!(matches!(err, Error::Schema(_)));
        assert!(fb.add(&mut u, "nope", &["u1"]).is_err());
    }

    #[test]
    fn index_lookup_returns_fact() {
        let mut u = universe();
        let mut fb = FactBase::new(&u);
        fb.add(&mut u, "jobSkill", &["j1", "s1"]).unwrap();
        let js = u.schema().pred_id("jobSkill").unwrap();
        let j1 = u.lookup("j1").unwrap();
        let hits: Vec<_> = fb.lookup(js, 0, j1).collect();
        assert_eq!(hits, vec![u.atom("jobSkill", &["j1", "s1"]).unwrap()]);
    }

    #[test]
    fn frozen_rejects_writes_and_sorts_rows() {
        let mut u = universe();
        let mut fb = FactBase::new(&u);
        fb.add(&mut u, "userSkill", &["u2", "s1"]).unwrap();
        fb.add(&mut u, "userSkill", &["u1", "s1"]).unwrap();
        fb.freeze();
        assert!(fb.add(&mut u, "userSkill", &["u3", "s1"]).is_err());
        let us = u.schema().pred_id("userSkill").unwrap();
        let s1 = u.lookup("s1").unwrap();
        let users: Vec<_> = fb.lookup(us, 1, s1).map(|a| a.args[0]).collect();
        assert!(users.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn frequent_constants_ordering() {
        let mut u = universe();
        let mut fb = FactBase::new(&u);
        for (a, b) in [
            ("u1", "s2"),
            ("u2", "s2"),
            ("u1", "s1"),
            ("u3", "s3"),
            ("u4", "s3"),
        ] {
            fb.add(&mut u, "userSkill", &[a, b]).unwrap();
        }
        let us = u.schema().pred_id("userSkill").unwrap();
        let top = fb.frequent_constants(us, 1, 2);
        assert_eq!(top, vec![u.lookup("s2").unwrap(), u.lookup("s3").unwrap()]);
    }
}
