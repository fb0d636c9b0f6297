use rustc_hash::FxHashSet;

use crate::error::Result;
use crate::factstore::{ConstId, FactBase, GroundAtom, PredId, Universe};

use super::domain::COMM_SOURCES;

/// Symmetric, irreflexive pairs of users sharing a constant under `attr`,
/// found through the attribute's inverted index.
pub fn shared_attribute_pairs(fb: &FactBase, attr: PredId) -> Vec<(ConstId, ConstId)> {
    let mut by_value: Vec<(ConstId, ConstId)> = fb.tuples(attr).map(|t| (t[1], t[0])).collect();
    by_value.sort_unstable();
    let mut pairs = FxHashSet::default();
    for group in by_value.chunk_by(|a, b| a.0 == b.0) {
        for (i, &(_, u1)) in group.iter().enumerate() {
            for &(_, u2) in &group[i + 1..] {
                if u1 != u2 {
                    pairs.insert((u1, u2));
                    pairs.insert((u2, u1));
                }
            }
        }
    }
    let mut out: Vec<_> = pairs.into_iter().collect();
    out.sort_unstable();
    out
}

/// Adds `commSkill`, `commClass` and `commCity` facts linking every pair of
/// distinct users that share a skill, class or city. The result is frozen
/// if the input was.
pub fn induce_comm(fb: &FactBase, universe: &Universe) -> Result<FactBase> {
    let schema = universe.schema();
    let mut out = fb.clone();
    out.thaw();
    for (comm, attr) in COMM_SOURCES {
        let comm = schema.require_pred(comm)?;
        let attr = schema.require_pred(attr)?;
        for (a, b) in shared_attribute_pairs(fb, attr) {
            out.add_fact(universe, &GroundAtom::new(comm, vec![a, b]))?;
        }
    }
    if fb.is_frozen() {
        out.freeze();
    }
    Ok(out)
}
