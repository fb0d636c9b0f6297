use crate::boost::{Label, LabeledExample};
use crate::error::{Error, Result};
use crate::factstore::{parse_atoms, render_atoms, ConstId, FactBase, GroundAtom, Universe};

use super::domain::{APPLIED, RECOMMENDED, TARGET};

fn target_atoms(
    fb: &FactBase,
    universe: &Universe,
    from: &str,
    keep: impl Fn(&[ConstId]) -> bool,
) -> Result<Vec<GroundAtom>> {
    let schema = universe.schema();
    let src = schema.require_pred(from)?;
    let target = schema.require_pred(TARGET)?;
    let mut out: Vec<GroundAtom> = fb
        .tuples(src)
        .filter(|t| keep(t))
        .map(|t| GroundAtom::new(target, t.to_vec()))
        .collect();
    out.sort_unstable();
    Ok(out)
}

/// One `MisMatch` example per recommended pair the user did not apply to.
/// Pairs that were never recommended are not negatives.
pub fn generate_negatives(fb: &FactBase, universe: &Universe) -> Result<Vec<LabeledExample>> {
    let applied = universe.schema().require_pred(APPLIED)?;
    let atoms = target_atoms(fb, universe, RECOMMENDED, |t| !fb.contains_args(applied, t))?;
    Ok(atoms
        .into_iter()
        .map(|a| LabeledExample::new(a, Label::MisMatch))
        .collect())
}

/// Positives from applications, negatives from unanswered recommendations.
/// Both lists are sorted by atom.
pub fn build_examples(
    fb: &FactBase,
    universe: &Universe,
) -> Result<(Vec<LabeledExample>, Vec<LabeledExample>)> {
    let pos = target_atoms(fb, universe, APPLIED, |_| true)?
        .into_iter()
        .map(|a| LabeledExample::new(a, Label::Match))
        .collect();
    Ok((pos, generate_negatives(fb, universe)?))
}

/// Reads target atoms, one per line, all with the given label.
pub fn parse_examples(
    text: &str,
    universe: &mut Universe,
    label: Label,
) -> Result<Vec<LabeledExample>> {
    let target = universe.schema().require_pred(TARGET)?;
    let atoms = parse_atoms(text, universe)?;
    if let Some(bad) = atoms.iter().find(|a| a.pred != target) {
        return Err(Error::Schema(format!(
            "example `{}` is not a {TARGET} atom",
            universe.render_atom(bad)
        )));
    }
    Ok(atoms
        .into_iter()
        .map(|a| LabeledExample::new(a, label))
        .collect())
}

pub fn render_examples(examples: &[LabeledExample], universe: &Universe) -> String {
    render_atoms(examples.iter().map(|e| &e.target), universe)
}
