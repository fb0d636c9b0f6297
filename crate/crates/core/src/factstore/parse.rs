use super::schema::{
    is_constant_token, is_identifier, split_call, strip_comment, GroundAtom, Universe,
};
use super::store::FactBase;
use crate::error::{Error, Result};

/// Parses one `pred(c1,c2,...).` line into name and argument tokens.
fn parse_line(line: &str, lineno: usize) -> Result<(&str, Vec<&str>)> {
    let body = line
        .strip_suffix('.')
        .ok_or_else(|| Error::parse(lineno, "missing terminating `.`"))?
        .trim_end();
    let (name, args) =
        split_call(body).ok_or_else(|| Error::parse(lineno, format!("malformed fact `{line}`")))?;
    if !is_identifier(name) {
        return Err(Error::parse(
            lineno,
            format!("invalid predicate name `{name}`"),
        ));
    }
    if let Some(bad) = args.iter().find(|a| !is_constant_token(a)) {
        return Err(Error::parse(lineno, format!("invalid constant `{bad}`")));
    }
    Ok((name, args))
}

/// Parses a stream of ground atoms, interning constants with the types the
/// schema declares at their positions.
pub fn parse_atoms(text: &str, universe: &mut Universe) -> Result<Vec<GroundAtom>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let (name, args) = parse_line(line, lineno)?;
        let atom = universe.atom(name, &args).map_err(|e| match e {
            Error::Schema(m) => Error::Schema(format!("line {lineno}: {m}")),
            other => other,
        })?;
        out.push(atom);
    }
    Ok(out)
}

/// Parses a fact file into a new (unfrozen) fact base.
pub fn parse_facts(text: &str, universe: &mut Universe) -> Result<FactBase> {
    let mut fb = FactBase::new(universe);
    for atom in parse_atoms(text, universe)? {
        fb.add_fact(universe, &atom)?;
    }
    Ok(fb)
}

pub fn render_atoms<'a>(
    atoms: impl IntoIterator<Item = &'a GroundAtom>,
    universe: &Universe,
) -> String {
    let mut out = String::new();
    for a in atoms {
        out.push_str(&universe.render_atom(a));
        out.push_str(".\n");
    }
    out
}

/// Renders every fact, sorted by predicate name then constant names so the
/// output does not depend on interning order.
pub fn serialize_facts(fb: &FactBase, universe: &Universe) -> String {
    let mut lines: Vec<String> = fb.facts().map(|a| universe.render_atom(&a)).collect();
    lines.sort_unstable();
    let mut out = String::with_capacity(lines.iter().map(|l| l.len() + 2).sum());
    for l in lines {
        out.push_str(&l);
        out.push_str(".\n");
    }
    out
}
