use crate::error::{Error, Result};
use crate::factstore::{split_call, strip_comment, PredId, Schema};

/// How a literal argument may be filled during refinement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArgMode {
    /// `+`: reuse a bound variable of the same type.
    Input,
    /// `-`: introduce a fresh variable.
    Output,
    /// `#`: a constant observed at this position.
    Const,
}

impl ArgMode {
    fn sigil(self) -> char {
        match self {
            ArgMode::Input => '+',
            ArgMode::Output => '-',
            ArgMode::Const => '#',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ModeDecl {
    pub pred: PredId,
    pub args: Vec<ArgMode>,
}

impl ModeDecl {
    pub fn new(schema: &Schema, pred: &str, args: &[ArgMode]) -> Result<Self> {
        let pid = schema.require_pred(pred)?;
        if schema.predicate(pid).arity() != args.len() {
            return Err(Error::Schema(format!(
                "mode for `{pred}` lists {} arguments, predicate has arity {}",
                args.len(),
                schema.predicate(pid).arity()
            )));
        }
        Ok(Self {
            pred: pid,
            args: args.to_vec(),
        })
    }

    /// Parses `userSkill(+user, -skill)`.
    pub fn parse(schema: &Schema, text: &str) -> Result<Self> {
        let (name, args) = split_call(text.trim())
            .ok_or_else(|| Error::Schema(format!("malformed mode `{text}`")))?;
        let pid = schema.require_pred(name)?;
        let p = schema.predicate(pid);
        if p.arity() != args.len() {
            return Err(Error::Schema(format!("mode for `{name}` has wrong arity")));
        }
        let mut modes = Vec::with_capacity(args.len());
        for (pos, (a, &ty)) in args.iter().zip(&p.arg_types).enumerate() {
            let (mode, tname) = match a.chars().next() {
                Some('+') => (ArgMode::Input, &a[1..]),
                Some('-') => (ArgMode::Output, &a[1..]),
                Some('#') => (ArgMode::Const, &a[1..]),
                _ => {
                    return Err(Error::Schema(format!(
                        "mode `{name}` position {pos}: missing +, - or #"
                    )))
                }
            };
            let tname = tname.trim();
            if schema.type_id(tname) != Some(ty) {
                return Err(Error::Schema(format!(
                    "mode `{name}` position {pos}: type `{tname}` does not match schema type `{}`",
                    schema.type_name(ty)
                )));
            }
            modes.push(mode);
        }
        Ok(Self {
            pred: pid,
            args: modes,
        })
    }

    pub fn render(&self, schema: &Schema) -> String {
        let p = schema.predicate(self.pred);
        let args: Vec<String> = self
            .args
            .iter()
            .zip(&p.arg_types)
            .map(|(m, t)| format!("{}{}", m.sigil(), schema.type_name(*t)))
            .collect();
        format!("{}({})", p.name, args.join(", "))
    }
}

/// Parses a mode file: one `mode pred(+type, -type, #type).` per line.
pub fn parse_modes(schema: &Schema, text: &str) -> Result<Vec<ModeDecl>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let body = line
            .strip_suffix('.')
            .and_then(|b| b.trim().strip_prefix("mode "))
            .ok_or_else(|| {
                Error::parse(lineno, format!("expected `mode pred(...).`, got `{line}`"))
            })?;
        let decl = ModeDecl::parse(schema, body).map_err(|e| match e {
            Error::Schema(m) => Error::Schema(format!("line {lineno}: {m}")),
            other => other,
        })?;
        out.push(decl);
    }
    Ok(out)
}

pub fn render_modes(schema: &Schema, modes: &[ModeDecl]) -> String {
    modes
        .iter()
        .map(|m| format!("mode {}.\n", m.render(schema)))
        .collect()
}
