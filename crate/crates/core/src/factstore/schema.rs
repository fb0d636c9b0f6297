use std::collections::HashMap;

use crate::error::{Error, Result};

/// Fact tuples are packed into a 128-bit key, four 32-bit constants wide.
pub const MAX_ARITY: usize = 4;

/// Index of an entity type within a [`Schema`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeId(pub u16);

/// Index of a predicate within a [`Schema`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PredId(pub u16);

/// Interned constant symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConstId(pub u32);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateSchema {
    pub name: String,
    pub arg_types: Vec<TypeId>,
}

impl PredicateSchema {
    pub fn arity(&self) -> usize {
        self.arg_types.len()
    }
}

/// Entity types and predicate signatures.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Schema {
    types: Vec<String>,
    type_ids: HashMap<String, TypeId>,
    preds: Vec<PredicateSchema>,
    pred_ids: HashMap<String, PredId>,
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Constant tokens additionally admit a leading digit so that numeric
/// buckets such as `3` can be written bare.
pub(crate) fn is_constant_token(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Schema {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_type(&mut self, name: &str) -> Result<TypeId> {
        if !is_identifier(name) {
            return Err(Error::Schema(format!("invalid type name `{name}`")));
        }
        if self.type_ids.contains_key(name) {
            return Err(Error::Schema(format!("duplicate type `{name}`")));
        }
        let id = TypeId(self.types.len() as u16);
        self.types.push(name.to_string());
        self.type_ids.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn add_predicate(&mut self, name: &str, arg_types: &[&str]) -> Result<PredId> {
        if !is_identifier(name) {
            return Err(Error::Schema(format!("invalid predicate name `{name}`")));
        }
        if arg_types.is_empty() {
            return Err(Error::Schema(format!(
                "predicate `{name}` must have arity >= 1"
            )));
        }
        if arg_types.len() > MAX_ARITY {
            return Err(Error::Schema(format!(
                "predicate `{name}` exceeds the maximum arity {MAX_ARITY}"
            )));
        }
        if self.pred_ids.contains_key(name) {
            return Err(Error::Schema(format!("duplicate predicate `{name}`")));
        }
        let arg_types = arg_types
            .iter()
            .map(|t| {
                self.type_id(t).ok_or_else(|| {
                    Error::Schema(format!("predicate `{name}` uses unknown type `{t}`"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let id = PredId(self.preds.len() as u16);
        self.preds.push(PredicateSchema {
            name: name.to_string(),
            arg_types,
        });
        self.pred_ids.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn type_id(&self, name: &str) -> Option<TypeId> {
        self.type_ids.get(name).copied()
    }

    pub fn type_name(&self, id: TypeId) -> &str {
        &self.types[id.0 as usize]
    }

    pub fn pred_id(&self, name: &str) -> Option<PredId> {
        self.pred_ids.get(name).copied()
    }

    pub fn require_pred(&self, name: &str) -> Result<PredId> {
        self.pred_id(name)
            .ok_or_else(|| Error::Schema(format!("unknown predicate `{name}`")))
    }

    pub fn predicate(&self, id: PredId) -> &PredicateSchema {
        &self.preds[id.0 as usize]
    }

    pub fn contains_pred(&self, id: PredId) -> bool {
        (id.0 as usize) < self.preds.len()
    }

    pub fn num_predicates(&self) -> usize {
        self.preds.len()
    }

    pub fn num_types(&self) -> usize {
        self.types.len()
    }

    pub fn predicates(&self) -> impl Iterator<Item = (PredId, &PredicateSchema)> {
        self.preds
            .iter()
            .enumerate()
            .map(|(i, p)| (PredId(i as u16), p))
    }

    /// Parses `type user.` and `pred userSkill(user, skill).` lines.
    pub fn parse(text: &str) -> Result<Self> {
        let mut schema = Schema::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            let lineno = lineno + 1;
            let body = line
                .strip_suffix('.')
                .ok_or_else(|| Error::parse(lineno, "missing terminating `.`"))?
                .trim();
            if let Some(rest) = body.strip_prefix("type ") {
                schema
                    .add_type(rest.trim())
                    .map_err(|e| Error::parse(lineno, e.to_string()))?;
            } else if let Some(rest) = body.strip_prefix("pred ") {
                let (name, args) = split_call(rest.trim())
                    .ok_or_else(|| Error::parse(lineno, "malformed predicate"))?;
                schema
                    .add_predicate(name, &args)
                    .map_err(|e| Error::parse(lineno, e.to_string()))?;
            } else {
                return Err(Error::parse(
                    lineno,
                    format!("unrecognised schema line `{line}`"),
                ));
            }
        }
        Ok(schema)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for t in &self.types {
            out.push_str(&format!("type {t}.\n"));
        }
        for p in &self.preds {
            let args: Vec<&str> = p.arg_types.iter().map(|t| self.type_name(*t)).collect();
            out.push_str(&format!("pred {}({}).\n", p.name, args.join(", ")));
        }
        out
    }
}

pub(crate) fn strip_comment(line: &str) -> &str {
    match line.find('%') {
        Some(i) => &line[..i],
        None => line,
    }
}

/// Splits `name(a, b, c)` into its name and trimmed arguments.
pub(crate) fn split_call(s: &str) -> Option<(&str, Vec<&str>)> {
    let open = s.find('(')?;
    let inner = s[open + 1..].trim_end().strip_suffix(')')?;
    let name = s[..open].trim();
    if inner.contains('(') || inner.contains(')') {
        return None;
    }
    let args = inner.split(',').map(str::trim).collect();
    Some((name, args))
}

/// Schema plus the interned constant table shared by every fact base that
/// refers to the same entities.
#[derive(Debug, Clone, Default)]
pub struct Universe {
    schema: Schema,
    const_names: Vec<String>,
    const_types: Vec<TypeId>,
    const_ids: HashMap<String, ConstId>,
}

impl Universe {
    pub fn new(schema: Schema) -> Self {
        Self {
            schema,
            ..Default::default()
        }
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    /// Interns `name` as a constant of type `ty`. Re-interning with the same
    /// type is a no-op; a different type is rejected.
    pub fn intern(&mut self, name: &str, ty: TypeId) -> Result<ConstId> {
        if let Some(&id) = self.const_ids.get(name) {
            let have = self.const_types[id.0 as usize];
            if have != ty {
                return Err(Error::Schema(format!(
                    "constant `{name}` already has type `{}`, cannot also be `{}`",
                    self.schema.type_name(have),
                    self.schema.type_name(ty)
                )));
            }
            return Ok(id);
        }
        if !is_constant_token(name) {
            return Err(Error::Schema(format!("invalid constant `{name}`")));
        }
        let id = ConstId(self.const_names.len() as u32);
        self.const_names.push(name.to_string());
        self.const_types.push(ty);
        self.const_ids.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn intern_typed(&mut self, name: &str, ty: &str) -> Result<ConstId> {
        let t = self
            .schema
            .type_id(ty)
            .ok_or_else(|| Error::Schema(format!("unknown type `{ty}`")))?;
        self.intern(name, t)
    }

    pub fn lookup(&self, name: &str) -> Option<ConstId> {
        self.const_ids.get(name).copied()
    }

    pub fn const_name(&self, id: ConstId) -> &str {
        &self.const_names[id.0 as usize]
    }

    pub fn const_type(&self, id: ConstId) -> TypeId {
        self.const_types[id.0 as usize]
    }

    pub fn num_constants(&self) -> usize {
        self.const_names.len()
    }

    /// Builds a type-checked ground atom from names, interning its constants.
    pub fn atom(&mut self, pred: &str, args: &[&str]) -> Result<GroundAtom> {
        let pid = self.schema.require_pred(pred)?;
        let types = self.schema.predicate(pid).arg_types.clone();
        if types.len() != args.len() {
            return Err(Error::Schema(format!(
                "predicate `{pred}` has arity {}, got {} arguments",
                types.len(),
                args.len()
            )));
        }
        let mut ids = Vec::with_capacity(args.len());
        for (pos, (a, t)) in args.iter().zip(types).enumerate() {
            let id = self
                .intern(a, t)
                .map_err(|e| Error::Schema(format!("predicate `{pred}` position {pos}: {e}")))?;
            ids.push(id);
        }
        Ok(GroundAtom::new(pid, ids))
    }

    /// Checks argument count and per-position types.
    pub fn check_atom(&self, atom: &GroundAtom) -> Result<()> {
        if !self.schema.contains_pred(atom.pred) {
            return Err(Error::Schema(format!(
                "unknown predicate id {}",
                atom.pred.0
            )));
        }
        let p = self.schema.predicate(atom.pred);
        if p.arity() != atom.args.len() {
            return Err(Error::Schema(format!(
                "predicate `{}` has arity {}, got {} arguments",
                p.name,
                p.arity(),
                atom.args.len()
            )));
        }
        for (pos, (&c, &t)) in atom.args.iter().zip(&p.arg_types).enumerate() {
            if (c.0 as usize) >= self.const_names.len() {
                return Err(Error::Schema(format!(
                    "predicate `{}` position {pos}: unknown constant",
                    p.name
                )));
            }
            let have = self.const_type(c);
            if have != t {
                return Err(Error::Schema(format!(
                    "predicate `{}` position {pos}: expected `{}`, constant `{}` is `{}`",
                    p.name,
                    self.schema.type_name(t),
                    self.const_name(c),
                    self.schema.type_name(have)
                )));
            }
        }
        Ok(())
    }

    pub fn render_atom(&self, atom: &GroundAtom) -> String {
        let args: Vec<&str> = atom.args.iter().map(|c| self.const_name(*c)).collect();
        format!(
            "{}({})",
            self.schema.predicate(atom.pred).name,
            args.join(",")
        )
    }
}

/// A fully ground first-order atom.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundAtom {
    pub pred: PredId,
    pub args: Vec<ConstId>,
}

impl GroundAtom {
    pub fn new(pred: PredId, args: Vec<ConstId>) -> Self {
        Self { pred, args }
    }
}
