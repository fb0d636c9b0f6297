use crate::error::{Error, Result};
use crate::factstore::{
    is_constant_token, Exclusion, FactBase, GroundAtom, Literal, Term, Universe, Var,
};
use crate::real::Real;

/// Hyperparameters of a single relational regression tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_leaf_examples: usize,
    pub max_literals_per_node: usize,
    pub const_candidates_cap: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: 3,
            min_leaf_examples: 8,
            max_literals_per_node: 2,
            const_candidates_cap: 16,
        }
    }
}

impl TreeParams {
    pub fn validate(&self) -> Result<()> {
        if self.min_leaf_examples < 1 {
            return Err(Error::Config("min_leaf_examples must be >= 1".into()));
        }
        if self.max_literals_per_node < 1 {
            return Err(Error::Config("max_literals_per_node must be >= 1".into()));
        }
        Ok(())
    }
}

/// Relational regression tree. An internal node's test is a conjunction
/// evaluated existentially together with the tests of its true-branch
/// ancestors; variables `V0..Vk` are the target atom's arguments.
#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode<T> {
    Leaf(T),
    Internal {
        test: Vec<Literal>,
        yes: Box<TreeNode<T>>,
        no: Box<TreeNode<T>>,
    },
}

impl<T: Real> TreeNode<T> {
    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf(_) => 0,
            TreeNode::Internal { yes, no, .. } => 1 + yes.depth().max(no.depth()),
        }
    }

    pub fn num_leaves(&self) -> usize {
        match self {
            TreeNode::Leaf(_) => 1,
            TreeNode::Internal { yes, no, .. } => yes.num_leaves() + no.num_leaves(),
        }
    }

    fn max_var(&self) -> u32 {
        match self {
            TreeNode::Leaf(_) => 0,
            TreeNode::Internal { test, yes, no } => test
                .iter()
                .flat_map(Literal::vars)
                .map(|v| v.0 + 1)
                .max()
                .unwrap_or(0)
                .max(yes.max_var())
                .max(no.max_var()),
        }
    }

    /// Evaluates the tree at `target`.
    pub fn route(&self, target: &GroundAtom, fb: &FactBase) -> T {
        self.route_excluding(target, fb, None)
    }

    /// Evaluates the tree at `target` with one fact hidden from every test.
    pub fn route_excluding(
        &self,
        target: &GroundAtom,
        fb: &FactBase,
        exclude: Option<Exclusion<'_>>,
    ) -> T {
        let width = (self.max_var() as usize).max(target.args.len());
        let mut slots = vec![u32::MAX; width];
        for (i, c) in target.args.iter().enumerate() {
            slots[i] = c.0;
        }
        let mut path: Vec<Literal> = Vec::new();
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf(v) => return *v,
                TreeNode::Internal { test, yes, no } => {
                    let base = path.len();
                    path.extend(test.iter().cloned());
                    if fb.search(&path, &mut slots, exclude) {
                        node = yes;
                    } else {
                        path.truncate(base);
                        node = no;
                    }
                }
            }
        }
    }

    /// Preorder text form: `(leaf v)` or `(if lit, lit then YES else NO)`.
    pub fn render(&self, universe: &Universe) -> String {
        let mut out = String::new();
        self.render_into(universe, &mut out);
        out
    }

    fn render_into(&self, universe: &Universe, out: &mut String) {
        match self {
            TreeNode::Leaf(v) => {
                out.push_str("(leaf ");
                out.push_str(&v.to_string());
                out.push(')');
            }
            TreeNode::Internal { test, yes, no } => {
                out.push_str("(if ");
                out.push_str(&render_conjunction(test, universe));
                out.push_str(" then ");
                yes.render_into(universe, out);
                out.push_str(" else ");
                no.render_into(universe, out);
                out.push(')');
            }
        }
    }

    /// Parses the output of [`TreeNode::render`], interning unseen constants.
    pub fn parse(text: &str, universe: &mut Universe) -> Result<Self> {
        let mut p = Parser {
            src: text.as_bytes(),
            pos: 0,
        };
        let tree = p.tree(universe)?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.err("trailing input after tree"));
        }
        Ok(tree)
    }
}

fn render_term(t: &Term, universe: &Universe) -> String {
    match t {
        Term::Var(v) => format!("V{}", v.0),
        Term::Const(c) => {
            let name = universe.const_name(*c);
            if name.starts_with(|ch: char| ch.is_ascii_uppercase()) {
                format!("'{name}'")
            } else {
                name.to_string()
            }
        }
    }
}

pub fn render_literal(lit: &Literal, universe: &Universe) -> String {
    let terms: Vec<String> = lit.terms.iter().map(|t| render_term(t, universe)).collect();
    format!(
        "{}{}({})",
        if lit.negated { "\\+" } else { "" },
        universe.schema().predicate(lit.pred).name,
        terms.join(",")
    )
}

pub fn render_conjunction(conj: &[Literal], universe: &Universe) -> String {
    conj.iter()
        .map(|l| render_literal(l, universe))
        .collect::<Vec<_>>()
        .join(", ")
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Model(format!("{msg} at offset {}", self.pos))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, s: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(s.as_bytes()) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<()> {
        if self.eat(s) {
            Ok(())
        } else {
            Err(self.err(&format!("expected `{s}`")))
        }
    }

    fn token(&mut self) -> &str {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            if c.is_ascii_alphanumeric() || matches!(c, b'_' | b'.' | b'-' | b'+') {
                self.pos += 1;
            } else {
                break;
            }
        }
        std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("")
    }

    fn ident(&mut self) -> &str {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("")
    }

    fn tree<T: Real>(&mut self, universe: &mut Universe) -> Result<TreeNode<T>> {
        self.expect("(")?;
        if self.eat("leaf ") {
            let tok = self.token().to_string();
            let v: T = tok
                .parse()
                .map_err(|_| self.err(&format!("bad leaf value `{tok}`")))?;
            if !v.is_finite() {
                return Err(self.err("leaf value must be finite"));
            }
            self.expect(")")?;
            return Ok(TreeNode::Leaf(v));
        }
        self.expect("if ")?;
        let mut test = vec![self.literal(universe)?];
        while self.eat(",") {
            test.push(self.literal(universe)?);
        }
        self.expect("then")?;
        let yes = self.tree(universe)?;
        self.expect("else")?;
        let no = self.tree(universe)?;
        self.expect(")")?;
        Ok(TreeNode::Internal {
            test,
            yes: Box::new(yes),
            no: Box::new(no),
        })
    }

    fn literal(&mut self, universe: &mut Universe) -> Result<Literal> {
        let negated = self.eat("\\+");
        let name = self.ident().to_string();
        let pid = universe
            .schema()
            .pred_id(&name)
            .ok_or_else(|| self.err(&format!("unknown predicate `{name}`")))?;
        let types = universe.schema().predicate(pid).arg_types.clone();
        self.expect("(")?;
        let mut terms = Vec::with_capacity(types.len());
        for (i, ty) in types.iter().enumerate() {
            if i > 0 {
                self.expect(",")?;
            }
            self.skip_ws();
            let quoted = self.eat("'");
            let tok = self.ident().to_string();
            if quoted {
                self.expect("'")?;
            }
            let term = if !quoted
                && tok.starts_with('V')
                && tok.len() > 1
                && tok[1..].bytes().all(|b| b.is_ascii_digit())
            {
                Term::Var(Var(tok[1..]
                    .parse()
                    .map_err(|_| self.err("bad variable"))?))
            } else if !quoted && tok.starts_with(|c: char| c.is_ascii_uppercase()) {
                return Err(self.err(&format!("variables must be named V<n>, got `{tok}`")));
            } else {
                if !is_constant_token(&tok) {
                    return Err(self.err(&format!("bad constant `{tok}`")));
                }
                Term::Const(
                    universe
                        .intern(&tok, *ty)
                        .map_err(|e| self.err(&e.to_string()))?,
                )
            };
            terms.push(term);
        }
        self.expect(")")?;
        Ok(Literal {
            pred: pid,
            terms,
            negated,
        })
    }
}

/// Checks a parsed tree against the schema and the variable-scoping rules.
pub fn validate_tree<T: Real>(
    tree: &TreeNode<T>,
    universe: &Universe,
    target_arity: usize,
) -> Result<()> {
    fn walk<T: Real>(
        node: &TreeNode<T>,
        universe: &Universe,
        scope: &mut Vec<(Var, crate::factstore::TypeId)>,
        bound: &mut Vec<Var>,
    ) -> Result<()> {
        match node {
            TreeNode::Leaf(v) if v.is_finite() => Ok(()),
            TreeNode::Leaf(_) => Err(Error::Model("non-finite leaf".into())),
            TreeNode::Internal { test, yes, no } => {
                let (s0, b0) = (scope.len(), bound.len());
                for lit in test {
                    lit.type_check(universe, scope)?;
                }
                crate::factstore::check_range_restricted(test, bound.iter().copied())?;
                for lit in test.iter().filter(|l| !l.negated) {
                    bound.extend(lit.vars());
                }
                walk(yes, universe, scope, bound)?;
                scope.truncate(s0);
                bound.truncate(b0);
                walk(no, universe, scope, bound)
            }
        }
    }
    let mut bound: Vec<Var> = (0..target_arity as u32).map(Var).collect();
    walk(tree, universe, &mut Vec::new(), &mut bound)
}
