//! Relational regression trees (TILDE-style) fitted to functional gradients.
//!
//! Node tests are conjunctions of literals proposed by a mode-directed
//! refinement operator. A test is evaluated existentially together with the
//! tests of all true-branch ancestors, so variables introduced on a true
//! branch stay in scope below it.

mod learn;
mod mode;
mod refine;
mod tree;

pub use learn::{
    improves, learn_tree, mean, sse, RegressionExample, TreeLearner, SCORE_TIE_TOLERANCE,
};
pub use mode::{parse_modes, render_modes, ArgMode, ModeDecl};
pub use refine::{propose_splits, Candidate, PathContext, Refiner};
pub use tree::{render_conjunction, render_literal, validate_tree, TreeNode, TreeParams};
