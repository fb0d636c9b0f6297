//! Cost-sensitive relational functional gradient boosting.
//!
//! A boosted model is a sum of relational regression trees over a
//! first-order fact base; `σ(ψ)` gives the probability of the target
//! relation. The soft-margin cost parameters `(α, β)` rescale the gradients
//! of misclassified positives and negatives to trade recall for precision.

pub mod boost;
pub mod error;
pub mod factstore;
pub mod hybrid;
pub mod metrics;
pub mod real;
pub mod treelearn;

pub use error::{Error, Result};
pub use real::Real;

/// Boosted model over `f64` potentials.
pub type Model = boost::BoostedModel<f64>;
/// Boosted model over `f32` potentials.
pub type Model32 = boost::BoostedModel<f32>;
pub type Tree = treelearn::TreeNode<f64>;
pub type Tree32 = treelearn::TreeNode<f32>;
pub type Config = boost::TrainConfig<f64>;
pub type Config32 = boost::TrainConfig<f32>;
pub type Cost = boost::CostParams<f64>;
pub type Cost32 = boost::CostParams<f32>;
pub type Scored = metrics::ScoredExample<f64>;
pub type Scored32 = metrics::ScoredExample<f32>;
pub type Eval = metrics::Evaluation<f64>;
pub type Eval32 = metrics::Evaluation<f32>;
