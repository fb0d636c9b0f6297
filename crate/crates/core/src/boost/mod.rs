//! Functional gradient boosting of relational regression trees with the
//! soft-margin cost adjustment.

mod gradient;
mod io;
mod model;
mod train;

pub use gradient::{
    clamp_prob, example_objective, gradient_cost, gradient_standard, lambda, sigmoid, CostParams,
    GradientRecord, Label, LabeledExample, PROB_CLAMP,
};
pub use io::{parse_model, render_model, MODEL_MAGIC};
pub use model::{BoostedModel, TrainConfig};
pub use train::{penalized_loglik, train, TrainInput, TrainLog};
