use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::factstore::{FactBase, PredId, Universe};
use crate::real::Real;
use crate::treelearn::{ModeDecl, RegressionExample, TreeLearner, TreeNode};

use super::gradient::{
    clamp_prob, example_objective, gradient_cost, sigmoid, CostParams, GradientRecord, Label,
    LabeledExample,
};
use super::model::{BoostedModel, TrainConfig};

/// Objective after each stage; entry 0 is the initial model.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainLog<T> {
    pub objective: Vec<T>,
}

impl<T: Real> TrainLog<T> {
    pub fn render(&self) -> String {
        let mut out = String::from("stage\tpenalized_loglik\n");
        for (i, v) in self.objective.iter().enumerate() {
            out.push_str(&format!("{i}\t{v}\n"));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut objective = Vec::new();
        for (i, line) in text.lines().enumerate().skip(1) {
            let v = line
                .split('\t')
                .nth(1)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::parse(i + 1, "malformed training log line"))?;
            objective.push(v);
        }
        Ok(Self { objective })
    }
}

/// Everything needed to fit a model on one fact base.
#[derive(Debug, Clone, Copy)]
pub struct TrainInput<'a> {
    pub universe: &'a Universe,
    pub fb: &'a FactBase,
    pub pos: &'a [LabeledExample],
    pub neg: &'a [LabeledExample],
    pub modes: &'a [ModeDecl],
    pub mask: Option<PredId>,
}

fn check_examples(target: PredId, pos: &[LabeledExample], neg: &[LabeledExample]) -> Result<()> {
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::Training(
            "both positive and negative examples are required".into(),
        ));
    }
    if pos.iter().any(|e| e.label != Label::Match) || neg.iter().any(|e| e.label != Label::MisMatch)
    {
        return Err(Error::Training(
            "example labels disagree with their list".into(),
        ));
    }
    if pos.iter().chain(neg).any(|e| e.target.pred != target) {
        return Err(Error::Training(
            "examples must all ground the same target predicate".into(),
        ));
    }
    Ok(())
}

/// Functional gradient boosting: each stage fits a relational regression
/// tree to the cost-sensitive gradients of the current model.
pub fn train<T: Real>(
    input: TrainInput<'_>,
    config: &TrainConfig<T>,
) -> Result<(BoostedModel<T>, TrainLog<T>)> {
    config.validate()?;
    let target = input
        .pos
        .first()
        .ok_or_else(|| Error::Training("no positive examples".into()))?
        .target
        .pred;
    check_examples(target, input.pos, input.neg)?;
    let examples: Vec<&LabeledExample> = input.pos.iter().chain(input.neg).collect();
    for e in &examples {
        input.universe.check_atom(&e.target)?;
    }
    let learner = TreeLearner::new(
        input.universe,
        input.fb,
        target,
        input.modes,
        config.tree,
        input.mask,
    )?;
    let mut model = BoostedModel::new(target, input.mask, config.clone());
    let mut psi = vec![model.psi0; examples.len()];
    let objective_of = |psi: &[T]| -> T {
        examples.iter().zip(psi).fold(T::zero(), |acc, (e, &s)| {
            acc + example_objective(e.label, s, config.cost)
        })
    };
    let mut log = TrainLog {
        objective: vec![objective_of(&psi)],
    };

    for _ in 0..config.n_stages {
        let grads: Vec<GradientRecord<T>> = examples
            .iter()
            .zip(&psi)
            .map(|(e, &s)| gradient_cost(e.label, clamp_prob(sigmoid(s)), config.cost))
            .collect();
        let regression: Vec<RegressionExample<T>> = examples
            .iter()
            .zip(&grads)
            .map(|(e, g)| RegressionExample {
                target: e.target.clone(),
                value: g.delta,
            })
            .collect();
        let mut tree = learner.learn(&regression)?;
        if config.step != T::one() {
            scale_leaves(&mut tree, config.step);
        }
        let updates: Vec<T> = examples
            .par_iter()
            .map(|e| tree.route_excluding(&e.target, input.fb, model.exclusion(&e.target)))
            .collect();
        for (s, u) in psi.iter_mut().zip(updates) {
            *s = *s + u;
        }
        model.stages.push(tree);
        log.objective.push(objective_of(&psi));
    }
    Ok((model, log))
}

fn scale_leaves<T: Real>(tree: &mut TreeNode<T>, k: T) {
    match tree {
        TreeNode::Leaf(v) => *v = *v * k,
        TreeNode::Internal { yes, no, .. } => {
            scale_leaves(yes, k);
            scale_leaves(no, k);
        }
    }
}

/// Penalized log-likelihood `Σ_i [ψ(ŷ_i) − ln Σ_y' exp(ψ(y') + c(ŷ_i, y'))]`
/// with `ψ(MisMatch) = 0`; equals the plain log-likelihood at zero cost.
pub fn penalized_loglik<T: Real>(
    model: &BoostedModel<T>,
    pos: &[LabeledExample],
    neg: &[LabeledExample],
    fb: &FactBase,
    cost: CostParams<T>,
) -> Result<T> {
    let mut total = T::zero();
    for e in pos.iter().chain(neg) {
        total = total + example_objective(e.label, model.psi(&e.target, fb)?, cost);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factstore::Schema;
    use crate::treelearn::{parse_modes, TreeParams};

    struct Fixture {
        u: Universe,
        fb: FactBase,
        modes: Vec<ModeDecl>,
        pos: Vec<LabeledExample>,
        neg: Vec<LabeledExample>,
    }

    fn fixture() -> Fixture {
        let schema = Schema::parse("type e.\npred t(e).\npred p(e).\npred q(e).\n").unwrap();
        let mut u = Universe::new(schema);
        let mut fb = FactBase::new(&u);
        for c in ["a", "b", "c"] {
            fb.add(&mut u, "p", &[c]).unwrap();
        }
        for c in ["b", "d"] {
            fb.add(&mut u, "q", &[c]).unwrap();
        }
        fb.freeze();
        let modes = parse_modes(u.schema(), "mode p(+e).\nmode q(+e).\n").unwrap();
        let mk = |u: &mut Universe, c: &str, l| LabeledExample::new(u.atom("t", &[c]).unwrap(), l);
        let pos = vec![
            mk(&mut u, "a", Label::Match),
            mk(&mut u, "b", Label::Match),
            mk(&mut u, "d", Label::Match),
        ];
        let neg = vec![
            mk(&mut u, "c", Label::MisMatch),
            mk(&mut u, "e", Label::MisMatch),
            mk(&mut u, "f", Label::MisMatch),
        ];
        Fixture {
            u,
            fb,
            modes,
            pos,
            neg,
        }
    }

    fn input(f: &Fixture) -> TrainInput<'_> {
        TrainInput {
            universe: &f.u,
            fb: &f.fb,
            pos: &f.pos,
            neg: &f.neg,
            modes: &f.modes,
            mask: None,
        }
    }

    #[test]
    fn zero_stages_is_config_error() {
        let f = fixture();
        let cfg = TrainConfig::<f64> {
            n_stages: 0,
            ..Default::default()
        };
        assert!(matches!(train(input(&f), &cfg), Err(Error::Config(_))));
    }

    #[test]
    fn empty_class_is_training_error() {
        let f = fixture();
        let mut inp = input(&f);
        inp.neg = &[];
        assert!(matches!(
            train(inp, &TrainConfig::<f64>::default()),
            Err(Error::Training(_))
        ));
    }

    #[test]
    fn objective_non_decreasing_at_zero_cost() {
        let f = fixture();
        let cfg = TrainConfig::<f64> {
            n_stages: 8,
            tree: TreeParams {
                min_leaf_examples: 1,
                max_depth: 4,
                ..Default::default()
            },
            ..Default::default()
        };
        let (model, log) = train(input(&f), &cfg).unwrap();
        assert_eq!(model.stages.len(), 8);
        assert!(
            log.objective.windows(2).all(|w| w[1] >= w[0] - 1e-12),
            "{:?}",
            log.objective
        );
        let ll = penalized_loglik(&model, &f.pos, &f.neg, &f.fb, CostParams::default()).unwrap();
        assert!((ll - log.objective[8]).abs() < 1e-9);
    }

    #[test]
    fn empty_model_predicts_half() {
        let f = fixture();
        let model = BoostedModel::<f64>::new(f.pos[0].target.pred, None, TrainConfig::default());
        assert_eq!(model.predict_prob(&f.pos[0].target, &f.fb).unwrap(), 0.5);
        let ll = penalized_loglik(&model, &f.pos, &f.neg, &f.fb, CostParams::default()).unwrap();
        assert!((ll - 6.0 * 0.5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn log_roundtrip() {
        let log = TrainLog {
            objective: vec![-4.1588830833596715f64, -3.25, -0.1],
        };
        assert_eq!(TrainLog::<f64>::parse(&log.render()).unwrap(), log);
    }

    #[test]
    fn f32_training_works() {
        let f = fixture();
        let cfg = TrainConfig::<f32> {
            n_stages: 3,
            tree: TreeParams {
                min_leaf_examples: 1,
                ..Default::default()
            },
            ..Default::default()
        };
        let (model, _) = train(input(&f), &cfg).unwrap();
        // `b` is separable from every negative; `a` and `c` are not.
        let p = model.predict_prob(&f.pos[1].target, &f.fb).unwrap();
        assert!(p > 0.5 && p < 1.0);
        assert_eq!(model.predict_prob(&f.pos[0].target, &f.fb).unwrap(), 0.5);
    }
}
