use crate::error::{Error, Result};
use crate::factstore::{Exclusion, FactBase, GroundAtom, PredId, Universe};
use crate::real::Real;
use crate::treelearn::{TreeNode, TreeParams};

use super::gradient::{sigmoid, CostParams};

/// Settings a model was trained with, kept for provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig<T> {
    pub tree: TreeParams,
    pub cost: CostParams<T>,
    pub n_stages: usize,
    pub seed: u64,
    /// Multiplier applied to each stage's leaves before it is appended.
    pub step: T,
    pub psi0: T,
}

impl<T: Real> Default for TrainConfig<T> {
    fn default() -> Self {
        Self {
            tree: TreeParams::default(),
            cost: CostParams::default(),
            n_stages: 20,
            seed: 0,
            step: T::one(),
            psi0: T::zero(),
        }
    }
}

impl<T: Real> TrainConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.n_stages < 1 {
            return Err(Error::Config(
                "at least one boosting stage is required".into(),
            ));
        }
        if !self.step.is_finite() || self.step <= T::zero() {
            return Err(Error::Config(
                "step multiplier must be positive and finite".into(),
            ));
        }
        if !self.psi0.is_finite() {
            return Err(Error::Config("psi0 must be finite".into()));
        }
        self.cost.validate()?;
        self.tree.validate()
    }
}

/// `ψ = ψ0 + Σ_k tree_k`, with `P(Match) = σ(ψ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoostedModel<T> {
    pub target: PredId,
    /// Predicate whose fact with the target's own arguments is hidden when
    /// that target is scored.
    pub mask: Option<PredId>,
    pub psi0: T,
    pub stages: Vec<TreeNode<T>>,
    pub config: TrainConfig<T>,
}

impl<T: Real> BoostedModel<T> {
    pub fn new(target: PredId, mask: Option<PredId>, config: TrainConfig<T>) -> Self {
        Self {
            target,
            mask,
            psi0: config.psi0,
            stages: Vec::new(),
            config,
        }
    }

    pub fn exclusion<'a>(&self, target: &'a GroundAtom) -> Option<Exclusion<'a>> {
        self.mask.map(|pred| Exclusion {
            pred,
            args: &target.args,
        })
    }

    fn check_target(&self, target: &GroundAtom) -> Result<()> {
        if target.pred != self.target {
            return Err(Error::Model(
                "target atom does not match the model's target predicate".into(),
            ));
        }
        Ok(())
    }

    /// `ψ(target)`.
    pub fn psi(&self, target: &GroundAtom, fb: &FactBase) -> Result<T> {
        self.check_target(target)?;
        let excl = self.exclusion(target);
        Ok(self.stages.iter().fold(self.psi0, |acc, tree| {
            acc + tree.route_excluding(target, fb, excl)
        }))
    }

    /// `σ(ψ(target))`.
    pub fn predict_prob(&self, target: &GroundAtom, fb: &FactBase) -> Result<T> {
        self.psi(target, fb).map(sigmoid)
    }

    /// Type-checks a target atom against the universe before scoring.
    pub fn predict_checked(
        &self,
        target: &GroundAtom,
        fb: &FactBase,
        universe: &Universe,
    ) -> Result<T> {
        universe.check_atom(target)?;
        self.predict_prob(target, fb)
    }
}
