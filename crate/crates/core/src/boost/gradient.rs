use crate::error::{Error, Result};
use crate::factstore::GroundAtom;
use crate::real::{log_add_exp, softplus, Real};

/// True label of a target grounding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    MisMatch = 0,
    Match = 1,
}

impl Label {
    pub fn indicator<T: Real>(self) -> T {
        match self {
            Label::Match => T::one(),
            Label::MisMatch => T::zero(),
        }
    }

    pub fn from_bit(bit: u8) -> Self {
        if bit == 0 {
            Label::MisMatch
        } else {
            Label::Match
        }
    }

    pub fn bit(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabeledExample {
    pub target: GroundAtom,
    pub label: Label,
}

impl LabeledExample {
    pub fn new(target: GroundAtom, label: Label) -> Self {
        Self { target, label }
    }
}

/// Soft-margin penalties: `alpha` on misclassified positives (false
/// negatives), `beta` on misclassified negatives (false positives).
/// `(0, 0)` is plain log-likelihood boosting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostParams<T> {
    pub alpha: T,
    pub beta: T,
}

impl<T: Real> Default for CostParams<T> {
    fn default() -> Self {
        Self {
            alpha: T::zero(),
            beta: T::zero(),
        }
    }
}

impl<T: Real> CostParams<T> {
    pub fn new(alpha: T, beta: T) -> Result<Self> {
        let c = Self { alpha, beta };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.alpha.is_finite() || !self.beta.is_finite() {
            return Err(Error::Config("cost parameters must be finite".into()));
        }
        Ok(())
    }

    /// Cost of predicting `predicted` when the truth is `truth`.
    pub fn cost(&self, truth: Label, predicted: Label) -> T {
        match (truth, predicted) {
            (Label::Match, Label::MisMatch) => self.alpha,
            (Label::MisMatch, Label::Match) => self.beta,
            _ => T::zero(),
        }
    }
}

/// Bounds applied to probabilities before computing gradients.
pub const PROB_CLAMP: f64 = 1e-12;

pub fn clamp_prob<T: Real>(p: T) -> T {
    let lo = T::lit(PROB_CLAMP);
    p.max(lo).min(T::one() - lo)
}

/// Logistic link `1 / (1 + e^{-ψ})`, evaluated without overflow.
pub fn sigmoid<T: Real>(psi: T) -> T {
    if psi >= T::zero() {
        T::one() / (T::one() + (-psi).exp())
    } else {
        let e = psi.exp();
        e / (T::one() + e)
    }
}

/// Log-likelihood gradient: `I(label = Match) − p`.
pub fn gradient_standard<T: Real>(label: Label, p: T) -> T {
    label.indicator::<T>() - p
}

/// Multiplicative correction of the cost-sensitive gradient.
///
/// Match: `1 / (p + (1 − p)·e^α)`. MisMatch: `e^β / (p·e^β + (1 − p))`,
/// evaluated as `1 / (p + (1 − p)·e^{−β})`. Both go through log-space so
/// that `|α|, |β|` in the tens stay finite; a zero cost gives exactly 1.
pub fn lambda<T: Real>(label: Label, p: T, cost: CostParams<T>) -> T {
    let shift = match label {
        Label::Match => cost.alpha,
        Label::MisMatch => -cost.beta,
    };
    if shift == T::zero() {
        return T::one();
    }
    // ln(p + (1-p) e^shift)
    let log_denom = log_add_exp(p.ln(), (T::one() - p).ln() + shift);
    (-log_denom).exp()
}

/// Per-example gradient and its ingredients.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientRecord<T> {
    pub label: Label,
    pub p: T,
    pub lambda: T,
    pub delta: T,
}

/// Cost-sensitive gradient `I(label = Match) − λ·p`.
pub fn gradient_cost<T: Real>(label: Label, p: T, cost: CostParams<T>) -> GradientRecord<T> {
    let lambda = lambda(label, p, cost);
    let delta = if lambda == T::one() {
        gradient_standard(label, p)
    } else {
        label.indicator::<T>() - lambda * p
    };
    GradientRecord {
        label,
        p,
        lambda,
        delta,
    }
}

/// Contribution of one example to the penalized objective, with the
/// MisMatch potential fixed at 0:
/// positive `ψ − ln(e^ψ + e^α)`, negative `−ln(1 + e^{ψ+β})`.
/// The positive case is evaluated as `−ln(1 + e^{α−ψ})` to avoid
/// cancellation when `ψ ≫ α`.
pub fn example_objective<T: Real>(label: Label, psi: T, cost: CostParams<T>) -> T {
    match label {
        Label::Match => -softplus(cost.alpha - psi),
        Label::MisMatch => -softplus(psi + cost.beta),
    }
}
