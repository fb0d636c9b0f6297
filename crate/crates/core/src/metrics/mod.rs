//! Classification metrics: confusion counts at a threshold, the derived
//! rates, rank-based AUC-ROC, cost sweeps and report files.

mod report;

use rayon::prelude::*;

use crate::boost::{BoostedModel, CostParams, Label, LabeledExample};
use crate::error::{Error, Result};
use crate::factstore::{FactBase, GroundAtom};
use crate::real::Real;

pub use report::{
    parse_report_csv, parse_scores, render_report_csv, render_report_table, render_scores,
    ReportRow, UNDEFINED,
};

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredExample<T> {
    pub target: GroundAtom,
    pub label: Label,
    pub score: T,
}

/// Scores examples with `model` in parallel; output order follows input.
pub fn score_examples<T: Real>(
    model: &BoostedModel<T>,
    examples: &[LabeledExample],
    fb: &FactBase,
) -> Result<Vec<ScoredExample<T>>> {
    examples
        .par_iter()
        .map(|e| {
            let score = model.predict_prob(&e.target, fb)?;
            Ok(ScoredExample {
                target: e.target.clone(),
                label: e.label,
                score,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// Counts with `Match` predicted iff `score >= threshold`.
pub fn confusion<T: Real>(scored: &[ScoredExample<T>], threshold: T) -> Result<ConfusionMatrix> {
    if scored.is_empty() {
        return Err(Error::Evaluation("no scored examples".into()));
    }
    if !(threshold >= T::zero() && threshold <= T::one()) {
        return Err(Error::Evaluation(format!(
            "threshold {threshold} outside [0, 1]"
        )));
    }
    let mut cm = ConfusionMatrix::default();
    for s in scored {
        match (s.label, s.score >= threshold) {
            (Label::Match, true) => cm.tp += 1,
            (Label::Match, false) => cm.fn_ += 1,
            (Label::MisMatch, true) => cm.fp += 1,
            (Label::MisMatch, false) => cm.tn += 1,
        }
    }
    Ok(cm)
}

/// Rates derived from a confusion matrix; `None` where the ratio is 0/0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary<T> {
    pub fpr: Option<T>,
    pub fnr: Option<T>,
    pub precision: Option<T>,
    pub recall: Option<T>,
    pub accuracy: Option<T>,
}

fn ratio<T: Real>(num: usize, den: usize) -> Option<T> {
    (den > 0).then(|| T::from_usize_lossy(num) / T::from_usize_lossy(den))
}

pub fn summary<T: Real>(cm: &ConfusionMatrix) -> Summary<T> {
    Summary {
        fpr: ratio(cm.fp, cm.fp + cm.tn),
        fnr: ratio(cm.fn_, cm.fn_ + cm.tp),
        precision: ratio(cm.tp, cm.tp + cm.fp),
        recall: ratio(cm.tp, cm.tp + cm.fn_),
        accuracy: ratio(cm.tp + cm.tn, cm.total()),
    }
}

/// Mann-Whitney AUC from average ranks over a sorted copy; ties count half.
pub fn auc_roc<T: Real>(scored: &[ScoredExample<T>]) -> Result<T> {
    let n_pos = scored.iter().filter(|s| s.label == Label::Match).count();
    let n_neg = scored.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::Evaluation(
            "AUC-ROC needs both positive and negative examples".into(),
        ));
    }
    if let Some(s) = scored.iter().find(|s| s.score.is_nan()) {
        return Err(Error::Evaluation(format!(
            "score {} is not a number",
            s.score
        )));
    }
    let mut order: Vec<(T, bool)> = scored
        .iter()
        .map(|s| (s.score, s.label == Label::Match))
        .collect();
    order.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("no NaN scores"));
    // Sum of positive ranks (1-based), ties sharing their average rank.
    // Doubled to stay in integers: a tie block over ranks i+1..=j has
    // average rank (i+1+j)/2.
    let mut twice_rank_sum: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && order[j].0 == order[i].0 {
            j += 1;
        }
        let pos_in_block = order[i..j].iter().filter(|(_, p)| *p).count() as u128;
        twice_rank_sum += pos_in_block * (i as u128 + 1 + j as u128);
        i = j;
    }
    let (p, n) = (n_pos as u128, n_neg as u128);
    // U = R - P(P+1)/2, doubled.
    let twice_u = twice_rank_sum - p * (p + 1);
    Ok(T::lit(twice_u as f64) / T::lit((2 * p * n) as f64))
}

/// Metrics of one configuration: threshold summary plus AUC.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation<T> {
    pub confusion: ConfusionMatrix,
    pub summary: Summary<T>,
    pub auc: T,
}

pub fn evaluate<T: Real>(scored: &[ScoredExample<T>], threshold: T) -> Result<Evaluation<T>> {
    let confusion = confusion(scored, threshold)?;
    Ok(Evaluation {
        confusion,
        summary: summary(&confusion),
        auc: auc_roc(scored)?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow<T> {
    pub cost: CostParams<T>,
    pub eval: Evaluation<T>,
}

/// Evaluates every `(alpha, beta)` grid point, alphas outermost. `run`
/// trains and scores one configuration; rows come back in grid order.
pub fn sweep<T, F>(alphas: &[T], betas: &[T], threshold: T, run: F) -> Result<Vec<SweepRow<T>>>
where
    T: Real,
    F: Fn(CostParams<T>) -> Result<Vec<ScoredExample<T>>> + Sync,
{
    if alphas.is_empty() || betas.is_empty() {
        return Err(Error::Config("sweep grids must be nonempty".into()));
    }
    let grid: Vec<CostParams<T>> = alphas
        .iter()
        .flat_map(|&alpha| betas.iter().map(move |&beta| CostParams { alpha, beta }))
        .collect();
    grid.par_iter()
        .map(|&cost| {
            let scored = run(cost)?;
            Ok(SweepRow {
                cost,
                eval: evaluate(&scored, threshold)?,
            })
        })
        .collect()
}
