use crate::boost::{CostParams, Label};
use crate::error::{Error, Result};
use crate::factstore::{parse_atoms, Universe};
use crate::real::Real;

use super::{ConfusionMatrix, Evaluation, ScoredExample, Summary};

/// Marker written for a rate whose denominator is zero.
pub const UNDEFINED: &str = "NA";

const CSV_HEADER: &str = "name,alpha,beta,tp,fp,tn,fn,fpr,fnr,precision,recall,accuracy,auc_roc";

/// One configuration in a report.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow<T> {
    pub name: String,
    pub cost: CostParams<T>,
    pub eval: Evaluation<T>,
}

fn rate<T: Real>(v: Option<T>, digits: usize) -> String {
    match v {
        Some(x) => format!("{x:.digits$}"),
        None => UNDEFINED.to_string(),
    }
}

/// Aligned plain-text table with columns FPR, FNR, Precision, Recall,
/// Accuracy and AUC-ROC, three decimals.
pub fn render_report_table<T: Real>(rows: &[ReportRow<T>]) -> String {
    let header = [
        "Configuration",
        "FPR",
        "FNR",
        "Precision",
        "Recall",
        "Accuracy",
        "AUC-ROC",
    ];
    let body: Vec<[String; 7]> = rows
        .iter()
        .map(|r| {
            let s = &r.eval.summary;
            [
                r.name.clone(),
                rate(s.fpr, 3),
                rate(s.fnr, 3),
                rate(s.precision, 3),
                rate(s.recall, 3),
                rate(s.accuracy, 3),
                format!("{:.3}", r.eval.auc),
            ]
        })
        .collect();
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in &body {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: Vec<&str>| -> String {
        let mut out = String::new();
        for (i, (cell, w)) in cells.iter().zip(&widths).enumerate() {
            if i == 0 {
                out.push_str(&format!("{cell:<w$}"));
            } else {
                out.push_str(&format!(" | {cell:>w$}"));
            }
        }
        out.push('\n');
        out
    };
    let mut out = line(header.to_vec());
    let rule: usize = widths.iter().sum::<usize>() + 3 * (widths.len() - 1);
    out.push_str(&"-".repeat(rule));
    out.push('\n');
    for row in &body {
        out.push_str(&line(row.iter().map(String::as_str).collect()));
    }
    out
}

/// One CSV row per configuration, full precision.
pub fn render_report_csv<T: Real>(rows: &[ReportRow<T>]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    let full = |v: Option<T>| v.map_or_else(|| UNDEFINED.to_string(), |x| x.to_string());
    for r in rows {
        let (c, s) = (&r.eval.confusion, &r.eval.summary);
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.name,
            r.cost.alpha,
            r.cost.beta,
            c.tp,
            c.fp,
            c.tn,
            c.fn_,
            full(s.fpr),
            full(s.fnr),
            full(s.precision),
            full(s.recall),
            full(s.accuracy),
            r.eval.auc
        ));
    }
    out
}

pub fn parse_report_csv<T: Real>(text: &str) -> Result<Vec<ReportRow<T>>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == CSV_HEADER => {}
        _ => return Err(Error::parse(1, "missing report header")),
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        let n = i + 1;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 13 {
            return Err(Error::parse(
                n,
                format!("expected 13 fields, found {}", f.len()),
            ));
        }
        let num = |k: usize| -> Result<T> {
            f[k].parse()
                .map_err(|_| Error::parse(n, format!("bad number `{}`", f[k])))
        };
        let count = |k: usize| -> Result<usize> {
            f[k].parse()
                .map_err(|_| Error::parse(n, format!("bad count `{}`", f[k])))
        };
        let opt = |k: usize| -> Result<Option<T>> {
            if f[k] == UNDEFINED {
                Ok(None)
            } else {
                num(k).map(Some)
            }
        };
        rows.push(ReportRow {
            name: f[0].to_string(),
            cost: CostParams {
                alpha: num(1)?,
                beta: num(2)?,
            },
            eval: Evaluation {
                confusion: ConfusionMatrix {
                    tp: count(3)?,
                    fp: count(4)?,
                    tn: count(5)?,
                    fn_: count(6)?,
                },
                summary: Summary {
                    fpr: opt(7)?,
                    fnr: opt(8)?,
                    precision: opt(9)?,
                    recall: opt(10)?,
                    accuracy: opt(11)?,
                },
                auc: num(12)?,
            },
        });
    }
    Ok(rows)
}

/// Scored examples as `atom<TAB>label<TAB>score` lines.
pub fn render_scores<T: Real>(scored: &[ScoredExample<T>], universe: &Universe) -> String {
    let mut out = String::new();
    for s in scored {
        out.push_str(&format!(
            "{}\t{}\t{}\n",
            universe.render_atom(&s.target),
            s.label.bit(),
            s.score
        ));
    }
    out
}

pub fn parse_scores<T: Real>(text: &str, universe: &mut Universe) -> Result<Vec<ScoredExample<T>>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 3 {
            return Err(Error::parse(n, "expected `atom<TAB>label<TAB>score`"));
        }
        let target = parse_atoms(&format!("{}.", f[0]), universe)
            .map_err(|e| match e {
                Error::Parse { msg, .. } => Error::parse(n, msg),
                other => other,
            })?
            .pop()
            .ok_or_else(|| Error::parse(n, "missing atom"))?;
        let label = match f[1] {
            "0" => Label::MisMatch,
            "1" => Label::Match,
            other => {
                return Err(Error::parse(
                    n,
                    format!("label must be 0 or 1, got `{other}`"),
                ))
            }
        };
        let score: T = f[2]
            .parse()
            .map_err(|_| Error::parse(n, format!("bad score `{}`", f[2])))?;
        if !(score >= T::zero() && score <= T::one()) {
            return Err(Error::parse(n, format!("score {score} outside [0, 1]")));
        }
        out.push(ScoredExample {
            target,
            label,
            score,
        });
    }
    Ok(out)
}
