//! Confidence-threshold sweep for the macro-F1 optimal operating point.
//!
//! Matching visits predictions in descending confidence and never revisits a decision,
//! so the matches of the predictions scoring at least `t` are exactly the leading
//! verdicts of the full matching. The sweep reads every candidate off one matching pass.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::map::match_dataset;
use super::matching::MatchResult;
use crate::dataset::{Dataset, PredictionSet};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `2PR / (P + R)`, zero when both are zero.
pub fn f1_score<T: Scalar>(precision: T, recall: T) -> T {
    let denom = precision + recall;
    if denom > T::zero() {
        T::lit(2.0) * precision * recall / denom
    } else {
        T::zero()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow<T> {
    pub threshold: T,
    pub precision: T,
    pub recall: T,
    pub f1: T,
}

/// One class at the chosen threshold. Recall is undefined without ground truth and
/// precision is undefined for such a class when it keeps no predictions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassPrf<T> {
    pub n_gt: usize,
    pub tp: usize,
    pub fp: usize,
    pub precision: Option<T>,
    pub recall: Option<T>,
    pub f1: Option<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSweepResult<T> {
    pub iou_threshold: T,
    pub best_threshold: T,
    /// Macro-averaged precision at `best_threshold`.
    pub precision: T,
    /// Macro-averaged recall at `best_threshold`.
    pub recall: T,
    pub f1: T,
    pub per_class: BTreeMap<u32, ClassPrf<T>>,
    /// One row per distinct prediction score, highest threshold first.
    pub table: Vec<SweepRow<T>>,
}

fn class_prf<T: Scalar>(n_gt: usize, tp: usize, fp: usize) -> ClassPrf<T> {
    let kept = tp + fp;
    let precision = if kept > 0 {
        Some(T::from_count(tp) / T::from_count(kept))
    } else if n_gt > 0 {
        Some(T::zero())
    } else {
        None
    };
    let recall = (n_gt > 0).then(|| T::from_count(tp) / T::from_count(n_gt));
    let f1 = match (precision, recall) {
        (Some(p), Some(r)) => Some(f1_score(p, r)),
        _ => None,
    };
    ClassPrf {
        n_gt,
        tp,
        fp,
        precision,
        recall,
        f1,
    }
}

/// Macro precision over classes with a defined precision, macro recall over classes
/// with ground truth.
fn macro_row<T: Scalar>(threshold: T, classes: &[ClassPrf<T>]) -> SweepRow<T> {
    let mean = |values: Vec<T>| {
        if values.is_empty() {
            T::zero()
        } else {
            let n = T::from_count(values.len());
            values.into_iter().fold(T::zero(), |a, b| a + b) / n
        }
    };
    let precision = mean(classes.iter().filter_map(|c| c.precision).collect());
    let recall = mean(classes.iter().filter_map(|c| c.recall).collect());
    SweepRow {
        threshold,
        precision,
        recall,
        f1: f1_score(precision, recall),
    }
}

/// Per-class counts when only predictions scoring at least `threshold` are kept.
fn counts_at<T: Scalar>(m: &MatchResult<T>, threshold: T) -> ClassPrf<T> {
    let kept = m.verdicts.partition_point(|v| v.score >= threshold);
    let tp = m.verdicts[..kept].iter().filter(|v| v.is_tp()).count();
    class_prf(m.n_gt, tp, kept - tp)
}

/// Sweeps every distinct prediction score as a confidence cutoff and returns the one
/// maximizing macro-F1 (ties to the higher threshold).
pub fn f1_sweep<T: Scalar>(gt: &Dataset<T>, preds: &PredictionSet<T>, iou_thr: T) -> Result<ThresholdSweepResult<T>> {
    if gt.box_count() == 0 {
        return Err(Error::EmptyGroundTruth);
    }
    if preds.is_empty() {
        return Err(Error::NoPredictions);
    }
    let matches = match_dataset(gt, preds, iou_thr)?;
    // classes with neither ground truth nor predictions take no part
    let active: Vec<(u32, &MatchResult<T>)> = matches
        .iter()
        .filter(|(_, m)| m.n_gt > 0 || !m.verdicts.is_empty())
        .map(|(&c, m)| (c, m))
        .collect();

    let mut candidates: Vec<T> = preds.iter().map(|p| p.score).collect();
    candidates.sort_by(|a, b| b.partial_cmp(a).expect("scores are finite"));
    candidates.dedup();

    let table: Vec<SweepRow<T>> = candidates
        .iter()
        .map(|&t| {
            let classes: Vec<ClassPrf<T>> = active.iter().map(|(_, m)| counts_at(m, t)).collect();
            macro_row(t, &classes)
        })
        .collect();

    let best = table
        .iter()
        .copied()
        .reduce(|best, row| if row.f1 > best.f1 { row } else { best })
        .expect("at least one candidate");
    let per_class = active.iter().map(|&(c, m)| (c, counts_at(m, best.threshold))).collect();

    Ok(ThresholdSweepResult {
        iou_threshold: iou_thr,
        best_threshold: best.threshold,
        precision: best.precision,
        recall: best.recall,
        f1: best.f1,
        per_class,
        table,
    })
}
