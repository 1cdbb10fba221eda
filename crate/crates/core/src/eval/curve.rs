use serde::{Deserialize, Serialize};

use super::matching::{sort_verdicts, MatchResult};
use super::Interpolation;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrPoint<T> {
    pub recall: T,
    pub precision: T,
    /// Confidence of the prediction that produced this point.
    pub score: T,
}

/// Cumulative precision and recall after each prediction, in ranked order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrCurve<T> {
    pub points: Vec<PrPoint<T>>,
    pub n_gt: usize,
}

/// Builds the PR curve for one class from its pooled matches.
///
/// Fails with [`Error::NoGroundTruth`] when there are predictions but no ground truth,
/// since recall is undefined.
pub fn pr_curve<T: Scalar>(matches: &MatchResult<T>) -> Result<PrCurve<T>> {
    if matches.n_gt == 0 && !matches.verdicts.is_empty() {
        return Err(Error::NoGroundTruth);
    }
    let mut verdicts = matches.verdicts.clone();
    sort_verdicts(&mut verdicts);
    let n_gt = T::from_count(matches.n_gt);
    let mut tp = 0usize;
    let points = verdicts
        .iter()
        .enumerate()
        .map(|(i, v)| {
            tp += usize::from(v.is_tp());
            PrPoint {
                recall: T::from_count(tp) / n_gt,
                precision: T::from_count(tp) / T::from_count(i + 1),
                score: v.score,
            }
        })
        .collect();
    Ok(PrCurve {
        points,
        n_gt: matches.n_gt,
    })
}

/// Running maximum of precision taken from the end of the curve.
fn envelope<T: Scalar>(curve: &PrCurve<T>) -> Vec<T> {
    let mut env: Vec<T> = curve.points.iter().map(|p| p.precision).collect();
    for i in (0..env.len().saturating_sub(1)).rev() {
        env[i] = env[i].max(env[i + 1]);
    }
    env
}

/// Area under the interpolated PR curve. An empty curve scores zero.
pub fn average_precision<T: Scalar>(curve: &PrCurve<T>, mode: Interpolation) -> T {
    if curve.points.is_empty() {
        return T::zero();
    }
    let env = envelope(curve);
    match mode {
        Interpolation::Exact => {
            let mut prev = T::zero();
            let mut area = T::zero();
            for (p, &e) in curve.points.iter().zip(&env) {
                area = area + (p.recall - prev) * e;
                prev = p.recall;
            }
            area
        }
        Interpolation::Point101 => {
            let hundred = T::from_count(100);
            let sum = (0..=100).fold(T::zero(), |acc, k| {
                let r = T::from_count(k) / hundred;
                let idx = curve.points.partition_point(|p| p.recall < r);
                acc + env.get(idx).copied().unwrap_or_else(T::zero)
            });
            sum / T::from_count(101)
        }
    }
}
