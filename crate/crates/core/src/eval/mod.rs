//! Detection evaluation: greedy IoU matching, precision-recall curves, AP/mAP at one or
//! several IoU thresholds, and the confidence sweep for the F1-optimal operating point.

mod curve;
mod map;
mod matching;
mod sweep;

use serde::{Deserialize, Serialize};

pub use curve::{average_precision, pr_curve, PrCurve, PrPoint};
pub use map::{iou_thresholds, map_at, map_range, match_dataset, ApResult, DEFAULT_IOU_RANGE};
pub use matching::{match_detections, MatchResult, Scored, Verdict};
pub use sweep::{f1_score, f1_sweep, ClassPrf, SweepRow, ThresholdSweepResult};

/// How precision is interpolated when integrating a PR curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Interpolation {
    /// Area under the monotone precision envelope over every recall change.
    #[serde(rename = "exact")]
    Exact,
    /// Mean envelope precision at recall 0.00, 0.01, …, 1.00.
    #[default]
    #[serde(rename = "101-point")]
    Point101,
}

impl std::fmt::Display for Interpolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Interpolation::Exact => "exact",
            Interpolation::Point101 => "101-point",
        })
    }
}

impl std::str::FromStr for Interpolation {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "exact" => Ok(Interpolation::Exact),
            "101-point" | "101" => Ok(Interpolation::Point101),
            other => Err(crate::Error::InvalidArgument(format!(
                "unknown interpolation '{other}', expected 'exact' or '101-point'"
            ))),
        }
    }
}
