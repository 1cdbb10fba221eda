use serde::{Deserialize, Serialize};

use crate::geometry::PixelBox;
use crate::scalar::Scalar;

/// A detection box with its confidence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scored<T> {
    pub bbox: PixelBox<T>,
    pub score: T,
}

/// Outcome for one prediction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdict<T> {
    /// Index of the prediction in its input sequence.
    pub prediction: usize,
    /// Image the prediction belongs to; zero for single-image matching.
    pub image: usize,
    pub score: T,
    /// Index of the matched ground-truth box within its image and class.
    pub matched_gt: Option<usize>,
    /// Best IoU against the ground truth still unmatched when this prediction was
    /// processed (zero if none remained).
    pub iou: T,
}

impl<T> Verdict<T> {
    pub fn is_tp(&self) -> bool {
        self.matched_gt.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchResult<T> {
    /// Ordered by descending score, ties by prediction index.
    pub verdicts: Vec<Verdict<T>>,
    pub n_gt: usize,
}

impl<T: Scalar> MatchResult<T> {
    pub fn true_positives(&self) -> usize {
        self.verdicts.iter().filter(|v| v.is_tp()).count()
    }

    pub fn false_positives(&self) -> usize {
        self.verdicts.len() - self.true_positives()
    }

    /// Ground-truth boxes no prediction claimed.
    pub fn false_negatives(&self) -> usize {
        let mut claimed: Vec<(usize, usize)> = self
            .verdicts
            .iter()
            .filter_map(|v| v.matched_gt.map(|g| (v.image, g)))
            .collect();
        claimed.sort_unstable();
        claimed.dedup();
        self.n_gt - claimed.len()
    }

    /// Merges per-image results into one, re-sorted globally so the outcome does not
    /// depend on the order the parts arrive in.
    pub fn pool(parts: impl IntoIterator<Item = MatchResult<T>>) -> Self {
        let mut verdicts = Vec::new();
        let mut n_gt = 0;
        for part in parts {
            n_gt += part.n_gt;
            verdicts.extend(part.verdicts);
        }
        sort_verdicts(&mut verdicts);
        Self { verdicts, n_gt }
    }
}

pub(crate) fn sort_verdicts<T: Scalar>(verdicts: &mut [Verdict<T>]) {
    verdicts.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .expect("scores are finite")
            .then(a.prediction.cmp(&b.prediction))
    });
}

/// Greedy matching of one image's predictions to its ground truth for a single class.
///
/// Predictions are visited by descending score (ties by input order). Each takes the
/// still-unmatched ground-truth box with the highest IoU (ties to the lower index) when
/// that IoU reaches `iou_thr`; otherwise it is a false positive. `iou_thr` is expected
/// in `(0, 1]`.
pub fn match_detections<T: Scalar>(gts: &[PixelBox<T>], preds: &[Scored<T>], iou_thr: T) -> MatchResult<T> {
    let mut order: Vec<usize> = (0..preds.len()).collect();
    order.sort_by(|&a, &b| {
        preds[b]
            .score
            .partial_cmp(&preds[a].score)
            .expect("scores are finite")
            .then(a.cmp(&b))
    });
    let mut taken = vec![false; gts.len()];
    let verdicts = order
        .into_iter()
        .map(|p| {
            let mut best: Option<(usize, T)> = None;
            for (g, gt) in gts.iter().enumerate() {
                if taken[g] {
                    continue;
                }
                let o = preds[p].bbox.iou(gt);
                if best.is_none_or(|(_, b)| o > b) {
                    best = Some((g, o));
                }
            }
            let (matched_gt, iou) = match best {
                Some((g, o)) if o >= iou_thr => {
                    taken[g] = true;
                    (Some(g), o)
                }
                Some((_, o)) => (None, o),
                None => (None, T::zero()),
            };
            Verdict {
                prediction: p,
                image: 0,
                score: preds[p].score,
                matched_gt,
                iou,
            }
        })
        .collect();
    MatchResult {
        verdicts,
        n_gt: gts.len(),
    }
}
