use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::curve::{average_precision, pr_curve};
use super::matching::{match_detections, MatchResult, Scored};
use super::Interpolation;
use crate::dataset::{Dataset, PredictionSet};
use crate::error::{Error, Result};
use crate::geometry::PixelBox;
use crate::scalar::Scalar;

/// `(start, end, step)` of the strict IoU range.
pub const DEFAULT_IOU_RANGE: (f64, f64, f64) = (0.5, 0.95, 0.05);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApResult<T> {
    /// AP per class id; `None` when the class has no ground truth.
    pub per_class: BTreeMap<u32, Option<T>>,
    /// Mean of the defined per-class APs; `None` when no class has ground truth.
    pub map: Option<T>,
    pub iou_thresholds: Vec<T>,
    pub interpolation: Interpolation,
    /// Set when the predictions were cut at a confidence threshold before evaluation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_score: Option<T>,
}

fn mean_defined<T: Scalar>(values: impl Iterator<Item = Option<T>>) -> Option<T> {
    let (sum, n) = values.flatten().fold((T::zero(), 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / T::from_count(n))
}

fn check_iou_thr<T: Scalar>(thr: T) -> Result<()> {
    if thr > T::zero() && thr <= T::one() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("IoU threshold {thr} outside (0, 1]")))
    }
}

/// Matches every prediction against ground truth of its own image and class and pools
/// the results per class. Every class of the ground-truth class map gets an entry.
/// Verdicts carry the prediction's index in `preds` and the image's index in `gt`.
pub fn match_dataset<T: Scalar>(
    gt: &Dataset<T>,
    preds: &PredictionSet<T>,
    iou_thr: T,
) -> Result<BTreeMap<u32, MatchResult<T>>> {
    check_iou_thr(iou_thr)?;
    let image_index: HashMap<&str, usize> = gt
        .images()
        .iter()
        .enumerate()
        .map(|(i, img)| (img.image_id.as_str(), i))
        .collect();

    // (class, image) -> global prediction indices, in input order
    let mut pred_groups: BTreeMap<(u32, usize), Vec<usize>> = BTreeMap::new();
    for (i, p) in preds.iter().enumerate() {
        let img = *image_index
            .get(p.image_id.as_str())
            .ok_or_else(|| Error::UnknownImage(p.image_id.clone()))?;
        if !gt.class_map().contains(p.class_id) {
            return Err(Error::UnknownClass(p.class_id));
        }
        pred_groups.entry((p.class_id, img)).or_default().push(i);
    }
    let mut gt_groups: BTreeMap<(u32, usize), Vec<PixelBox<T>>> = BTreeMap::new();
    for (i, img) in gt.images().iter().enumerate() {
        for b in &img.boxes {
            gt_groups
                .entry((b.class_id(), i))
                .or_default()
                .push(b.to_pixels(img.width_px, img.height_px));
        }
    }

    let classes: Vec<u32> = gt.class_map().ids().collect();
    let pooled: Vec<(u32, MatchResult<T>)> = classes
        .par_iter()
        .map(|&class| {
            let mut images = BTreeSet::new();
            let span = (class, 0)..=(class, usize::MAX);
            images.extend(gt_groups.range(span.clone()).map(|(&(_, img), _)| img));
            images.extend(pred_groups.range(span).map(|(&(_, img), _)| img));
            let parts = images.into_iter().map(|img| {
                let gts = gt_groups.get(&(class, img)).map(Vec::as_slice).unwrap_or(&[]);
                let idx = pred_groups.get(&(class, img)).map(Vec::as_slice).unwrap_or(&[]);
                let scored: Vec<Scored<T>> = idx
                    .iter()
                    .map(|&i| {
                        let p = &preds.as_slice()[i];
                        Scored {
                            bbox: p.bbox,
                            score: p.score,
                        }
                    })
                    .collect();
                let mut m = match_detections(gts, &scored, iou_thr);
                for v in &mut m.verdicts {
                    v.prediction = idx[v.prediction];
                    v.image = img;
                }
                m
            });
            (class, MatchResult::pool(parts))
        })
        .collect();
    Ok(pooled.into_iter().collect())
}

/// Per-class AP and mAP at a single IoU threshold, pooling matches over all images.
/// Classes without ground truth get `None` and are left out of the mean.
pub fn map_at<T: Scalar>(
    gt: &Dataset<T>,
    preds: &PredictionSet<T>,
    iou_thr: T,
    mode: Interpolation,
) -> Result<ApResult<T>> {
    let matches = match_dataset(gt, preds, iou_thr)?;
    let per_class: BTreeMap<u32, Option<T>> = matches
        .into_iter()
        .map(|(class, m)| {
            let ap = if m.n_gt == 0 {
                None
            } else {
                Some(average_precision(&pr_curve(&m)?, mode))
            };
            Ok((class, ap))
        })
        .collect::<Result<_>>()?;
    Ok(ApResult {
        map: mean_defined(per_class.values().copied()),
        per_class,
        iou_thresholds: vec![iou_thr],
        interpolation: mode,
        min_score: None,
    })
}

/// `start, start + step, …` up to and including `end` (within a millionth of a step).
pub fn iou_thresholds<T: Scalar>(start: T, end: T, step: T) -> Result<Vec<T>> {
    let ok = start > T::zero() && start <= end && end <= T::one() && step > T::zero() && step.is_finite();
    if !ok {
        return Err(Error::InvalidArgument(format!(
            "empty IoU threshold set for start {start}, end {end}, step {step}"
        )));
    }
    let n = ((end - start) / step + T::lit(1e-6))
        .floor()
        .to_usize()
        .expect("threshold count is finite")
        + 1;
    Ok((0..n)
        .map(|i| (start + T::from_count(i) * step).min(T::one()))
        .collect())
}

/// AP averaged over an IoU threshold range; per-class values are averaged the same way
/// and the mAP is the mean of the averaged per-class values.
pub fn map_range<T: Scalar>(
    gt: &Dataset<T>,
    preds: &PredictionSet<T>,
    start: T,
    end: T,
    step: T,
    mode: Interpolation,
) -> Result<ApResult<T>> {
    let thresholds = iou_thresholds(start, end, step)?;
    let results = thresholds
        .par_iter()
        .map(|&t| map_at(gt, preds, t, mode))
        .collect::<Result<Vec<_>>>()?;
    let count = T::from_count(results.len());
    let per_class: BTreeMap<u32, Option<T>> = results[0]
        .per_class
        .keys()
        .map(|&class| {
            let values: Option<Vec<T>> = results.iter().map(|r| r.per_class[&class]).collect();
            let avg = values.map(|v| v.into_iter().fold(T::zero(), |a, b| a + b) / count);
            (class, avg)
        })
        .collect();
    Ok(ApResult {
        map: mean_defined(per_class.values().copied()),
        per_class,
        iou_thresholds: thresholds,
        interpolation: mode,
        min_score: None,
    })
}
