use std::collections::HashSet;

use super::{CuratedDataset, CurationStep};
use crate::dataset::{Dataset, FamilyClassMap, GroundTruthBox, ImageRecord};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub(super) struct StepOutput<T> {
    pub dataset: Dataset<T>,
    /// Input class ids that survive, in output-id order.
    pub keep: Vec<u32>,
    pub dropped_boxes: usize,
    pub dropped_images: usize,
}

pub(super) fn apply_step<T: Scalar>(d: &Dataset<T>, step: &CurationStep<T>) -> Result<StepOutput<T>> {
    let all: Vec<u32> = d.class_map().ids().collect();
    match step {
        CurationStep::TopK { k } => {
            let keep = most_abundant(d, *k)?;
            retain(d, keep, |_, _| true)
        }
        CurationStep::RemapClasses { keep } => {
            check_keep(d.class_map(), keep)?;
            retain(d, keep.clone(), |_, _| true)
        }
        CurationStep::MinArea { min_area_px2 } => {
            let thr = non_negative("min_area_px2", *min_area_px2)?;
            retain(d, all, |b, img| b.pixel_area(img.width_px, img.height_px) >= thr)
        }
        CurationStep::MinSide { min_side_px } => {
            let thr = non_negative("min_side_px", *min_side_px)?;
            retain(d, all, |b, img| b.longer_side_px(img.width_px, img.height_px) >= thr)
        }
    }
}

fn non_negative<T: Scalar>(name: &str, v: T) -> Result<T> {
    if v >= T::zero() && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidArgument(format!(
            "{name} must be a finite number >= 0, got {v}"
        )))
    }
}

/// The `k` most abundant classes, ties to the lower id, returned in ascending id order.
fn most_abundant<T: Scalar>(d: &Dataset<T>, k: usize) -> Result<Vec<u32>> {
    let counts = d.class_counts();
    let mut populated: Vec<(u32, usize)> = counts
        .iter()
        .enumerate()
        .filter(|(_, &n)| n > 0)
        .map(|(c, &n)| (c as u32, n))
        .collect();
    if k == 0 || k > populated.len() {
        return Err(Error::InvalidArgument(format!(
            "k = {k} outside 1..={} (classes with at least one instance)",
            populated.len()
        )));
    }
    populated.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut keep: Vec<u32> = populated[..k].iter().map(|&(c, _)| c).collect();
    keep.sort_unstable();
    Ok(keep)
}

fn check_keep(map: &FamilyClassMap, keep: &[u32]) -> Result<()> {
    if keep.is_empty() {
        return Err(Error::InvalidArgument("class selection is empty".into()));
    }
    let mut seen = HashSet::new();
    for &c in keep {
        if !map.contains(c) {
            return Err(Error::UnknownClass(c));
        }
        if !seen.insert(c) {
            return Err(Error::DuplicateClass(c));
        }
    }
    Ok(())
}

/// Keeps boxes of the `keep` classes (renumbered by position) that pass `accept`, then
/// drops images left without boxes.
fn retain<T: Scalar>(
    d: &Dataset<T>,
    keep: Vec<u32>,
    accept: impl Fn(&GroundTruthBox<T>, &ImageRecord<T>) -> bool,
) -> Result<StepOutput<T>> {
    let map = d.class_map();
    let mut new_id = vec![None; map.len()];
    for (i, &c) in keep.iter().enumerate() {
        new_id[c as usize] = Some(i as u32);
    }
    let class_map = FamilyClassMap::new(keep.iter().map(|&c| map.name(c).expect("kept id is valid")))?;

    let mut dropped_boxes = 0;
    let mut dropped_images = 0;
    let mut images = Vec::with_capacity(d.images().len());
    for img in d.images() {
        let boxes: Vec<GroundTruthBox<T>> = img
            .boxes
            .iter()
            .filter_map(|b| {
                let id = new_id[b.class_id() as usize]?;
                accept(b, img).then(|| b.with_class(id))
            })
            .collect();
        dropped_boxes += img.boxes.len() - boxes.len();
        if boxes.is_empty() {
            dropped_images += 1;
            continue;
        }
        images.push(ImageRecord { boxes, ..img.clone() });
    }
    Ok(StepOutput {
        dataset: Dataset::new(class_map, images)?,
        keep,
        dropped_boxes,
        dropped_images,
    })
}

/// Keeps the `k` families with the most instances (ties to the lower class id). Kept
/// families are renumbered `0..k` preserving their original relative order.
pub fn top_k_families<T: Scalar>(d: &Dataset<T>, k: usize) -> Result<CuratedDataset<T>> {
    CuratedDataset::identity(d.clone()).apply(CurationStep::TopK { k })
}

/// Drops boxes whose pixel area `(w·W)·(h·H)` is below `min_area_px2`.
pub fn filter_min_area<T: Scalar>(d: &Dataset<T>, min_area_px2: T) -> Result<CuratedDataset<T>> {
    CuratedDataset::identity(d.clone()).apply(CurationStep::MinArea { min_area_px2 })
}

/// Drops boxes whose longer pixel side is below `min_side_px`.
pub fn filter_min_side<T: Scalar>(d: &Dataset<T>, min_side_px: T) -> Result<CuratedDataset<T>> {
    CuratedDataset::identity(d.clone()).apply(CurationStep::MinSide { min_side_px })
}

/// Keeps the listed classes, renumbered `0..keep.len()` in the given order.
pub fn remap_classes<T: Scalar>(d: &Dataset<T>, keep: &[u32]) -> Result<CuratedDataset<T>> {
    CuratedDataset::identity(d.clone()).apply(CurationStep::RemapClasses { keep: keep.to_vec() })
}
