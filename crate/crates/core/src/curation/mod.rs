//! Dataset configurations: family selection, size filtering, annotation-rule checks and
//! train/val/test or k-fold partitioning.
//!
//! Every filter returns a [`CuratedDataset`] whose [`CurationPlan`] records the steps
//! applied so far, expressed against the class ids of the original input. Filters can be
//! chained with [`CuratedDataset::apply`]; the plan composes.

mod filter;
mod split;
mod validate;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use filter::{filter_min_area, filter_min_side, remap_classes, top_k_families};
pub use split::{k_fold, split, Partition, SplitAssignment, SplitMode, DEFAULT_RATIOS};
pub use validate::{validate_annotation_rules, ValidationReport, Violation, DEFAULT_MIN_SIDE_PX};

use crate::dataset::Dataset;
use crate::error::Result;
use crate::scalar::Scalar;

/// Families kept by the reduced configuration.
pub const TOP_FAMILIES: usize = 10;
/// Smallest box area, in square pixels, kept by the size-filtered configuration.
pub const MIN_AREA_PX2: f64 = 500.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum CurationStep<T> {
    TopK { k: usize },
    RemapClasses { keep: Vec<u32> },
    MinArea { min_area_px2: T },
    MinSide { min_side_px: T },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurationPlan<T> {
    pub steps: Vec<CurationStep<T>>,
    /// Original class ids that survive, listed in new-id order.
    pub kept_class_ids: Vec<u32>,
    pub min_area_px2: Option<T>,
    pub min_side_px: Option<T>,
    /// Original class id to new class id.
    pub id_remap: BTreeMap<u32, u32>,
}

impl<T: Scalar> CurationPlan<T> {
    pub fn identity(num_classes: usize) -> Self {
        let kept_class_ids: Vec<u32> = (0..num_classes as u32).collect();
        Self {
            steps: Vec::new(),
            id_remap: kept_class_ids.iter().map(|&c| (c, c)).collect(),
            kept_class_ids,
            min_area_px2: None,
            min_side_px: None,
        }
    }

    /// Extends the plan with `step`, whose class selection `keep` is given in the
    /// current (already remapped) ids.
    fn push(&mut self, step: CurationStep<T>, keep: &[u32]) {
        self.kept_class_ids = keep.iter().map(|&c| self.kept_class_ids[c as usize]).collect();
        self.id_remap = self
            .kept_class_ids
            .iter()
            .enumerate()
            .map(|(new, &orig)| (orig, new as u32))
            .collect();
        let raise = |slot: &mut Option<T>, v: T| {
            *slot = Some(slot.map_or(v, |old| old.max(v)));
        };
        match &step {
            CurationStep::MinArea { min_area_px2 } => raise(&mut self.min_area_px2, *min_area_px2),
            CurationStep::MinSide { min_side_px } => raise(&mut self.min_side_px, *min_side_px),
            _ => {}
        }
        self.steps.push(step);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CuratedDataset<T> {
    pub dataset: Dataset<T>,
    pub plan: CurationPlan<T>,
    pub dropped_boxes: usize,
    pub dropped_images: usize,
}

/// Provenance of a curated dataset, stored next to it on disk so later curation steps
/// can extend the plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurationRecord<T> {
    pub plan: CurationPlan<T>,
    pub dropped_boxes: usize,
    pub dropped_images: usize,
}

impl<T: Scalar> CuratedDataset<T> {
    /// Wraps a dataset with an empty plan; nothing is dropped.
    pub fn identity(d: Dataset<T>) -> Self {
        Self {
            plan: CurationPlan::identity(d.class_map().len()),
            dataset: d,
            dropped_boxes: 0,
            dropped_images: 0,
        }
    }

    /// Resumes curation of a dataset that was produced under `record`, for example one
    /// re-loaded from disk.
    pub fn resume(d: Dataset<T>, record: CurationRecord<T>) -> Result<Self> {
        if record.plan.kept_class_ids.len() != d.class_map().len() {
            return Err(crate::Error::ClassMapMismatch(format!(
                "plan keeps {} classes, dataset has {}",
                record.plan.kept_class_ids.len(),
                d.class_map().len()
            )));
        }
        Ok(Self {
            dataset: d,
            plan: record.plan,
            dropped_boxes: record.dropped_boxes,
            dropped_images: record.dropped_images,
        })
    }

    pub fn record(&self) -> CurationRecord<T> {
        CurationRecord {
            plan: self.plan.clone(),
            dropped_boxes: self.dropped_boxes,
            dropped_images: self.dropped_images,
        }
    }

    /// Applies one more step to the surviving dataset.
    pub fn apply(&self, step: CurationStep<T>) -> Result<Self> {
        let out = filter::apply_step(&self.dataset, &step)?;
        let mut plan = self.plan.clone();
        plan.push(step, &out.keep);
        Ok(Self {
            dataset: out.dataset,
            plan,
            dropped_boxes: self.dropped_boxes + out.dropped_boxes,
            dropped_images: self.dropped_images + out.dropped_images,
        })
    }
}

/// Named dataset configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Preset {
    /// Every family, unfiltered.
    A,
    /// The ten most abundant families.
    B,
    /// The ten most abundant families, then boxes under 500 px² removed.
    C,
}

impl Preset {
    pub fn steps<T: Scalar>(self) -> Vec<CurationStep<T>> {
        let top = CurationStep::TopK { k: TOP_FAMILIES };
        match self {
            Preset::A => vec![],
            Preset::B => vec![top],
            Preset::C => vec![
                top,
                CurationStep::MinArea {
                    min_area_px2: T::lit(MIN_AREA_PX2),
                },
            ],
        }
    }
}

pub fn curate_preset<T: Scalar>(d: &Dataset<T>, preset: Preset) -> Result<CuratedDataset<T>> {
    preset
        .steps()
        .into_iter()
        .try_fold(CuratedDataset::identity(d.clone()), |acc, step| acc.apply(step))
}
