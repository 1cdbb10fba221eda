//! Images, annotated boxes, family class maps and detector predictions.

mod class_map;
mod label;
pub mod manifest;
mod prediction;
mod stats;

use std::collections::HashSet;

pub use class_map::{parse_class_map, FamilyClassMap};
pub use label::{parse_label_file, serialize_label_file, GroundTruthBox, NORMALIZED_TOLERANCE};
pub use prediction::{parse_predictions, parse_predictions_str, Prediction, PredictionSet};
pub use stats::{dataset_stats, FamilyCount, FamilyHistogram};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct ImageRecord<T> {
    pub image_id: String,
    pub width_px: u32,
    pub height_px: u32,
    pub boxes: Vec<GroundTruthBox<T>>,
    pub source_video: Option<String>,
    pub timestamp_s: Option<T>,
}

impl<T: Scalar> ImageRecord<T> {
    pub fn new(image_id: impl Into<String>, width_px: u32, height_px: u32, boxes: Vec<GroundTruthBox<T>>) -> Self {
        Self {
            image_id: image_id.into(),
            width_px,
            height_px,
            boxes,
            source_video: None,
            timestamp_s: None,
        }
    }

    /// Family with the most boxes in this image, ties to the lower class id.
    pub fn dominant_class(&self) -> Option<u32> {
        let mut counts = std::collections::BTreeMap::<u32, usize>::new();
        for b in &self.boxes {
            *counts.entry(b.class_id()).or_default() += 1;
        }
        counts
            .into_iter()
            .max_by(|(ca, na), (cb, nb)| na.cmp(nb).then(cb.cmp(ca)))
            .map(|(c, _)| c)
    }

    fn check(&self) -> Result<(), String> {
        if self.image_id.is_empty() {
            return Err("empty image_id".into());
        }
        if self.width_px == 0 || self.height_px == 0 {
            return Err(format!(
                "image '{}' has non-positive size {}x{}",
                self.image_id, self.width_px, self.height_px
            ));
        }
        if let Some(t) = self.timestamp_s {
            if t < T::zero() || !t.is_finite() {
                return Err(format!("image '{}' has invalid timestamp {t}", self.image_id));
            }
        }
        for (i, b) in self.boxes.iter().enumerate() {
            if b.pixel_area(self.width_px, self.height_px).partial_cmp(&T::zero()) != Some(std::cmp::Ordering::Greater)
            {
                return Err(format!("image '{}' box {i} has zero pixel area", self.image_id));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    class_map: FamilyClassMap,
    images: Vec<ImageRecord<T>>,
}

impl<T: Scalar> Dataset<T> {
    /// Validates that image ids are unique and every box references a known class.
    pub fn new(class_map: FamilyClassMap, images: Vec<ImageRecord<T>>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(images.len());
        for img in &images {
            img.check().map_err(Error::InvalidDataset)?;
            if !seen.insert(img.image_id.as_str()) {
                return Err(Error::InvalidDataset(format!("duplicate image_id '{}'", img.image_id)));
            }
            if let Some(b) = img.boxes.iter().find(|b| !class_map.contains(b.class_id())) {
                return Err(Error::InvalidDataset(format!(
                    "image '{}' references class {} outside the class map",
                    img.image_id,
                    b.class_id()
                )));
            }
        }
        Ok(Self { class_map, images })
    }

    pub fn class_map(&self) -> &FamilyClassMap {
        &self.class_map
    }

    pub fn images(&self) -> &[ImageRecord<T>] {
        &self.images
    }

    pub fn image(&self, image_id: &str) -> Option<&ImageRecord<T>> {
        self.images.iter().find(|i| i.image_id == image_id)
    }

    pub fn box_count(&self) -> usize {
        self.images.iter().map(|i| i.boxes.len()).sum()
    }

    /// Instance count per class id, indexed by class id.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.class_map.len()];
        for b in self.images.iter().flat_map(|i| &i.boxes) {
            counts[b.class_id() as usize] += 1;
        }
        counts
    }

    /// Every box replaced by what a serialize/parse cycle of its label file yields.
    pub fn quantized(&self) -> Self {
        let images = self
            .images
            .iter()
            .map(|img| ImageRecord {
                boxes: img.boxes.iter().map(GroundTruthBox::quantized).collect(),
                ..img.clone()
            })
            .collect();
        Self {
            class_map: self.class_map.clone(),
            images,
        }
    }

    pub fn into_parts(self) -> (FamilyClassMap, Vec<ImageRecord<T>>) {
        (self.class_map, self.images)
    }
}
