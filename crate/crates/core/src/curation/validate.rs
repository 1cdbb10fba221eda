use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default minimum size, applied to the longer pixel side of a box.
pub const DEFAULT_MIN_SIDE_PX: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation<T> {
    pub image_id: String,
    pub box_index: usize,
    pub class_id: u32,
    pub width_px: T,
    pub height_px: T,
    pub longer_side_px: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport<T> {
    pub min_side_px: T,
    pub checked_boxes: usize,
    pub violations: Vec<Violation<T>>,
}

impl<T> ValidationReport<T> {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Lists every box whose longer pixel side falls short of `min_side_px`. A box exactly
/// at the threshold passes.
pub fn validate_annotation_rules<T: Scalar>(d: &Dataset<T>, min_side_px: T) -> Result<ValidationReport<T>> {
    if min_side_px < T::zero() || !min_side_px.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "min_side_px must be a finite number >= 0, got {min_side_px}"
        )));
    }
    let mut violations = Vec::new();
    for img in d.images() {
        for (box_index, b) in img.boxes.iter().enumerate() {
            let (w, h) = b.pixel_size(img.width_px, img.height_px);
            let longer = w.max(h);
            if longer < min_side_px {
                violations.push(Violation {
                    image_id: img.image_id.clone(),
                    box_index,
                    class_id: b.class_id(),
                    width_px: w,
                    height_px: h,
                    longer_side_px: longer,
                });
            }
        }
    }
    Ok(ValidationReport {
        min_side_px,
        checked_boxes: d.box_count(),
        violations,
    })
}
