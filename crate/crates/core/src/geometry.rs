//! Pixel-space boxes and overlap.

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Axis-aligned box in pixel coordinates, corners `(x1, y1)` top-left and `(x2, y2)`
/// bottom-right.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PixelBox<T> {
    pub x1: T,
    pub y1: T,
    pub x2: T,
    pub y2: T,
}

impl<T: Scalar> PixelBox<T> {
    pub fn new(x1: T, y1: T, x2: T, y2: T) -> Self {
        Self { x1, y1, x2, y2 }
    }

    /// True when both extents are strictly positive and every corner is finite.
    pub fn is_valid(&self) -> bool {
        [self.x1, self.y1, self.x2, self.y2].iter().all(|v| v.is_finite()) && self.x1 < self.x2 && self.y1 < self.y2
    }

    pub fn width(&self) -> T {
        self.x2 - self.x1
    }

    pub fn height(&self) -> T {
        self.y2 - self.y1
    }

    pub fn area(&self) -> T {
        self.width() * self.height()
    }

    pub fn intersection_area(&self, other: &Self) -> T {
        let w = self.x2.min(other.x2) - self.x1.max(other.x1);
        let h = self.y2.min(other.y2) - self.y1.max(other.y1);
        if w <= T::zero() || h <= T::zero() {
            T::zero()
        } else {
            w * h
        }
    }

    /// Intersection over union, in `[0, 1]`; zero for disjoint or edge-touching boxes.
    pub fn iou(&self, other: &Self) -> T {
        let inter = self.intersection_area(other);
        if inter <= T::zero() {
            return T::zero();
        }
        let union = self.area() + other.area() - inter;
        (inter / union).min(T::one())
    }
}

/// Free-function form of [`PixelBox::iou`].
pub fn iou<T: Scalar>(a: &PixelBox<T>, b: &PixelBox<T>) -> T {
    a.iou(b)
}
