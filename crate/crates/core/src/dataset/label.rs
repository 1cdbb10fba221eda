//! Center-normalized label files: one `class cx cy w h` line per box.

use crate::error::{Error, Result};
use crate::geometry::PixelBox;
use crate::scalar::Scalar;

/// Normalized values this far outside `[0, 1]` are clamped; anything further is rejected.
pub const NORMALIZED_TOLERANCE: f64 = 1e-6;

/// Annotated box in center format, coordinates normalized by the image size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundTruthBox<T> {
    class_id: u32,
    cx: T,
    cy: T,
    w: T,
    h: T,
}

impl<T: Scalar> GroundTruthBox<T> {
    pub fn new(class_id: u32, cx: T, cy: T, w: T, h: T) -> Result<Self> {
        Self::checked(class_id, cx, cy, w, h).map_err(Error::InvalidArgument)
    }

    fn checked(class_id: u32, cx: T, cy: T, w: T, h: T) -> Result<Self, String> {
        let tol = T::lit(NORMALIZED_TOLERANCE);
        let clamp = |name: &str, v: T| -> Result<T, String> {
            if !v.is_finite() || v < -tol || v > T::one() + tol {
                Err(format!("{name} = {v} outside [0, 1]"))
            } else {
                Ok(v.max(T::zero()).min(T::one()))
            }
        };
        let cx = clamp("cx", cx)?;
        let cy = clamp("cy", cy)?;
        let w = clamp("w", w)?;
        let h = clamp("h", h)?;
        if w <= T::zero() {
            return Err("zero width".into());
        }
        if h <= T::zero() {
            return Err("zero height".into());
        }
        let two = T::lit(2.0);
        for (axis, c, extent) in [("x", cx, w), ("y", cy, h)] {
            let lo = c - extent / two;
            let hi = c + extent / two;
            if lo < -tol || hi > T::one() + tol {
                return Err(format!("box {axis}-extent [{lo}, {hi}] leaves the image"));
            }
        }
        Ok(Self { class_id, cx, cy, w, h })
    }

    /// Converts a pixel-space box back to normalized center format.
    pub fn from_pixels(class_id: u32, b: &PixelBox<T>, width_px: u32, height_px: u32) -> Result<Self> {
        let (iw, ih) = dims::<T>(width_px, height_px)?;
        let two = T::lit(2.0);
        Self::new(
            class_id,
            (b.x1 + b.x2) / two / iw,
            (b.y1 + b.y2) / two / ih,
            (b.x2 - b.x1) / iw,
            (b.y2 - b.y1) / ih,
        )
    }

    pub fn class_id(&self) -> u32 {
        self.class_id
    }

    pub fn cx(&self) -> T {
        self.cx
    }

    pub fn cy(&self) -> T {
        self.cy
    }

    pub fn w(&self) -> T {
        self.w
    }

    pub fn h(&self) -> T {
        self.h
    }

    pub fn coords(&self) -> [T; 4] {
        [self.cx, self.cy, self.w, self.h]
    }

    pub fn with_class(self, class_id: u32) -> Self {
        Self { class_id, ..self }
    }

    /// Pixel-space corners, clamped to the image rectangle.
    pub fn to_pixels(&self, width_px: u32, height_px: u32) -> PixelBox<T> {
        let iw = T::from_u32(width_px).expect("u32 fits scalar");
        let ih = T::from_u32(height_px).expect("u32 fits scalar");
        let two = T::lit(2.0);
        let clamp = |v: T, hi: T| v.max(T::zero()).min(hi);
        PixelBox::new(
            clamp((self.cx - self.w / two) * iw, iw),
            clamp((self.cy - self.h / two) * ih, ih),
            clamp((self.cx + self.w / two) * iw, iw),
            clamp((self.cy + self.h / two) * ih, ih),
        )
    }

    /// `(w·W, h·H)` in pixels.
    pub fn pixel_size(&self, width_px: u32, height_px: u32) -> (T, T) {
        let iw = T::from_u32(width_px).expect("u32 fits scalar");
        let ih = T::from_u32(height_px).expect("u32 fits scalar");
        (self.w * iw, self.h * ih)
    }

    pub fn pixel_area(&self, width_px: u32, height_px: u32) -> T {
        let (w, h) = self.pixel_size(width_px, height_px);
        w * h
    }

    /// Longer pixel side, the quantity the minimum-size annotation rule is checked on.
    pub fn longer_side_px(&self, width_px: u32, height_px: u32) -> T {
        let (w, h) = self.pixel_size(width_px, height_px);
        w.max(h)
    }

    /// The box as it reads back after one pass through [`serialize_label_file`].
    pub fn quantized(&self) -> Self {
        let line = format_line(self);
        parse_line::<T>(&line).expect("serialized label line re-parses")
    }
}

fn dims<T: Scalar>(width_px: u32, height_px: u32) -> Result<(T, T)> {
    if width_px == 0 || height_px == 0 {
        return Err(Error::InvalidArgument(format!(
            "image dimensions must be positive, got {width_px}x{height_px}"
        )));
    }
    Ok((
        T::from_u32(width_px).expect("u32 fits scalar"),
        T::from_u32(height_px).expect("u32 fits scalar"),
    ))
}

fn parse_line<T: Scalar>(line: &str) -> Result<GroundTruthBox<T>, String> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() != 5 {
        return Err(format!("expected 5 fields 'class cx cy w h', found {}", fields.len()));
    }
    let class: i64 = fields[0]
        .parse()
        .map_err(|_| format!("class id '{}' is not an integer", fields[0]))?;
    if class < 0 {
        return Err(format!("negative class id {class}"));
    }
    let class_id = u32::try_from(class).map_err(|_| format!("class id {class} too large"))?;
    let mut v = [T::zero(); 4];
    for (slot, raw) in v.iter_mut().zip(&fields[1..]) {
        let parsed: f64 = raw.parse().map_err(|_| format!("'{raw}' is not a number"))?;
        *slot = T::lit(parsed);
    }
    GroundTruthBox::checked(class_id, v[0], v[1], v[2], v[3])
}

/// Parses a label file for an image of `width_px × height_px` pixels.
///
/// Blank lines are skipped; every other line must be `class_id cx cy w h`.
pub fn parse_label_file<T: Scalar>(text: &str, width_px: u32, height_px: u32) -> Result<Vec<GroundTruthBox<T>>> {
    dims::<T>(width_px, height_px)?;
    let mut boxes = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let b = parse_line(line).map_err(|reason| Error::Label { line: i + 1, reason })?;
        boxes.push(b);
    }
    Ok(boxes)
}

fn format_line<T: Scalar>(b: &GroundTruthBox<T>) -> String {
    format!("{} {:.6} {:.6} {:.6} {:.6}", b.class_id, b.cx, b.cy, b.w, b.h)
}

/// One line per box with six fixed decimals, lines joined by `\n` (no trailing newline).
pub fn serialize_label_file<T: Scalar>(boxes: &[GroundTruthBox<T>]) -> String {
    boxes.iter().map(format_line).collect::<Vec<_>>().join("\n")
}
