//! Detector output and its line-delimited JSON interchange format.
//!
//! Each record carries exactly `image_id`, `class_id`, `bbox` (`[x1, y1, x2, y2]` in
//! pixels) and `score`. Lines starting with `#` are header comments and are skipped.

use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::PixelBox;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction<T> {
    pub image_id: String,
    pub class_id: u32,
    pub bbox: PixelBox<T>,
    pub score: T,
}

impl<T: Scalar> Prediction<T> {
    pub fn new(image_id: impl Into<String>, class_id: u32, bbox: PixelBox<T>, score: T) -> Result<Self> {
        let p = Self {
            image_id: image_id.into(),
            class_id,
            bbox,
            score,
        };
        p.check().map_err(Error::InvalidArgument)?;
        Ok(p)
    }

    fn check(&self) -> Result<(), String> {
        if !self.bbox.is_valid() {
            return Err(format!(
                "bbox [{}, {}, {}, {}] needs x1 < x2 and y1 < y2",
                self.bbox.x1, self.bbox.y1, self.bbox.x2, self.bbox.y2
            ));
        }
        if !(self.score >= T::zero() && self.score <= T::one()) {
            return Err(format!("score {} outside [0, 1]", self.score));
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Record<T> {
    image_id: String,
    class_id: u32,
    bbox: [T; 4],
    score: T,
}

/// Ordered collection of predictions; order is the tie-break for equal scores.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PredictionSet<T> {
    predictions: Vec<Prediction<T>>,
}

impl<T: Scalar> PredictionSet<T> {
    pub fn new(predictions: Vec<Prediction<T>>) -> Self {
        Self { predictions }
    }

    pub fn len(&self) -> usize {
        self.predictions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.predictions.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Prediction<T>> {
        self.predictions.iter()
    }

    pub fn as_slice(&self) -> &[Prediction<T>] {
        &self.predictions
    }

    /// Keeps predictions scoring at least `min_score`, preserving order.
    pub fn with_min_score(&self, min_score: T) -> Self {
        Self::new(
            self.predictions
                .iter()
                .filter(|p| p.score >= min_score)
                .cloned()
                .collect(),
        )
    }

    /// Applies `f` to every score. `f` must map `[0, 1]` into `[0, 1]`.
    pub fn map_scores(&self, f: impl Fn(T) -> T) -> Self {
        Self::new(
            self.predictions
                .iter()
                .map(|p| Prediction {
                    score: f(p.score),
                    ..p.clone()
                })
                .collect(),
        )
    }

    /// Serializes to the interchange format, one record per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for p in &self.predictions {
            let rec = Record {
                image_id: p.image_id.clone(),
                class_id: p.class_id,
                bbox: [p.bbox.x1, p.bbox.y1, p.bbox.x2, p.bbox.y2],
                score: p.score,
            };
            out.push_str(&serde_json::to_string(&rec).expect("prediction record serializes"));
            out.push('\n');
        }
        out
    }
}

impl<T> IntoIterator for PredictionSet<T> {
    type Item = Prediction<T>;
    type IntoIter = std::vec::IntoIter<Prediction<T>>;

    fn into_iter(self) -> Self::IntoIter {
        self.predictions.into_iter()
    }
}

impl<'a, T> IntoIterator for &'a PredictionSet<T> {
    type Item = &'a Prediction<T>;
    type IntoIter = std::slice::Iter<'a, Prediction<T>>;

    fn into_iter(self) -> Self::IntoIter {
        self.predictions.iter()
    }
}

fn parse_record<T: Scalar>(line: &str) -> Result<Prediction<T>, String> {
    let rec: Record<T> = serde_json::from_str(line).map_err(|e| e.to_string())?;
    let [x1, y1, x2, y2] = rec.bbox;
    let p = Prediction {
        image_id: rec.image_id,
        class_id: rec.class_id,
        bbox: PixelBox::new(x1, y1, x2, y2),
        score: rec.score,
    };
    p.check()?;
    Ok(p)
}

/// Parses an interchange stream, preserving record order.
pub fn parse_predictions<T: Scalar>(reader: impl BufRead) -> Result<PredictionSet<T>> {
    let mut predictions = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::Prediction {
            line: i + 1,
            reason: e.to_string(),
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let p = parse_record(trimmed).map_err(|reason| Error::Prediction { line: i + 1, reason })?;
        predictions.push(p);
    }
    Ok(PredictionSet::new(predictions))
}

/// Convenience wrapper over [`parse_predictions`] for in-memory text.
pub fn parse_predictions_str<T: Scalar>(text: &str) -> Result<PredictionSet<T>> {
    parse_predictions(text.as_bytes())
}
