//! Dataset curation and detection evaluation for family-level reef-fish monitoring.
//!
//! The numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases at the crate
//! root fix it to `f64`, with `*32` variants for single precision.

pub mod curation;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod frames;
pub mod geometry;
pub mod report;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use dataset::{
    dataset_stats, parse_class_map, parse_label_file, parse_predictions, serialize_label_file, FamilyClassMap,
};
pub use geometry::iou;

pub type PixelBox = geometry::PixelBox<f64>;
pub type GroundTruthBox = dataset::GroundTruthBox<f64>;
pub type ImageRecord = dataset::ImageRecord<f64>;
pub type Dataset = dataset::Dataset<f64>;
pub type Prediction = dataset::Prediction<f64>;
pub type PredictionSet = dataset::PredictionSet<f64>;
pub type FamilyHistogram = dataset::FamilyHistogram<f64>;
pub type CurationPlan = curation::CurationPlan<f64>;
pub type CuratedDataset = curation::CuratedDataset<f64>;
pub type ValidationReport = curation::ValidationReport<f64>;
pub type FrameManifest = frames::FrameManifest<f64>;
pub type MatchResult = eval::MatchResult<f64>;
pub type PrCurve = eval::PrCurve<f64>;
pub type ApResult = eval::ApResult<f64>;
pub type ThresholdSweepResult = eval::ThresholdSweepResult<f64>;
pub type ConfigMetrics = report::ConfigMetrics<f64>;

pub type PixelBox32 = geometry::PixelBox<f32>;
pub type Dataset32 = dataset::Dataset<f32>;
pub type PredictionSet32 = dataset::PredictionSet<f32>;
pub type ApResult32 = eval::ApResult<f32>;
pub type ThresholdSweepResult32 = eval::ThresholdSweepResult<f32>;
