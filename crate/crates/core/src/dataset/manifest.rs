//! Dataset manifests: one JSON record per line naming an image, its pixel size and its
//! label file (relative to the manifest's directory).
//!
//! ```text
//! {"image_id":"t01_0003","width_px":5312,"height_px":2988,"label_path":"labels/t01_0003.txt","source_video":"t01.mp4","timestamp_s":9.0}
//! ```

use std::fs;
use std::path::{Component, Path};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{parse_class_map, parse_label_file, serialize_label_file, Dataset, ImageRecord};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const MANIFEST_FILE: &str = "manifest.jsonl";
pub const CLASSES_FILE: &str = "classes.txt";
pub const LABELS_DIR: &str = "labels";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestRecord<T> {
    pub image_id: String,
    pub width_px: u32,
    pub height_px: u32,
    /// Absent for images without annotations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_video: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp_s: Option<T>,
}

pub fn parse_manifest<T: Scalar>(text: &str) -> Result<Vec<ManifestRecord<T>>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let rec: ManifestRecord<T> = serde_json::from_str(line).map_err(|e| Error::Manifest {
            line: i + 1,
            reason: e.to_string(),
        })?;
        if rec.width_px == 0 || rec.height_px == 0 {
            return Err(Error::Manifest {
                line: i + 1,
                reason: format!("image '{}' has zero width or height", rec.image_id),
            });
        }
        out.push(rec);
    }
    Ok(out)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Loads a dataset from a manifest and a class-map file. Label files are parsed in
/// parallel; image order follows the manifest.
pub fn load_dataset<T: Scalar>(manifest_path: &Path, classes_path: &Path) -> Result<Dataset<T>> {
    let class_map = parse_class_map(&read(classes_path)?)?;
    let records: Vec<ManifestRecord<T>> = parse_manifest(&read(manifest_path)?)?;
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let images = records
        .into_par_iter()
        .map(|rec| {
            let boxes = match &rec.label_path {
                Some(rel) => {
                    let path = base.join(rel);
                    parse_label_file(&read(&path)?, rec.width_px, rec.height_px).map_err(|e| match e {
                        Error::Label { line, reason } => Error::Label {
                            line,
                            reason: format!("{}: {reason}", path.display()),
                        },
                        other => other,
                    })?
                }
                None => Vec::new(),
            };
            Ok(ImageRecord {
                image_id: rec.image_id,
                width_px: rec.width_px,
                height_px: rec.height_px,
                boxes,
                source_video: rec.source_video,
                timestamp_s: rec.timestamp_s,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(class_map, images)
}

/// In-memory rendering of a dataset as manifest, class map and label files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetFiles {
    pub manifest: String,
    pub classes: String,
    /// `(path relative to the dataset root, contents)`.
    pub labels: Vec<(String, String)>,
}

impl DatasetFiles {
    /// Writes every file below `root`, creating directories as needed.
    pub fn write_to(&self, root: &Path) -> Result<()> {
        let put = |rel: &str, contents: &str| -> Result<()> {
            let path = root.join(rel);
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
            fs::write(&path, contents).map_err(|e| Error::io(&path, e))
        };
        put(MANIFEST_FILE, &self.manifest)?;
        put(CLASSES_FILE, &self.classes)?;
        for (rel, contents) in &self.labels {
            put(rel, contents)?;
        }
        Ok(())
    }
}

fn label_rel_path(image_id: &str) -> Result<String> {
    let p = Path::new(image_id);
    let safe = p.components().all(|c| matches!(c, Component::Normal(_)));
    if !safe || image_id.contains('\\') {
        return Err(Error::InvalidDataset(format!(
            "image_id '{image_id}' cannot be used as a relative label path"
        )));
    }
    Ok(format!("{LABELS_DIR}/{image_id}.txt"))
}

/// Renders `d` in the on-disk layout: `manifest.jsonl`, `classes.txt` and one label file
/// per image under `labels/`.
pub fn export_dataset<T: Scalar>(d: &Dataset<T>) -> Result<DatasetFiles> {
    let mut manifest = String::new();
    let mut labels = Vec::with_capacity(d.images().len());
    for img in d.images() {
        let rel = label_rel_path(&img.image_id)?;
        let rec = ManifestRecord {
            image_id: img.image_id.clone(),
            width_px: img.width_px,
            height_px: img.height_px,
            label_path: Some(rel.clone()),
            source_video: img.source_video.clone(),
            timestamp_s: img.timestamp_s,
        };
        manifest.push_str(&serde_json::to_string(&rec)?);
        manifest.push('\n');
        let mut body = serialize_label_file(&img.boxes);
        if !body.is_empty() {
            body.push('\n');
        }
        labels.push((rel, body));
    }
    Ok(DatasetFiles {
        manifest,
        classes: d.class_map().to_text(),
        labels,
    })
}
