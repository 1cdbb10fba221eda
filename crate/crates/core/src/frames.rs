//! Fixed-interval frame sampling plans for transect videos, and command lines for an
//! external frame extractor.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const DEFAULT_INTERVAL_S: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameEntry<T> {
    pub timestamp_s: T,
    pub frame_index: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameManifest<T> {
    pub video_id: String,
    pub fps: T,
    pub duration_s: T,
    pub interval_s: T,
    pub entries: Vec<FrameEntry<T>>,
}

fn positive<T: Scalar>(name: &str, v: T) -> Result<T> {
    if v > T::zero() && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")))
    }
}

/// Samples `t = 0, interval, 2·interval, …` while `t < duration_s`, at frame
/// `round(t · fps)` (half away from zero). Entries that land on an already-planned frame
/// are dropped.
pub fn plan_frames<T: Scalar>(
    video_id: impl Into<String>,
    duration_s: T,
    fps: T,
    interval_s: T,
) -> Result<FrameManifest<T>> {
    let duration_s = positive("duration_s", duration_s)?;
    let fps = positive("fps", fps)?;
    let interval_s = positive("interval_s", interval_s)?;
    let mut entries: Vec<FrameEntry<T>> = Vec::new();
    for i in 0u64.. {
        // multiply rather than accumulate so t carries no summed rounding error
        let t = T::from_u64(i).expect("u64 fits scalar") * interval_s;
        if t >= duration_s {
            break;
        }
        let frame_index = (t * fps)
            .round()
            .to_u64()
            .ok_or_else(|| Error::InvalidArgument(format!("frame index for t = {t} overflows")))?;
        if entries.last().is_some_and(|e| e.frame_index == frame_index) {
            continue;
        }
        entries.push(FrameEntry {
            timestamp_s: t,
            frame_index,
        });
    }
    Ok(FrameManifest {
        video_id: video_id.into(),
        fps,
        duration_s,
        interval_s,
        entries,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Piece {
    Text(String),
    Video,
    Timestamp,
    Index,
    Out,
}

/// Parsed command template. Placeholders are `{video}`, `{timestamp}`, `{index}` and
/// `{out}`; `{{` and `}}` produce literal braces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandTemplate {
    pieces: Vec<Piece>,
}

impl CommandTemplate {
    pub fn parse(template: &str) -> Result<Self> {
        let mut pieces = Vec::new();
        let mut text = String::new();
        let mut chars = template.chars().peekable();
        while let Some(c) = chars.next() {
            match c {
                '{' if chars.peek() == Some(&'{') => {
                    chars.next();
                    text.push('{');
                }
                '}' if chars.peek() == Some(&'}') => {
                    chars.next();
                    text.push('}');
                }
                '{' => {
                    let mut name = String::new();
                    loop {
                        match chars.next() {
                            Some('}') => break,
                            Some(ch) => name.push(ch),
                            None => return Err(Error::Template(format!("unclosed '{{{name}'"))),
                        }
                    }
                    let piece = match name.as_str() {
                        "video" => Piece::Video,
                        "timestamp" => Piece::Timestamp,
                        "index" => Piece::Index,
                        "out" => Piece::Out,
                        _ => return Err(Error::UnknownPlaceholder(name)),
                    };
                    if !text.is_empty() {
                        pieces.push(Piece::Text(std::mem::take(&mut text)));
                    }
                    pieces.push(piece);
                }
                '}' => return Err(Error::Template("unmatched '}'".into())),
                _ => text.push(c),
            }
        }
        if !text.is_empty() {
            pieces.push(Piece::Text(text));
        }
        Ok(Self { pieces })
    }

    fn render<T: Scalar>(&self, video: &str, entry: &FrameEntry<T>, out: &str) -> String {
        let mut s = String::new();
        for p in &self.pieces {
            match p {
                Piece::Text(t) => s.push_str(t),
                Piece::Video => s.push_str(video),
                Piece::Timestamp => s.push_str(&format!("{:.3}", entry.timestamp_s)),
                Piece::Index => s.push_str(&entry.frame_index.to_string()),
                Piece::Out => s.push_str(out),
            }
        }
        s
    }
}

/// Output image path for one frame: `<out_dir>/<video stem>_<index, 6 digits>.jpg`.
pub fn frame_output_path(out_dir: &str, video_id: &str, frame_index: u64) -> String {
    let stem = std::path::Path::new(video_id)
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or(video_id);
    let name = format!("{stem}_{frame_index:06}.jpg");
    if out_dir.is_empty() {
        name
    } else {
        format!("{}/{name}", out_dir.trim_end_matches('/'))
    }
}

/// One command per manifest entry, in manifest order.
pub fn emit_extraction_commands<T: Scalar>(m: &FrameManifest<T>, template: &str, out_dir: &str) -> Result<Vec<String>> {
    let template = CommandTemplate::parse(template)?;
    Ok(m.entries
        .iter()
        .map(|e| template.render(&m.video_id, e, &frame_output_path(out_dir, &m.video_id, e.frame_index)))
        .collect())
}
