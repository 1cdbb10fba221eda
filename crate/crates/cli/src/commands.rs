use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use anyhow::{bail, Context, Result};
use reefscan::curation::{
    k_fold, split, validate_annotation_rules, CuratedDataset, CurationRecord, CurationStep, DEFAULT_RATIOS,
};
use reefscan::dataset::manifest::export_dataset;
use reefscan::eval::{f1_sweep, map_at, map_range, DEFAULT_IOU_RANGE};
use reefscan::frames::{emit_extraction_commands, plan_frames};
use reefscan::report::{
    parse_comparison_csv, render_comparison_table, render_family_histogram, render_per_class_report,
};
use reefscan::{dataset_stats, parse_predictions, ApResult, ConfigMetrics, Error, PredictionSet, ThresholdSweepResult};
use serde_json::{json, Value};

use crate::io::{self, CURATION_RECORD_FILE};
use crate::{Command, DatasetArgs, EvalArgs};

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Stats { data, out } => {
            let d = io::load(&data)?;
            io::emit(out.as_deref(), &render_family_histogram(&dataset_stats(&d))?)
        }
        Command::Curate {
            data,
            out,
            config,
            top_k,
            keep,
            min_area,
            min_side,
        } => {
            let steps = match config {
                Some(preset) => reefscan::curation::Preset::from(preset).steps(),
                None => {
                    let mut steps = Vec::new();
                    steps.extend(top_k.map(|k| CurationStep::TopK { k: k as usize }));
                    steps.extend(keep.map(|keep| CurationStep::RemapClasses { keep }));
                    steps.extend(min_area.map(|min_area_px2| CurationStep::MinArea { min_area_px2 }));
                    steps.extend(min_side.map(|min_side_px| CurationStep::MinSide { min_side_px }));
                    steps
                }
            };
            curate(&data, &out, steps)
        }
        Command::Validate { data, min_side, out } => {
            let d = io::load(&data)?;
            let report = validate_annotation_rules(&d, min_side)?;
            eprintln!(
                "{} of {} boxes have a longer side under {min_side} px",
                report.violations.len(),
                report.checked_boxes
            );
            io::emit(out.as_deref(), &json_text(&report)?)
        }
        Command::Split {
            data,
            seed,
            ratios,
            k_fold: folds,
            out,
        } => {
            let d = io::load(&data)?;
            let assignment = match (folds, ratios) {
                (Some(k), _) => k_fold(&d, k as usize, seed)?,
                (None, Some(r)) => split(&d, [r[0], r[1], r[2]], seed)?,
                (None, None) => split(&d, DEFAULT_RATIOS, seed)?,
            };
            io::emit(out.as_deref(), &json_text(&assignment)?)
        }
        Command::PlanFrames {
            video,
            duration,
            fps,
            interval,
            out,
            template,
            commands,
            frames_dir,
        } => {
            let manifest = plan_frames(video, duration, fps, interval)?;
            if let (Some(template), Some(path)) = (template, commands) {
                let mut lines = emit_extraction_commands(&manifest, &template, &frames_dir)?.join("\n");
                lines.push('\n');
                io::write_file(&path, &lines)?;
            }
            io::emit(out.as_deref(), &json_text(&manifest)?)
        }
        Command::Evaluate {
            data,
            eval,
            name,
            dataset_label,
            out,
            per_class,
        } => evaluate(&data, &eval, name, dataset_label, out.as_deref(), per_class.as_deref()),
        Command::Sweep {
            data,
            pred,
            iou,
            out,
            table,
        } => {
            let d = io::load(&data)?;
            let preds = load_predictions(&pred)?;
            let sweep = f1_sweep(&d, &preds, iou)?;
            if let Some(path) = table {
                io::write_file(&path, &sweep_csv(&sweep)?)?;
            }
            io::emit(out.as_deref(), &json_text(&sweep)?)
        }
        Command::Report { inputs, csv, text } => {
            let mut rows = Vec::new();
            for path in &inputs {
                rows.extend(read_metrics(path)?);
            }
            let table = render_comparison_table(&rows)?;
            if let Some(path) = csv.as_deref() {
                io::write_file(path, &table.csv)?;
            }
            match text.as_deref() {
                Some(path) => io::write_file(path, &table.text),
                None if csv.is_none() => io::emit(None, &table.text),
                None => Ok(()),
            }
        }
    }
}

fn json_text<S: serde::Serialize>(value: &S) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn curate(data: &DatasetArgs, out: &Path, steps: Vec<CurationStep<f64>>) -> Result<()> {
    // quantize up front so a dataset written and re-read between steps curates the same
    let d = io::load(data)?.quantized();
    let record_path = data.gt.parent().unwrap_or(Path::new(".")).join(CURATION_RECORD_FILE);
    let mut curated = if record_path.exists() {
        let record: CurationRecord<f64> = serde_json::from_str(&io::read(&record_path)?)
            .with_context(|| format!("parsing {}", record_path.display()))?;
        CuratedDataset::resume(d, record)?
    } else {
        CuratedDataset::identity(d)
    };
    for step in steps {
        curated = curated.apply(step)?;
    }
    eprintln!(
        "kept {} images and {} boxes in {} families; dropped {} boxes and {} images so far",
        curated.dataset.images().len(),
        curated.dataset.box_count(),
        curated.dataset.class_map().len(),
        curated.dropped_boxes,
        curated.dropped_images
    );
    let files = export_dataset(&curated.dataset)?;
    io::write_dataset_dir(out, &files, &[(CURATION_RECORD_FILE, json_text(&curated.record())?)])
}

fn load_predictions(path: &Path) -> Result<PredictionSet> {
    let file = File::open(path).with_context(|| format!("reading {}", path.display()))?;
    parse_predictions(BufReader::new(file)).with_context(|| format!("parsing predictions {}", path.display()))
}

fn evaluate(
    data: &DatasetArgs,
    eval: &EvalArgs,
    name: String,
    dataset_label: String,
    out: Option<&Path>,
    per_class: Option<&Path>,
) -> Result<()> {
    let d = io::load(data)?;
    let preds = load_predictions(&eval.pred)?;
    let (start, end, step) = DEFAULT_IOU_RANGE;
    let at = map_at(&d, &preds, eval.iou, eval.interpolation)?;
    let range = map_range(&d, &preds, start, end, step, eval.interpolation)?;
    let sweep = match f1_sweep(&d, &preds, eval.iou) {
        Ok(s) => Some(s),
        Err(Error::NoPredictions) => None,
        Err(e) => return Err(e.into()),
    };

    // mAP is also reported on the predictions kept at the F1-optimal threshold, the
    // operating point a deployed detector would run at
    let at_operating_point = match &sweep {
        Some(s) => {
            let kept = preds.with_min_score(s.best_threshold);
            let tag = |mut r: ApResult| {
                r.min_score = Some(s.best_threshold);
                r
            };
            Some(json!({
                "min_score": s.best_threshold,
                "map_at_iou": tag(map_at(&d, &kept, eval.iou, eval.interpolation)?),
                "map_range": tag(map_range(&d, &kept, start, end, step, eval.interpolation)?),
            }))
        }
        None => None,
    };

    let (precision, recall) = sweep.as_ref().map_or((0.0, 0.0), |s| (s.precision, s.recall));
    let metrics = ConfigMetrics::new(
        name,
        dataset_label,
        precision,
        recall,
        at.map.unwrap_or(0.0),
        range.map.unwrap_or(0.0),
    )?;
    if let Some(path) = per_class {
        io::write_file(path, &render_per_class_report(d.class_map(), &at, sweep.as_ref())?)?;
    }
    let report = json!({
        "iou_threshold": eval.iou,
        "interpolation": eval.interpolation,
        "map_at_iou": at,
        "map_range": range,
        "sweep": sweep,
        "at_operating_point": at_operating_point,
        "config_metrics": metrics,
    });
    eprintln!(
        "mAP@{} = {}  mAP@0.5:0.95 = {}  ({})",
        eval.iou,
        fmt_metric(at.map),
        fmt_metric(range.map),
        eval.interpolation
    );
    io::emit(out, &json_text(&report)?)
}

fn fmt_metric(v: Option<f64>) -> String {
    v.map_or_else(|| reefscan::report::NOT_AVAILABLE.to_owned(), |v| format!("{v:.3}"))
}

fn sweep_csv(s: &ThresholdSweepResult) -> Result<String> {
    let mut text = String::from("threshold,precision,recall,f1\n");
    for r in &s.table {
        text.push_str(&format!(
            "{},{:.6},{:.6},{:.6}\n",
            r.threshold, r.precision, r.recall, r.f1
        ));
    }
    Ok(text)
}

/// Comparison rows from a comparison CSV, a metrics record, a list of records or an
/// `evaluate` report.
fn read_metrics(path: &Path) -> Result<Vec<ConfigMetrics>> {
    let text = io::read(path)?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        return parse_comparison_csv(&text).with_context(|| format!("parsing {}", path.display()));
    }
    let value: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let value = match value {
        Value::Object(mut obj) if obj.contains_key("config_metrics") => {
            obj.remove("config_metrics").unwrap_or_default()
        }
        other => other,
    };
    let rows: Vec<ConfigMetrics> = match value {
        Value::Array(_) => serde_json::from_value(value),
        _ => serde_json::from_value(value).map(|m| vec![m]),
    }
    .with_context(|| format!("{} holds no metrics records", path.display()))?;
    for row in &rows {
        row.validate()?;
    }
    if rows.is_empty() {
        bail!("{} holds no metrics records", path.display());
    }
    Ok(rows)
}
