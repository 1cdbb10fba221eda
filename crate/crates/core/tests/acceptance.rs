//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and exits
//! non-zero if any fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use common::*;
use rand::seq::SliceRandom;
use rand::Rng;
use reefscan::curation::{
    self, curate_preset, filter_min_area, filter_min_side, k_fold, remap_classes, split, top_k_families,
    CuratedDataset, CurationStep, Preset, DEFAULT_RATIOS,
};
use reefscan::dataset::manifest::{export_dataset, load_dataset, CLASSES_FILE, MANIFEST_FILE};
use reefscan::dataset::{
    dataset_stats, parse_label_file, serialize_label_file, Dataset, FamilyClassMap, GroundTruthBox, ImageRecord,
    Prediction, PredictionSet,
};
use reefscan::eval::{f1_sweep, map_at, map_range, match_dataset, Interpolation};
use reefscan::frames::plan_frames;
use reefscan::geometry::PixelBox;
use reefscan::report::{render_comparison_table, render_family_histogram, ConfigMetrics};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        // a NaN comparison is false and so fails the check
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

const AP_TOLERANCE: f64 = 1e-9;
const WORKED_TOLERANCE: f64 = 1e-6;
const ROUND_TRIP_TOLERANCE: f64 = 1e-6;
/// Slack for comparing an average of IoU-threshold APs against one of its terms.
const ORDER_SLACK: f64 = 1e-12;

fn ap_oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = rng(0xA11CE);
    let mut classes_checked = 0;
    for case in 0..1000 {
        let inst = random_instance(&mut rng);
        let thr = if case % 2 == 0 { 0.5 } else { rng.gen_range(0.1..=1.0) };
        let oracle = oracle_match(&inst.gt, &inst.preds, thr);
        for (mode, oracle_ap) in [
            (Interpolation::Exact, oracle_ap_exact as fn(&OracleClass) -> Option<f64>),
            (Interpolation::Point101, oracle_ap_101),
        ] {
            let got = map_at(&inst.gt, &inst.preds, thr, mode).map_err(|e| e.to_string())?;
            let expected: Vec<Option<f64>> = oracle.iter().map(oracle_ap).collect();
            for (class, want) in expected.iter().enumerate() {
                let have = got.per_class[&(class as u32)];
                let ok = match (have, want) {
                    (Some(a), Some(b)) => (a - b).abs() <= AP_TOLERANCE,
                    (None, None) => true,
                    _ => false,
                };
                ensure!(
                    ok,
                    "case {case} class {class} {mode}: engine {have:?} vs oracle {want:?}"
                );
                classes_checked += 1;
            }
            let (a, b) = (got.map, oracle_map(&expected));
            ensure!(
                a.zip(b)
                    .map_or(a.is_none() && b.is_none(), |(a, b)| (a - b).abs() <= AP_TOLERANCE),
                "case {case} {mode}: mAP {a:?} vs oracle {b:?}"
            );
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure!(secs < 10.0, "took {secs:.2}s, limit 10s");
    Ok(format!(
        "1000 instances, {classes_checked} class APs within {AP_TOLERANCE:e}, {secs:.2}s"
    ))
}

fn worked_example() -> Outcome {
    let g = |cx| GroundTruthBox::new(0, cx, 0.5, 0.1, 0.1).unwrap();
    let gt = Dataset::new(
        FamilyClassMap::new(["Pomacentridae"]).unwrap(),
        vec![ImageRecord::new("frame", 100, 100, vec![g(0.1), g(0.3)])],
    )
    .unwrap();
    let px = |cx: f64| PixelBox::new(cx * 100.0 - 5.0, 45.0, cx * 100.0 + 5.0, 55.0);
    let preds = PredictionSet::new(vec![
        Prediction::new("frame", 0, px(0.1), 0.9).unwrap(),
        Prediction::new("frame", 0, px(0.8), 0.8).unwrap(),
        Prediction::new("frame", 0, px(0.3), 0.7).unwrap(),
    ]);
    let exact = map_at(&gt, &preds, 0.5, Interpolation::Exact).unwrap().map.unwrap();
    let p101 = map_at(&gt, &preds, 0.5, Interpolation::Point101).unwrap().map.unwrap();
    ensure!((exact - 0.833333).abs() <= WORKED_TOLERANCE, "exact AP {exact}");
    ensure!((p101 - 253.0 / 303.0).abs() <= WORKED_TOLERANCE, "101-point AP {p101}");
    ensure!((p101 - 0.834983).abs() <= WORKED_TOLERANCE, "101-point AP {p101}");
    Ok(format!("exact {exact:.6}, 101-point {p101:.6}"))
}

fn in_unit(v: f64) -> bool {
    (0.0..=1.0).contains(&v)
}

fn metric_orderings() -> Outcome {
    let mut rng = rng(0xA11CE);
    let mut conservation_checks = 0usize;
    for case in 0..1000 {
        let inst = random_instance(&mut rng);
        for mode in [Interpolation::Exact, Interpolation::Point101] {
            let at50 = map_at(&inst.gt, &inst.preds, 0.5, mode).unwrap();
            let range = map_range(&inst.gt, &inst.preds, 0.5, 0.95, 0.05, mode).unwrap();
            ensure!(
                range.iou_thresholds.len() == 10,
                "range has {} thresholds",
                range.iou_thresholds.len()
            );
            if let (Some(r), Some(a)) = (range.map, at50.map) {
                ensure!(
                    r <= a + ORDER_SLACK,
                    "case {case} {mode}: mAP@0.5:0.95 {r} > mAP@0.5 {a}"
                );
            }
            for r in [&at50, &range] {
                ensure!(
                    r.per_class.values().flatten().chain(r.map.iter()).all(|&v| in_unit(v)),
                    "case {case}: AP outside [0,1]"
                );
            }
        }

        let mut cutoffs: Vec<f64> = inst.preds.iter().map(|p| p.score).collect();
        cutoffs.push(0.0);
        cutoffs.sort_by(f64::total_cmp);
        cutoffs.dedup();
        for &iou_thr in &[0.5, 0.75, 0.95] {
            for &cut in &cutoffs {
                let kept = inst.preds.with_min_score(cut);
                let matches = match_dataset(&inst.gt, &kept, iou_thr).unwrap();
                for (class, m) in &matches {
                    let n_preds = kept.iter().filter(|p| p.class_id == *class).count();
                    let (tp, fp, fneg) = (m.true_positives(), m.false_positives(), m.false_negatives());
                    ensure!(
                        tp + fneg == m.n_gt,
                        "case {case}: TP {tp} + FN {fneg} != n_gt {}",
                        m.n_gt
                    );
                    ensure!(
                        tp + fp == n_preds,
                        "case {case}: TP {tp} + FP {fp} != {n_preds} predictions"
                    );
                    conservation_checks += 1;
                }
            }
        }

        if inst.gt.box_count() > 0 && !inst.preds.is_empty() {
            let s = f1_sweep(&inst.gt, &inst.preds, 0.5).unwrap();
            for row in &s.table {
                ensure!(
                    in_unit(row.precision) && in_unit(row.recall) && in_unit(row.f1),
                    "case {case}: sweep row outside [0,1]"
                );
            }
            let max = s.table.iter().map(|r| r.f1).fold(0.0, f64::max);
            ensure!(
                s.f1 == max,
                "case {case}: best F1 {} is not the table maximum {max}",
                s.f1
            );
        }
    }
    Ok(format!(
        "1000 instances, both interpolations, {conservation_checks} conservation checks"
    ))
}

fn rank_invariance() -> Outcome {
    let mut rng = rng(0xBEEF);
    let mut sweeps = 0;
    for case in 0..100 {
        let inst = random_instance(&mut rng);
        let squared = inst.preds.map_scores(|s| s * s);
        for mode in [Interpolation::Exact, Interpolation::Point101] {
            for thr in [0.5, 0.75] {
                let a = map_at(&inst.gt, &inst.preds, thr, mode).unwrap();
                let b = map_at(&inst.gt, &squared, thr, mode).unwrap();
                ensure!(a == b, "case {case}: AP changed under score² at IoU {thr} ({mode})");
            }
            let a = map_range(&inst.gt, &inst.preds, 0.5, 0.95, 0.05, mode).unwrap();
            let b = map_range(&inst.gt, &squared, 0.5, 0.95, 0.05, mode).unwrap();
            ensure!(a == b, "case {case}: mAP@0.5:0.95 changed under score² ({mode})");
        }
        if inst.gt.box_count() > 0 && !inst.preds.is_empty() {
            let a = f1_sweep(&inst.gt, &inst.preds, 0.5).unwrap();
            let b = f1_sweep(&inst.gt, &squared, 0.5).unwrap();
            ensure!(
                b.best_threshold.to_bits() == (a.best_threshold * a.best_threshold).to_bits(),
                "case {case}: threshold {} does not map to {}",
                a.best_threshold,
                b.best_threshold
            );
            ensure!(
                (a.precision, a.recall, a.f1) == (b.precision, b.recall, b.f1),
                "case {case}: P/R/F1 changed"
            );
            ensure!(
                a.per_class == b.per_class,
                "case {case}: per-class operating point changed"
            );
            sweeps += 1;
        }
    }
    Ok(format!(
        "100 instances bit-identical, {sweeps} sweeps map through s -> s²"
    ))
}

fn conserved(input: &Dataset<f64>, c: &CuratedDataset<f64>) -> bool {
    c.dataset.box_count() + c.dropped_boxes == input.box_count()
        && c.dataset.images().len() + c.dropped_images == input.images().len()
}

fn chain_matches_preset(d: &Dataset<f64>, dir: &std::path::Path) -> Result<(), String> {
    let write = |cd: &CuratedDataset<f64>, sub: &str| -> Result<std::path::PathBuf, String> {
        let root = dir.join(sub);
        export_dataset(&cd.dataset)
            .map_err(|e| e.to_string())?
            .write_to(&root)
            .map_err(|e| e.to_string())?;
        std::fs::write(
            root.join("curation.json"),
            serde_json::to_string_pretty(&cd.record()).unwrap(),
        )
        .unwrap();
        Ok(root)
    };
    let base = write(&CuratedDataset::identity(d.clone()), "input")?;
    let load = |root: &std::path::Path| {
        load_dataset::<f64>(&root.join(MANIFEST_FILE), &root.join(CLASSES_FILE))
            .unwrap()
            .quantized()
    };

    let preset = curate_preset(&load(&base), Preset::C).map_err(|e| e.to_string())?;
    let preset_dir = write(&preset, "preset")?;

    let step1 = top_k_families(&load(&base), 10).map_err(|e| e.to_string())?;
    let step1_dir = write(&step1, "step1")?;
    let record: curation::CurationRecord<f64> =
        serde_json::from_str(&std::fs::read_to_string(step1_dir.join("curation.json")).unwrap()).unwrap();
    let step2 = CuratedDataset::resume(load(&step1_dir), record)
        .and_then(|c| c.apply(CurationStep::MinArea { min_area_px2: 500.0 }))
        .map_err(|e| e.to_string())?;
    let chain_dir = write(&step2, "chain")?;

    let files = |root: &std::path::Path| {
        let mut v: Vec<(String, Vec<u8>)> = Vec::new();
        let mut stack = vec![root.to_path_buf()];
        while let Some(p) = stack.pop() {
            for e in std::fs::read_dir(&p).unwrap() {
                let e = e.unwrap().path();
                if e.is_dir() {
                    stack.push(e);
                } else {
                    v.push((
                        e.strip_prefix(root).unwrap().display().to_string(),
                        std::fs::read(&e).unwrap(),
                    ));
                }
            }
        }
        v.sort();
        v
    };
    if files(&preset_dir) != files(&chain_dir) {
        return Err("Config C preset differs from top-k 10 followed by min-area 500".into());
    }
    Ok(())
}

fn curation_conservation() -> Outcome {
    let mut rng = rng(0xC0FFEE);
    let tmp = std::env::temp_dir().join(format!("reefscan-acceptance-{}", std::process::id()));
    let mut chains = 0;
    for case in 0..300 {
        let d = random_dataset(&mut rng);
        let classes = d.class_map().len();

        let area = rng.gen_range(0.0..20_000.0);
        let a1 = filter_min_area(&d, area).unwrap();
        ensure!(conserved(&d, &a1), "case {case}: min-area lost boxes");
        let a2 = filter_min_area(&a1.dataset, area).unwrap();
        ensure!(
            a2.dataset == a1.dataset && a2.dropped_boxes == 0,
            "case {case}: min-area not idempotent"
        );

        let side = rng.gen_range(0.0..400.0);
        let s1 = filter_min_side(&d, side).unwrap();
        ensure!(conserved(&d, &s1), "case {case}: min-side lost boxes");
        ensure!(
            filter_min_side(&s1.dataset, side).unwrap().dataset == s1.dataset,
            "case {case}: min-side not idempotent"
        );

        let k = rng.gen_range(1..=classes);
        let t1 = top_k_families(&d, k).unwrap();
        ensure!(conserved(&d, &t1), "case {case}: top-k lost boxes");
        ensure!(
            top_k_families(&t1.dataset, k).unwrap().dataset == t1.dataset,
            "case {case}: top-k not idempotent"
        );
        let all = top_k_families(&d, classes).unwrap();
        ensure!(
            all.dataset == d && all.dropped_boxes == 0,
            "case {case}: top-k over all classes is not the identity"
        );

        let mut keep: Vec<u32> = (0..classes as u32).collect();
        keep.shuffle(&mut rng);
        keep.truncate(rng.gen_range(1..=classes));
        ensure!(
            conserved(&d, &remap_classes(&d, &keep).unwrap()),
            "case {case}: remap lost boxes"
        );

        if classes >= 10 {
            chain_matches_preset(&d, &tmp.join(format!("case{case}"))).map_err(|e| format!("case {case}: {e}"))?;
            chains += 1;
        }
    }
    let _ = std::fs::remove_dir_all(&tmp);
    ensure!(chains >= 50, "only {chains} datasets had ten families");
    Ok(format!(
        "300 datasets conserved and idempotent; {chains} preset-C/chain byte comparisons"
    ))
}

fn round_trips() -> Outcome {
    let mut rng = rng(0x5EED);
    let mut worst: f64 = 0.0;
    for case in 0..1000 {
        let n = rng.gen_range(0..=25);
        let boxes: Vec<GroundTruthBox<f64>> = (0..n)
            .map(|_| {
                let c = rng.gen_range(0..24);
                random_box(&mut rng, c)
            })
            .collect();
        let text = serialize_label_file(&boxes);
        let back = parse_label_file::<f64>(&text, 5312, 2988).map_err(|e| format!("case {case}: {e}"))?;
        ensure!(back.len() == boxes.len(), "case {case}: box count changed");
        for (a, b) in boxes.iter().zip(&back) {
            ensure!(a.class_id() == b.class_id(), "case {case}: class changed");
            for (x, y) in a.coords().iter().zip(b.coords()) {
                worst = worst.max((x - y).abs());
            }
        }
        ensure!(
            serialize_label_file(&back) == text,
            "case {case}: second serialization differs"
        );
    }
    ensure!(worst <= ROUND_TRIP_TOLERANCE, "max drift {worst:e}");

    for case in 0..50 {
        let d = random_dataset(&mut rng);
        let seed = rng.gen();
        let a = serde_json::to_string(&split(&d, DEFAULT_RATIOS, seed).unwrap()).unwrap();
        let b = serde_json::to_string(&split(&d, DEFAULT_RATIOS, seed).unwrap()).unwrap();
        ensure!(a == b, "case {case}: ratio split not reproducible");
        let parts = split(&d, DEFAULT_RATIOS, seed).unwrap();
        ensure!(
            parts.partition.len() == d.images().len(),
            "case {case}: split not exhaustive"
        );
        if d.images().len() >= 2 {
            let k = rng.gen_range(2..=d.images().len().min(10));
            let a = serde_json::to_string(&k_fold(&d, k, seed).unwrap()).unwrap();
            let b = serde_json::to_string(&k_fold(&d, k, seed).unwrap()).unwrap();
            ensure!(a == b, "case {case}: k-fold not reproducible");
        }
    }
    Ok(format!(
        "1000 label files, max drift {worst:.1e}; 50 split/k-fold pairs reproducible"
    ))
}

fn frame_planning() -> Outcome {
    let idx = |d: f64| -> Vec<u64> {
        plan_frames("transect.mp4", d, 30.0, 3.0)
            .unwrap()
            .entries
            .iter()
            .map(|e| e.frame_index)
            .collect()
    };
    ensure!(idx(10.0) == [0, 90, 180, 270], "10 s gave {:?}", idx(10.0));
    ensure!(idx(9.0) == [0, 90, 180], "9 s gave {:?}", idx(9.0));
    Ok("10 s -> {0,90,180,270}; 9 s -> {0,90,180}".into())
}

fn report_fidelity() -> Outcome {
    let expected_rows = [
        ("A (Full)", "24 families", ["0.533", "0.373", "0.374", "0.250"]),
        ("B (Top 10)", "10 families", ["0.530", "0.460", "0.465", "0.280"]),
        ("C-DEF", "Top 10, ≥ 500 px²", ["0.631", "0.477", "0.520", "0.328"]),
        (
            "Scratch-tuned",
            "Top 10, ≥ 500 px²",
            ["0.703", "0.401", "0.490", "0.320"],
        ),
        ("COCO-tuned", "Top 10, ≥ 500 px²", ["0.627", "0.465", "0.493", "0.318"]),
    ];
    let rows: Vec<ConfigMetrics<f64>> = expected_rows
        .iter()
        .map(|(n, d, v)| {
            let f = |i: usize| v[i].parse::<f64>().unwrap();
            ConfigMetrics::new(*n, *d, f(0), f(1), f(2), f(3)).unwrap()
        })
        .collect();
    for r in &rows {
        ensure!(r.map5095 <= r.map50, "{}: strict mAP above mAP@0.5", r.name);
    }
    let rendered = render_comparison_table(&rows).map_err(|e| e.to_string())?;
    let mut reader = csv_rows(&rendered.csv);
    ensure!(
        reader.remove(0) == ["Model", "Dataset", "Precision", "Recall", "mAP@0.5", "mAP@0.5:0.95"],
        "header"
    );
    for ((name, label, cells), got) in expected_rows.iter().zip(&reader) {
        ensure!(got[0] == *name && got[1] == *label, "row {name}: labels {got:?}");
        ensure!(got[2..] == cells[..], "row {name}: cells {:?} vs {cells:?}", &got[2..]);
    }
    for ((name, _, cells), line) in expected_rows.iter().zip(rendered.text.lines().skip(2)) {
        ensure!(line.starts_with(name), "text row {line}");
        let tail: Vec<&str> = line.split_whitespace().rev().take(4).collect();
        ensure!(tail.iter().rev().eq(cells.iter()), "text row {name}: {line}");
    }

    let mut boxes = vec![GroundTruthBox::new(1, 0.5, 0.5, 0.1, 0.1).unwrap(); 2718];
    boxes.extend(vec![GroundTruthBox::new(0, 0.5, 0.5, 0.1, 0.1).unwrap(); 3065]);
    let d = Dataset::new(
        FamilyClassMap::new(["others", "Pomacentridae"]).unwrap(),
        vec![ImageRecord::new("all", 1920, 1080, boxes)],
    )
    .unwrap();
    let csv = render_family_histogram(&dataset_stats(&d)).unwrap();
    ensure!(csv.contains("Pomacentridae,2718,0.470\n"), "histogram: {csv}");
    Ok("5 comparison rows match to 3 decimals; 47% share renders 0.470".into())
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(text.as_bytes());
    rdr.records()
        .map(|r| r.unwrap().iter().map(str::to_owned).collect())
        .collect()
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("AP oracle equivalence", ap_oracle_equivalence),
        ("worked example", worked_example),
        ("metric orderings and conservation", metric_orderings),
        ("rank invariance", rank_invariance),
        ("curation conservation", curation_conservation),
        ("round trip and reproducible splits", round_trips),
        ("frame planning", frame_planning),
        ("report fidelity", report_fidelity),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS  AC{}  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL  AC{}  {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "{} of {} acceptance criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
