//! Random instance generators and brute-force oracles shared by the integration tests.
//! The oracles deliberately avoid the library's evaluation code paths.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reefscan::dataset::{Dataset, FamilyClassMap, GroundTruthBox, ImageRecord, Prediction, PredictionSet};
use reefscan::geometry::PixelBox;

pub struct Instance {
    pub gt: Dataset<f64>,
    pub preds: PredictionSet<f64>,
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Up to 10 images, 5 classes and 20 predictions. Predictions are mostly jittered copies
/// of ground-truth boxes so IoUs spread across the whole `[0, 1]` range; scores sit on a
/// coarse or fine grid so ties occur.
pub fn random_instance(rng: &mut ChaCha8Rng) -> Instance {
    let n_classes = rng.gen_range(1..=5);
    let names: Vec<String> = (0..n_classes).map(|c| format!("family{c}")).collect();
    let class_map = FamilyClassMap::new(names).unwrap();
    let n_images = rng.gen_range(1..=10);
    let mut images = Vec::new();
    for i in 0..n_images {
        let (w, h) = (rng.gen_range(40..=200u32), rng.gen_range(40..=200u32));
        let n_boxes = rng.gen_range(0..=4);
        let boxes = (0..n_boxes)
            .map(|_| {
                let bw = rng.gen_range(0.05..0.5);
                let bh = rng.gen_range(0.05..0.5);
                let cx = rng.gen_range(bw / 2.0..=1.0 - bw / 2.0);
                let cy = rng.gen_range(bh / 2.0..=1.0 - bh / 2.0);
                GroundTruthBox::new(rng.gen_range(0..n_classes), cx, cy, bw, bh).unwrap()
            })
            .collect();
        images.push(ImageRecord::new(format!("img{i}"), w, h, boxes));
    }
    let gt = Dataset::new(class_map, images).unwrap();

    let coarse = rng.gen_bool(0.3);
    let n_preds = rng.gen_range(0..=20);
    let mut preds = Vec::new();
    for _ in 0..n_preds {
        let img = &gt.images()[rng.gen_range(0..gt.images().len())];
        let (fw, fh) = (f64::from(img.width_px), f64::from(img.height_px));
        let copy = !img.boxes.is_empty() && rng.gen_bool(0.7);
        let (class, bbox) = if copy {
            let g = &img.boxes[rng.gen_range(0..img.boxes.len())];
            let p: PixelBox<f64> = g.to_pixels(img.width_px, img.height_px);
            let j = rng.gen_range(0.0..0.4) * p.width().min(p.height());
            let mut jit = || rng.gen_range(-j..=j);
            let (x1, y1) = (p.x1 + jit(), p.y1 + jit());
            let (x2, y2) = ((p.x2 + jit()).max(x1 + 1.0), (p.y2 + jit()).max(y1 + 1.0));
            let class = if rng.gen_bool(0.85) {
                g.class_id()
            } else {
                rng.gen_range(0..n_classes)
            };
            (class, PixelBox::new(x1, y1, x2, y2))
        } else {
            let x1 = rng.gen_range(0.0..fw - 2.0);
            let y1 = rng.gen_range(0.0..fh - 2.0);
            let x2 = rng.gen_range(x1 + 1.0..=fw);
            let y2 = rng.gen_range(y1 + 1.0..=fh);
            (rng.gen_range(0..n_classes), PixelBox::new(x1, y1, x2, y2))
        };
        let score = if coarse {
            f64::from(rng.gen_range(1..=10u32)) / 10.0
        } else {
            f64::from(rng.gen_range(1..=1000u32)) / 1000.0
        };
        preds.push(Prediction::new(img.image_id.clone(), class, bbox, score).unwrap());
    }
    Instance {
        gt,
        preds: PredictionSet::new(preds),
    }
}

pub fn oracle_iou(a: &PixelBox<f64>, b: &PixelBox<f64>) -> f64 {
    let iw = f64::max(0.0, a.x2.min(b.x2) - a.x1.max(b.x1));
    let ih = f64::max(0.0, a.y2.min(b.y2) - a.y1.max(b.y1));
    let inter = iw * ih;
    if inter == 0.0 {
        return 0.0;
    }
    let area = |r: &PixelBox<f64>| (r.x2 - r.x1) * (r.y2 - r.y1);
    inter / (area(a) + area(b) - inter)
}

/// Ranked `(score, prediction index, is_tp)` per class plus its ground-truth count.
pub struct OracleClass {
    pub n_gt: usize,
    pub ranked: Vec<(f64, usize, bool)>,
}

/// Greedy matching done the slow way: repeatedly pick the highest-scoring unvisited
/// prediction (lowest index on ties) and scan its image's ground truth.
pub fn oracle_match(gt: &Dataset<f64>, preds: &PredictionSet<f64>, iou_thr: f64) -> Vec<OracleClass> {
    let list = preds.as_slice();
    let mut out = Vec::new();
    for class in 0..gt.class_map().len() as u32 {
        let mut n_gt = 0;
        let mut taken: Vec<Vec<bool>> = Vec::new();
        for img in gt.images() {
            let k = img.boxes.iter().filter(|b| b.class_id() == class).count();
            n_gt += k;
            taken.push(vec![false; img.boxes.len()]);
        }
        let mut visited = vec![false; list.len()];
        let mut ranked = Vec::new();
        loop {
            let mut next: Option<usize> = None;
            for (i, p) in list.iter().enumerate() {
                if visited[i] || p.class_id != class {
                    continue;
                }
                if next.is_none_or(|n| p.score > list[n].score) {
                    next = Some(i);
                }
            }
            let Some(i) = next else { break };
            visited[i] = true;
            let p = &list[i];
            let img_idx = gt.images().iter().position(|im| im.image_id == p.image_id).unwrap();
            let img = &gt.images()[img_idx];
            let mut best: Option<(usize, f64)> = None;
            for (g, b) in img.boxes.iter().enumerate() {
                if b.class_id() != class || taken[img_idx][g] {
                    continue;
                }
                let o = oracle_iou(&p.bbox, &b.to_pixels(img.width_px, img.height_px));
                if best.is_none_or(|(_, bo)| o > bo) {
                    best = Some((g, o));
                }
            }
            let tp = match best {
                Some((g, o)) if o >= iou_thr => {
                    taken[img_idx][g] = true;
                    true
                }
                _ => false,
            };
            ranked.push((p.score, i, tp));
        }
        out.push(OracleClass { n_gt, ranked });
    }
    out
}

/// Precision and recall of every ranked prefix, each counted from scratch.
fn prefixes(c: &OracleClass) -> Vec<(f64, f64)> {
    (1..=c.ranked.len())
        .map(|len| {
            let tp = c.ranked[..len].iter().filter(|r| r.2).count();
            (tp as f64 / c.n_gt as f64, tp as f64 / len as f64)
        })
        .collect()
}

/// All-point AP: every recall step weighted by the best precision at or beyond it.
pub fn oracle_ap_exact(c: &OracleClass) -> Option<f64> {
    if c.n_gt == 0 {
        return None;
    }
    let pts = prefixes(c);
    let mut ap = 0.0;
    let mut prev_recall = 0.0;
    for i in 0..pts.len() {
        let envelope = pts[i..].iter().map(|p| p.1).fold(0.0, f64::max);
        ap += (pts[i].0 - prev_recall) * envelope;
        prev_recall = pts[i].0;
    }
    Some(ap)
}

/// 101-point AP: best precision over prefixes whose recall reaches each level.
pub fn oracle_ap_101(c: &OracleClass) -> Option<f64> {
    if c.n_gt == 0 {
        return None;
    }
    let pts = prefixes(c);
    let sum: f64 = (0..=100)
        .map(|k| {
            let r = k as f64 / 100.0;
            pts.iter().filter(|p| p.0 >= r).map(|p| p.1).fold(0.0, f64::max)
        })
        .sum();
    Some(sum / 101.0)
}

pub fn oracle_map(aps: &[Option<f64>]) -> Option<f64> {
    let defined: Vec<f64> = aps.iter().flatten().copied().collect();
    (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64)
}

/// Random dataset where every class has at least one instance and every image at least
/// one box.
pub fn random_dataset(rng: &mut ChaCha8Rng) -> Dataset<f64> {
    let n_classes = rng.gen_range(1..=14u32);
    let names: Vec<String> = (0..n_classes).map(|c| format!("F{c}")).collect();
    let n_images = rng.gen_range(1..=30);
    let mut images: Vec<ImageRecord<f64>> = (0..n_images)
        .map(|i| {
            let (w, h) = (rng.gen_range(64..=2000u32), rng.gen_range(64..=2000u32));
            let n = rng.gen_range(1..=6);
            let boxes = (0..n)
                .map(|_| {
                    let c = rng.gen_range(0..n_classes);
                    random_box(rng, c)
                })
                .collect();
            ImageRecord::new(format!("im{i:03}"), w, h, boxes)
        })
        .collect();
    for c in 0..n_classes {
        let i = rng.gen_range(0..images.len());
        let b = random_box(rng, c);
        images[i].boxes.push(b);
    }
    Dataset::new(FamilyClassMap::new(names).unwrap(), images).unwrap()
}

pub fn random_box(rng: &mut ChaCha8Rng, class: u32) -> GroundTruthBox<f64> {
    let w = rng.gen_range(0.002..0.6);
    let h = rng.gen_range(0.002..0.6);
    let cx = rng.gen_range(w / 2.0..=1.0 - w / 2.0);
    let cy = rng.gen_range(h / 2.0..=1.0 - h / 2.0);
    GroundTruthBox::new(class, cx, cy, w, h).unwrap()
}
