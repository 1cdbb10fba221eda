//! Image-level partitioning, stratified by each image's dominant family.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const DEFAULT_RATIOS: [f64; 3] = [0.7, 0.2, 0.1];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Partition {
    Train,
    Val,
    Test,
    Fold(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SplitMode {
    Ratios { train: f64, val: f64, test: f64 },
    KFold { k: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitAssignment {
    #[serde(flatten)]
    pub mode: SplitMode,
    pub seed: u64,
    pub partition: BTreeMap<String, Partition>,
}

impl SplitAssignment {
    pub fn sizes(&self) -> BTreeMap<Partition, usize> {
        let mut out = BTreeMap::new();
        for p in self.partition.values() {
            *out.entry(*p).or_default() += 1;
        }
        out
    }

    /// Image ids assigned to `part`, in id order.
    pub fn members(&self, part: Partition) -> Vec<&str> {
        self.partition
            .iter()
            .filter(|(_, &p)| p == part)
            .map(|(id, _)| id.as_str())
            .collect()
    }
}

/// Apportions `n` items by `ratios` with largest-remainder rounding; remainder ties go
/// to the earlier slot.
pub fn largest_remainder(ratios: &[f64], n: usize) -> Vec<usize> {
    if ratios.is_empty() {
        return Vec::new();
    }
    let total: f64 = ratios.iter().sum();
    let quotas: Vec<f64> = ratios.iter().map(|r| r / total * n as f64).collect();
    // quotas within 1e-9 of an integer count as that integer
    let mut sizes: Vec<usize> = quotas.iter().map(|q| (q + 1e-9).floor() as usize).collect();
    let rem: Vec<i64> = quotas
        .iter()
        .zip(&sizes)
        .map(|(q, &s)| ((q - s as f64).max(0.0) * 1e6).round() as i64)
        .collect();
    let mut order: Vec<usize> = (0..ratios.len()).collect();
    order.sort_by(|&a, &b| rem[b].cmp(&rem[a]).then(a.cmp(&b)));
    while sizes.iter().sum::<usize>() > n {
        let i = *order
            .iter()
            .rev()
            .find(|&&i| sizes[i] > 0)
            .expect("some slot is non-empty");
        sizes[i] -= 1;
    }
    let mut short = n - sizes.iter().sum::<usize>();
    for &i in order.iter().cycle() {
        if short == 0 {
            break;
        }
        sizes[i] += 1;
        short -= 1;
    }
    sizes
}

/// Image indices shuffled by `seed`, then stably grouped by dominant family (images
/// without boxes last).
fn stratified_order<T: Scalar>(d: &Dataset<T>, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..d.images().len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let key = |i: &usize| d.images()[*i].dominant_class().unwrap_or(u32::MAX);
    order.sort_by_key(key);
    order
}

/// Ratio split into train/val/test. Partition sizes are the largest-remainder
/// rounding of `ratio · N`; images are dealt in stratified order to whichever partition
/// lags furthest behind its target share.
pub fn split<T: Scalar>(d: &Dataset<T>, ratios: [f64; 3], seed: u64) -> Result<SplitAssignment> {
    if ratios.iter().any(|r| !r.is_finite() || *r < 0.0) {
        return Err(Error::InvalidArgument(format!("ratios must be >= 0, got {ratios:?}")));
    }
    let sum: f64 = ratios.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!("ratios sum to {sum}, expected 1")));
    }
    let n = d.images().len();
    let sizes = largest_remainder(&ratios, n);
    let parts = [Partition::Train, Partition::Val, Partition::Test];
    let mut assigned = [0usize; 3];
    let mut partition = BTreeMap::new();
    for (pos, idx) in stratified_order(d, seed).into_iter().enumerate() {
        // deficit of slot p after pos+1 items, scaled by n
        let deficit = |p: usize| (sizes[p] * (pos + 1)) as i128 - (assigned[p] * n) as i128;
        let p = (0..3)
            .filter(|&p| assigned[p] < sizes[p])
            .max_by(|&a, &b| deficit(a).cmp(&deficit(b)).then(b.cmp(&a)))
            .expect("capacity remains while images remain");
        assigned[p] += 1;
        partition.insert(d.images()[idx].image_id.clone(), parts[p]);
    }
    Ok(SplitAssignment {
        mode: SplitMode::Ratios {
            train: ratios[0],
            val: ratios[1],
            test: ratios[2],
        },
        seed,
        partition,
    })
}

/// `k` folds dealt round-robin over the stratified order, so sizes differ by at most one.
pub fn k_fold<T: Scalar>(d: &Dataset<T>, k: usize, seed: u64) -> Result<SplitAssignment> {
    let n = d.images().len();
    if k < 2 || k > n {
        return Err(Error::InvalidArgument(format!("k = {k} outside 2..={n}")));
    }
    let partition = stratified_order(d, seed)
        .into_iter()
        .enumerate()
        .map(|(pos, idx)| (d.images()[idx].image_id.clone(), Partition::Fold(pos % k)))
        .collect();
    Ok(SplitAssignment {
        mode: SplitMode::KFold { k },
        seed,
        partition,
    })
}
