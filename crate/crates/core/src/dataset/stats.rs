use serde::Serialize;

use super::Dataset;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyCount<T> {
    pub class_id: u32,
    pub family: String,
    pub count: usize,
    /// `count / total`.
    pub share: T,
}

/// Instances per family, most abundant first.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyHistogram<T> {
    pub families: Vec<FamilyCount<T>>,
    pub total: usize,
    pub image_count: usize,
}

/// Per-family instance counts and shares. Families with no instances are omitted; ties
/// in count are ordered by class id.
pub fn dataset_stats<T: Scalar>(d: &Dataset<T>) -> FamilyHistogram<T> {
    let counts = d.class_counts();
    let total: usize = counts.iter().sum();
    let mut families: Vec<FamilyCount<T>> = d
        .class_map()
        .entries()
        .zip(&counts)
        .filter(|(_, &n)| n > 0)
        .map(|((class_id, name), &count)| FamilyCount {
            class_id,
            family: name.to_owned(),
            count,
            share: T::from_count(count) / T::from_count(total),
        })
        .collect();
    families.sort_by(|a, b| b.count.cmp(&a.count).then(a.class_id.cmp(&b.class_id)));
    FamilyHistogram {
        families,
        total,
        image_count: d.images().len(),
    }
}
