//! Coverage arithmetic: mapped/total ratios and per-POS lemma counts.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::pos::{PosCategory, PosTag};

/// An exact mapped/total count pair.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ratio {
    pub mapped: u64,
    pub total: u64,
}

impl Ratio {
    pub fn new(mapped: u64, total: u64) -> Self {
        Ratio { mapped, total }
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    /// Exact fraction; 0 for an empty total.
    pub fn fraction(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.mapped as f64 / self.total as f64
        }
    }

    /// Whole percent, rounded half up; 0 for an empty total.
    pub fn percent(&self) -> u64 {
        if self.total == 0 {
            return 0;
        }
        let num = self.mapped as u128 * 200 + self.total as u128;
        (num / (2 * self.total as u128)) as u64
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagRow {
    pub tag: PosTag,
    pub counts: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryGroup {
    pub category: PosCategory,
    pub tags: Vec<TagRow>,
    pub total: Vec<u64>,
}

/// Lemma counts per POS tag for several sources, grouped by category.
/// Column `i` of every count vector belongs to `sources[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PosCoverage {
    pub sources: Vec<String>,
    pub groups: Vec<CategoryGroup>,
    /// Lemmas whose source gives no POS.
    pub unknown: Vec<u64>,
    pub total: Vec<u64>,
}

impl PosCoverage {
    /// `counts[i]` maps a tag (or `None` for no POS) to a lemma count for
    /// `sources[i]`.
    pub fn from_counts(sources: Vec<String>, counts: &[BTreeMap<Option<PosTag>, u64>]) -> Self {
        assert_eq!(sources.len(), counts.len(), "one count map per source");
        let width = sources.len();
        let at = |i: usize, key: Option<PosTag>| counts[i].get(&key).copied().unwrap_or(0);
        let mut groups = Vec::new();
        let mut total = vec![0u64; width];
        for category in PosCategory::ALL {
            let mut group_total = vec![0u64; width];
            let tags: Vec<TagRow> = category
                .tags()
                .map(|tag| {
                    let row: Vec<u64> = (0..width).map(|i| at(i, Some(tag))).collect();
                    for (acc, c) in group_total.iter_mut().zip(&row) {
                        *acc += c;
                    }
                    TagRow { tag, counts: row }
                })
                .collect();
            for (acc, c) in total.iter_mut().zip(&group_total) {
                *acc += c;
            }
            groups.push(CategoryGroup {
                category,
                tags,
                total: group_total,
            });
        }
        let unknown: Vec<u64> = (0..width).map(|i| at(i, None)).collect();
        for (acc, c) in total.iter_mut().zip(&unknown) {
            *acc += c;
        }
        PosCoverage {
            sources,
            groups,
            unknown,
            total,
        }
    }

    pub fn group(&self, category: PosCategory) -> &CategoryGroup {
        self.groups
            .iter()
            .find(|g| g.category == category)
            .expect("every category present")
    }

    pub fn column(&self, source: &str) -> Option<usize> {
        self.sources.iter().position(|s| s == source)
    }
}
