//! Cohen's kappa between annotators.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum KappaError {
    #[error("annotators labeled different item sets")]
    ItemSetMismatch,
    #[error("no items to compare")]
    EmptyItemSet,
    #[error("agreement needs at least two annotators")]
    TooFewAnnotators,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kappa {
    pub value: f64,
    pub observed: f64,
    pub expected: f64,
    pub items: usize,
    /// Chance agreement is 1, so the ratio is undefined. `value` is then 1
    /// for complete agreement and 0 otherwise.
    pub degenerate: bool,
}

impl Kappa {
    /// `value` rounded half away from zero to two decimals.
    pub fn rounded(&self) -> f64 {
        round_to_hundredths(self.value)
    }
}

pub fn round_to_hundredths(x: f64) -> f64 {
    let scaled = x * 100.0;
    let r = if scaled >= 0.0 {
        (scaled + 0.5) as i64
    } else {
        -((-scaled + 0.5) as i64)
    };
    r as f64 / 100.0
}

/// Kappa over aligned label pairs (one pair per item).
pub fn kappa_from_pairs<L: Ord>(
    pairs: impl IntoIterator<Item = (L, L)>,
) -> Result<Kappa, KappaError> {
    let mut n: u64 = 0;
    let mut agree: u64 = 0;
    let mut marginals: BTreeMap<L, (u64, u64)> = BTreeMap::new();
    for (a, b) in pairs {
        n += 1;
        if a == b {
            agree += 1;
        }
        marginals.entry(a).or_default().0 += 1;
        marginals.entry(b).or_default().1 += 1;
    }
    if n == 0 {
        return Err(KappaError::EmptyItemSet);
    }
    let chance: u128 = marginals
        .values()
        .map(|&(x, y)| x as u128 * y as u128)
        .sum();
    let n2 = n as u128 * n as u128;
    let observed = agree as f64 / n as f64;
    let expected = chance as f64 / n2 as f64;
    if chance == n2 {
        let value = if agree == n { 1.0 } else { 0.0 };
        return Ok(Kappa {
            value,
            observed,
            expected,
            items: n as usize,
            degenerate: true,
        });
    }
    Ok(Kappa {
        value: (observed - expected) / (1.0 - expected),
        observed,
        expected,
        items: n as usize,
        degenerate: false,
    })
}

/// Kappa between two annotators who labeled exactly the same items.
pub fn cohen_kappa<I: Ord, L: Ord>(
    a: &BTreeMap<I, L>,
    b: &BTreeMap<I, L>,
) -> Result<Kappa, KappaError> {
    if a.is_empty() && b.is_empty() {
        return Err(KappaError::EmptyItemSet);
    }
    if a.len() != b.len() || a.keys().zip(b.keys()).any(|(x, y)| x != y) {
        return Err(KappaError::ItemSetMismatch);
    }
    kappa_from_pairs(a.values().zip(b.values()))
}

/// Kappa for every unordered pair of annotators, keyed (first, second) in
/// annotator order.
pub fn pairwise_iaa<A, I, L>(
    annotators: &BTreeMap<A, BTreeMap<I, L>>,
) -> Result<BTreeMap<(A, A), Kappa>, KappaError>
where
    A: Ord + Clone,
    I: Ord,
    L: Ord,
{
    if annotators.len() < 2 {
        return Err(KappaError::TooFewAnnotators);
    }
    let entries: Vec<(&A, &BTreeMap<I, L>)> = annotators.iter().collect();
    let mut out = BTreeMap::new();
    for (i, (a, la)) in entries.iter().enumerate() {
        for (b, lb) in &entries[i + 1..] {
            out.insert(((*a).clone(), (*b).clone()), cohen_kappa(la, lb)?);
        }
    }
    Ok(out)
}
