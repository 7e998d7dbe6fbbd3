//! Verb (h1) and noun (h2) matching rules and blocked candidate discovery.
//!
//! Each rule has a required set (perfective forms for verbs, singulars for
//! nouns) that must be non-empty on both sides and compatible, and a list of
//! secondary sets that must be compatible whenever both sides have them.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lemma::MatchProfile;
use crate::orthography::{sets_compatible, skeleton_key, WordSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum HeuristicError {
    #[error("neither lemma has verbal evidence")]
    NotAVerbPair,
    #[error("neither lemma has nominal evidence")]
    NotANounPair,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Heuristic {
    H1,
    H2,
}

fn required_and_optional(
    required: (&WordSet, &WordSet),
    optional: &[(&WordSet, &WordSet)],
) -> bool {
    let (a, b) = required;
    if a.is_empty() || b.is_empty() || !sets_compatible(a, b) {
        return false;
    }
    optional
        .iter()
        .all(|(x, y)| x.is_empty() || y.is_empty() || sets_compatible(x, y))
}

fn h1_unchecked(l1: &MatchProfile, l2: &MatchProfile) -> bool {
    required_and_optional(
        (&l1.forms.pv, &l2.forms.pv),
        &[
            (&l1.roots, &l2.roots),
            (&l1.forms.iv, &l2.forms.iv),
            (&l1.forms.cv, &l2.forms.cv),
        ],
    )
}

fn h2_unchecked(l1: &MatchProfile, l2: &MatchProfile) -> bool {
    required_and_optional(
        (&l1.forms.singulars, &l2.forms.singulars),
        &[
            (&l1.roots, &l2.roots),
            (&l1.forms.duals, &l2.forms.duals),
            (&l1.forms.plurals, &l2.forms.plurals),
        ],
    )
}

/// Verb rule: perfective sets non-empty and compatible; roots, imperfective
/// and imperative sets compatible whenever both sides have them.
pub fn h1_verb_match(l1: &MatchProfile, l2: &MatchProfile) -> Result<bool, HeuristicError> {
    if !l1.has_verbal_evidence() && !l2.has_verbal_evidence() {
        return Err(HeuristicError::NotAVerbPair);
    }
    Ok(h1_unchecked(l1, l2))
}

/// Noun rule: singular sets non-empty and compatible; roots, duals and
/// plurals compatible whenever both sides have them.
pub fn h2_noun_match(l1: &MatchProfile, l2: &MatchProfile) -> Result<bool, HeuristicError> {
    if !l1.has_nominal_evidence() && !l2.has_nominal_evidence() {
        return Err(HeuristicError::NotANounPair);
    }
    Ok(h2_unchecked(l1, l2))
}

/// Which rule, if any, links a pair. A rule is only tried when both sides
/// qualify for it, so verbs are never compared with nouns. h1 wins ties.
pub fn match_pair(l1: &MatchProfile, l2: &MatchProfile) -> Option<Heuristic> {
    if l1.has_verbal_evidence() && l2.has_verbal_evidence() && h1_unchecked(l1, l2) {
        return Some(Heuristic::H1);
    }
    if l1.has_nominal_evidence() && l2.has_nominal_evidence() && h2_unchecked(l1, l2) {
        return Some(Heuristic::H2);
    }
    None
}

/// A matching pair, as indices into the source and target slices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct CandidatePair {
    pub source: usize,
    pub target: usize,
    pub heuristic: Heuristic,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscoveryStats {
    /// Distinct skeleton keys present on both sides.
    pub blocks: u64,
    /// Pairs on which a rule was evaluated.
    pub pairs_compared: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Discovery {
    /// Sorted by (source, target).
    pub pairs: Vec<CandidatePair>,
    pub stats: DiscoveryStats,
}

fn block_index(
    profiles: &[MatchProfile],
    eligible: impl Fn(&MatchProfile) -> bool,
    keyed_set: impl Fn(&MatchProfile) -> &WordSet,
) -> BTreeMap<String, BTreeSet<usize>> {
    let mut index: BTreeMap<String, BTreeSet<usize>> = BTreeMap::new();
    for (i, p) in profiles.iter().enumerate() {
        if !eligible(p) {
            continue;
        }
        for w in keyed_set(p) {
            index.entry(skeleton_key(w)).or_default().insert(i);
        }
    }
    index
}

/// Finds every (source, target) pair linked by h1 or h2, comparing only
/// lemmas that share the skeleton of a perfective (verbs) or singular
/// (nouns) form. A rule's required sets must be compatible, which forces a
/// shared skeleton, so the result equals the all-pairs evaluation.
pub fn discover(source: &[MatchProfile], target: &[MatchProfile]) -> Discovery {
    let mut candidates: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut blocks = 0u64;

    let blockings: [(fn(&MatchProfile) -> bool, fn(&MatchProfile) -> &WordSet); 2] = [
        (MatchProfile::has_verbal_evidence, |p| &p.forms.pv),
        (MatchProfile::has_nominal_evidence, |p| &p.forms.singulars),
    ];
    for (eligible, keyed) in blockings {
        let src = block_index(source, eligible, keyed);
        let tgt = block_index(target, eligible, keyed);
        for (key, s_members) in &src {
            let Some(t_members) = tgt.get(key) else {
                continue;
            };
            blocks += 1;
            for &s in s_members {
                for &t in t_members {
                    candidates.insert((s, t));
                }
            }
        }
    }

    let mut discovery = Discovery {
        pairs: Vec::new(),
        stats: DiscoveryStats {
            blocks,
            pairs_compared: candidates.len() as u64,
        },
    };
    for (s, t) in candidates {
        if let Some(heuristic) = match_pair(&source[s], &target[t]) {
            discovery.pairs.push(CandidatePair {
                source: s,
                target: t,
                heuristic,
            });
        }
    }
    discovery
}
