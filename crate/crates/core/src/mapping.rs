//! Mapping correspondences and the review workflow.
//!
//! A correspondence links two lemmas with a relation. Heuristic candidates
//! enter as `AUTO` with the provisional relation R1; reviewers confirm them
//! with a relation or reject them. At most one correspondence per unordered
//! pair is ever not `REJECTED`. Timestamps come from a logical clock that
//! advances on every mutation, so replays are deterministic.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::heuristics::Heuristic;
use crate::lemma::LemmaRef;
use crate::relation::{MappingRelation, RelationCode, RelationWeights};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CorrespondenceId(pub u64);

impl fmt::Display for CorrespondenceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Auto,
    Confirmed,
    Rejected,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Auto => "AUTO",
            Status::Confirmed => "CONFIRMED",
            Status::Rejected => "REJECTED",
        }
    }

    pub fn parse(s: &str) -> Option<Status> {
        match s.trim().to_ascii_uppercase().as_str() {
            "AUTO" => Some(Status::Auto),
            "CONFIRMED" => Some(Status::Confirmed),
            "REJECTED" => Some(Status::Rejected),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Provenance {
    HeuristicH1,
    HeuristicH2,
    /// Recorded when a lemma is adopted into the canonical lexicon.
    Adoption,
    Manual,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::HeuristicH1 => "HEURISTIC_H1",
            Provenance::HeuristicH2 => "HEURISTIC_H2",
            Provenance::Adoption => "ADOPTION",
            Provenance::Manual => "MANUAL",
        }
    }

    pub fn parse(s: &str) -> Option<Provenance> {
        match s.trim() {
            "HEURISTIC_H1" => Some(Provenance::HeuristicH1),
            "HEURISTIC_H2" => Some(Provenance::HeuristicH2),
            "ADOPTION" => Some(Provenance::Adoption),
            "MANUAL" => Some(Provenance::Manual),
            _ => None,
        }
    }

    pub fn is_automatic(self) -> bool {
        self != Provenance::Manual
    }
}

impl From<Heuristic> for Provenance {
    fn from(h: Heuristic) -> Self {
        match h {
            Heuristic::H1 => Provenance::HeuristicH1,
            Heuristic::H2 => Provenance::HeuristicH2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Correspondence {
    pub id: CorrespondenceId,
    pub l1: LemmaRef,
    pub l2: LemmaRef,
    pub relation: MappingRelation,
    pub status: Status,
    pub provenance: Provenance,
    pub reviewer: Option<String>,
    pub timestamp: u64,
}

impl Correspondence {
    pub fn is_active(&self) -> bool {
        self.status != Status::Rejected
    }

    pub fn involves(&self, lemma: &LemmaRef) -> bool {
        &self.l1 == lemma || &self.l2 == lemma
    }

    /// The side that is not `lemma`, if `lemma` is one of the two.
    pub fn other_side(&self, lemma: &LemmaRef) -> Option<&LemmaRef> {
        if &self.l1 == lemma {
            Some(&self.l2)
        } else if &self.l2 == lemma {
            Some(&self.l1)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "relation", rename_all = "snake_case")]
pub enum Decision {
    Confirm(RelationCode),
    Reject,
}

/// One review action, kept for audit and agreement statistics.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub correspondence: CorrespondenceId,
    pub reviewer: String,
    pub previous_status: Status,
    pub previous_relation: RelationCode,
    pub status: Status,
    pub relation: RelationCode,
    pub timestamp: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MappingError {
    #[error("a lemma cannot be mapped to itself ({0})")]
    SelfMapping(LemmaRef),
    #[error("pair {l1} / {l2} already has correspondence {existing}")]
    DuplicatePair {
        l1: LemmaRef,
        l2: LemmaRef,
        existing: CorrespondenceId,
    },
    #[error("unknown correspondence {0}")]
    UnknownCorrespondence(CorrespondenceId),
    #[error("correspondence {id} is already {}", status.as_str())]
    AlreadyDecided {
        id: CorrespondenceId,
        status: Status,
    },
    #[error("a reviewer is required")]
    MissingReviewer,
    #[error("automatic correspondences cannot have MANUAL provenance")]
    ManualAuto,
}

type PairKey = (LemmaRef, LemmaRef);

fn pair_key(a: &LemmaRef, b: &LemmaRef) -> PairKey {
    if a <= b {
        (a.clone(), b.clone())
    } else {
        (b.clone(), a.clone())
    }
}

/// Counts of confirmed correspondences per relation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationCounts {
    pub counts: BTreeMap<RelationCode, u64>,
    pub total: u64,
}

impl RelationCounts {
    pub fn get(&self, code: RelationCode) -> u64 {
        self.counts.get(&code).copied().unwrap_or(0)
    }
}

/// What an import row did to the store.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImportOutcome {
    Unchanged,
    Created(CorrespondenceId),
    Updated(CorrespondenceId),
}

/// A correspondence as read from an export, without its store id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrespondenceRecord {
    pub l1: LemmaRef,
    pub l2: LemmaRef,
    pub relation: RelationCode,
    pub status: Status,
    pub provenance: Provenance,
    pub reviewer: Option<String>,
    pub timestamp: u64,
}

#[derive(Debug, Clone, Default)]
pub struct MappingStore {
    weights: RelationWeights,
    items: BTreeMap<CorrespondenceId, Correspondence>,
    by_pair: BTreeMap<PairKey, Vec<CorrespondenceId>>,
    audit: Vec<AuditEntry>,
    next_id: u64,
    clock: u64,
}

impl MappingStore {
    pub fn new(weights: RelationWeights) -> Self {
        MappingStore {
            weights,
            ..Default::default()
        }
    }

    /// Rebuilds a store from persisted parts, checking the pair invariant.
    pub fn from_parts(
        weights: RelationWeights,
        correspondences: Vec<Correspondence>,
        audit: Vec<AuditEntry>,
        clock: u64,
    ) -> Result<Self, MappingError> {
        let mut store = MappingStore::new(weights);
        for c in correspondences {
            if c.l1 == c.l2 {
                return Err(MappingError::SelfMapping(c.l1));
            }
            if c.is_active() {
                if let Some(existing) = store.active_for_pair(&c.l1, &c.l2) {
                    return Err(MappingError::DuplicatePair {
                        l1: c.l1,
                        l2: c.l2,
                        existing: existing.id,
                    });
                }
            }
            store.next_id = store.next_id.max(c.id.0 + 1);
            store.clock = store.clock.max(c.timestamp);
            store
                .by_pair
                .entry(pair_key(&c.l1, &c.l2))
                .or_default()
                .push(c.id);
            store.items.insert(c.id, c);
        }
        store.audit = audit;
        store.clock = store.clock.max(clock);
        Ok(store)
    }

    pub fn weights(&self) -> RelationWeights {
        self.weights
    }

    pub fn relation(&self, code: RelationCode) -> MappingRelation {
        MappingRelation {
            code,
            precision: self.weights.precision(code),
        }
    }

    pub fn clock(&self) -> u64 {
        self.clock
    }

    fn tick(&mut self) -> u64 {
        self.clock += 1;
        self.clock
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn get(&self, id: CorrespondenceId) -> Option<&Correspondence> {
        self.items.get(&id)
    }

    /// All correspondences in id order.
    pub fn iter(&self) -> impl Iterator<Item = &Correspondence> {
        self.items.values()
    }

    pub fn audit(&self) -> &[AuditEntry] {
        &self.audit
    }

    /// Every correspondence ever recorded for the unordered pair.
    pub fn for_pair(&self, a: &LemmaRef, b: &LemmaRef) -> impl Iterator<Item = &Correspondence> {
        self.by_pair
            .get(&pair_key(a, b))
            .into_iter()
            .flatten()
            .filter_map(|id| self.items.get(id))
    }

    pub fn active_for_pair(&self, a: &LemmaRef, b: &LemmaRef) -> Option<&Correspondence> {
        self.for_pair(a, b).find(|c| c.is_active())
    }

    pub fn has_any(&self, a: &LemmaRef, b: &LemmaRef) -> bool {
        self.by_pair.contains_key(&pair_key(a, b))
    }

    fn check_new_pair(&self, l1: &LemmaRef, l2: &LemmaRef) -> Result<(), MappingError> {
        if l1 == l2 {
            return Err(MappingError::SelfMapping(l1.clone()));
        }
        if let Some(existing) = self.active_for_pair(l1, l2) {
            return Err(MappingError::DuplicatePair {
                l1: l1.clone(),
                l2: l2.clone(),
                existing: existing.id,
            });
        }
        Ok(())
    }

    fn push(&mut self, mut c: Correspondence) -> CorrespondenceId {
        let id = CorrespondenceId(self.next_id);
        self.next_id += 1;
        c.id = id;
        self.by_pair
            .entry(pair_key(&c.l1, &c.l2))
            .or_default()
            .push(id);
        self.items.insert(id, c);
        id
    }

    /// Records an automatically discovered candidate with the provisional
    /// relation R1.
    pub fn add_auto(
        &mut self,
        l1: LemmaRef,
        l2: LemmaRef,
        provenance: Provenance,
    ) -> Result<CorrespondenceId, MappingError> {
        if !provenance.is_automatic() {
            return Err(MappingError::ManualAuto);
        }
        self.check_new_pair(&l1, &l2)?;
        let timestamp = self.tick();
        Ok(self.push(Correspondence {
            id: CorrespondenceId(0),
            l1,
            l2,
            relation: self.relation(RelationCode::R1),
            status: Status::Auto,
            provenance,
            reviewer: None,
            timestamp,
        }))
    }

    /// Confirms or rejects a correspondence. Anything not `AUTO` needs
    /// `force`; every applied decision is appended to the audit trail.
    pub fn review(
        &mut self,
        id: CorrespondenceId,
        decision: Decision,
        reviewer: &str,
        force: bool,
    ) -> Result<&Correspondence, MappingError> {
        if reviewer.trim().is_empty() {
            return Err(MappingError::MissingReviewer);
        }
        let current = self
            .items
            .get(&id)
            .ok_or(MappingError::UnknownCorrespondence(id))?
            .clone();
        if current.status != Status::Auto && !force {
            return Err(MappingError::AlreadyDecided {
                id,
                status: current.status,
            });
        }
        if current.status == Status::Rejected && matches!(decision, Decision::Confirm(_)) {
            // reviving a rejected link must not create a second active one
            if let Some(other) = self.active_for_pair(&current.l1, &current.l2) {
                return Err(MappingError::DuplicatePair {
                    l1: current.l1.clone(),
                    l2: current.l2.clone(),
                    existing: other.id,
                });
            }
        }
        let timestamp = self.tick();
        let relation = match decision {
            Decision::Confirm(code) => self.relation(code),
            Decision::Reject => current.relation,
        };
        let status = match decision {
            Decision::Confirm(_) => Status::Confirmed,
            Decision::Reject => Status::Rejected,
        };
        let entry = self.items.get_mut(&id).expect("checked above");
        self.audit.push(AuditEntry {
            correspondence: id,
            reviewer: reviewer.to_string(),
            previous_status: entry.status,
            previous_relation: entry.relation.code,
            status,
            relation: relation.code,
            timestamp,
        });
        entry.status = status;
        entry.relation = relation;
        entry.reviewer = Some(reviewer.to_string());
        entry.timestamp = timestamp;
        Ok(entry)
    }

    /// Adds a reviewer-asserted correspondence, confirmed immediately.
    /// Lemma existence is the caller's concern.
    pub fn manual_map(
        &mut self,
        l1: LemmaRef,
        l2: LemmaRef,
        relation: RelationCode,
        reviewer: &str,
    ) -> Result<&Correspondence, MappingError> {
        if reviewer.trim().is_empty() {
            return Err(MappingError::MissingReviewer);
        }
        self.check_new_pair(&l1, &l2)?;
        let timestamp = self.tick();
        let id = self.push(Correspondence {
            id: CorrespondenceId(0),
            l1,
            l2,
            relation: self.relation(relation),
            status: Status::Confirmed,
            provenance: Provenance::Manual,
            reviewer: Some(reviewer.to_string()),
            timestamp,
        });
        self.audit.push(AuditEntry {
            correspondence: id,
            reviewer: reviewer.to_string(),
            previous_status: Status::Confirmed,
            previous_relation: relation,
            status: Status::Confirmed,
            relation,
            timestamp,
        });
        Ok(&self.items[&id])
    }

    /// Applies one exported row. Identical rows are no-ops; otherwise the
    /// pair's active correspondence is overwritten, or a new one created.
    pub fn import(&mut self, record: CorrespondenceRecord) -> Result<ImportOutcome, MappingError> {
        if record.l1 == record.l2 {
            return Err(MappingError::SelfMapping(record.l1));
        }
        match record.status {
            Status::Auto if !record.provenance.is_automatic() => {
                return Err(MappingError::ManualAuto)
            }
            Status::Confirmed | Status::Rejected if record.reviewer.is_none() => {
                return Err(MappingError::MissingReviewer)
            }
            _ => {}
        }
        let relation = self.relation(record.relation);
        let same = |c: &Correspondence| {
            c.l1 == record.l1
                && c.l2 == record.l2
                && c.relation == relation
                && c.status == record.status
                && c.provenance == record.provenance
                && c.reviewer == record.reviewer
                && c.timestamp == record.timestamp
        };
        if self.for_pair(&record.l1, &record.l2).any(same) {
            return Ok(ImportOutcome::Unchanged);
        }
        self.clock = self.clock.max(record.timestamp);
        let active = self.active_for_pair(&record.l1, &record.l2).map(|c| c.id);
        let fresh = Correspondence {
            id: CorrespondenceId(0),
            l1: record.l1,
            l2: record.l2,
            relation,
            status: record.status,
            provenance: record.provenance,
            reviewer: record.reviewer,
            timestamp: record.timestamp,
        };
        match active {
            Some(id) => {
                let entry = self.items.get_mut(&id).expect("indexed");
                *entry = Correspondence { id, ..fresh };
                Ok(ImportOutcome::Updated(id))
            }
            None => Ok(ImportOutcome::Created(self.push(fresh))),
        }
    }

    /// Confirmed correspondences per relation, optionally restricted to those
    /// linking the two given lexicons (in either direction).
    pub fn relation_counts(&self, scope: Option<(&str, &str)>) -> RelationCounts {
        let mut counts: BTreeMap<RelationCode, u64> =
            RelationCode::ALL.iter().map(|&c| (c, 0)).collect();
        let mut total = 0;
        for c in self
            .items
            .values()
            .filter(|c| c.status == Status::Confirmed)
        {
            if let Some((a, b)) = scope {
                let (x, y) = (c.l1.lexicon_id(), c.l2.lexicon_id());
                if !((x == a && y == b) || (x == b && y == a)) {
                    continue;
                }
            }
            *counts.entry(c.relation.code).or_default() += 1;
            total += 1;
        }
        RelationCounts { counts, total }
    }

    /// Full scan for broken invariants; empty when the store is consistent.
    pub fn invariant_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (key, ids) in &self.by_pair {
            let active = ids.iter().filter(|id| self.items[id].is_active()).count();
            if active > 1 {
                out.push(alloc::format!(
                    "{} active correspondences for {} / {}",
                    active,
                    key.0,
                    key.1
                ));
            }
        }
        for c in self.items.values() {
            if c.l1 == c.l2 {
                out.push(alloc::format!("self mapping {}", c.id));
            }
            match c.status {
                Status::Auto if !c.provenance.is_automatic() => {
                    out.push(alloc::format!("{} is AUTO with MANUAL provenance", c.id))
                }
                Status::Confirmed | Status::Rejected if c.reviewer.is_none() => {
                    out.push(alloc::format!("{} decided without reviewer", c.id))
                }
                _ => {}
            }
            if c.relation.precision != self.weights.precision(c.relation.code) {
                out.push(alloc::format!("{} carries a stale precision", c.id));
            }
        }
        let counts = self.relation_counts(None);
        let confirmed = self
            .items
            .values()
            .filter(|c| c.status == Status::Confirmed)
            .count() as u64;
        if counts.total != confirmed || counts.counts.values().sum::<u64>() != confirmed {
            out.push(String::from(
                "relation counts do not sum to the confirmed total",
            ));
        }
        out
    }
}

/// Correspondences whose relation precision is at least `threshold` percent.
pub fn filter_by_precision<'a, I>(correspondences: I, threshold: u8) -> Vec<&'a Correspondence>
where
    I: IntoIterator<Item = &'a Correspondence>,
{
    correspondences
        .into_iter()
        .filter(|c| c.relation.precision.percent() >= threshold)
        .collect()
}
