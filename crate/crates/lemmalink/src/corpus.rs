//! Annotated corpora whose tokens point at source-lexicon lemmas, and their
//! resolution to canonical lemmas through confirmed correspondences.

use std::collections::{BTreeMap, BTreeSet};

use lemmalink_core::{LemmaId, LemmaRef, Ratio, RelationCode, Status, CANONICAL_NAMESPACE};
use serde::{Deserialize, Serialize};

use crate::error::{IngestReport, StoreError};
use crate::formats::{push_json, push_row, CorpusRow, CORPUS_COLUMNS};
use crate::store::{Format, Store};

/// What a token's annotation names as its lemma.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceLemma {
    Ref(LemmaRef),
    /// A lemma string with no lexicon identifier.
    Raw(String),
}

impl std::fmt::Display for SourceLemma {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SourceLemma::Ref(r) => write!(f, "{r}"),
            SourceLemma::Raw(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusToken {
    pub sentence: u64,
    pub token: u64,
    pub surface: String,
    pub source: SourceLemma,
    pub resolved: Option<LemmaId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusDescriptor {
    pub corpus_id: String,
    pub name: String,
    /// `MSA`, `Classical`, or a dialect name.
    pub variety: String,
    pub token_count: u64,
    pub unique_lemma_count: u64,
}

impl CorpusDescriptor {
    pub fn new(
        corpus_id: impl Into<String>,
        name: impl Into<String>,
        variety: impl Into<String>,
    ) -> Self {
        CorpusDescriptor {
            corpus_id: corpus_id.into(),
            name: name.into(),
            variety: variety.into(),
            token_count: 0,
            unique_lemma_count: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub descriptor: CorpusDescriptor,
    /// Sorted by (sentence, token).
    pub tokens: Vec<CorpusToken>,
    /// Relations used by the last link run; `None` before the first run.
    pub linked_with: Option<Vec<RelationCode>>,
}

impl Corpus {
    fn unique_lemmas(&self) -> BTreeSet<&SourceLemma> {
        self.tokens.iter().map(|t| &t.source).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AmbiguousToken {
    pub sentence: u64,
    pub token: u64,
    pub source: String,
    /// Canonical candidates in preference order; the first was chosen.
    pub candidates: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LinkReport {
    pub corpus_id: String,
    pub tokens: Ratio,
    pub lemmas: Ratio,
    pub tokens_unresolved: u64,
    pub lemmas_unresolved: u64,
    /// Tokens whose resolution differs from before the run.
    pub changed: u64,
    pub ambiguous: Vec<AmbiguousToken>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorpusCoverage {
    pub corpus_id: String,
    pub name: String,
    pub variety: String,
    pub tokens: Ratio,
    pub lemmas: Ratio,
    pub tokens_percent: u64,
    pub lemmas_percent: u64,
    /// The corpus has no tokens; both percentages are 0 by definition.
    pub empty: bool,
    pub linked: bool,
}

impl CorpusCoverage {
    fn new(
        corpus_id: String,
        name: String,
        variety: String,
        tokens: Ratio,
        lemmas: Ratio,
        linked: bool,
    ) -> Self {
        CorpusCoverage {
            corpus_id,
            name,
            variety,
            tokens_percent: tokens.percent(),
            lemmas_percent: lemmas.percent(),
            empty: tokens.is_empty(),
            tokens,
            lemmas,
            linked,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UnresolvedLemma {
    pub source: String,
    pub tokens: u64,
}

/// All relations that count for linking by default: the six core ones.
pub fn default_whitelist() -> BTreeSet<RelationCode> {
    RelationCode::CORE.into_iter().collect()
}

fn source_of(row: &CorpusRow) -> Result<SourceLemma, String> {
    match (row.lemma_lexicon.as_str(), row.lemma_local_id.as_str()) {
        (_, "") => Err("missing lemma reference".into()),
        ("", raw) => Ok(SourceLemma::Raw(raw.to_string())),
        (CANONICAL_NAMESPACE, id) => id
            .parse::<u64>()
            .map(|n| SourceLemma::Ref(LemmaRef::Canonical(LemmaId(n))))
            .map_err(|_| format!("canonical lemma id \"{id}\" is not an integer")),
        (lexicon, local) => {
            if lexicon.contains([':', ' ']) || local.contains(char::is_whitespace) {
                return Err(format!(
                    "invalid lemma reference \"{lexicon}\" / \"{local}\""
                ));
            }
            Ok(SourceLemma::Ref(LemmaRef::external(lexicon, local)))
        }
    }
}

impl Store {
    pub fn corpora(&self) -> impl Iterator<Item = &Corpus> {
        self.corpora.values()
    }

    pub fn corpus(&self, id: &str) -> Option<&Corpus> {
        self.corpora.get(id)
    }

    fn corpus_checked(&self, id: &str) -> Result<&Corpus, StoreError> {
        self.corpora
            .get(id)
            .ok_or_else(|| StoreError::UnknownCorpus(id.to_string()))
    }

    /// Stores a corpus with every token unresolved.
    pub fn ingest_corpus(
        &mut self,
        descriptor: CorpusDescriptor,
        rows: Vec<(usize, Result<CorpusRow, String>)>,
    ) -> Result<IngestReport, StoreError> {
        let id = descriptor.corpus_id.clone();
        if id.is_empty() || id.contains(char::is_whitespace) {
            return Err(StoreError::InvalidArgument(format!(
                "invalid corpus id \"{id}\""
            )));
        }
        if self.corpora.contains_key(&id) {
            return Err(StoreError::DuplicateCorpusId(id));
        }
        let mut report = IngestReport::default();
        let mut tokens: BTreeMap<(u64, u64), CorpusToken> = BTreeMap::new();
        for (line, row) in rows {
            let parsed = row.and_then(|r| {
                if r.surface.is_empty() {
                    return Err("empty surface form".to_string());
                }
                if r.surface.contains(['\t', '\n']) {
                    return Err("surface form contains a tab or line break".to_string());
                }
                let source = source_of(&r)?;
                Ok(CorpusToken {
                    sentence: r.sentence_idx,
                    token: r.token_idx,
                    surface: r.surface,
                    source,
                    resolved: None,
                })
            });
            match parsed {
                Ok(t) => {
                    let key = (t.sentence, t.token);
                    if let std::collections::btree_map::Entry::Vacant(e) = tokens.entry(key) {
                        e.insert(t);
                        report.accept();
                    } else {
                        report.reject(line, format!("duplicate token {}:{}", key.0, key.1));
                    }
                }
                Err(reason) => report.reject(line, reason),
            }
        }
        let mut corpus = Corpus {
            descriptor,
            tokens: tokens.into_values().collect(),
            linked_with: None,
        };
        corpus.descriptor.token_count = corpus.tokens.len() as u64;
        corpus.descriptor.unique_lemma_count = corpus.unique_lemmas().len() as u64;
        self.corpora.insert(id, corpus);
        Ok(report)
    }

    /// Canonical targets per external lemma, best first: confirmed
    /// whitelisted correspondences ordered by precision, then lowest id.
    fn resolution_index(
        &self,
        whitelist: &BTreeSet<RelationCode>,
    ) -> BTreeMap<LemmaRef, Vec<LemmaId>> {
        let mut index: BTreeMap<LemmaRef, Vec<(u8, LemmaId)>> = BTreeMap::new();
        for c in self.mappings.iter() {
            if c.status != Status::Confirmed || !whitelist.contains(&c.relation.code) {
                continue;
            }
            let (canonical, other) = match (c.l1.canonical_id(), c.l2.canonical_id()) {
                (Some(id), None) => (id, &c.l2),
                (None, Some(id)) => (id, &c.l1),
                _ => continue,
            };
            if self.canonical.contains_key(&canonical) {
                index
                    .entry(other.clone())
                    .or_default()
                    .push((c.relation.precision.percent(), canonical));
            }
        }
        index
            .into_iter()
            .map(|(k, mut v)| {
                v.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
                let mut ids: Vec<LemmaId> = Vec::new();
                for (_, id) in v {
                    if !ids.contains(&id) {
                        ids.push(id);
                    }
                }
                (k, ids)
            })
            .collect()
    }

    /// Recomputes every token's canonical lemma. Tokens that already name a
    /// canonical lemma resolve to it when it exists.
    pub fn link_corpus(
        &mut self,
        corpus_id: &str,
        whitelist: &BTreeSet<RelationCode>,
    ) -> Result<LinkReport, StoreError> {
        self.corpus_checked(corpus_id)?;
        let index = self.resolution_index(whitelist);
        let canonical = &self.canonical;
        let corpus = self.corpora.get_mut(corpus_id).expect("checked above");
        let mut changed = 0;
        let mut ambiguous = Vec::new();
        for t in &mut corpus.tokens {
            let (resolved, candidates) = match &t.source {
                SourceLemma::Ref(LemmaRef::Canonical(id)) => {
                    (canonical.contains_key(id).then_some(*id), Vec::new())
                }
                SourceLemma::Ref(r) => match index.get(r) {
                    Some(ids) => (ids.first().copied(), ids.clone()),
                    None => (None, Vec::new()),
                },
                SourceLemma::Raw(_) => (None, Vec::new()),
            };
            if candidates.len() > 1 {
                ambiguous.push(AmbiguousToken {
                    sentence: t.sentence,
                    token: t.token,
                    source: t.source.to_string(),
                    candidates: candidates.iter().map(|id| id.0).collect(),
                });
            }
            if t.resolved != resolved {
                changed += 1;
                t.resolved = resolved;
            }
        }
        corpus.linked_with = Some(whitelist.iter().copied().collect());
        let (tokens, lemmas) = coverage_of(corpus);
        Ok(LinkReport {
            corpus_id: corpus_id.to_string(),
            tokens_unresolved: tokens.total - tokens.mapped,
            lemmas_unresolved: lemmas.total - lemmas.mapped,
            tokens,
            lemmas,
            changed,
            ambiguous,
        })
    }

    pub fn coverage_report(&self, corpus_id: &str) -> Result<CorpusCoverage, StoreError> {
        let c = self.corpus_checked(corpus_id)?;
        let (tokens, lemmas) = coverage_of(c);
        Ok(CorpusCoverage::new(
            c.descriptor.corpus_id.clone(),
            c.descriptor.name.clone(),
            c.descriptor.variety.clone(),
            tokens,
            lemmas,
            c.linked_with.is_some(),
        ))
    }

    /// One row per corpus followed by a total row summing them.
    pub fn corpus_coverage_table(&self) -> Vec<CorpusCoverage> {
        let mut rows: Vec<CorpusCoverage> = self
            .corpora
            .keys()
            .map(|id| self.coverage_report(id).expect("listed"))
            .collect();
        let sum = |f: fn(&CorpusCoverage) -> Ratio| {
            rows.iter().fold(Ratio::default(), |acc, r| {
                let x = f(r);
                Ratio::new(acc.mapped + x.mapped, acc.total + x.total)
            })
        };
        let total = CorpusCoverage::new(
            "total".into(),
            "Total".into(),
            String::new(),
            sum(|r| r.tokens),
            sum(|r| r.lemmas),
            rows.iter().all(|r| r.linked),
        );
        rows.push(total);
        rows
    }

    /// Source lemmas with no canonical resolution, most frequent first.
    pub fn unresolved_lemmas(&self, corpus_id: &str) -> Result<Vec<UnresolvedLemma>, StoreError> {
        let c = self.corpus_checked(corpus_id)?;
        let mut counts: BTreeMap<&SourceLemma, u64> = BTreeMap::new();
        for t in c.tokens.iter().filter(|t| t.resolved.is_none()) {
            *counts.entry(&t.source).or_default() += 1;
        }
        let mut out: Vec<UnresolvedLemma> = counts
            .into_iter()
            .map(|(s, n)| UnresolvedLemma {
                source: s.to_string(),
                tokens: n,
            })
            .collect();
        out.sort_by(|a, b| {
            b.tokens
                .cmp(&a.tokens)
                .then_with(|| a.source.cmp(&b.source))
        });
        Ok(out)
    }

    /// Tokens whose resolution is not backed by a confirmed correspondence
    /// in the relations the corpus was linked with. Empty when consistent.
    pub fn link_violations(&self, corpus_id: &str) -> Result<Vec<String>, StoreError> {
        let c = self.corpus_checked(corpus_id)?;
        let whitelist: BTreeSet<RelationCode> = c.linked_with.iter().flatten().copied().collect();
        let mut out = Vec::new();
        for t in &c.tokens {
            let Some(id) = t.resolved else { continue };
            if !self.canonical.contains_key(&id) {
                out.push(format!(
                    "{}:{} resolves to missing lemma {id}",
                    t.sentence, t.token
                ));
                continue;
            }
            let backed = match &t.source {
                SourceLemma::Ref(LemmaRef::Canonical(own)) => *own == id,
                SourceLemma::Ref(r) => self.mappings.iter().any(|m| {
                    m.status == Status::Confirmed
                        && whitelist.contains(&m.relation.code)
                        && m.involves(r)
                        && m.other_side(r) == Some(&LemmaRef::Canonical(id))
                }),
                SourceLemma::Raw(_) => false,
            };
            if !backed {
                out.push(format!(
                    "{}:{} resolution to {id} has no confirmed link",
                    t.sentence, t.token
                ));
            }
        }
        Ok(out)
    }

    /// Tokens with their resolution in a `qabas_id` column.
    pub fn export_corpus(&self, corpus_id: &str, format: Format) -> Result<String, StoreError> {
        let c = self.corpus_checked(corpus_id)?;
        let mut out = String::new();
        if format == Format::Tsv {
            let mut header: Vec<&str> = CORPUS_COLUMNS.to_vec();
            header.push("qabas_id");
            push_row(&mut out, &header);
        }
        for t in &c.tokens {
            let (lemma_lexicon, lemma_local_id) = match &t.source {
                SourceLemma::Ref(LemmaRef::Canonical(id)) => {
                    (CANONICAL_NAMESPACE.to_string(), id.to_string())
                }
                SourceLemma::Ref(LemmaRef::External { lexicon, local }) => {
                    (lexicon.clone(), local.clone())
                }
                SourceLemma::Raw(s) => (String::new(), s.clone()),
            };
            let row = CorpusRow {
                sentence_idx: t.sentence,
                token_idx: t.token,
                surface: t.surface.clone(),
                lemma_lexicon,
                lemma_local_id,
                qabas_id: t.resolved.map(|id| id.0),
            };
            match format {
                Format::Tsv => push_row(&mut out, &row.cells(true)),
                Format::Jsonl => push_json(&mut out, &row),
            }
        }
        Ok(out)
    }
}

fn coverage_of(c: &Corpus) -> (Ratio, Ratio) {
    let resolved_tokens = c.tokens.iter().filter(|t| t.resolved.is_some()).count() as u64;
    let mut lemmas: BTreeMap<&SourceLemma, bool> = BTreeMap::new();
    for t in &c.tokens {
        *lemmas.entry(&t.source).or_default() |= t.resolved.is_some();
    }
    let resolved_lemmas = lemmas.values().filter(|&&r| r).count() as u64;
    (
        Ratio::new(resolved_tokens, c.tokens.len() as u64),
        Ratio::new(resolved_lemmas, lemmas.len() as u64),
    )
}
