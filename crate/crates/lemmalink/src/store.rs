//! The lexicographic data graph: canonical lemmas, external lexicons, their
//! correspondences and the corpora linked through them.

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;
use std::time::Instant;

use lemmalink_core::agreement::{kappa_from_pairs, round_to_hundredths};
use lemmalink_core::heuristics::DiscoveryStats;
use lemmalink_core::lemma::{FormSets, InvalidFeature};
use lemmalink_core::mapping::{AuditEntry, CorrespondenceRecord, ImportOutcome, RelationCounts};
use lemmalink_core::{
    analyze, analyze_with, diacritic_compatible, discover, prefix_compatible, AnalyzeOptions,
    AnalyzedWord, Aspect, CanonicalLemma, Correspondence, CorrespondenceId, Decision,
    ExternalLemma, LemmaId, LemmaRef, MappingStore, PosCategory, PosCoverage, PosTag, Provenance,
    RelationCode, RelationWeights, Status, ValidationRules, Variety, Violation, WordSet,
    CANONICAL_NAMESPACE,
};
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{FieldError, IngestReport, StoreError};
use crate::formats::{
    push_json, push_row, LexiconRecord, MappingRow, LEXICON_COLUMNS, MAPPING_COLUMNS,
};

pub const DEFAULT_PAGE_SIZE: usize = 20;
pub const MAX_PAGE_SIZE: usize = 500;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexiconDescriptor {
    pub lexicon_id: String,
    pub name: String,
    /// Kind of source, e.g. `morphological_analyzer`, `dictionary`, `thesaurus`.
    pub category: String,
    pub lemma_count: u64,
}

impl LexiconDescriptor {
    pub fn new(
        lexicon_id: impl Into<String>,
        name: impl Into<String>,
        category: impl Into<String>,
    ) -> Self {
        LexiconDescriptor {
            lexicon_id: lexicon_id.into(),
            name: name.into(),
            category: category.into(),
            lemma_count: 0,
        }
    }

    fn canonical() -> Self {
        LexiconDescriptor::new(CANONICAL_NAMESPACE, "Qabas", "canonical")
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IngestOptions {
    /// Require fully diacritized forms. `None` picks the default: on for the
    /// canonical lexicon, off for external ones.
    pub strict: Option<bool>,
    /// Drop the lexicon's current content before loading.
    pub replace: bool,
    pub fold_hamza: bool,
}

/// Output format for exports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Tsv,
    Jsonl,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tsv" => Ok(Format::Tsv),
            "jsonl" => Ok(Format::Jsonl),
            other => Err(format!(
                "unknown format \"{other}\" (expected tsv or jsonl)"
            )),
        }
    }
}

/// How a search query is compared with stored forms.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchMode {
    /// The query is compatible with the beginning of a form.
    #[default]
    Prefix,
    /// The query is compatible with a whole form.
    Exact,
}

impl FromStr for MatchMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "prefix" => Ok(MatchMode::Prefix),
            "exact" => Ok(MatchMode::Exact),
            other => Err(format!("unknown match mode \"{other}\"")),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SearchFilters {
    pub pos: Option<PosTag>,
    pub lexicon: Option<String>,
    /// Restrict to lemmas with (or without) a confirmed correspondence.
    pub mapped: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Page<T> {
    pub page: usize,
    pub page_size: usize,
    pub total: usize,
    pub items: Vec<T>,
}

/// A lemma as shown in search results and the review queue.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LemmaSummary {
    pub lemma_ref: String,
    pub lexicon_id: String,
    pub local_id: String,
    pub pos: Option<String>,
    pub category: Option<String>,
    pub spellings: Vec<String>,
    pub roots: Vec<String>,
    pub singulars: Vec<String>,
    pub duals: Vec<String>,
    pub plurals: Vec<String>,
    pub pv: Vec<String>,
    pub iv: Vec<String>,
    pub cv: Vec<String>,
    pub mapped: bool,
}

/// Payload for a manually inserted canonical lemma.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NewLemma {
    pub spellings: Vec<String>,
    pub pos: String,
    pub gender: String,
    pub number: String,
    pub aspect: String,
    pub person: String,
    pub roots: Vec<String>,
    pub augmentation: String,
    pub transitivity: String,
    pub singulars: Vec<String>,
    pub duals: Vec<String>,
    pub plurals: Vec<String>,
    pub pv: Vec<String>,
    pub iv: Vec<String>,
    pub cv: Vec<String>,
    pub dialect: Option<String>,
    pub msa_counterpart: Option<u64>,
    pub all_senses_proper_noun: bool,
    /// Full-diacritization check; on unless explicitly disabled.
    pub strict: Option<bool>,
}

impl NewLemma {
    fn record(&self) -> LexiconRecord {
        LexiconRecord {
            local_id: String::new(),
            spellings: self.spellings.clone(),
            pos: self.pos.clone(),
            gender: self.gender.clone(),
            number: self.number.clone(),
            aspect: self.aspect.clone(),
            person: self.person.clone(),
            roots: self.roots.clone(),
            augmentation: self.augmentation.clone(),
            transitivity: self.transitivity.clone(),
            singulars: self.singulars.clone(),
            duals: self.duals.clone(),
            plurals: self.plurals.clone(),
            pv: self.pv.clone(),
            iv: self.iv.clone(),
            cv: self.cv.clone(),
            dialect: self.dialect.clone().unwrap_or_default(),
            msa_counterpart: self
                .msa_counterpart
                .map(|id| id.to_string())
                .unwrap_or_default(),
            extra: BTreeMap::new(),
        }
    }
}

/// Feature values that replace the source's when adopting a lemma.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LemmaOverrides {
    pub spellings: Option<Vec<String>>,
    pub pos: Option<String>,
    pub gender: Option<String>,
    pub number: Option<String>,
    pub aspect: Option<String>,
    pub person: Option<String>,
    pub augmentation: Option<String>,
    pub transitivity: Option<String>,
    pub dialect: Option<String>,
    pub msa_counterpart: Option<u64>,
    pub all_senses_proper_noun: bool,
    pub strict: Option<bool>,
}

/// Non-fatal notice that a manual lemma looks like an existing one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DuplicateSpellingWarning {
    pub existing: u64,
    pub spelling: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Inserted {
    pub id: u64,
    pub warning: Option<DuplicateSpellingWarning>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct BatchStats {
    pub pairs_compared: u64,
    pub blocks: u64,
    pub matched: u64,
    pub skipped_existing: u64,
    pub elapsed_ms: u64,
}

/// AUTO correspondences produced by one automap run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CandidateBatch {
    pub source: String,
    pub target: String,
    pub candidates: Vec<Correspondence>,
    pub stats: BatchStats,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ImportReport {
    pub total: usize,
    pub created: usize,
    pub updated: usize,
    pub unchanged: usize,
    pub rejected: Vec<crate::error::RowError>,
}

impl ImportReport {
    pub fn changed(&self) -> usize {
        self.created + self.updated
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IaaPair {
    pub a: String,
    pub b: String,
    pub items: usize,
    pub kappa: f64,
    pub rounded: f64,
    pub observed: f64,
    pub expected: f64,
    pub degenerate: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct IaaReport {
    pub annotators: Vec<String>,
    /// One entry per annotator pair sharing at least one item.
    pub pairs: Vec<IaaPair>,
}

/// An unordered lemma pair, the unit annotators label.
pub type Item = (LemmaRef, LemmaRef);

/// Label used for rejected pairs in agreement statistics.
pub const REJECT_LABEL: &str = "REJECT";

fn item(a: &LemmaRef, b: &LemmaRef) -> Item {
    if a <= b {
        (a.clone(), b.clone())
    } else {
        (b.clone(), a.clone())
    }
}

/// Kappa for every pair of annotators over the items both labeled.
pub fn iaa_from_labels(labels: &BTreeMap<String, BTreeMap<Item, String>>) -> IaaReport {
    let names: Vec<&String> = labels.keys().collect();
    let mut report = IaaReport {
        annotators: names.iter().map(|s| s.to_string()).collect(),
        pairs: Vec::new(),
    };
    for (i, a) in names.iter().enumerate() {
        for b in &names[i + 1..] {
            let (la, lb) = (&labels[*a], &labels[*b]);
            let shared = la.iter().filter_map(|(k, x)| lb.get(k).map(|y| (x, y)));
            if let Ok(k) = kappa_from_pairs(shared) {
                report.pairs.push(IaaPair {
                    a: a.to_string(),
                    b: b.to_string(),
                    items: k.items,
                    kappa: k.value,
                    rounded: round_to_hundredths(k.value),
                    observed: k.observed,
                    expected: k.expected,
                    degenerate: k.degenerate,
                });
            }
        }
    }
    report
}

/// Agreement labels from a mappings export: each reviewer's decided rows.
pub fn labels_from_rows(
    rows: &[MappingRow],
) -> Result<BTreeMap<String, BTreeMap<Item, String>>, String> {
    let mut out: BTreeMap<String, BTreeMap<Item, String>> = BTreeMap::new();
    for r in rows {
        let status =
            Status::parse(&r.status).ok_or_else(|| format!("unknown status \"{}\"", r.status))?;
        if status == Status::Auto || r.reviewer.is_empty() {
            continue;
        }
        let l1: LemmaRef = r.l1_ref.parse().map_err(|e| format!("{e}"))?;
        let l2: LemmaRef = r.l2_ref.parse().map_err(|e| format!("{e}"))?;
        let label = match status {
            Status::Rejected => REJECT_LABEL.to_string(),
            _ => r.relation_code.clone(),
        };
        out.entry(r.reviewer.clone())
            .or_default()
            .insert(item(&l1, &l2), label);
    }
    Ok(out)
}

/// Radicals separated by spaces, each with its marks.
pub fn format_root(root: &AnalyzedWord) -> String {
    let letters: Vec<String> = root
        .skeleton()
        .iter()
        .zip(root.clusters())
        .map(|(&letter, cluster)| {
            let mut s = String::from(letter);
            if let Some(v) = cluster.vowel() {
                s.push(v.as_char());
            }
            if cluster.shadda() {
                s.push(lemmalink_core::orthography::SHADDA);
            }
            s
        })
        .collect();
    letters.join(" ")
}

fn parse_word(
    field: &str,
    text: &str,
    options: AnalyzeOptions,
) -> Result<AnalyzedWord, FieldError> {
    if text.trim().contains(char::is_whitespace) {
        return Err(FieldError::new(
            field,
            format!("multi-word lemma \"{text}\""),
        ));
    }
    analyze_with(text, options).map_err(|e| FieldError::new(field, format!("\"{text}\": {e}")))
}

fn parse_root(text: &str, options: AnalyzeOptions) -> Result<AnalyzedWord, FieldError> {
    let joined: String = text.split_whitespace().collect();
    analyze_with(&joined, options).map_err(|e| FieldError::new("roots", format!("\"{text}\": {e}")))
}

fn parse_set(
    field: &str,
    items: &[String],
    options: AnalyzeOptions,
    errors: &mut Vec<FieldError>,
) -> WordSet {
    let mut set = WordSet::new();
    for s in items {
        match parse_word(field, s, options) {
            Ok(w) => {
                set.insert(w);
            }
            Err(e) => errors.push(e),
        }
    }
    set
}

fn parse_roots(items: &[String], options: AnalyzeOptions, errors: &mut Vec<FieldError>) -> WordSet {
    let mut set = WordSet::new();
    for s in items {
        match parse_root(s, options) {
            Ok(w) => {
                set.insert(w);
            }
            Err(e) => errors.push(e),
        }
    }
    set
}

fn parse_forms(
    r: &LexiconRecord,
    options: AnalyzeOptions,
    errors: &mut Vec<FieldError>,
) -> FormSets {
    FormSets {
        singulars: parse_set("singulars", &r.singulars, options, errors),
        duals: parse_set("duals", &r.duals, options, errors),
        plurals: parse_set("plurals", &r.plurals, options, errors),
        pv: parse_set("pv", &r.pv, options, errors),
        iv: parse_set("iv", &r.iv, options, errors),
        cv: parse_set("cv", &r.cv, options, errors),
    }
}

fn feature<T: FromStr<Err = InvalidFeature> + Default>(
    value: &str,
    errors: &mut Vec<FieldError>,
) -> T {
    value.parse().unwrap_or_else(|e: InvalidFeature| {
        errors.push(FieldError::new(e.feature, &e));
        T::default()
    })
}

fn texts<'a>(words: impl IntoIterator<Item = &'a AnalyzedWord>) -> Vec<String> {
    words.into_iter().map(|w| w.raw().to_string()).collect()
}

fn feature_text(s: &'static str) -> String {
    if s == "NA" {
        String::new()
    } else {
        s.to_string()
    }
}

/// Builds a canonical lemma from a record and checks every guideline rule
/// that does not need the rest of the store.
pub fn canonical_from_record(
    r: &LexiconRecord,
    id: LemmaId,
    rules: ValidationRules,
    options: AnalyzeOptions,
) -> Result<CanonicalLemma, Vec<FieldError>> {
    let mut errors = Vec::new();
    let spellings: Vec<AnalyzedWord> = r
        .spellings
        .iter()
        .filter_map(|s| {
            parse_word("spellings", s, options)
                .map_err(|e| errors.push(e))
                .ok()
        })
        .collect();
    let pos = if r.pos.is_empty() {
        errors.push(FieldError::new("pos", Violation::MissingPos));
        None
    } else {
        match r.pos.parse::<PosTag>() {
            Ok(p) => Some(p),
            Err(_) => {
                errors.push(FieldError::new(
                    "pos",
                    format!("unknown POS tag \"{}\"", r.pos),
                ));
                None
            }
        }
    };
    let mut aspect: Aspect = feature(&r.aspect, &mut errors);
    if let Some(p) = pos {
        if aspect.is_na() {
            aspect = Aspect::for_pos(p);
        }
    }
    let dialect = if r.dialect.is_empty() {
        None
    } else {
        r.dialect
            .parse::<Variety>()
            .map_err(|e| errors.push(FieldError::new("dialect", &e)))
            .ok()
    };
    let msa_counterpart = if r.msa_counterpart.is_empty() {
        None
    } else {
        let text = r
            .msa_counterpart
            .strip_prefix("qabas:")
            .unwrap_or(&r.msa_counterpart);
        match text.parse::<u64>() {
            Ok(n) => Some(LemmaId(n)),
            Err(_) => {
                errors.push(FieldError::new(
                    "msa_counterpart",
                    format!("\"{}\" is not a canonical lemma id", r.msa_counterpart),
                ));
                None
            }
        }
    };
    for name in r.extra.keys() {
        errors.push(FieldError::new(name.clone(), "not a canonical lemma field"));
    }
    let lemma = CanonicalLemma {
        id,
        spellings,
        pos: pos.unwrap_or(PosTag::Noun),
        gender: feature(&r.gender, &mut errors),
        number: feature(&r.number, &mut errors),
        aspect,
        person: feature(&r.person, &mut errors),
        roots: parse_roots(&r.roots, options, &mut errors),
        augmentation: feature(&r.augmentation, &mut errors),
        transitivity: feature(&r.transitivity, &mut errors),
        dialect,
        msa_counterpart,
        forms: parse_forms(r, options, &mut errors),
    };
    for v in lemma.violations(rules) {
        // unparsable spellings and tags are already reported above
        let repeated = (v == Violation::NoSpelling && !r.spellings.is_empty())
            || (pos.is_none() && v.field() != "spellings" && v.field() != "msa_counterpart");
        if !repeated {
            errors.push(FieldError::new(v.field(), &v));
        }
    }
    if errors.is_empty() {
        Ok(lemma)
    } else {
        Err(errors)
    }
}

pub fn record_from_canonical(l: &CanonicalLemma) -> LexiconRecord {
    LexiconRecord {
        local_id: l.id.to_string(),
        spellings: texts(&l.spellings),
        pos: l.pos.as_str().to_string(),
        gender: feature_text(l.gender.as_str()),
        number: feature_text(l.number.as_str()),
        aspect: feature_text(l.aspect.as_str()),
        person: feature_text(l.person.as_str()),
        roots: l.roots.iter().map(format_root).collect(),
        augmentation: feature_text(l.augmentation.as_str()),
        transitivity: feature_text(l.transitivity.as_str()),
        singulars: texts(&l.forms.singulars),
        duals: texts(&l.forms.duals),
        plurals: texts(&l.forms.plurals),
        pv: texts(&l.forms.pv),
        iv: texts(&l.forms.iv),
        cv: texts(&l.forms.cv),
        dialect: l
            .dialect
            .as_ref()
            .map(|d| d.to_string())
            .unwrap_or_default(),
        msa_counterpart: l
            .msa_counterpart
            .map(|id| id.to_string())
            .unwrap_or_default(),
        extra: BTreeMap::new(),
    }
}

/// Feature columns that external lexicons keep verbatim in free features.
const EXTERNAL_FEATURE_COLUMNS: [&str; 8] = [
    "gender",
    "number",
    "aspect",
    "person",
    "augmentation",
    "transitivity",
    "dialect",
    "msa_counterpart",
];

fn valid_id(id: &str) -> bool {
    !id.is_empty() && !id.contains(|c: char| c.is_whitespace() || c == ':' || c.is_control())
}

pub fn external_from_record(
    lexicon_id: &str,
    r: &LexiconRecord,
    strict: bool,
    options: AnalyzeOptions,
) -> Result<ExternalLemma, Vec<FieldError>> {
    let mut errors = Vec::new();
    if r.local_id.is_empty()
        || r.local_id
            .contains(|c: char| c.is_whitespace() || c.is_control())
    {
        errors.push(FieldError::new(
            "local_id",
            format!("invalid local id \"{}\"", r.local_id),
        ));
    }
    let headwords: Vec<AnalyzedWord> = {
        let mut seen = WordSet::new();
        for s in &r.spellings {
            match parse_word("spellings", s, options) {
                Ok(w) => {
                    seen.insert(w);
                }
                Err(e) => errors.push(e),
            }
        }
        seen.iter().cloned().collect()
    };
    let pos = if r.pos.is_empty() {
        None
    } else {
        match r.pos.parse::<PosTag>() {
            Ok(p) => Some(p),
            Err(_) => {
                errors.push(FieldError::new(
                    "pos",
                    format!("unknown POS tag \"{}\"", r.pos),
                ));
                None
            }
        }
    };
    let forms = parse_forms(r, options, &mut errors);
    let roots = parse_roots(&r.roots, options, &mut errors);
    let mut free_features = r.extra.clone();
    let values = [
        &r.gender,
        &r.number,
        &r.aspect,
        &r.person,
        &r.augmentation,
        &r.transitivity,
        &r.dialect,
        &r.msa_counterpart,
    ];
    for (name, value) in EXTERNAL_FEATURE_COLUMNS.iter().zip(values) {
        if !value.is_empty() {
            free_features.insert(name.to_string(), value.clone());
        }
    }
    let lemma = ExternalLemma {
        lexicon_id: lexicon_id.to_string(),
        local_id: r.local_id.clone(),
        pos,
        headwords,
        forms,
        roots,
        free_features,
    };
    if errors.is_empty() && !lemma.has_evidence() {
        errors.push(FieldError::new("forms", "no form set or root is given"));
    }
    if strict {
        let all = lemma
            .headwords
            .iter()
            .chain(lemma.forms.all().into_iter().flat_map(|s| s.iter()));
        for w in all {
            if !w.is_fully_diacritized() {
                errors.push(FieldError::new(
                    "forms",
                    format!("\"{}\" is not fully diacritized", w.raw()),
                ));
            }
        }
    }
    if errors.is_empty() {
        Ok(lemma)
    } else {
        Err(errors)
    }
}

pub fn record_from_external(l: &ExternalLemma) -> LexiconRecord {
    let f = |name: &str| l.free_features.get(name).cloned().unwrap_or_default();
    LexiconRecord {
        local_id: l.local_id.clone(),
        spellings: texts(&l.headwords),
        pos: l.pos.map(|p| p.as_str().to_string()).unwrap_or_default(),
        gender: f("gender"),
        number: f("number"),
        aspect: f("aspect"),
        person: f("person"),
        roots: l.roots.iter().map(format_root).collect(),
        augmentation: f("augmentation"),
        transitivity: f("transitivity"),
        singulars: texts(&l.forms.singulars),
        duals: texts(&l.forms.duals),
        plurals: texts(&l.forms.plurals),
        pv: texts(&l.forms.pv),
        iv: texts(&l.forms.iv),
        cv: texts(&l.forms.cv),
        dialect: f("dialect"),
        msa_counterpart: f("msa_counterpart"),
        extra: l
            .free_features
            .iter()
            .filter(|(k, _)| !EXTERNAL_FEATURE_COLUMNS.contains(&k.as_str()))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect(),
    }
}

fn join_errors(errors: &[FieldError]) -> String {
    errors
        .iter()
        .map(|e| format!("{}: {}", e.field, e.message))
        .collect::<Vec<_>>()
        .join("; ")
}

/// Borrowed view over either kind of lemma.
#[derive(Debug, Clone, Copy)]
pub enum LemmaView<'a> {
    Canonical(&'a CanonicalLemma),
    External(&'a ExternalLemma),
}

impl<'a> LemmaView<'a> {
    pub fn lemma_ref(&self) -> LemmaRef {
        match self {
            LemmaView::Canonical(l) => l.lemma_ref(),
            LemmaView::External(l) => l.lemma_ref(),
        }
    }

    pub fn pos(&self) -> Option<PosTag> {
        match self {
            LemmaView::Canonical(l) => Some(l.pos),
            LemmaView::External(l) => l.pos,
        }
    }

    pub fn spellings(&self) -> &'a [AnalyzedWord] {
        match self {
            LemmaView::Canonical(l) => &l.spellings,
            LemmaView::External(l) => &l.headwords,
        }
    }

    pub fn forms(&self) -> &'a FormSets {
        match self {
            LemmaView::Canonical(l) => &l.forms,
            LemmaView::External(l) => &l.forms,
        }
    }

    pub fn roots(&self) -> &'a WordSet {
        match self {
            LemmaView::Canonical(l) => &l.roots,
            LemmaView::External(l) => &l.roots,
        }
    }

    fn searchable(&self) -> impl Iterator<Item = &'a AnalyzedWord> {
        self.spellings()
            .iter()
            .chain(self.forms().all().into_iter().flat_map(|s| s.iter()))
    }

    pub fn summary(&self, mapped: bool) -> LemmaSummary {
        let r = self.lemma_ref();
        let (lexicon_id, local_id) = match &r {
            LemmaRef::Canonical(id) => (CANONICAL_NAMESPACE.to_string(), id.to_string()),
            LemmaRef::External { lexicon, local } => (lexicon.clone(), local.clone()),
        };
        let f = self.forms();
        LemmaSummary {
            lemma_ref: r.to_string(),
            lexicon_id,
            local_id,
            pos: self.pos().map(|p| p.as_str().to_string()),
            category: self.pos().map(|p| p.category().as_str().to_string()),
            spellings: texts(self.spellings()),
            roots: self.roots().iter().map(format_root).collect(),
            singulars: texts(&f.singulars),
            duals: texts(&f.duals),
            plurals: texts(&f.plurals),
            pv: texts(&f.pv),
            iv: texts(&f.iv),
            cv: texts(&f.cv),
            mapped,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Store {
    pub(crate) lexicons: BTreeMap<String, LexiconDescriptor>,
    pub(crate) canonical: BTreeMap<LemmaId, CanonicalLemma>,
    pub(crate) next_canonical_id: u64,
    pub(crate) external: BTreeMap<String, BTreeMap<String, ExternalLemma>>,
    pub(crate) mappings: MappingStore,
    pub(crate) corpora: BTreeMap<String, Corpus>,
}

impl Default for Store {
    fn default() -> Self {
        Store::new(RelationWeights::default())
    }
}

impl Store {
    pub fn new(weights: RelationWeights) -> Self {
        let mut lexicons = BTreeMap::new();
        lexicons.insert(
            CANONICAL_NAMESPACE.to_string(),
            LexiconDescriptor::canonical(),
        );
        Store {
            lexicons,
            canonical: BTreeMap::new(),
            next_canonical_id: 1,
            external: BTreeMap::new(),
            mappings: MappingStore::new(weights),
            corpora: BTreeMap::new(),
        }
    }

    pub fn mappings(&self) -> &MappingStore {
        &self.mappings
    }

    pub fn lexicons(&self) -> impl Iterator<Item = &LexiconDescriptor> {
        self.lexicons.values()
    }

    pub fn lexicon(&self, id: &str) -> Option<&LexiconDescriptor> {
        self.lexicons.get(id)
    }

    pub fn canonical(&self, id: LemmaId) -> Option<&CanonicalLemma> {
        self.canonical.get(&id)
    }

    pub fn canonical_lemmas(&self) -> impl Iterator<Item = &CanonicalLemma> {
        self.canonical.values()
    }

    pub fn external(&self, lexicon: &str, local: &str) -> Option<&ExternalLemma> {
        self.external.get(lexicon)?.get(local)
    }

    pub fn external_lemmas(&self, lexicon: &str) -> impl Iterator<Item = &ExternalLemma> {
        self.external
            .get(lexicon)
            .into_iter()
            .flat_map(|m| m.values())
    }

    pub fn lemma(&self, r: &LemmaRef) -> Option<LemmaView<'_>> {
        match r {
            LemmaRef::Canonical(id) => self.canonical.get(id).map(LemmaView::Canonical),
            LemmaRef::External { lexicon, local } => {
                self.external(lexicon, local).map(LemmaView::External)
            }
        }
    }

    /// Lemmas of one lexicon in (local id) order.
    pub fn lemmas_of(&self, lexicon: &str) -> Result<Vec<LemmaView<'_>>, StoreError> {
        if lexicon == CANONICAL_NAMESPACE {
            return Ok(self.canonical.values().map(LemmaView::Canonical).collect());
        }
        if !self.lexicons.contains_key(lexicon) {
            return Err(StoreError::UnknownLexicon(lexicon.to_string()));
        }
        Ok(self
            .external_lemmas(lexicon)
            .map(LemmaView::External)
            .collect())
    }

    fn refresh_count(&mut self, lexicon: &str) {
        let n = if lexicon == CANONICAL_NAMESPACE {
            self.canonical.len()
        } else {
            self.external.get(lexicon).map_or(0, BTreeMap::len)
        };
        if let Some(d) = self.lexicons.get_mut(lexicon) {
            d.lemma_count = n as u64;
        }
    }

    /// Loads lexicon rows. Each row is accepted or reported; the descriptor
    /// is registered even when no row is accepted.
    pub fn ingest_lexicon(
        &mut self,
        descriptor: LexiconDescriptor,
        rows: Vec<(usize, Result<LexiconRecord, String>)>,
        options: IngestOptions,
    ) -> Result<IngestReport, StoreError> {
        let id = descriptor.lexicon_id.clone();
        if !valid_id(&id) {
            return Err(StoreError::InvalidArgument(format!(
                "invalid lexicon id \"{id}\""
            )));
        }
        if id == CANONICAL_NAMESPACE {
            return self.ingest_canonical(descriptor, rows, options);
        }
        if self.lexicons.contains_key(&id) && !options.replace {
            return Err(StoreError::DuplicateLexiconId(id));
        }
        let analyze_options = AnalyzeOptions {
            fold_hamza: options.fold_hamza,
        };
        let strict = options.strict.unwrap_or(false);
        let mut report = IngestReport::default();
        let mut lemmas = BTreeMap::new();
        for (line, row) in rows {
            let record = match row.and_then(|r| r.check_cells().map(|_| r)) {
                Ok(r) => r,
                Err(reason) => {
                    report.reject(line, reason);
                    continue;
                }
            };
            match external_from_record(&id, &record, strict, analyze_options) {
                Ok(lemma) => {
                    if lemmas.contains_key(&lemma.local_id) {
                        report.reject(line, format!("duplicate local id \"{}\"", lemma.local_id));
                    } else {
                        lemmas.insert(lemma.local_id.clone(), lemma);
                        report.accept();
                    }
                }
                Err(errors) => report.reject(line, join_errors(&errors)),
            }
        }
        self.lexicons.insert(
            id.clone(),
            LexiconDescriptor {
                lemma_count: 0,
                ..descriptor
            },
        );
        self.external.insert(id.clone(), lemmas);
        self.refresh_count(&id);
        Ok(report)
    }

    fn ingest_canonical(
        &mut self,
        descriptor: LexiconDescriptor,
        rows: Vec<(usize, Result<LexiconRecord, String>)>,
        options: IngestOptions,
    ) -> Result<IngestReport, StoreError> {
        let analyze_options = AnalyzeOptions {
            fold_hamza: options.fold_hamza,
        };
        let strict = options.strict.unwrap_or(true);
        let mut report = IngestReport::default();
        let mut batch: BTreeMap<LemmaId, (usize, CanonicalLemma)> = BTreeMap::new();
        let existing: BTreeSet<LemmaId> = if options.replace {
            BTreeSet::new()
        } else {
            self.canonical.keys().copied().collect()
        };
        let mut rejected: Vec<(usize, String)> = Vec::new();
        for (line, row) in rows {
            let record = match row.and_then(|r| r.check_cells().map(|_| r)) {
                Ok(r) => r,
                Err(reason) => {
                    rejected.push((line, reason));
                    continue;
                }
            };
            let id = match record.local_id.parse::<u64>() {
                Ok(n) if n > 0 => LemmaId(n),
                _ => {
                    rejected.push((
                        line,
                        format!("local_id \"{}\" is not a positive integer", record.local_id),
                    ));
                    continue;
                }
            };
            if existing.contains(&id) || batch.contains_key(&id) {
                rejected.push((line, format!("duplicate canonical id {id}")));
                continue;
            }
            // in a lexicon file the NOUN_PROP tag itself is the assertion
            let rules = ValidationRules {
                strict,
                all_senses_proper_noun: record.pos == PosTag::NounProp.as_str(),
            };
            match canonical_from_record(&record, id, rules, analyze_options) {
                Ok(lemma) => {
                    batch.insert(id, (line, lemma));
                }
                Err(errors) => rejected.push((line, join_errors(&errors))),
            }
        }
        // counterparts must resolve within the store or the batch
        loop {
            let dangling: Vec<LemmaId> = batch
                .iter()
                .filter(|(_, (_, l))| {
                    l.msa_counterpart
                        .is_some_and(|c| !existing.contains(&c) && !batch.contains_key(&c))
                })
                .map(|(id, _)| *id)
                .collect();
            if dangling.is_empty() {
                break;
            }
            for id in dangling {
                let (line, l) = batch.remove(&id).expect("listed above");
                let c = l.msa_counterpart.expect("filtered");
                rejected.push((
                    line,
                    format!("msa_counterpart: MSA counterpart {c} does not exist"),
                ));
            }
        }
        rejected.sort();
        for (line, reason) in rejected {
            report.reject(line, reason);
        }
        if options.replace {
            self.canonical.clear();
        }
        for (id, (_, lemma)) in batch {
            report.accept();
            self.next_canonical_id = self.next_canonical_id.max(id.0 + 1);
            self.canonical.insert(id, lemma);
        }
        let entry = self
            .lexicons
            .entry(CANONICAL_NAMESPACE.to_string())
            .or_insert_with(LexiconDescriptor::canonical);
        if descriptor.name != CANONICAL_NAMESPACE {
            entry.name = descriptor.name;
        }
        self.refresh_count(CANONICAL_NAMESPACE);
        Ok(report)
    }

    fn check_counterpart(&self, lemma: &CanonicalLemma) -> Option<FieldError> {
        let c = lemma.msa_counterpart?;
        if c != lemma.id && !self.canonical.contains_key(&c) {
            let v = Violation::UnknownMsaCounterpart { id: c.0 };
            return Some(FieldError::new(v.field(), &v));
        }
        None
    }

    fn allocate_id(&mut self) -> LemmaId {
        let id = LemmaId(self.next_canonical_id);
        self.next_canonical_id += 1;
        id
    }

    /// Validates a canonical lemma built from `record` under the next free id
    /// without storing it.
    fn prepare(
        &self,
        record: &LexiconRecord,
        rules: ValidationRules,
        options: AnalyzeOptions,
    ) -> Result<CanonicalLemma, StoreError> {
        let id = LemmaId(self.next_canonical_id);
        let mut lemma =
            canonical_from_record(record, id, rules, options).map_err(StoreError::Validation)?;
        if let Some(e) = self.check_counterpart(&lemma) {
            return Err(StoreError::Validation(vec![e]));
        }
        lemma.id = id;
        Ok(lemma)
    }

    /// Creates a canonical lemma from an external one, then records an AUTO
    /// correspondence between the two.
    pub fn adopt_as_qabas(
        &mut self,
        source: &LemmaRef,
        overrides: &LemmaOverrides,
    ) -> Result<(LemmaId, CorrespondenceId), StoreError> {
        let LemmaRef::External { lexicon, local } = source else {
            return Err(StoreError::InvalidArgument(format!(
                "{source} is already canonical"
            )));
        };
        let ext = self
            .external(lexicon, local)
            .ok_or_else(|| StoreError::UnknownLemma(source.clone()))?;
        let mut record = record_from_external(ext);
        record.extra.clear();
        if record.spellings.is_empty() {
            let f = &ext.forms;
            let by_category = match ext.pos.map(PosTag::category) {
                Some(PosCategory::Verb) => [&f.pv, &f.iv, &f.cv],
                _ => [&f.singulars, &f.pv, &f.plurals],
            };
            record.spellings = by_category
                .into_iter()
                .find(|s| !s.is_empty())
                .map(texts)
                .unwrap_or_default();
        }
        let o = overrides;
        let set = |slot: &mut String, value: &Option<String>| {
            if let Some(v) = value {
                *slot = v.clone();
            }
        };
        if let Some(s) = &o.spellings {
            record.spellings = s.clone();
        }
        set(&mut record.pos, &o.pos);
        set(&mut record.gender, &o.gender);
        set(&mut record.number, &o.number);
        set(&mut record.aspect, &o.aspect);
        set(&mut record.person, &o.person);
        set(&mut record.augmentation, &o.augmentation);
        set(&mut record.transitivity, &o.transitivity);
        set(&mut record.dialect, &o.dialect);
        if let Some(c) = o.msa_counterpart {
            record.msa_counterpart = c.to_string();
        }
        let rules = ValidationRules {
            strict: o.strict.unwrap_or(true),
            all_senses_proper_noun: o.all_senses_proper_noun,
        };
        let lemma = self.prepare(&record, rules, AnalyzeOptions::default())?;
        let id = self.allocate_id();
        self.canonical.insert(id, lemma);
        self.refresh_count(CANONICAL_NAMESPACE);
        let cid = self.mappings.add_auto(
            LemmaRef::Canonical(id),
            source.clone(),
            Provenance::Adoption,
        )?;
        Ok((id, cid))
    }

    /// Adopts every lemma of an external lexicon that passes validation.
    pub fn adopt_all(
        &mut self,
        lexicon: &str,
        overrides: &LemmaOverrides,
    ) -> Result<IngestReport, StoreError> {
        if lexicon == CANONICAL_NAMESPACE || !self.external.contains_key(lexicon) {
            return Err(StoreError::UnknownLexicon(lexicon.to_string()));
        }
        let refs: Vec<LemmaRef> = self
            .external_lemmas(lexicon)
            .map(ExternalLemma::lemma_ref)
            .collect();
        let mut report = IngestReport::default();
        for (i, r) in refs.iter().enumerate() {
            match self.adopt_as_qabas(r, overrides) {
                Ok(_) => report.accept(),
                Err(e) => report.reject(i + 1, format!("{r}: {e}")),
            }
        }
        Ok(report)
    }

    /// Validates and stores a manually created canonical lemma.
    pub fn insert_manual_lemma(&mut self, new: &NewLemma) -> Result<Inserted, StoreError> {
        let rules = ValidationRules {
            strict: new.strict.unwrap_or(true),
            all_senses_proper_noun: new.all_senses_proper_noun,
        };
        let lemma = self.prepare(&new.record(), rules, AnalyzeOptions::default())?;
        let warning = lemma.first_spelling().and_then(|first| {
            self.canonical
                .values()
                .find(|other| {
                    other.pos == lemma.pos
                        && other
                            .first_spelling()
                            .is_some_and(|s| diacritic_compatible(s, first))
                })
                .map(|other| DuplicateSpellingWarning {
                    existing: other.id.0,
                    spelling: other
                        .first_spelling()
                        .map(|s| s.raw().to_string())
                        .unwrap_or_default(),
                })
        });
        let id = self.allocate_id();
        self.canonical.insert(id, lemma);
        self.refresh_count(CANONICAL_NAMESPACE);
        Ok(Inserted { id: id.0, warning })
    }

    /// Lemmas with at least one confirmed correspondence.
    fn confirmed_refs(&self) -> BTreeSet<&LemmaRef> {
        let mut out = BTreeSet::new();
        for c in self
            .mappings
            .iter()
            .filter(|c| c.status == Status::Confirmed)
        {
            out.insert(&c.l1);
            out.insert(&c.l2);
        }
        out
    }

    pub fn summary(&self, r: &LemmaRef) -> Option<LemmaSummary> {
        let view = self.lemma(r)?;
        let mapped = self
            .mappings
            .iter()
            .any(|c| c.status == Status::Confirmed && c.involves(r));
        Some(view.summary(mapped))
    }

    /// Lemmas with a form compatible with `query`, in (lexicon, local id)
    /// order. Without a query every lemma passing the filters is listed.
    pub fn search_lemmas(
        &self,
        query: Option<&str>,
        filters: &SearchFilters,
        mode: MatchMode,
        page: usize,
        page_size: usize,
    ) -> Result<Page<LemmaSummary>, StoreError> {
        let query = match query.map(str::trim).filter(|q| !q.is_empty()) {
            Some(q) => {
                if q.contains(char::is_whitespace) {
                    return Err(StoreError::InvalidQuery(format!(
                        "\"{q}\" is more than one word"
                    )));
                }
                Some(analyze(q).map_err(|e| StoreError::InvalidQuery(format!("\"{q}\": {e}")))?)
            }
            None => None,
        };
        let page = page.max(1);
        let page_size = page_size.clamp(1, MAX_PAGE_SIZE);
        let confirmed = self.confirmed_refs();
        let mut lexicon_ids: Vec<&str> = self.lexicons.keys().map(String::as_str).collect();
        if let Some(l) = &filters.lexicon {
            if !self.lexicons.contains_key(l) {
                return Err(StoreError::UnknownLexicon(l.clone()));
            }
            lexicon_ids.retain(|id| id == l);
        }
        let matches = |view: &LemmaView<'_>| match &query {
            None => true,
            Some(q) => view.searchable().any(|w| match mode {
                MatchMode::Exact => diacritic_compatible(q, w),
                MatchMode::Prefix => prefix_compatible(q, w),
            }),
        };
        let mut hits = Vec::new();
        for lexicon in lexicon_ids {
            for view in self.lemmas_of(lexicon)? {
                if filters.pos.is_some() && view.pos() != filters.pos {
                    continue;
                }
                let r = view.lemma_ref();
                let mapped = confirmed.contains(&r);
                if filters.mapped.is_some_and(|m| m != mapped) {
                    continue;
                }
                if matches(&view) {
                    hits.push((view, mapped));
                }
            }
        }
        let total = hits.len();
        let items = hits
            .into_iter()
            .skip((page - 1).saturating_mul(page_size))
            .take(page_size)
            .map(|(v, mapped)| v.summary(mapped))
            .collect();
        Ok(Page {
            page,
            page_size,
            total,
            items,
        })
    }

    /// Runs h1/h2 discovery between two lexicons and records an AUTO
    /// correspondence for every new matching pair.
    pub fn automap(&mut self, source: &str, target: &str) -> Result<CandidateBatch, StoreError> {
        let started = Instant::now();
        if source == target {
            return Err(StoreError::InvalidArgument(
                "source and target lexicons must differ".into(),
            ));
        }
        let (pairs, discovery_stats) = {
            let src = self.lemmas_of(source)?;
            let tgt = self.lemmas_of(target)?;
            let profile = |v: &LemmaView<'_>| match v {
                LemmaView::Canonical(l) => l.match_profile(),
                LemmaView::External(l) => l.match_profile(),
            };
            let sp: Vec<_> = src.iter().map(profile).collect();
            let tp: Vec<_> = tgt.iter().map(profile).collect();
            let d = discover(&sp, &tp);
            let pairs: Vec<(LemmaRef, LemmaRef, Provenance)> = d
                .pairs
                .iter()
                .map(|p| {
                    (
                        src[p.source].lemma_ref(),
                        tgt[p.target].lemma_ref(),
                        p.heuristic.into(),
                    )
                })
                .collect();
            (pairs, d.stats)
        };
        let DiscoveryStats {
            blocks,
            pairs_compared,
        } = discovery_stats;
        let mut stats = BatchStats {
            pairs_compared,
            blocks,
            matched: pairs.len() as u64,
            ..Default::default()
        };
        let mut candidates = Vec::new();
        for (l1, l2, provenance) in pairs {
            if self.mappings.has_any(&l1, &l2) {
                stats.skipped_existing += 1;
                continue;
            }
            let id = self.mappings.add_auto(l1, l2, provenance)?;
            candidates.push(self.mappings.get(id).expect("just added").clone());
        }
        stats.elapsed_ms = started.elapsed().as_millis() as u64;
        Ok(CandidateBatch {
            source: source.to_string(),
            target: target.to_string(),
            candidates,
            stats,
        })
    }

    pub fn review(
        &mut self,
        id: CorrespondenceId,
        decision: Decision,
        reviewer: &str,
        force: bool,
    ) -> Result<Correspondence, StoreError> {
        Ok(self.mappings.review(id, decision, reviewer, force)?.clone())
    }

    pub fn manual_map(
        &mut self,
        l1: LemmaRef,
        l2: LemmaRef,
        relation: RelationCode,
        reviewer: &str,
    ) -> Result<Correspondence, StoreError> {
        for r in [&l1, &l2] {
            if self.lemma(r).is_none() {
                return Err(StoreError::UnknownLemma(r.clone()));
            }
        }
        Ok(self
            .mappings
            .manual_map(l1, l2, relation, reviewer)?
            .clone())
    }

    pub fn mapping_row(c: &Correspondence) -> MappingRow {
        MappingRow {
            l1_ref: c.l1.to_string(),
            l2_ref: c.l2.to_string(),
            relation_code: c.relation.code.as_str().to_string(),
            precision: c.relation.precision.percent(),
            status: c.status.as_str().to_string(),
            provenance: c.provenance.as_str().to_string(),
            reviewer: c.reviewer.clone().unwrap_or_default(),
            timestamp: c.timestamp,
        }
    }

    fn record_from_row(&self, row: &MappingRow) -> Result<CorrespondenceRecord, String> {
        let l1: LemmaRef = row.l1_ref.parse().map_err(|e| format!("{e}"))?;
        let l2: LemmaRef = row.l2_ref.parse().map_err(|e| format!("{e}"))?;
        let relation: RelationCode = row.relation_code.parse().map_err(|e| format!("{e}"))?;
        let status = Status::parse(&row.status)
            .ok_or_else(|| format!("unknown status \"{}\"", row.status))?;
        let provenance = Provenance::parse(&row.provenance)
            .ok_or_else(|| format!("unknown provenance \"{}\"", row.provenance))?;
        let expected = self.mappings.relation(relation).precision.percent();
        if row.precision != expected {
            return Err(format!(
                "precision {} does not match the configured {expected} for {relation}",
                row.precision
            ));
        }
        for r in [&l1, &l2] {
            if self.lemma(r).is_none() {
                return Err(format!("unknown lemma {r}"));
            }
        }
        Ok(CorrespondenceRecord {
            l1,
            l2,
            relation,
            status,
            provenance,
            reviewer: Some(row.reviewer.clone()).filter(|s| !s.is_empty()),
            timestamp: row.timestamp,
        })
    }

    /// Applies exported mapping rows; identical rows change nothing.
    pub fn import_mappings(
        &mut self,
        rows: Vec<(usize, Result<MappingRow, String>)>,
    ) -> ImportReport {
        let mut report = ImportReport::default();
        for (line, row) in rows {
            report.total += 1;
            let outcome = row
                .and_then(|r| self.record_from_row(&r))
                .and_then(|rec| self.mappings.import(rec).map_err(|e| e.to_string()));
            match outcome {
                Ok(ImportOutcome::Unchanged) => report.unchanged += 1,
                Ok(ImportOutcome::Created(_)) => report.created += 1,
                Ok(ImportOutcome::Updated(_)) => report.updated += 1,
                Err(reason) => report
                    .rejected
                    .push(crate::error::RowError { line, reason }),
            }
        }
        report
    }

    pub fn export_mappings(&self, format: Format) -> String {
        let mut out = String::new();
        if format == Format::Tsv {
            push_row(&mut out, &MAPPING_COLUMNS);
        }
        for c in self.mappings.iter() {
            let row = Store::mapping_row(c);
            match format {
                Format::Tsv => push_row(&mut out, &row.cells()),
                Format::Jsonl => push_json(&mut out, &row),
            }
        }
        out
    }

    pub fn lexicon_records(&self, lexicon: &str) -> Result<Vec<LexiconRecord>, StoreError> {
        Ok(self
            .lemmas_of(lexicon)?
            .into_iter()
            .map(|v| match v {
                LemmaView::Canonical(l) => record_from_canonical(l),
                LemmaView::External(l) => record_from_external(l),
            })
            .collect())
    }

    pub fn export_lexicon(&self, lexicon: &str, format: Format) -> Result<String, StoreError> {
        let records = self.lexicon_records(lexicon)?;
        let mut out = String::new();
        match format {
            Format::Tsv => {
                let extra: Vec<String> = records
                    .iter()
                    .flat_map(|r| r.extra.keys().cloned())
                    .collect::<BTreeSet<_>>()
                    .into_iter()
                    .collect();
                let header: Vec<String> = LEXICON_COLUMNS
                    .iter()
                    .map(|s| s.to_string())
                    .chain(extra.iter().cloned())
                    .collect();
                push_row(&mut out, &header);
                for r in &records {
                    push_row(&mut out, &r.cells(&extra));
                }
            }
            Format::Jsonl => {
                for r in &records {
                    push_json(&mut out, r);
                }
            }
        }
        Ok(out)
    }

    pub fn relation_counts(
        &self,
        scope: Option<(&str, &str)>,
    ) -> Result<RelationCounts, StoreError> {
        if let Some((a, b)) = scope {
            for l in [a, b] {
                if !self.lexicons.contains_key(l) {
                    return Err(StoreError::UnknownLexicon(l.to_string()));
                }
            }
        }
        Ok(self.mappings.relation_counts(scope))
    }

    /// Lemma counts per POS for each source plus the canonical lexicon.
    pub fn pos_coverage(&self, sources: &[String]) -> Result<PosCoverage, StoreError> {
        let mut columns: Vec<String> = Vec::new();
        for s in sources {
            if s == CANONICAL_NAMESPACE {
                continue;
            }
            if !self.external.contains_key(s) {
                return Err(StoreError::UnknownLexicon(s.clone()));
            }
            columns.push(s.clone());
        }
        columns.push(CANONICAL_NAMESPACE.to_string());
        let counts: Vec<BTreeMap<Option<PosTag>, u64>> = columns
            .iter()
            .map(|c| {
                let mut m: BTreeMap<Option<PosTag>, u64> = BTreeMap::new();
                for v in self.lemmas_of(c).expect("checked above") {
                    *m.entry(v.pos()).or_default() += 1;
                }
                m
            })
            .collect();
        Ok(PosCoverage::from_counts(columns, &counts))
    }

    /// Each reviewer's most recent label per lemma pair, from the audit trail.
    pub fn review_labels(&self) -> BTreeMap<String, BTreeMap<Item, String>> {
        let mut out: BTreeMap<String, BTreeMap<Item, String>> = BTreeMap::new();
        for AuditEntry {
            correspondence,
            reviewer,
            status,
            relation,
            ..
        } in self.mappings.audit()
        {
            let Some(c) = self.mappings.get(*correspondence) else {
                continue;
            };
            let label = match status {
                Status::Rejected => REJECT_LABEL.to_string(),
                _ => relation.as_str().to_string(),
            };
            out.entry(reviewer.clone())
                .or_default()
                .insert(item(&c.l1, &c.l2), label);
        }
        out
    }

    pub fn iaa(&self) -> IaaReport {
        iaa_from_labels(&self.review_labels())
    }
}
