//! Lemma data model: canonical entries, external-lexicon entries, their
//! morphological features, and the guideline checks canonical entries obey.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::orthography::{AnalyzedWord, WordSet};
use crate::pos::{PosCategory, PosTag};

/// Namespace prefix of canonical lemma references (`qabas:<id>`).
pub const CANONICAL_NAMESPACE: &str = "qabas";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid value \"{value}\" for {feature}")]
pub struct InvalidFeature {
    pub feature: &'static str,
    pub value: String,
}

macro_rules! keyword_enum {
    ($(#[$meta:meta])* $name:ident, $feature:literal { $($variant:ident => $kw:literal),* $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
        pub enum $name {
            $($variant,)*
            #[default]
            NotApplicable,
        }

        impl $name {
            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $kw,)*
                    $name::NotApplicable => "NA",
                }
            }

            pub fn is_na(self) -> bool {
                self == $name::NotApplicable
            }
        }

        impl FromStr for $name {
            type Err = InvalidFeature;

            /// Empty cells, `-` and `NA` all read as not applicable.
            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s.trim() {
                    $($kw => Ok($name::$variant),)*
                    "" | "-" | "NA" => Ok($name::NotApplicable),
                    other => Err(InvalidFeature { feature: $feature, value: other.to_string() }),
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                serializer.serialize_str(self.as_str())
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
                let s = String::deserialize(deserializer)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

keyword_enum!(Gender, "gender" { Masc => "MASC", Fem => "FEM" });
keyword_enum!(GrammaticalNumber, "number" { Sing => "SING", Dual => "DUAL", Plural => "PLURAL" });
keyword_enum!(Aspect, "aspect" { Pv => "PV", Iv => "IV", Cv => "CV", PvPass => "PV_PASS", IvPass => "IV_PASS" });
keyword_enum!(Person, "person" { First => "1", Second => "2", Third => "3" });
keyword_enum!(Augmentation, "augmentation" { Augmented => "AUGMENTED", Unaugmented => "UNAUGMENTED" });
keyword_enum!(Transitivity, "transitivity" { Transitive => "TRANSITIVE", Intransitive => "INTRANSITIVE" });

impl Aspect {
    /// The aspect implied by a verb tag; `NotApplicable` for everything else.
    pub fn for_pos(pos: PosTag) -> Aspect {
        match pos {
            PosTag::Pv => Aspect::Pv,
            PosTag::Iv => Aspect::Iv,
            PosTag::Cv => Aspect::Cv,
            PosTag::PvPass => Aspect::PvPass,
            PosTag::IvPass => Aspect::IvPass,
            _ => Aspect::NotApplicable,
        }
    }
}

/// Language variety of a lemma: MSA, Classical, or a named dialect.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Variety {
    Msa,
    Classical,
    Dialect(String),
}

impl Variety {
    pub fn is_dialect(&self) -> bool {
        matches!(self, Variety::Dialect(_))
    }
}

impl fmt::Display for Variety {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variety::Msa => f.write_str("MSA"),
            Variety::Classical => f.write_str("Classical"),
            Variety::Dialect(name) => f.write_str(name),
        }
    }
}

impl FromStr for Variety {
    type Err = InvalidFeature;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() || s.contains(['\t', '\n', '|', ';']) {
            return Err(InvalidFeature {
                feature: "dialect",
                value: s.to_string(),
            });
        }
        Ok(match s {
            "MSA" => Variety::Msa,
            "Classical" => Variety::Classical,
            other => Variety::Dialect(other.to_string()),
        })
    }
}

impl Serialize for Variety {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Variety {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Opaque canonical lemma identifier, assigned monotonically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LemmaId(pub u64);

impl fmt::Display for LemmaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Address of a lemma anywhere in the graph.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LemmaRef {
    Canonical(LemmaId),
    External { lexicon: String, local: String },
}

impl LemmaRef {
    pub fn external(lexicon: impl Into<String>, local: impl Into<String>) -> Self {
        LemmaRef::External {
            lexicon: lexicon.into(),
            local: local.into(),
        }
    }

    pub fn lexicon_id(&self) -> &str {
        match self {
            LemmaRef::Canonical(_) => CANONICAL_NAMESPACE,
            LemmaRef::External { lexicon, .. } => lexicon,
        }
    }

    pub fn canonical_id(&self) -> Option<LemmaId> {
        match self {
            LemmaRef::Canonical(id) => Some(*id),
            LemmaRef::External { .. } => None,
        }
    }
}

impl fmt::Display for LemmaRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LemmaRef::Canonical(id) => write!(f, "{CANONICAL_NAMESPACE}:{id}"),
            LemmaRef::External { lexicon, local } => write!(f, "{lexicon}:{local}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid lemma reference \"{0}\"")]
pub struct InvalidLemmaRef(pub String);

impl FromStr for LemmaRef {
    type Err = InvalidLemmaRef;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || InvalidLemmaRef(s.to_string());
        let (lexicon, local) = s.split_once(':').ok_or_else(bad)?;
        if lexicon.is_empty() || local.is_empty() || s.contains(char::is_whitespace) {
            return Err(bad());
        }
        if lexicon == CANONICAL_NAMESPACE {
            let id = local.parse::<u64>().map_err(|_| bad())?;
            return Ok(LemmaRef::Canonical(LemmaId(id)));
        }
        Ok(LemmaRef::external(lexicon, local))
    }
}

impl Serialize for LemmaRef {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for LemmaRef {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Inflected-form sets of a lemma.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormSets {
    #[serde(default)]
    pub singulars: WordSet,
    #[serde(default)]
    pub duals: WordSet,
    #[serde(default)]
    pub plurals: WordSet,
    #[serde(default)]
    pub pv: WordSet,
    #[serde(default)]
    pub iv: WordSet,
    #[serde(default)]
    pub cv: WordSet,
}

impl FormSets {
    pub fn is_empty(&self) -> bool {
        self.all().iter().all(|s| s.is_empty())
    }

    /// The six sets in column order: singulars, duals, plurals, pv, iv, cv.
    pub fn all(&self) -> [&WordSet; 6] {
        [
            &self.singulars,
            &self.duals,
            &self.plurals,
            &self.pv,
            &self.iv,
            &self.cv,
        ]
    }
}

/// An entry of the canonical lexicon.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CanonicalLemma {
    pub id: LemmaId,
    /// Alternative spellings, most frequent first.
    pub spellings: Vec<AnalyzedWord>,
    pub pos: PosTag,
    #[serde(default)]
    pub gender: Gender,
    #[serde(default)]
    pub number: GrammaticalNumber,
    #[serde(default)]
    pub aspect: Aspect,
    #[serde(default)]
    pub person: Person,
    #[serde(default)]
    pub roots: WordSet,
    #[serde(default)]
    pub augmentation: Augmentation,
    #[serde(default)]
    pub transitivity: Transitivity,
    #[serde(default)]
    pub dialect: Option<Variety>,
    #[serde(default)]
    pub msa_counterpart: Option<LemmaId>,
    #[serde(default)]
    pub forms: FormSets,
}

/// One guideline violation found on a canonical lemma.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Error)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Violation {
    #[error("lemma has no spelling")]
    NoSpelling,
    #[error("spelling \"{spelling}\" is not fully diacritized (letters {positions:?})")]
    NotFullyDiacritized {
        spelling: String,
        positions: Vec<usize>,
    },
    #[error("NOUN_PROP requires every sense to be a proper noun")]
    ProperNounNotAsserted,
    #[error("verb lemma needs an aspect")]
    MissingAspect,
    #[error("aspect {aspect} set on a non-verb lemma")]
    AspectOnNonVerb { aspect: String },
    #[error("dialect lemma needs an MSA counterpart")]
    MissingMsaCounterpart,
    #[error("MSA counterpart {id} does not exist")]
    UnknownMsaCounterpart { id: u64 },
    #[error("lemma cannot be its own MSA counterpart")]
    SelfCounterpart,
    #[error("POS is required")]
    MissingPos,
}

impl Violation {
    /// Field the violation is attached to, for per-field error reporting.
    pub fn field(&self) -> &'static str {
        match self {
            Violation::NoSpelling | Violation::NotFullyDiacritized { .. } => "spellings",
            Violation::ProperNounNotAsserted | Violation::MissingPos => "pos",
            Violation::MissingAspect | Violation::AspectOnNonVerb { .. } => "aspect",
            Violation::MissingMsaCounterpart
            | Violation::UnknownMsaCounterpart { .. }
            | Violation::SelfCounterpart => "msa_counterpart",
        }
    }
}

/// Context for validating a canonical lemma.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValidationRules {
    /// Require full diacritization of every spelling.
    pub strict: bool,
    /// The source record asserts all senses are proper nouns.
    pub all_senses_proper_noun: bool,
}

impl Default for ValidationRules {
    fn default() -> Self {
        ValidationRules {
            strict: true,
            all_senses_proper_noun: false,
        }
    }
}

impl CanonicalLemma {
    pub fn lemma_ref(&self) -> LemmaRef {
        LemmaRef::Canonical(self.id)
    }

    /// Checks the lemma against the guideline invariants that do not need the
    /// rest of the store. Counterpart existence is checked by the caller.
    pub fn violations(&self, rules: ValidationRules) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.spellings.is_empty() {
            out.push(Violation::NoSpelling);
        }
        if rules.strict {
            for s in &self.spellings {
                let positions = s.unvocalized_positions();
                if !positions.is_empty() {
                    out.push(Violation::NotFullyDiacritized {
                        spelling: s.raw().to_string(),
                        positions,
                    });
                }
            }
        }
        if self.pos == PosTag::NounProp && !rules.all_senses_proper_noun {
            out.push(Violation::ProperNounNotAsserted);
        }
        let is_verb = self.pos.category() == PosCategory::Verb;
        match (is_verb, self.aspect.is_na()) {
            (true, true) => out.push(Violation::MissingAspect),
            (false, false) => out.push(Violation::AspectOnNonVerb {
                aspect: self.aspect.as_str().to_string(),
            }),
            _ => {}
        }
        if self.dialect.as_ref().is_some_and(Variety::is_dialect) && self.msa_counterpart.is_none()
        {
            out.push(Violation::MissingMsaCounterpart);
        }
        if self.msa_counterpart == Some(self.id) {
            out.push(Violation::SelfCounterpart);
        }
        out
    }

    pub fn first_spelling(&self) -> Option<&AnalyzedWord> {
        self.spellings.first()
    }

    pub fn match_profile(&self) -> MatchProfile {
        let mut forms = self.forms.clone();
        let spellings: WordSet = self.spellings.iter().cloned().collect();
        match self.aspect {
            Aspect::Pv | Aspect::PvPass => forms.pv.extend_from(&spellings),
            Aspect::Iv | Aspect::IvPass => forms.iv.extend_from(&spellings),
            Aspect::Cv => forms.cv.extend_from(&spellings),
            Aspect::NotApplicable => {
                if self.pos.category() == PosCategory::Nominal {
                    forms.singulars.extend_from(&spellings);
                }
            }
        }
        MatchProfile {
            category: Some(self.pos.category()),
            forms,
            roots: self.roots.clone(),
        }
    }
}

/// An entry of an external (read-only) lexicon.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExternalLemma {
    pub lexicon_id: String,
    pub local_id: String,
    pub pos: Option<PosTag>,
    /// Headword spellings as given by the source, used for search and display.
    #[serde(default)]
    pub headwords: Vec<AnalyzedWord>,
    #[serde(default)]
    pub forms: FormSets,
    #[serde(default)]
    pub roots: WordSet,
    /// Source-specific attributes kept verbatim (gender, number, voice ...).
    #[serde(default)]
    pub free_features: BTreeMap<String, String>,
}

impl ExternalLemma {
    pub fn lemma_ref(&self) -> LemmaRef {
        LemmaRef::external(self.lexicon_id.clone(), self.local_id.clone())
    }

    /// At least one form set or the roots must be non-empty.
    pub fn has_evidence(&self) -> bool {
        !self.forms.is_empty() || !self.roots.is_empty()
    }

    pub fn match_profile(&self) -> MatchProfile {
        MatchProfile {
            category: self.pos.map(PosTag::category),
            forms: self.forms.clone(),
            roots: self.roots.clone(),
        }
    }
}

/// The part of a lemma the mapping heuristics look at. `category` is `None`
/// for lemmas whose source gives no POS.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MatchProfile {
    pub category: Option<PosCategory>,
    pub forms: FormSets,
    pub roots: WordSet,
}

impl MatchProfile {
    /// Verb category, or no POS with perfective forms.
    pub fn has_verbal_evidence(&self) -> bool {
        match self.category {
            Some(c) => c == PosCategory::Verb,
            None => !self.forms.pv.is_empty(),
        }
    }

    /// Nominal category, or no POS with singular forms.
    pub fn has_nominal_evidence(&self) -> bool {
        match self.category {
            Some(c) => c == PosCategory::Nominal,
            None => !self.forms.singulars.is_empty(),
        }
    }
}
