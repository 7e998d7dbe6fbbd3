//! Lemma-linking primitives for Arabic lexical resources.
//!
//! Everything here is pure computation over owned values and builds without
//! `std`: word-form analysis and diacritic compatibility, the lemma model
//! and its guideline checks, the h1/h2 matching rules with blocked candidate
//! discovery, the correspondence review workflow, and agreement and
//! coverage arithmetic. IO, file formats and the service live in the
//! `lemmalink` crate.

#![no_std]

extern crate alloc;

pub mod agreement;
pub mod coverage;
pub mod heuristics;
pub mod lemma;
pub mod mapping;
pub mod orthography;
pub mod pos;
pub mod relation;

pub use agreement::{cohen_kappa, kappa_from_pairs, pairwise_iaa, Kappa, KappaError};
pub use coverage::{PosCoverage, Ratio};
pub use heuristics::{
    discover, h1_verb_match, h2_noun_match, match_pair, Discovery, Heuristic, HeuristicError,
};
pub use lemma::{
    Aspect, Augmentation, CanonicalLemma, ExternalLemma, FormSets, Gender, GrammaticalNumber,
    LemmaId, LemmaRef, MatchProfile, Person, Transitivity, ValidationRules, Variety, Violation,
    CANONICAL_NAMESPACE,
};
pub use mapping::{
    filter_by_precision, Correspondence, CorrespondenceId, Decision, MappingError, MappingStore,
    Provenance, Status,
};
pub use orthography::{
    analyze, analyze_with, diacritic_compatible, prefix_compatible, sets_compatible, skeleton_key,
    AnalyzeOptions, AnalyzedWord, DiacriticCluster, OrthographyError, Vowel, WordSet,
};
pub use pos::{PosCategory, PosTag};
pub use relation::{MappingRelation, Precision, RelationCode, RelationWeights};
