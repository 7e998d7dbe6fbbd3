//! Decomposition and comparison of (partially) diacritized Arabic word forms.
//!
//! A word is split into a letter skeleton and one [`DiacriticCluster`] per
//! letter. Two words are *diacritic-compatible* when their skeletons are
//! identical and no aligned pair of clusters contradicts; two sets of words
//! are compatible when some member of one is compatible with some member of
//! the other.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub const TATWEEL: char = '\u{0640}';
pub const SHADDA: char = '\u{0651}';

/// Vowel marks. Tanween forms count as vowels: a cluster carries at most one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Vowel {
    Fatha,
    Damma,
    Kasra,
    Sukun,
    Fathatan,
    Dammatan,
    Kasratan,
}

impl Vowel {
    pub fn from_char(c: char) -> Option<Vowel> {
        Some(match c {
            '\u{064B}' => Vowel::Fathatan,
            '\u{064C}' => Vowel::Dammatan,
            '\u{064D}' => Vowel::Kasratan,
            '\u{064E}' => Vowel::Fatha,
            '\u{064F}' => Vowel::Damma,
            '\u{0650}' => Vowel::Kasra,
            '\u{0652}' => Vowel::Sukun,
            _ => return None,
        })
    }

    pub fn as_char(self) -> char {
        match self {
            Vowel::Fathatan => '\u{064B}',
            Vowel::Dammatan => '\u{064C}',
            Vowel::Kasratan => '\u{064D}',
            Vowel::Fatha => '\u{064E}',
            Vowel::Damma => '\u{064F}',
            Vowel::Kasra => '\u{0650}',
            Vowel::Sukun => '\u{0652}',
        }
    }

    pub const ALL: [Vowel; 7] = [
        Vowel::Fatha,
        Vowel::Damma,
        Vowel::Kasra,
        Vowel::Sukun,
        Vowel::Fathatan,
        Vowel::Dammatan,
        Vowel::Kasratan,
    ];
}

/// The marks written on a single letter.
///
/// Invariants: at most one vowel, and never shadda together with sukun.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct DiacriticCluster {
    shadda: bool,
    vowel: Option<Vowel>,
}

impl DiacriticCluster {
    pub const EMPTY: DiacriticCluster = DiacriticCluster {
        shadda: false,
        vowel: None,
    };

    /// Returns `None` for the forbidden shadda + sukun combination.
    pub fn new(shadda: bool, vowel: Option<Vowel>) -> Option<Self> {
        if shadda && vowel == Some(Vowel::Sukun) {
            return None;
        }
        Some(DiacriticCluster { shadda, vowel })
    }

    pub fn shadda(&self) -> bool {
        self.shadda
    }

    pub fn vowel(&self) -> Option<Vowel> {
        self.vowel
    }

    pub fn is_empty(&self) -> bool {
        !self.shadda && self.vowel.is_none()
    }

    /// Vowels contradict when both are present and differ. Shadda only
    /// contradicts under [`ShaddaPolicy::Strict`].
    fn contradicts(&self, other: &DiacriticCluster, strict_shadda: bool) -> bool {
        if let (Some(a), Some(b)) = (self.vowel, other.vowel) {
            if a != b {
                return true;
            }
        }
        strict_shadda && self.shadda != other.shadda
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrthographyError {
    #[error("empty word")]
    EmptyInput,
    #[error("diacritic {mark:?} at position {position} has no preceding letter")]
    LeadingDiacritic { mark: char, position: usize },
    #[error("two vowel marks on letter '{letter}' at position {position}")]
    DoubleVowel { letter: char, position: usize },
    #[error("shadda repeated on letter '{letter}' at position {position}")]
    DoubleShadda { letter: char, position: usize },
    #[error("shadda combined with sukun on letter '{letter}' at position {position}")]
    ShaddaWithSukun { letter: char, position: usize },
    #[error("non-Arabic character {ch:?} (U+{code:04X}) at position {position}")]
    NonArabicCharacter {
        ch: char,
        code: u32,
        position: usize,
    },
}

/// Letters accepted in a skeleton: the Arabic letter block plus alef wasla
/// and the four extended letters common in loanwords and dialect spelling.
pub fn is_arabic_letter(c: char) -> bool {
    matches!(c,
        '\u{0621}'..='\u{063A}'
        | '\u{0641}'..='\u{064A}'
        | '\u{0671}'
        | '\u{067E}'
        | '\u{0686}'
        | '\u{06A4}'
        | '\u{06AF}')
}

pub fn is_harakah(c: char) -> bool {
    c == SHADDA || Vowel::from_char(c).is_some()
}

fn fold_hamza_seat(c: char) -> char {
    match c {
        'أ' | 'إ' | 'آ' | 'ٱ' => 'ا',
        other => other,
    }
}

/// Analysis switches. Hamza folding maps أ/إ/آ/ٱ onto bare alef.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AnalyzeOptions {
    pub fold_hamza: bool,
}

/// A word form split into base letters and per-letter diacritics.
///
/// Equality and hashing consider only the skeleton and clusters; `raw` keeps
/// the source text for display and export.
#[derive(Clone)]
pub struct AnalyzedWord {
    raw: String,
    skeleton: Vec<char>,
    clusters: Vec<DiacriticCluster>,
}

impl PartialEq for AnalyzedWord {
    fn eq(&self, other: &Self) -> bool {
        self.skeleton == other.skeleton && self.clusters == other.clusters
    }
}

impl Eq for AnalyzedWord {}

impl core::hash::Hash for AnalyzedWord {
    fn hash<H: core::hash::Hasher>(&self, state: &mut H) {
        self.skeleton.hash(state);
        self.clusters.hash(state);
    }
}

impl fmt::Debug for AnalyzedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AnalyzedWord({:?})", self.raw)
    }
}

impl fmt::Display for AnalyzedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.raw)
    }
}

/// Parses `raw` with default options (no hamza folding).
pub fn analyze(raw: &str) -> Result<AnalyzedWord, OrthographyError> {
    analyze_with(raw, AnalyzeOptions::default())
}

pub fn analyze_with(raw: &str, options: AnalyzeOptions) -> Result<AnalyzedWord, OrthographyError> {
    let trimmed = raw.trim();
    if trimmed.is_empty() {
        return Err(OrthographyError::EmptyInput);
    }
    let mut skeleton = Vec::new();
    let mut clusters: Vec<DiacriticCluster> = Vec::new();
    for (position, c) in trimmed.chars().enumerate() {
        if c == TATWEEL {
            continue;
        }
        if is_arabic_letter(c) {
            skeleton.push(if options.fold_hamza {
                fold_hamza_seat(c)
            } else {
                c
            });
            clusters.push(DiacriticCluster::EMPTY);
            continue;
        }
        if !is_harakah(c) {
            return Err(OrthographyError::NonArabicCharacter {
                ch: c,
                code: c as u32,
                position,
            });
        }
        let letter = match skeleton.last() {
            Some(&l) => l,
            None => return Err(OrthographyError::LeadingDiacritic { mark: c, position }),
        };
        let cluster = clusters.last_mut().expect("clusters track skeleton");
        if c == SHADDA {
            if cluster.shadda {
                return Err(OrthographyError::DoubleShadda { letter, position });
            }
            cluster.shadda = true;
        } else {
            let vowel = Vowel::from_char(c).expect("checked by is_harakah");
            if cluster.vowel.is_some() {
                return Err(OrthographyError::DoubleVowel { letter, position });
            }
            cluster.vowel = Some(vowel);
        }
        if cluster.shadda && cluster.vowel == Some(Vowel::Sukun) {
            return Err(OrthographyError::ShaddaWithSukun { letter, position });
        }
    }
    if skeleton.is_empty() {
        return Err(OrthographyError::EmptyInput);
    }
    let mut word = AnalyzedWord {
        raw: String::from(trimmed),
        skeleton,
        clusters,
    };
    if options.fold_hamza {
        // the source spelling no longer describes the stored letters
        word.raw = word.serialize();
    }
    Ok(word)
}

/// Letters that are written without their own vowel in a fully vocalized
/// word: alef forms, and و / ي acting as long vowels after damma / kasra.
fn is_exempt_letter(letter: char, previous: Option<&DiacriticCluster>) -> bool {
    match letter {
        'ا' | 'ى' | 'آ' | 'ٱ' => true,
        'و' => previous.and_then(|c| c.vowel) == Some(Vowel::Damma),
        'ي' => previous.and_then(|c| c.vowel) == Some(Vowel::Kasra),
        _ => false,
    }
}

impl AnalyzedWord {
    /// Builds a word directly from its parts; the raw text is the canonical
    /// serialization. Returns `None` when the lengths differ, a letter is
    /// not an Arabic letter, or a cluster is invalid.
    pub fn from_parts(skeleton: Vec<char>, clusters: Vec<DiacriticCluster>) -> Option<Self> {
        if skeleton.is_empty()
            || skeleton.len() != clusters.len()
            || !skeleton.iter().all(|&c| is_arabic_letter(c))
        {
            return None;
        }
        let mut word = AnalyzedWord {
            raw: String::new(),
            skeleton,
            clusters,
        };
        word.raw = word.serialize();
        Some(word)
    }

    pub fn raw(&self) -> &str {
        &self.raw
    }

    pub fn skeleton(&self) -> &[char] {
        &self.skeleton
    }

    pub fn clusters(&self) -> &[DiacriticCluster] {
        &self.clusters
    }

    pub fn len(&self) -> usize {
        self.skeleton.len()
    }

    pub fn is_empty(&self) -> bool {
        self.skeleton.is_empty()
    }

    /// Canonical text: each letter followed by its vowel, then shadda
    /// (Unicode canonical combining order).
    pub fn serialize(&self) -> String {
        let mut out = String::with_capacity(self.skeleton.len() * 6);
        for (letter, cluster) in self.skeleton.iter().zip(&self.clusters) {
            out.push(*letter);
            if let Some(v) = cluster.vowel {
                out.push(v.as_char());
            }
            if cluster.shadda {
                out.push(SHADDA);
            }
        }
        out
    }

    /// The same letters with every diacritic removed.
    pub fn stripped(&self) -> AnalyzedWord {
        let clusters = alloc::vec![DiacriticCluster::EMPTY; self.skeleton.len()];
        AnalyzedWord::from_parts(self.skeleton.clone(), clusters).expect("skeleton already valid")
    }

    pub fn is_undiacritized(&self) -> bool {
        self.clusters.iter().all(DiacriticCluster::is_empty)
    }

    /// Every letter carries a vowel, the last one included, except alef
    /// forms and long-vowel و / ي.
    pub fn is_fully_diacritized(&self) -> bool {
        self.unvocalized_positions().is_empty()
    }

    /// Positions of letters that break [`Self::is_fully_diacritized`].
    pub fn unvocalized_positions(&self) -> Vec<usize> {
        let mut missing = Vec::new();
        for (i, (&letter, cluster)) in self.skeleton.iter().zip(&self.clusters).enumerate() {
            if cluster.vowel.is_some() {
                continue;
            }
            let previous = if i == 0 {
                None
            } else {
                self.clusters.get(i - 1)
            };
            if !is_exempt_letter(letter, previous) {
                missing.push(i);
            }
        }
        missing
    }
}

impl Serialize for AnalyzedWord {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.raw)
    }
}

impl<'de> Deserialize<'de> for AnalyzedWord {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        analyze(&s).map_err(serde::de::Error::custom)
    }
}

/// Undiacritized skeleton as a string. Equal keys are necessary for
/// compatibility, so the key doubles as a blocking key.
pub fn skeleton_key(word: &AnalyzedWord) -> String {
    word.skeleton.iter().collect()
}

/// How a shadda on one side and its absence on the other is judged.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum ShaddaPolicy {
    /// Missing shadda means "unspecified".
    #[default]
    Lenient,
    /// Shadda mismatches contradict when both words are fully diacritized.
    Strict,
}

pub fn diacritic_compatible(w1: &AnalyzedWord, w2: &AnalyzedWord) -> bool {
    diacritic_compatible_with(w1, w2, ShaddaPolicy::Lenient)
}

pub fn diacritic_compatible_with(
    w1: &AnalyzedWord,
    w2: &AnalyzedWord,
    policy: ShaddaPolicy,
) -> bool {
    if w1.skeleton != w2.skeleton {
        return false;
    }
    let strict_shadda =
        policy == ShaddaPolicy::Strict && w1.is_fully_diacritized() && w2.is_fully_diacritized();
    w1.clusters
        .iter()
        .zip(&w2.clusters)
        .all(|(a, b)| !a.contradicts(b, strict_shadda))
}

/// True iff `prefix` is diacritic-compatible with the first `prefix.len()`
/// letters of `word`. Used for headword search, where a query such as يومي
/// should find يَوْمِيَّة.
pub fn prefix_compatible(prefix: &AnalyzedWord, word: &AnalyzedWord) -> bool {
    let n = prefix.skeleton.len();
    if n == 0 || word.skeleton.len() < n || word.skeleton[..n] != prefix.skeleton[..] {
        return false;
    }
    prefix
        .clusters
        .iter()
        .zip(&word.clusters[..n])
        .all(|(a, b)| !a.contradicts(b, false))
}

/// A collection of word forms with no two members sharing the same raw text.
/// Insertion order is kept so serialization is stable.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WordSet {
    words: Vec<AnalyzedWord>,
}

impl WordSet {
    pub fn new() -> Self {
        WordSet { words: Vec::new() }
    }

    /// Returns false (and leaves the set untouched) on a duplicate raw string.
    pub fn insert(&mut self, word: AnalyzedWord) -> bool {
        if self.words.iter().any(|w| w.raw == word.raw) {
            return false;
        }
        self.words.push(word);
        true
    }

    pub fn remove(&mut self, raw: &str) -> Option<AnalyzedWord> {
        let idx = self.words.iter().position(|w| w.raw == raw)?;
        Some(self.words.remove(idx))
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn iter(&self) -> core::slice::Iter<'_, AnalyzedWord> {
        self.words.iter()
    }

    pub fn as_slice(&self) -> &[AnalyzedWord] {
        &self.words
    }

    /// Adds every member of `other` not already present.
    pub fn extend_from(&mut self, other: &WordSet) {
        for w in other.iter() {
            self.insert(w.clone());
        }
    }
}

impl FromIterator<AnalyzedWord> for WordSet {
    fn from_iter<T: IntoIterator<Item = AnalyzedWord>>(iter: T) -> Self {
        let mut set = WordSet::new();
        for w in iter {
            set.insert(w);
        }
        set
    }
}

impl<'a> IntoIterator for &'a WordSet {
    type Item = &'a AnalyzedWord;
    type IntoIter = core::slice::Iter<'a, AnalyzedWord>;

    fn into_iter(self) -> Self::IntoIter {
        self.words.iter()
    }
}

impl Serialize for WordSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.words.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for WordSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let words = Vec::<AnalyzedWord>::deserialize(deserializer)?;
        Ok(words.into_iter().collect())
    }
}

/// True iff some pair across the two sets is diacritic-compatible.
/// Empty sets are never compatible.
pub fn sets_compatible(w1: &WordSet, w2: &WordSet) -> bool {
    if w1.is_empty() || w2.is_empty() {
        return false;
    }
    // bucket the smaller side by skeleton; only equal skeletons can match
    let (small, large) = if w1.len() <= w2.len() {
        (w1, w2)
    } else {
        (w2, w1)
    };
    let mut buckets: BTreeMap<&[char], Vec<&AnalyzedWord>> = BTreeMap::new();
    for w in small {
        buckets.entry(w.skeleton()).or_default().push(w);
    }
    large.iter().any(|w| {
        buckets
            .get(w.skeleton())
            .is_some_and(|bucket| bucket.iter().any(|b| diacritic_compatible(b, w)))
    })
}
