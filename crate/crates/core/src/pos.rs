//! The 41-tag part-of-speech inventory and its three categories.

use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PosCategory {
    Nominal,
    Verb,
    Functional,
}

impl PosCategory {
    pub const ALL: [PosCategory; 3] = [
        PosCategory::Nominal,
        PosCategory::Verb,
        PosCategory::Functional,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PosCategory::Nominal => "NOMINAL",
            PosCategory::Verb => "VERB",
            PosCategory::Functional => "FUNCTIONAL",
        }
    }

    /// Tags of this category, in table order.
    pub fn tags(self) -> impl Iterator<Item = PosTag> {
        PosTag::ALL
            .into_iter()
            .filter(move |t| t.category() == self)
    }
}

impl fmt::Display for PosCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

macro_rules! pos_tags {
    ($($variant:ident => $name:literal, $cat:ident;)*) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum PosTag {
            $($variant,)*
        }

        impl PosTag {
            pub const ALL: [PosTag; pos_tags!(@count $($variant)*)] = [$(PosTag::$variant,)*];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(PosTag::$variant => $name,)*
                }
            }

            pub fn category(self) -> PosCategory {
                match self {
                    $(PosTag::$variant => PosCategory::$cat,)*
                }
            }
        }

        impl FromStr for PosTag {
            type Err = UnknownPosTag;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($name => Ok(PosTag::$variant),)*
                    _ => Err(UnknownPosTag),
                }
            }
        }
    };
    (@count) => { 0 };
    (@count $head:ident $($tail:ident)*) => { 1 + pos_tags!(@count $($tail)*) };
}

pos_tags! {
    Noun => "NOUN", Nominal;
    NounProp => "NOUN_PROP", Nominal;
    Adj => "ADJ", Nominal;
    AdjComp => "ADJ_COMP", Nominal;
    AdjNum => "ADJ_NUM", Nominal;
    NounNum => "NOUN_NUM", Nominal;
    NounQuant => "NOUN_QUANT", Nominal;
    Digit => "DIGIT", Nominal;
    NounVoice => "NOUN_VOICE", Nominal;
    Abbrev => "ABBREV", Nominal;
    Pv => "PV", Verb;
    Iv => "IV", Verb;
    Cv => "CV", Verb;
    PvPass => "PV_PASS", Verb;
    IvPass => "IV_PASS", Verb;
    Pron => "PRON", Functional;
    DemPron => "DEM_PRON", Functional;
    Emoji => "EMOJI", Functional;
    RelPron => "REL_PRON", Functional;
    RelAdv => "REL_ADV", Functional;
    Adv => "ADV", Functional;
    InterrogPart => "INTERROG_PART", Functional;
    InterrogAdv => "INTERROG_ADV", Functional;
    Prep => "PREP", Functional;
    Conj => "CONJ", Functional;
    InterrogPron => "INTERROG_PRON", Functional;
    Part => "PART", Functional;
    RestricPart => "RESTRIC_PART", Functional;
    Punc => "PUNC", Functional;
    Interj => "INTERJ", Functional;
    FocusPart => "FOCUS_PART", Functional;
    Det => "DET", Functional;
    VerbTag => "VERB", Functional;
    VocPart => "VOC_PART", Functional;
    ProgPart => "PROG_PART", Functional;
    SubConj => "SUB_CONJ", Functional;
    VerbPart => "VERB_PART", Functional;
    FutPart => "FUT_PART", Functional;
    ExclamPron => "EXCLAM_PRON", Functional;
    PseudoVerb => "PSEUDO_VERB", Functional;
    NegPart => "NEG_PART", Functional;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("unknown POS tag")]
pub struct UnknownPosTag;

impl fmt::Display for PosTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for PosTag {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for PosTag {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = alloc::string::String::deserialize(deserializer)?;
        s.parse()
            .map_err(|_| serde::de::Error::custom(alloc::format!("unknown POS tag \"{s}\"")))
    }
}
