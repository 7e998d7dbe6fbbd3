//! Mapping relation taxonomy and precision weights.
//!
//! R1–R6 are the relations a reviewer confirms; X1–X5 are finer-grained
//! relations carried with their own weights so low-confidence links can be
//! filtered out.

use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RelationCode {
    /// Same exactly.
    R1,
    /// Same, singular/plural difference.
    R2,
    /// Same, singular/dual difference.
    R3,
    /// Same, masculine/feminine difference.
    R4,
    /// Same, case difference.
    R5,
    /// Same, but as a proper noun.
    R6,
    /// Same forms, some of the meanings.
    X1,
    /// Different wording, same meaning.
    X2,
    /// Different, same meanings.
    X3,
    /// Different, synonymous in some meanings.
    X4,
    /// Different, derivational relation referring to the meanings.
    X5,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown relation \"{0}\"")]
pub struct UnknownRelation(pub alloc::string::String);

impl RelationCode {
    pub const ALL: [RelationCode; 11] = [
        RelationCode::R1,
        RelationCode::R2,
        RelationCode::R3,
        RelationCode::R4,
        RelationCode::R5,
        RelationCode::R6,
        RelationCode::X1,
        RelationCode::X2,
        RelationCode::X3,
        RelationCode::X4,
        RelationCode::X5,
    ];

    pub const CORE: [RelationCode; 6] = [
        RelationCode::R1,
        RelationCode::R2,
        RelationCode::R3,
        RelationCode::R4,
        RelationCode::R5,
        RelationCode::R6,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RelationCode::R1 => "R1",
            RelationCode::R2 => "R2",
            RelationCode::R3 => "R3",
            RelationCode::R4 => "R4",
            RelationCode::R5 => "R5",
            RelationCode::R6 => "R6",
            RelationCode::X1 => "X1",
            RelationCode::X2 => "X2",
            RelationCode::X3 => "X3",
            RelationCode::X4 => "X4",
            RelationCode::X5 => "X5",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            RelationCode::R1 => "Same Exactly",
            RelationCode::R2 => "Same, Singular-Plural difference",
            RelationCode::R3 => "Same, Singular-Dual difference",
            RelationCode::R4 => "Same, Male-Female difference",
            RelationCode::R5 => "Same, Case difference",
            RelationCode::R6 => "Same, but Proper Noun",
            RelationCode::X1 => "Same all forms, some meanings",
            RelationCode::X2 => "Different wording, same meaning",
            RelationCode::X3 => "Different, same meanings",
            RelationCode::X4 => "Different, synonym in some meanings",
            RelationCode::X5 => "Different, derivational reference",
        }
    }

    pub fn is_core(self) -> bool {
        RelationCode::CORE.contains(&self)
    }
}

impl fmt::Display for RelationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RelationCode {
    type Err = UnknownRelation;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RelationCode::ALL
            .into_iter()
            .find(|r| r.as_str() == s.trim())
            .ok_or_else(|| UnknownRelation(alloc::string::String::from(s)))
    }
}

impl Serialize for RelationCode {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for RelationCode {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = alloc::string::String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Precision in whole percent, always in `1..=100`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Precision(u8);

impl Precision {
    pub fn new(percent: u8) -> Option<Precision> {
        (1..=100).contains(&percent).then_some(Precision(percent))
    }

    pub fn percent(self) -> u8 {
        self.0
    }
}

/// Weight table. Only the X2 weight is configurable; the table it comes
/// from gives no value for it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationWeights {
    pub x2: Precision,
}

impl RelationWeights {
    pub const DEFAULT_X2: u8 = 30;

    pub fn precision(&self, code: RelationCode) -> Precision {
        let p = match code {
            RelationCode::R1 => 100,
            RelationCode::R2 => 90,
            RelationCode::R3 => 80,
            RelationCode::R4 => 70,
            RelationCode::R5 => 60,
            RelationCode::X1 => 50,
            RelationCode::R6 => 40,
            RelationCode::X3 => 30,
            RelationCode::X4 => 20,
            RelationCode::X5 => 10,
            RelationCode::X2 => return self.x2,
        };
        Precision(p)
    }
}

impl Default for RelationWeights {
    fn default() -> Self {
        RelationWeights {
            x2: Precision(Self::DEFAULT_X2),
        }
    }
}

/// A relation together with its precision weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappingRelation {
    pub code: RelationCode,
    pub precision: Precision,
}
