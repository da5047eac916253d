use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::normalization::CaseClass;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown label {0:?}")]
pub struct UnknownLabel(pub String);

/// A closed label alphabet. Declaration order is the tie-break order.
pub trait Label: Copy + Eq + Send + Sync + fmt::Debug + 'static {
    const ALL: &'static [Self];
    /// The "no label" class, excluded from headline averages.
    const NULL: Self;

    fn name(self) -> &'static str;

    fn index(self) -> usize {
        Self::ALL.iter().position(|l| *l == self).expect("label in alphabet")
    }

    fn from_name(name: &str) -> Result<Self, UnknownLabel> {
        Self::ALL.iter().copied().find(|l| l.name() == name).ok_or_else(|| UnknownLabel(name.to_owned()))
    }

    fn names() -> Vec<String> {
        Self::ALL.iter().map(|l| l.name().to_owned()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PunctLabel {
    Period,
    Comma,
    Exclamation,
    Question,
    Semicolon,
    Colon,
    Hyphen,
    Apostrophe,
    #[serde(rename = "non")]
    None,
}

impl PunctLabel {
    /// The eight restorable marks, in alphabet order.
    pub const MARKS: [PunctLabel; 8] = [
        PunctLabel::Period,
        PunctLabel::Comma,
        PunctLabel::Exclamation,
        PunctLabel::Question,
        PunctLabel::Semicolon,
        PunctLabel::Colon,
        PunctLabel::Hyphen,
        PunctLabel::Apostrophe,
    ];

    pub fn from_char(c: char) -> Option<PunctLabel> {
        Some(match c {
            '.' => PunctLabel::Period,
            ',' => PunctLabel::Comma,
            '!' => PunctLabel::Exclamation,
            '?' => PunctLabel::Question,
            ';' => PunctLabel::Semicolon,
            ':' => PunctLabel::Colon,
            '-' => PunctLabel::Hyphen,
            '\'' => PunctLabel::Apostrophe,
            _ => return None,
        })
    }

    pub fn as_char(self) -> Option<char> {
        Some(match self {
            PunctLabel::Period => '.',
            PunctLabel::Comma => ',',
            PunctLabel::Exclamation => '!',
            PunctLabel::Question => '?',
            PunctLabel::Semicolon => ';',
            PunctLabel::Colon => ':',
            PunctLabel::Hyphen => '-',
            PunctLabel::Apostrophe => '\'',
            PunctLabel::None => return None,
        })
    }

    /// Marks after which a new segment may start.
    pub fn is_sentence_final(self) -> bool {
        matches!(self, PunctLabel::Period | PunctLabel::Exclamation | PunctLabel::Semicolon | PunctLabel::Question)
    }

    pub fn is_mark(c: char) -> bool {
        Self::from_char(c).is_some()
    }
}

impl Label for PunctLabel {
    const ALL: &'static [Self] = &[
        PunctLabel::Period,
        PunctLabel::Comma,
        PunctLabel::Exclamation,
        PunctLabel::Question,
        PunctLabel::Semicolon,
        PunctLabel::Colon,
        PunctLabel::Hyphen,
        PunctLabel::Apostrophe,
        PunctLabel::None,
    ];
    const NULL: Self = PunctLabel::None;

    fn name(self) -> &'static str {
        match self {
            PunctLabel::Period => "period",
            PunctLabel::Comma => "comma",
            PunctLabel::Exclamation => "exclamation",
            PunctLabel::Question => "question",
            PunctLabel::Semicolon => "semicolon",
            PunctLabel::Colon => "colon",
            PunctLabel::Hyphen => "hyphen",
            PunctLabel::Apostrophe => "apostrophe",
            PunctLabel::None => "non",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CapTag {
    One,
    Cap,
    #[serde(rename = "non")]
    Non,
}

impl Label for CapTag {
    const ALL: &'static [Self] = &[CapTag::One, CapTag::Cap, CapTag::Non];
    const NULL: Self = CapTag::Non;

    fn name(self) -> &'static str {
        match self {
            CapTag::One => "One",
            CapTag::Cap => "Cap",
            CapTag::Non => "non",
        }
    }
}

impl From<CaseClass> for CapTag {
    fn from(class: CaseClass) -> Self {
        match class {
            CaseClass::FirstCap => CapTag::One,
            CaseClass::AllCaps => CapTag::Cap,
            CaseClass::Lower => CapTag::Non,
        }
    }
}

impl From<CapTag> for CaseClass {
    fn from(tag: CapTag) -> Self {
        match tag {
            CapTag::One => CaseClass::FirstCap,
            CapTag::Cap => CaseClass::AllCaps,
            CapTag::Non => CaseClass::Lower,
        }
    }
}

macro_rules! label_text_impls {
    ($t:ty) => {
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $t {
            type Err = UnknownLabel;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                <$t as Label>::from_name(s)
            }
        }
    };
}

label_text_impls!(PunctLabel);
label_text_impls!(CapTag);
