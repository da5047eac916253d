//! Turkish-aware casing.
//!
//! The default Unicode case mappings get the dotted and dotless i wrong for
//! Turkish: `I` must lowercase to `ı` and `İ` to a plain `i` (not `i` plus a
//! combining dot), and the reverse holds for uppercasing. Every function here
//! NFC-normalizes its input first so that precomposed and decomposed forms of
//! the same text compare equal afterwards.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CaseError {
    #[error("empty word has no case class")]
    EmptyWord,
}

/// The three casing shapes a word can be restored to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CaseClass {
    AllCaps,
    FirstCap,
    Lower,
}

impl fmt::Display for CaseClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            CaseClass::AllCaps => "AllCaps",
            CaseClass::FirstCap => "FirstCap",
            CaseClass::Lower => "Lower",
        };
        f.write_str(name)
    }
}

pub fn nfc(text: &str) -> String {
    text.nfc().collect()
}

fn push_lower(out: &mut String, c: char) {
    match c {
        'İ' => out.push('i'),
        'I' => out.push('ı'),
        _ => out.extend(c.to_lowercase()),
    }
}

fn push_upper(out: &mut String, c: char) {
    match c {
        'i' => out.push('İ'),
        'ı' => out.push('I'),
        _ => out.extend(c.to_uppercase()),
    }
}

pub fn turkish_lower(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.nfc() {
        push_lower(&mut out, c);
    }
    nfc(&out)
}

pub fn turkish_upper(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.nfc() {
        push_upper(&mut out, c);
    }
    nfc(&out)
}

/// Classifies a word into one of the three case shapes.
///
/// Only cased letters take part: digits, symbols and uncased scripts are
/// ignored, so `"2024"` is [`CaseClass::Lower`] and `"ABC1"` is
/// [`CaseClass::AllCaps`]. A lone uppercase letter (`"O"`) is `FirstCap`, and
/// mixed shapes such as `"McDonald"` or `"iPhone"` are coerced to `FirstCap`.
pub fn classify_case(word: &str) -> Result<CaseClass, CaseError> {
    if word.is_empty() {
        return Err(CaseError::EmptyWord);
    }
    let word = nfc(word);
    let mut upper = 0usize;
    let mut lower = 0usize;
    for c in word.chars() {
        if c.is_uppercase() {
            upper += 1;
        } else if c.is_lowercase() {
            lower += 1;
        }
    }
    Ok(match (upper, lower) {
        (0, _) => CaseClass::Lower,
        (1, 0) => CaseClass::FirstCap,
        (_, 0) => CaseClass::AllCaps,
        _ => CaseClass::FirstCap,
    })
}

/// Applies a case shape to an already lowercased word.
pub fn apply_case(word: &str, class: CaseClass) -> Result<String, CaseError> {
    if word.is_empty() {
        return Err(CaseError::EmptyWord);
    }
    Ok(match class {
        CaseClass::AllCaps => turkish_upper(word),
        CaseClass::Lower => word.to_owned(),
        CaseClass::FirstCap => {
            let word = nfc(word);
            let mut out = String::with_capacity(word.len() + 2);
            let mut done = false;
            for c in word.chars() {
                if !done && c.is_alphabetic() {
                    push_upper(&mut out, c);
                    done = true;
                } else {
                    out.push(c);
                }
            }
            nfc(&out)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn lowercases_dotted_and_dotless_capitals() {
        assert_eq!(turkish_lower("İstanbul"), "istanbul");
        assert_eq!(turkish_lower("ISPARTA"), "ısparta");
        assert_eq!(turkish_lower(""), "");
        assert_eq!(turkish_lower("ÇĞÖŞÜ"), "çğöşü");
    }

    #[test]
    fn uppercases_dotted_and_dotless_smalls() {
        assert_eq!(turkish_upper("izmir"), "İZMİR");
        assert_eq!(turkish_upper("ığdır"), "IĞDIR");
        assert_eq!(turkish_upper("abc1"), "ABC1");
    }

    #[test]
    fn decomposed_input_is_composed() {
        // I + combining dot above
        assert_eq!(turkish_lower("I\u{307}stanbul"), "istanbul");
        assert_eq!(turkish_lower("S\u{327}"), "ş");
    }

    #[test]
    fn classify() {
        assert_eq!(classify_case("YTU").unwrap(), CaseClass::AllCaps);
        assert_eq!(classify_case("Türkiye").unwrap(), CaseClass::FirstCap);
        assert_eq!(classify_case("türkiye").unwrap(), CaseClass::Lower);
        assert_eq!(classify_case("ve").unwrap(), CaseClass::Lower);
        assert_eq!(classify_case("O").unwrap(), CaseClass::FirstCap);
        assert_eq!(classify_case("2024").unwrap(), CaseClass::Lower);
        assert_eq!(classify_case("McDonald").unwrap(), CaseClass::FirstCap);
        assert_eq!(classify_case("iPhone").unwrap(), CaseClass::FirstCap);
        assert_eq!(classify_case("ABC1").unwrap(), CaseClass::AllCaps);
        assert_eq!(classify_case("\"Merhaba\"").unwrap(), CaseClass::FirstCap);
        assert_eq!(classify_case(""), Err(CaseError::EmptyWord));
    }

    #[test]
    fn apply() {
        assert_eq!(apply_case("türkiye", CaseClass::FirstCap).unwrap(), "Türkiye");
        assert_eq!(apply_case("ytu", CaseClass::AllCaps).unwrap(), "YTU");
        assert_eq!(apply_case("ev", CaseClass::Lower).unwrap(), "ev");
        assert_eq!(apply_case("ıspanak", CaseClass::FirstCap).unwrap(), "Ispanak");
        assert_eq!(apply_case("\"izmir\"", CaseClass::FirstCap).unwrap(), "\"İzmir\"");
        assert_eq!(apply_case("", CaseClass::Lower), Err(CaseError::EmptyWord));
    }

    const LOWER: &str = "abcçdefgğhıijklmnoöprsştuüvyz";

    fn lower_word() -> impl Strategy<Value = String> {
        let chars: Vec<char> = LOWER.chars().collect();
        proptest::collection::vec(proptest::sample::select(chars), 1..12).prop_map(|v| v.into_iter().collect())
    }

    fn homogeneous_word() -> impl Strategy<Value = String> {
        (lower_word(), 0..3u8).prop_map(|(w, shape)| match shape {
            0 => w,
            1 => turkish_upper(&w),
            _ => apply_case(&w, CaseClass::FirstCap).unwrap(),
        })
    }

    proptest! {
        #[test]
        fn homogeneous_words_round_trip(w in homogeneous_word()) {
            let class = classify_case(&w).unwrap();
            prop_assert_eq!(apply_case(&turkish_lower(&w), class).unwrap(), w);
        }

        #[test]
        fn lower_is_idempotent(s in "\\PC{0,24}") {
            let once = turkish_lower(&s);
            prop_assert_eq!(turkish_lower(&once), once);
        }

        #[test]
        fn classify_inverts_apply(w in lower_word(), class in prop_oneof![
            Just(CaseClass::AllCaps), Just(CaseClass::FirstCap), Just(CaseClass::Lower)
        ]) {
            prop_assume!(w.chars().filter(|c| c.is_alphabetic()).count() >= 2);
            prop_assert_eq!(classify_case(&apply_case(&w, class).unwrap()).unwrap(), class);
        }
    }
}
