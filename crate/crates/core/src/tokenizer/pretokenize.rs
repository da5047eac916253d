use serde::{Deserialize, Serialize};

use crate::corpus::PunctLabel;
use crate::normalization::{classify_case, nfc, turkish_lower, CaseClass};

/// A punctuation-free, lowercased word with the mark that followed it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordUnit {
    pub text: String,
    pub trailing_punct: Option<PunctLabel>,
    pub original_case: CaseClass,
    /// Character offsets `[start, end)` into the NFC form of the source.
    pub char_span: (usize, usize),
}

impl WordUnit {
    pub fn punct(&self) -> PunctLabel {
        self.trailing_punct.unwrap_or(PunctLabel::None)
    }
}

/// Splits text into word units.
///
/// Words are separated by whitespace and by the eight marks `. , ! ? ; : - '`.
/// A mark becomes the `trailing_punct` of the word right before it, even across
/// whitespace (`"deneme , yapıldı"`). A mark is dropped when that word already
/// carries one (`"Ne?!"` keeps only `?`) or when no word precedes it.
pub fn pretokenize(text: &str) -> Vec<WordUnit> {
    let source = nfc(text);
    let mut units: Vec<WordUnit> = Vec::new();
    let mut word = String::new();
    let mut word_start = 0usize;
    // Whether the last emitted unit may still take a mark.
    let mut open = false;

    let flush = |word: &mut String, start: usize, end: usize, mark: Option<PunctLabel>, units: &mut Vec<WordUnit>| {
        let original_case = classify_case(word).expect("non-empty word");
        units.push(WordUnit {
            text: turkish_lower(word),
            trailing_punct: mark,
            original_case,
            char_span: (start, end),
        });
        word.clear();
    };

    let mut count = 0usize;
    for (i, c) in source.chars().enumerate() {
        count = i + 1;
        if c.is_whitespace() {
            if !word.is_empty() {
                flush(&mut word, word_start, i, None, &mut units);
                open = true;
            }
        } else if let Some(mark) = PunctLabel::from_char(c) {
            if !word.is_empty() {
                flush(&mut word, word_start, i, Some(mark), &mut units);
            } else if open {
                if let Some(last) = units.last_mut() {
                    last.trailing_punct = Some(mark);
                }
            }
            open = false;
        } else {
            if word.is_empty() {
                word_start = i;
            }
            word.push(c);
        }
    }
    if !word.is_empty() {
        flush(&mut word, word_start, count, None, &mut units);
    }
    units
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn texts(units: &[WordUnit]) -> Vec<&str> {
        units.iter().map(|u| u.text.as_str()).collect()
    }

    #[test]
    fn apostrophe_splits_suffix() {
        let units = pretokenize("Türkiye'nin her tarafında devam etmektedir.");
        assert_eq!(texts(&units), ["türkiye", "nin", "her", "tarafında", "devam", "etmektedir"]);
        assert_eq!(units[0].trailing_punct, Some(PunctLabel::Apostrophe));
        assert_eq!(units[0].original_case, CaseClass::FirstCap);
        assert_eq!(units[5].trailing_punct, Some(PunctLabel::Period));
        assert!(units[1..5].iter().all(|u| u.trailing_punct.is_none()));
        assert_eq!(units[0].char_span, (0, 7));
        assert_eq!(units[1].char_span, (8, 11));
    }

    #[test]
    fn acronym_keeps_all_caps() {
        let units = pretokenize("YTU Türkiye'nin en iyi okuludur.");
        assert_eq!(units[0].text, "ytu");
        assert_eq!(units[0].original_case, CaseClass::AllCaps);
    }

    #[test]
    fn punctuation_splits_adjacent_words() {
        let units = pretokenize("a,b");
        assert_eq!(texts(&units), ["a", "b"]);
        assert_eq!(units[0].trailing_punct, Some(PunctLabel::Comma));
        assert_eq!(units[1].trailing_punct, None);
    }

    #[test]
    fn empty_and_blank() {
        assert!(pretokenize("").is_empty());
        assert!(pretokenize("  \n\t").is_empty());
        assert!(pretokenize("...").is_empty());
    }

    #[test]
    fn consecutive_marks_keep_the_first() {
        let units = pretokenize("Ne?! Olamaz...");
        assert_eq!(units[0].trailing_punct, Some(PunctLabel::Question));
        assert_eq!(units[1].trailing_punct, Some(PunctLabel::Period));
        assert_eq!(units.len(), 2);
    }

    #[test]
    fn leading_mark_is_dropped() {
        let units = pretokenize("-Merhaba dedi");
        assert_eq!(texts(&units), ["merhaba", "dedi"]);
        assert!(units.iter().all(|u| u.trailing_punct.is_none()));
        let units = pretokenize("Geldi. -Merhaba");
        assert_eq!(units[0].trailing_punct, Some(PunctLabel::Period));
        assert_eq!(units[1].trailing_punct, None);
    }

    #[test]
    fn detached_mark_attaches_to_previous_word() {
        let units = pretokenize("deneme  , yapıldı");
        assert_eq!(units[0].trailing_punct, Some(PunctLabel::Comma));
        let units = pretokenize("2010 - 2012");
        assert_eq!(units[0].trailing_punct, Some(PunctLabel::Hyphen));
    }

    #[test]
    fn other_symbols_stay_in_words() {
        let units = pretokenize("\"Merhaba\", %50 (iki)");
        assert_eq!(texts(&units), ["\"merhaba\"", "%50", "(iki)"]);
        assert_eq!(units[0].trailing_punct, Some(PunctLabel::Comma));
        assert_eq!(units[0].original_case, CaseClass::FirstCap);
    }

    proptest! {
        #[test]
        fn units_never_contain_marks(s in "[a-zA-ZçğıöşüÇĞİÖŞÜ .,!?;:'\"-]{0,80}") {
            let nchars = nfc(&s).chars().count();
            for u in pretokenize(&s) {
                prop_assert!(!u.text.is_empty());
                prop_assert!(!u.text.chars().any(PunctLabel::is_mark));
                prop_assert!(!u.text.chars().any(char::is_whitespace));
                prop_assert!(u.char_span.0 < u.char_span.1 && u.char_span.1 <= nchars);
            }
        }
    }
}
