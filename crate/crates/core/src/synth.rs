//! Seeded generator of small Turkish-like corpora for tests, demos and
//! benchmarks.
//!
//! Sentences follow a handful of templates so that marks correlate with
//! nearby words: proper nouns take apostrophe suffixes, verbs end sentences,
//! `mi` precedes a question mark, conjunctions follow commas. Every mark and
//! all three case classes occur.

use std::collections::BTreeSet;

use rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::normalization::turkish_upper;
use crate::tokenizer::{pretokenize, Vocab, DEFAULT_CONTINUATION, DEFAULT_UNK};

const NAMES: &[&str] = &["Ahmet", "Ayşe", "Mehmet", "Zeynep", "İbrahim", "Işıl", "Çağla", "Ömer"];
const PLACES: &[&str] = &["İstanbul", "Ankara", "İzmir", "Türkiye", "Bursa", "Ege", "Üsküdar"];
const ACRONYMS: &[&str] = &["YTU", "TBMM", "ODTÜ", "NATO", "TÜİK"];
const PLACE_SUFFIXES: &[&str] = &["da", "dan", "ya", "nın", "de"];
const NAME_SUFFIXES: &[&str] = &["in", "e", "den", "la"];
const ACRONYM_SUFFIXES: &[&str] = &["nun", "de", "ye"];
const NOUNS: &[&str] = &[
    "okul",
    "kitap",
    "ev",
    "haber",
    "proje",
    "toplantı",
    "şehir",
    "ıhlamur",
    "çiçek",
    "ağaç",
    "iş",
    "rapor",
    "yol",
    "deniz",
    "öğrenci",
    "karar",
];
const ADJECTIVES: &[&str] = &["büyük", "yeni", "güzel", "iyi", "önemli", "uzun", "ılık", "eski"];
const VERBS: &[&str] =
    &["geldi", "gitti", "okudu", "başladı", "bitti", "açıklandı", "yapıldı", "değişti", "kazandı", "gördü"];
const ADVERBS: &[&str] = &["bugün", "dün", "yine", "hemen", "sonunda", "ilk", "çok"];
const CONJ: &[&str] = &["ama", "ve", "fakat", "çünkü"];
const SPEECH: &[&str] = &["söyledi", "yazdı", "açıkladı"];
const EXCLAIM: &[&str] = &["Ne güzel", "Harika", "Çok yaşa", "Aman dikkat"];

pub struct Generator {
    rng: Xoshiro256PlusPlus,
}

impl Generator {
    pub fn new(seed: u64) -> Self {
        Generator { rng: Xoshiro256PlusPlus::seed_from_u64(seed) }
    }

    fn below(&mut self, n: usize) -> usize {
        (self.rng.next_u64() % n as u64) as usize
    }

    fn pick<'a>(&mut self, xs: &[&'a str]) -> &'a str {
        xs[self.below(xs.len())]
    }

    fn chance(&mut self, percent: usize) -> bool {
        self.below(100) < percent
    }

    fn proper(&mut self) -> String {
        match self.below(5) {
            0 | 1 => {
                let n = self.pick(NAMES);
                if self.chance(50) {
                    format!("{n}'{}", self.pick(NAME_SUFFIXES))
                } else {
                    n.to_owned()
                }
            }
            2 | 3 => format!("{}'{}", self.pick(PLACES), self.pick(PLACE_SUFFIXES)),
            _ => {
                let a = self.pick(ACRONYMS);
                if self.chance(60) {
                    format!("{a}'{}", self.pick(ACRONYM_SUFFIXES))
                } else {
                    a.to_owned()
                }
            }
        }
    }

    fn noun_phrase(&mut self) -> String {
        let noun = self.pick(NOUNS);
        if self.chance(40) {
            format!("{} {noun}", self.pick(ADJECTIVES))
        } else {
            noun.to_owned()
        }
    }

    fn clause(&mut self) -> String {
        let mut words = Vec::new();
        if self.chance(30) {
            words.push(self.pick(ADVERBS).to_owned());
        }
        words.push(self.proper());
        words.push(self.noun_phrase());
        words.push(self.pick(VERBS).to_owned());
        words.join(" ")
    }

    /// One sentence with its final mark, first letter capitalized.
    pub fn sentence(&mut self) -> String {
        let body = match self.below(10) {
            0..=2 => format!("{}.", self.clause()),
            3 => format!("{}, {} {}.", self.clause(), self.pick(CONJ), self.clause()),
            4 => format!("{} mi?", self.clause()),
            5 => format!("{}!", self.pick(EXCLAIM)),
            6 => format!("{} şunu {}: {}.", self.proper(), self.pick(SPEECH), self.clause()),
            7 => format!("{}; {}.", self.clause(), self.clause()),
            8 => {
                let a = 1990 + self.below(30);
                let b = a + 1 + self.below(5);
                format!("{a}-{b} yılları arasında {}.", self.clause())
            }
            _ => format!("{}, {}, {} {}.", self.pick(NOUNS), self.pick(NOUNS), self.pick(NOUNS), self.pick(VERBS)),
        };
        capitalize_first(&body)
    }

    /// A paragraph of `min..=max` sentences.
    pub fn paragraph(&mut self, min: usize, max: usize) -> String {
        let n = min + self.below(max - min + 1);
        (0..n).map(|_| self.sentence()).collect::<Vec<_>>().join(" ")
    }
}

fn capitalize_first(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => turkish_upper(&c.to_string()) + chars.as_str(),
        None => String::new(),
    }
}

pub fn sentences(seed: u64, n: usize) -> Vec<String> {
    let mut g = Generator::new(seed);
    (0..n).map(|_| g.sentence()).collect()
}

pub fn paragraphs(seed: u64, n: usize, min_sentences: usize, max_sentences: usize) -> Vec<String> {
    let mut g = Generator::new(seed);
    (0..n).map(|_| g.paragraph(min_sentences, max_sentences)).collect()
}

/// A vocabulary with every lowercased word of `texts` plus every character
/// as a start and a continuation piece, so none of them tokenize to the
/// unknown token.
pub fn build_vocab<S: AsRef<str>>(texts: &[S]) -> Vocab {
    let mut words = BTreeSet::new();
    let mut chars = BTreeSet::new();
    for t in texts {
        for unit in pretokenize(t.as_ref()) {
            chars.extend(unit.text.chars());
            words.insert(unit.text);
        }
    }
    let mut tokens: Vec<String> =
        ["[PAD]", DEFAULT_UNK, "[CLS]", "[SEP]", "[MASK]"].iter().map(|s| s.to_string()).collect();
    for c in &chars {
        tokens.push(c.to_string());
        tokens.push(format!("{DEFAULT_CONTINUATION}{c}"));
    }
    tokens.extend(words.into_iter().filter(|w| w.chars().count() > 1));
    Vocab::from_tokens(tokens).expect("generated vocabulary has no duplicates")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{label_document, CapTag, Label, PunctLabel};

    #[test]
    fn seeded_and_stable() {
        assert_eq!(sentences(3, 20), sentences(3, 20));
        assert_ne!(sentences(3, 20), sentences(4, 20));
    }

    #[test]
    fn covers_every_label() {
        let text = paragraphs(1, 50, 3, 6).join(" ");
        let vocab = build_vocab(&[&text]);
        let doc = label_document("0", &text, &vocab);
        for l in PunctLabel::ALL {
            assert!(doc.punct.contains(l), "{l}");
        }
        for t in [CapTag::One, CapTag::Cap, CapTag::Non] {
            assert!(doc.caps.contains(&t), "{t}");
        }
        assert!(doc.tokens.iter().all(|t| !t.is_unk(&vocab)));
    }
}
