use serde::{Deserialize, Serialize};

use super::{Vocab, WordUnit};

/// Units longer than this many characters map straight to the unknown token.
pub const MAX_INPUT_CHARS_PER_WORD: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub is_continuation: bool,
    pub vocab_id: u32,
    /// Index of the owning [`WordUnit`].
    pub word_index: usize,
}

impl Token {
    /// Surface with the continuation prefix removed.
    pub fn piece<'a>(&'a self, vocab: &Vocab) -> &'a str {
        if self.is_continuation {
            self.surface.strip_prefix(vocab.continuation_prefix()).unwrap_or(&self.surface)
        } else {
            &self.surface
        }
    }

    pub fn is_unk(&self, vocab: &Vocab) -> bool {
        self.vocab_id == vocab.unk_id()
    }
}

/// Greedy longest-match-first WordPiece segmentation of one unit.
pub fn wordpiece(unit_text: &str, vocab: &Vocab) -> Vec<Token> {
    wordpiece_indexed(unit_text, vocab, 0)
}

fn unk(vocab: &Vocab, word_index: usize) -> Vec<Token> {
    vec![Token { surface: vocab.unk_token().to_owned(), is_continuation: false, vocab_id: vocab.unk_id(), word_index }]
}

pub(crate) fn wordpiece_indexed(unit_text: &str, vocab: &Vocab, word_index: usize) -> Vec<Token> {
    let chars: Vec<char> = unit_text.chars().collect();
    if chars.is_empty() {
        return Vec::new();
    }
    if chars.len() > MAX_INPUT_CHARS_PER_WORD {
        return unk(vocab, word_index);
    }
    let prefix = vocab.continuation_prefix();
    let mut out = Vec::new();
    let mut start = 0;
    let mut candidate = String::new();
    while start < chars.len() {
        let mut found = None;
        let mut end = chars.len();
        while end > start {
            candidate.clear();
            if start > 0 {
                candidate.push_str(prefix);
            }
            candidate.extend(&chars[start..end]);
            if let Some(id) = vocab.id(&candidate) {
                found = Some(id);
                break;
            }
            end -= 1;
        }
        let Some(id) = found else {
            return unk(vocab, word_index);
        };
        out.push(Token { surface: candidate.clone(), is_continuation: start > 0, vocab_id: id, word_index });
        start = end;
    }
    out
}

/// WordPiece-tokenizes every unit, tagging tokens with their unit index.
pub fn tokenize_units(units: &[WordUnit], vocab: &Vocab) -> Vec<Token> {
    units.iter().enumerate().flat_map(|(i, u)| wordpiece_indexed(&u.text, vocab, i)).collect()
}
