//! Turning tokens plus predicted labels back into readable text.

use thiserror::Error;

use crate::corpus::{CapTag, PunctLabel};
use crate::normalization::apply_case;
use crate::tokenizer::{pretokenize, Token, DEFAULT_CONTINUATION};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReconstructError {
    #[error("length mismatch: {tokens} tokens, {punct} punct labels, {caps} cap labels")]
    LengthMismatch { tokens: usize, punct: usize, caps: usize },
    #[error("sequence starts with continuation token {0:?}")]
    DanglingContinuation(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderPolicy {
    space_after: [bool; 8],
    /// Suffixes after an apostrophe are joined without a space.
    pub join_after_apostrophe: bool,
    /// Reject a leading continuation token instead of treating it as a word.
    pub strict: bool,
    pub continuation_prefix: String,
}

impl Default for RenderPolicy {
    fn default() -> Self {
        let mut space_after = [true; 8];
        space_after[mark_slot(PunctLabel::Apostrophe)] = false;
        RenderPolicy {
            space_after,
            join_after_apostrophe: true,
            strict: true,
            continuation_prefix: DEFAULT_CONTINUATION.to_owned(),
        }
    }
}

fn mark_slot(label: PunctLabel) -> usize {
    PunctLabel::MARKS.iter().position(|&m| m == label).expect("a mark")
}

impl RenderPolicy {
    pub fn lenient() -> Self {
        RenderPolicy { strict: false, ..Self::default() }
    }

    pub fn space_after(&self, label: PunctLabel) -> bool {
        match label {
            PunctLabel::None => true,
            PunctLabel::Apostrophe if self.join_after_apostrophe => false,
            l => self.space_after[mark_slot(l)],
        }
    }

    pub fn set_space_after(&mut self, label: PunctLabel, space: bool) {
        if label != PunctLabel::None {
            self.space_after[mark_slot(label)] = space;
        }
    }
}

/// A word fragment with the continuation prefix already removed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Piece<'a> {
    pub text: &'a str,
    pub starts_word: bool,
}

impl<'a> Piece<'a> {
    pub fn from_token(token: &'a Token, prefix: &str) -> Self {
        let text = if token.is_continuation {
            token.surface.strip_prefix(prefix).unwrap_or(&token.surface)
        } else {
            &token.surface
        };
        Piece { text, starts_word: !token.is_continuation }
    }
}

/// Renders pieces with their labels.
///
/// Pieces merge into words until the next word-initial piece. The case tag of
/// a word's first piece sets the case of the whole word and the mark of its
/// last piece is appended. An apostrophe on a piece inside a word splits the
/// word there: `türkiye ##nin` with an apostrophe on `türkiye` renders as
/// `türkiye'nin`, and the suffix takes the case tag of its own first piece.
/// Other marks on word-internal pieces are ignored.
pub fn reconstruct_pieces(
    pieces: &[Piece<'_>],
    punct: &[PunctLabel],
    caps: &[CapTag],
    policy: &RenderPolicy,
) -> Result<String, ReconstructError> {
    let n = pieces.len();
    if punct.len() != n || caps.len() != n {
        return Err(ReconstructError::LengthMismatch { tokens: n, punct: punct.len(), caps: caps.len() });
    }
    if let Some(first) = pieces.first() {
        if !first.starts_word && policy.strict {
            return Err(ReconstructError::DanglingContinuation(first.text.to_owned()));
        }
    }

    let mut out = String::new();
    let mut sep = "";
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && !pieces[j].starts_word && punct[j - 1] != PunctLabel::Apostrophe {
            j += 1;
        }
        let word: String = pieces[i..j].iter().map(|p| p.text).collect();
        out.push_str(sep);
        if !word.is_empty() {
            out.push_str(&apply_case(&word, caps[i].into()).expect("non-empty word"));
        }
        let word_end = j == n || pieces[j].starts_word;
        let mark = punct[j - 1];
        match mark.as_char() {
            Some(c) if word_end || mark == PunctLabel::Apostrophe => {
                out.push(c);
                sep = if policy.space_after(mark) { " " } else { "" };
            }
            _ => sep = " ",
        }
        i = j;
    }
    Ok(out)
}

pub fn reconstruct(
    tokens: &[Token],
    punct: &[PunctLabel],
    caps: &[CapTag],
    policy: &RenderPolicy,
) -> Result<String, ReconstructError> {
    let pieces: Vec<Piece<'_>> = tokens.iter().map(|t| Piece::from_token(t, &policy.continuation_prefix)).collect();
    reconstruct_pieces(&pieces, punct, caps, policy)
}

/// The comparison form of a text: NFC, single spaces, each mark attached to
/// the word before it, every word coerced to its case class. Symbols outside
/// the eight marks stay inside words.
pub fn canonicalize_with(text: &str, policy: &RenderPolicy) -> String {
    let units = pretokenize(text);
    let pieces: Vec<Piece<'_>> = units.iter().map(|u| Piece { text: &u.text, starts_word: true }).collect();
    let punct: Vec<PunctLabel> = units.iter().map(|u| u.punct()).collect();
    let caps: Vec<CapTag> = units.iter().map(|u| u.original_case.into()).collect();
    reconstruct_pieces(&pieces, &punct, &caps, policy).expect("units are well formed")
}

pub fn canonicalize(text: &str) -> String {
    canonicalize_with(text, &RenderPolicy::default())
}
