//! End-to-end correction of unpunctuated text.

use thiserror::Error;

use crate::corpus::{prepare_inference, CapTag, PunctLabel};
use crate::reconstruction::{reconstruct_pieces, Piece, ReconstructError, RenderPolicy};
use crate::tagger::{TaggerBackend, TaggerError};
use crate::tokenizer::{Token, Vocab};

#[derive(Debug, Error)]
pub enum CorrectError {
    #[error(transparent)]
    Tagger(#[from] TaggerError),
    #[error(transparent)]
    Reconstruct(#[from] ReconstructError),
}

/// Strips marks from `text`, tags it window by window and renders the merged
/// labels. Unknown-token pieces are rendered with the text of their word.
pub fn correct_text<B: TaggerBackend + ?Sized>(
    text: &str,
    vocab: &Vocab,
    backend: &B,
    max_len: usize,
    policy: &RenderPolicy,
) -> Result<String, CorrectError> {
    let plan = prepare_inference(text, vocab, max_len);
    if plan.tokens.is_empty() {
        return Ok(String::new());
    }
    let inputs: Vec<&[Token]> = plan.segments.iter().map(|s| s.tokens.as_slice()).collect();
    let preds = backend.predict_batch(&inputs)?;
    for (input, pred) in inputs.iter().zip(&preds) {
        if pred.punct.len() != input.len() || pred.caps.len() != input.len() {
            return Err(TaggerError::LengthMismatch(0).into());
        }
    }
    let punct: Vec<PunctLabel> = plan.merge(&preds.iter().map(|p| p.punct.clone()).collect::<Vec<_>>());
    let caps: Vec<CapTag> = plan.merge(&preds.iter().map(|p| p.caps.clone()).collect::<Vec<_>>());
    let pieces: Vec<Piece<'_>> = plan
        .tokens
        .iter()
        .map(|t| {
            if t.is_unk(vocab) {
                Piece { text: &plan.units[t.word_index].text, starts_word: !t.is_continuation }
            } else {
                Piece::from_token(t, vocab.continuation_prefix())
            }
        })
        .collect();
    Ok(reconstruct_pieces(&pieces, &punct, &caps, policy)?)
}
