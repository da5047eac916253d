//! Vocabulary loading, word/punctuation pre-tokenization and WordPiece.

mod pretokenize;
mod vocab;
mod wordpiece;

pub use pretokenize::{pretokenize, WordUnit};
pub use vocab::{load_vocab, Vocab, VocabError, DEFAULT_CONTINUATION, DEFAULT_UNK};
pub use wordpiece::{tokenize_units, wordpiece, Token, MAX_INPUT_CHARS_PER_WORD};
