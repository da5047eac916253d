//! Punctuation and capitalization restoration for Turkish text.
//!
//! The pipeline turns raw text into token-classification data (one
//! punctuation label and one case label per WordPiece token), trains or calls
//! a tagger, renders its predictions back into text, and scores taggers with
//! per-class precision, recall and F1.

pub mod corpus;
pub mod correct;
pub mod evaluation;
pub mod normalization;
pub mod par;
pub mod reconstruction;
pub mod synth;
pub mod tagger;
pub mod tokenizer;
