use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use thiserror::Error;

pub const DEFAULT_UNK: &str = "[UNK]";
pub const DEFAULT_CONTINUATION: &str = "##";

#[derive(Debug, Error)]
pub enum VocabError {
    #[error("cannot read vocabulary: {0}")]
    Io(#[from] std::io::Error),
    #[error("vocabulary is not valid UTF-8")]
    InvalidUtf8,
    #[error("duplicate token {token:?} on line {line}")]
    DuplicateToken { line: usize, token: String },
    #[error("vocabulary has no {0:?} entry")]
    MissingUnkToken(String),
}

/// A WordPiece vocabulary. Ids are line indices of the source file.
#[derive(Debug, Clone)]
pub struct Vocab {
    ids: HashMap<String, u32>,
    tokens: Vec<String>,
    unk_token: String,
    unk_id: u32,
    continuation_prefix: String,
    special_tokens: BTreeSet<String>,
}

impl Vocab {
    /// Builds a vocabulary from tokens in id order.
    pub fn from_tokens<I, S>(tokens: I) -> Result<Vocab, VocabError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::with_options(tokens, DEFAULT_UNK, DEFAULT_CONTINUATION)
    }

    pub fn with_options<I, S>(tokens: I, unk_token: &str, continuation_prefix: &str) -> Result<Vocab, VocabError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut ids = HashMap::new();
        let mut list = Vec::new();
        for (i, tok) in tokens.into_iter().enumerate() {
            let tok = tok.into();
            if ids.contains_key(&tok) {
                return Err(VocabError::DuplicateToken { line: i + 1, token: tok });
            }
            ids.insert(tok.clone(), i as u32);
            list.push(tok);
        }
        let unk_id = *ids.get(unk_token).ok_or_else(|| VocabError::MissingUnkToken(unk_token.to_owned()))?;
        let special_tokens =
            list.iter().filter(|t| t.len() > 2 && t.starts_with('[') && t.ends_with(']')).cloned().collect();
        Ok(Vocab {
            ids,
            tokens: list,
            unk_token: unk_token.to_owned(),
            unk_id,
            continuation_prefix: continuation_prefix.to_owned(),
            special_tokens,
        })
    }

    /// Loads a `vocab.txt` file: one token per LF-terminated line.
    pub fn load(path: impl AsRef<Path>) -> Result<Vocab, VocabError> {
        let bytes = fs::read(path)?;
        let text = String::from_utf8(bytes).map_err(|_| VocabError::InvalidUtf8)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Vocab, VocabError> {
        let body = text.strip_suffix('\n').unwrap_or(text);
        if body.is_empty() {
            return Err(VocabError::MissingUnkToken(DEFAULT_UNK.to_owned()));
        }
        Self::from_tokens(body.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l)))
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.ids.get(token).copied()
    }

    /// Id of `token`, falling back to the unknown token.
    pub fn id_or_unk(&self, token: &str) -> u32 {
        self.id(token).unwrap_or(self.unk_id)
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.ids.contains_key(token)
    }

    pub fn unk_token(&self) -> &str {
        &self.unk_token
    }

    pub fn unk_id(&self) -> u32 {
        self.unk_id
    }

    pub fn continuation_prefix(&self) -> &str {
        &self.continuation_prefix
    }

    pub fn special_tokens(&self) -> &BTreeSet<String> {
        &self.special_tokens
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }
}

/// Reads a vocabulary file. See [`Vocab::load`].
pub fn load_vocab(path: impl AsRef<Path>) -> Result<Vocab, VocabError> {
    Vocab::load(path)
}
