//! Tagger backends: the in-process baseline, replay and majority taggers,
//! and a client for external taggers speaking the JSON-lines protocol.

mod baseline;
mod models;
pub mod protocol;

use std::collections::HashMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{CapTag, LabeledSegment, PunctLabel};
use crate::tokenizer::Token;

pub use baseline::{train_baseline, BaselineModel, Histogram, BOUNDARY};
pub use models::ModelSpec;
pub use protocol::{Endpoint, ExternalBackend, ExternalClient};

#[derive(Debug, Error)]
pub enum TaggerError {
    #[error("backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("input of {len} tokens exceeds the backend limit of {max}")]
    LengthExceeded { len: usize, max: usize },
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("Timeout: no response within {0:?}")]
    Timeout(Duration),
    #[error("label count does not match token count for request {0}")]
    LengthMismatch(u64),
    #[error("backend cannot label this input: {0}")]
    Unanswerable(String),
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("invalid model file: {0}")]
    InvalidModel(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Capabilities {
    pub punct: bool,
    pub caps: bool,
}

impl Capabilities {
    pub const BOTH: Capabilities = Capabilities { punct: true, caps: true };
}

/// Per-token labels for one input sequence.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Prediction {
    pub punct: Vec<PunctLabel>,
    pub caps: Vec<CapTag>,
}

impl Prediction {
    pub fn empty_labels(n: usize) -> Self {
        Prediction { punct: vec![PunctLabel::None; n], caps: vec![CapTag::Non; n] }
    }

    pub fn len(&self) -> usize {
        self.punct.len()
    }

    pub fn is_empty(&self) -> bool {
        self.punct.is_empty()
    }
}

/// A token-classification model producing one punctuation label and one case
/// tag per token.
pub trait TaggerBackend: Send + Sync {
    fn model_name(&self) -> &str;

    fn capabilities(&self) -> Capabilities {
        Capabilities::BOTH
    }

    /// Longest accepted token sequence, if bounded.
    fn max_len(&self) -> Option<usize> {
        None
    }

    fn predict_tokens(&self, tokens: &[Token]) -> Result<Prediction, TaggerError>;

    fn predict_batch(&self, batch: &[&[Token]]) -> Result<Vec<Prediction>, TaggerError> {
        batch.iter().map(|t| predict(self, t)).collect()
    }
}

impl<T: TaggerBackend + ?Sized> TaggerBackend for Box<T> {
    fn model_name(&self) -> &str {
        (**self).model_name()
    }

    fn capabilities(&self) -> Capabilities {
        (**self).capabilities()
    }

    fn max_len(&self) -> Option<usize> {
        (**self).max_len()
    }

    fn predict_tokens(&self, tokens: &[Token]) -> Result<Prediction, TaggerError> {
        (**self).predict_tokens(tokens)
    }

    fn predict_batch(&self, batch: &[&[Token]]) -> Result<Vec<Prediction>, TaggerError> {
        (**self).predict_batch(batch)
    }
}

/// Runs a backend on one sequence, enforcing its length limit and checking
/// that it returns one label per token.
pub fn predict<B: TaggerBackend + ?Sized>(backend: &B, tokens: &[Token]) -> Result<Prediction, TaggerError> {
    if tokens.is_empty() {
        return Ok(Prediction::default());
    }
    if let Some(max) = backend.max_len() {
        if tokens.len() > max {
            return Err(TaggerError::LengthExceeded { len: tokens.len(), max });
        }
    }
    let pred = backend.predict_tokens(tokens)?;
    if pred.punct.len() != tokens.len() || pred.caps.len() != tokens.len() {
        return Err(TaggerError::LengthMismatch(0));
    }
    Ok(pred)
}

/// Predicts `None` / `non` everywhere.
#[derive(Debug, Clone, Default)]
pub struct MajorityBackend;

impl TaggerBackend for MajorityBackend {
    fn model_name(&self) -> &str {
        "majority"
    }

    fn predict_tokens(&self, tokens: &[Token]) -> Result<Prediction, TaggerError> {
        Ok(Prediction::empty_labels(tokens.len()))
    }
}

/// Replays gold labels for sequences it has seen, keyed by token surfaces.
#[derive(Debug, Clone, Default)]
pub struct OracleBackend {
    gold: HashMap<Vec<String>, Prediction>,
}

impl OracleBackend {
    pub fn from_segments<'a>(segments: impl IntoIterator<Item = &'a LabeledSegment>) -> Self {
        let gold = segments
            .into_iter()
            .map(|s| {
                let key = s.tokens.iter().map(|t| t.surface.clone()).collect();
                (key, Prediction { punct: s.punct.clone(), caps: s.caps.clone() })
            })
            .collect();
        OracleBackend { gold }
    }

    pub fn lookup(&self, surfaces: &[String]) -> Option<&Prediction> {
        self.gold.get(surfaces)
    }
}

impl TaggerBackend for OracleBackend {
    fn model_name(&self) -> &str {
        "oracle"
    }

    fn predict_tokens(&self, tokens: &[Token]) -> Result<Prediction, TaggerError> {
        let key: Vec<String> = tokens.iter().map(|t| t.surface.clone()).collect();
        self.lookup(&key).cloned().ok_or_else(|| TaggerError::Unanswerable("sequence not in the gold set".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{label_document, segment};
    use crate::tokenizer::Vocab;

    struct Broken;

    impl TaggerBackend for Broken {
        fn model_name(&self) -> &str {
            "broken"
        }
        fn max_len(&self) -> Option<usize> {
            Some(4)
        }
        fn predict_tokens(&self, tokens: &[Token]) -> Result<Prediction, TaggerError> {
            Ok(Prediction::empty_labels(tokens.len() - 1))
        }
    }

    fn vocab() -> Vocab {
        Vocab::from_tokens(["[UNK]", "türkiye", "nin", "her", "tarafında", "devam", "etmektedir"]).unwrap()
    }

    #[test]
    fn oracle_replays_table_labels() {
        let doc = label_document("0", "Türkiye'nin her tarafında devam etmektedir.", &vocab());
        let segs = segment(&doc, 512);
        let oracle = OracleBackend::from_segments(&segs);
        let pred = predict(&oracle, &segs[0].tokens).unwrap();
        use PunctLabel as P;
        assert_eq!(pred.punct, [P::Apostrophe, P::None, P::None, P::None, P::None, P::Period]);
    }

    #[test]
    fn empty_input_short_circuits() {
        assert_eq!(predict(&Broken, &[]).unwrap(), Prediction::default());
    }

    #[test]
    fn length_checks() {
        let doc = label_document("0", "her her her her her", &vocab());
        assert!(matches!(predict(&Broken, &doc.tokens), Err(TaggerError::LengthExceeded { len: 5, max: 4 })));
        assert!(matches!(predict(&Broken, &doc.tokens[..3]), Err(TaggerError::LengthMismatch(_))));
    }
}
