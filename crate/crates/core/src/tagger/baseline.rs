//! A count-based tagger over a ±1 token window.
//!
//! Prediction looks up the `(previous, current, next)` token-id triple, backs
//! off to the current token alone, and finally to the overall majority labels.
//! Counts are smoothed additively with `alpha`; argmax ties go to the label
//! that comes first in the alphabet.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::{Prediction, TaggerBackend, TaggerError};
use crate::corpus::{CapTag, Label, LabeledSegment, PunctLabel};
use crate::tokenizer::Token;

/// Context id used before the first and after the last token.
pub const BOUNDARY: u32 = u32::MAX;

const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Histogram {
    pub caps: [u64; 3],
    pub punct: [u64; 9],
}

impl Histogram {
    fn observe(&mut self, punct: PunctLabel, caps: CapTag) {
        self.punct[punct.index()] += 1;
        self.caps[caps.index()] += 1;
    }

    /// Smoothed estimate `(count + alpha) / (total + K * alpha)`.
    pub fn smoothed<const K: usize>(counts: &[u64; K], alpha: Ratio<u64>) -> [Ratio<u64>; K] {
        let total: u64 = counts.iter().sum();
        let denom = Ratio::from_integer(total) + alpha * Ratio::from_integer(K as u64);
        counts.map(|c| (Ratio::from_integer(c) + alpha) / denom)
    }

    pub fn punct_probs(&self, alpha: Ratio<u64>) -> [Ratio<u64>; 9] {
        Self::smoothed(&self.punct, alpha)
    }

    pub fn caps_probs(&self, alpha: Ratio<u64>) -> [Ratio<u64>; 3] {
        Self::smoothed(&self.caps, alpha)
    }

    fn best(&self, alpha: Ratio<u64>) -> (PunctLabel, CapTag) {
        (PunctLabel::ALL[argmax(&self.punct_probs(alpha))], CapTag::ALL[argmax(&self.caps_probs(alpha))])
    }
}

fn argmax<T: PartialOrd>(xs: &[T]) -> usize {
    let mut best = 0;
    for (i, x) in xs.iter().enumerate().skip(1) {
        if *x > xs[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaselineModel {
    pub trigrams: BTreeMap<(u32, u32, u32), Histogram>,
    pub unigrams: BTreeMap<u32, Histogram>,
    pub alpha: Ratio<u64>,
    pub majority: (PunctLabel, CapTag),
}

fn context(tokens: &[Token], i: usize) -> (u32, u32, u32) {
    let prev = if i == 0 { BOUNDARY } else { tokens[i - 1].vocab_id };
    let next = tokens.get(i + 1).map_or(BOUNDARY, |t| t.vocab_id);
    (prev, tokens[i].vocab_id, next)
}

/// Counts label occurrences per context over every token of every segment.
pub fn train_baseline(segments: &[LabeledSegment], alpha: Ratio<u64>) -> Result<BaselineModel, TaggerError> {
    if alpha <= Ratio::from_integer(0) {
        return Err(TaggerError::InvalidModel("smoothing alpha must be positive".into()));
    }
    let mut trigrams: BTreeMap<(u32, u32, u32), Histogram> = BTreeMap::new();
    let mut unigrams: BTreeMap<u32, Histogram> = BTreeMap::new();
    let mut overall = Histogram::default();
    for seg in segments {
        for i in 0..seg.tokens.len() {
            let key = context(&seg.tokens, i);
            trigrams.entry(key).or_default().observe(seg.punct[i], seg.caps[i]);
            unigrams.entry(key.1).or_default().observe(seg.punct[i], seg.caps[i]);
            overall.observe(seg.punct[i], seg.caps[i]);
        }
    }
    if unigrams.is_empty() {
        return Err(TaggerError::EmptyTrainingSet);
    }
    Ok(BaselineModel { trigrams, unigrams, alpha, majority: overall.best(alpha) })
}

impl BaselineModel {
    pub fn predict(&self, tokens: &[Token]) -> Prediction {
        let mut out = Prediction { punct: Vec::with_capacity(tokens.len()), caps: Vec::with_capacity(tokens.len()) };
        for i in 0..tokens.len() {
            let key = context(tokens, i);
            let (p, c) = self
                .trigrams
                .get(&key)
                .or_else(|| self.unigrams.get(&key.1))
                .map_or(self.majority, |h| h.best(self.alpha));
            out.punct.push(p);
            out.caps.push(c);
        }
        out
    }

    /// JSON with keys in sorted order at every level.
    pub fn to_json(&self) -> String {
        let file = ModelFile {
            alpha: format!("{}/{}", self.alpha.numer(), self.alpha.denom()),
            caps_majority: self.majority.1,
            format_version: FORMAT_VERSION,
            punct_majority: self.majority.0,
            trigrams: self
                .trigrams
                .iter()
                .map(|(&(a, b, c), h)| (format!("{} {} {}", id_key(a), id_key(b), id_key(c)), *h))
                .collect(),
            unigrams: self.unigrams.iter().map(|(&id, h)| (id_key(id), *h)).collect(),
        };
        serde_json::to_string(&file).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, TaggerError> {
        let bad = |m: String| TaggerError::InvalidModel(m);
        let file: ModelFile = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
        if file.format_version != FORMAT_VERSION {
            return Err(bad(format!("unsupported format version {}", file.format_version)));
        }
        let alpha = crate::corpus::parse_ratio(&file.alpha).map_err(|e| bad(e.to_string()))?;
        let mut trigrams = BTreeMap::new();
        for (k, h) in file.trigrams {
            let ids: Vec<u32> = k.split(' ').map(parse_id).collect::<Result<_, _>>().map_err(bad)?;
            let [a, b, c] = ids[..] else {
                return Err(bad(format!("bad trigram key {k:?}")));
            };
            trigrams.insert((a, b, c), h);
        }
        let mut unigrams = BTreeMap::new();
        for (k, h) in file.unigrams {
            unigrams.insert(parse_id(&k).map_err(bad)?, h);
        }
        Ok(BaselineModel { trigrams, unigrams, alpha, majority: (file.punct_majority, file.caps_majority) })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), TaggerError> {
        let mut text = self.to_json();
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TaggerError> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

fn id_key(id: u32) -> String {
    if id == BOUNDARY {
        "_".to_owned()
    } else {
        id.to_string()
    }
}

fn parse_id(s: &str) -> Result<u32, String> {
    if s == "_" {
        Ok(BOUNDARY)
    } else {
        s.parse().map_err(|_| format!("bad token id {s:?}"))
    }
}

// Fields are declared alphabetically so the serialized keys come out sorted.
#[derive(Serialize, Deserialize)]
struct ModelFile {
    alpha: String,
    caps_majority: CapTag,
    format_version: u32,
    punct_majority: PunctLabel,
    trigrams: BTreeMap<String, Histogram>,
    unigrams: BTreeMap<String, Histogram>,
}

impl TaggerBackend for BaselineModel {
    fn model_name(&self) -> &str {
        "baseline"
    }

    fn predict_tokens(&self, tokens: &[Token]) -> Result<Prediction, TaggerError> {
        Ok(self.predict(tokens))
    }
}
