//! Corpus ingestion, self-supervised labeling, segmentation, splitting and
//! label distribution statistics.

mod ingest;
mod jsonl;
mod labels;
mod split;
mod stats;

use serde::{Deserialize, Serialize};

use crate::normalization::nfc;
use crate::tokenizer::{pretokenize, tokenize_units, Token, Vocab, WordUnit};

pub use ingest::{ingest, ingest_reader, CorpusError, Document, Format};
pub use jsonl::{read_segments, segment_to_json, segments_from_jsonl, write_segments};
pub use labels::{CapTag, Label, PunctLabel, UnknownLabel};
pub use split::{parse_ratio, shuffle_seeded, split_dataset, SplitError, SplitSpec, Splits};
pub use stats::{count_marks, distribution, text_distribution, DistributionTable};

pub const DEFAULT_MAX_LEN: usize = 512;

/// A whole document turned into parallel token and label sequences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledDocument {
    pub doc_id: String,
    pub units: Vec<WordUnit>,
    pub tokens: Vec<Token>,
    pub punct: Vec<PunctLabel>,
    pub caps: Vec<CapTag>,
}

/// A window of at most `max_len` tokens with its labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledSegment {
    pub doc_id: String,
    pub tokens: Vec<Token>,
    pub punct: Vec<PunctLabel>,
    pub caps: Vec<CapTag>,
    /// Character offsets into the NFC source text.
    pub source_span: (usize, usize),
    /// Index of the first token within its document.
    pub token_offset: usize,
}

impl LabeledSegment {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Tokenizes units and assigns labels: a unit's mark goes on its last token,
/// its case tag on its first token.
pub fn extract_labels(units: &[WordUnit], vocab: &Vocab) -> (Vec<Token>, Vec<PunctLabel>, Vec<CapTag>) {
    let tokens = tokenize_units(units, vocab);
    let mut punct = vec![PunctLabel::None; tokens.len()];
    let mut caps = vec![CapTag::Non; tokens.len()];
    for (i, tok) in tokens.iter().enumerate() {
        let unit = &units[tok.word_index];
        let first = i == 0 || tokens[i - 1].word_index != tok.word_index;
        let last = i + 1 == tokens.len() || tokens[i + 1].word_index != tok.word_index;
        if first {
            caps[i] = unit.original_case.into();
        }
        if last {
            punct[i] = unit.punct();
        }
    }
    (tokens, punct, caps)
}

pub fn label_document(doc_id: impl Into<String>, text: &str, vocab: &Vocab) -> LabeledDocument {
    let units = pretokenize(text);
    let (tokens, punct, caps) = extract_labels(&units, vocab);
    LabeledDocument { doc_id: doc_id.into(), units, tokens, punct, caps }
}

/// Window bounds for training segmentation.
///
/// The first window is `[0, max_len)`. Each following window starts right
/// after the last sentence-final mark (`. ! ; ?`) inside the previous window,
/// or at the previous window's end when it has none.
pub fn segment_bounds(punct: &[PunctLabel], max_len: usize) -> Vec<(usize, usize)> {
    assert!(max_len >= 2, "max_len must be at least 2");
    let n = punct.len();
    let mut bounds = Vec::new();
    if n == 0 {
        return bounds;
    }
    let mut start = 0;
    loop {
        let end = (start + max_len).min(n);
        bounds.push((start, end));
        if end == n {
            break;
        }
        start = match punct[start..end].iter().rposition(|p| p.is_sentence_final()) {
            Some(rel) => start + rel + 1,
            None => end,
        };
    }
    bounds
}

fn source_span(units: &[WordUnit], tokens: &[Token]) -> (usize, usize) {
    match (tokens.first(), tokens.last()) {
        (Some(first), Some(last)) => (units[first.word_index].char_span.0, units[last.word_index].char_span.1),
        _ => (0, 0),
    }
}

pub fn segment(doc: &LabeledDocument, max_len: usize) -> Vec<LabeledSegment> {
    segment_bounds(&doc.punct, max_len)
        .into_iter()
        .map(|(s, e)| LabeledSegment {
            doc_id: doc.doc_id.clone(),
            tokens: doc.tokens[s..e].to_vec(),
            punct: doc.punct[s..e].to_vec(),
            caps: doc.caps[s..e].to_vec(),
            source_span: source_span(&doc.units, &doc.tokens[s..e]),
            token_offset: s,
        })
        .collect()
}

/// Removes restorable marks from raw text. Apostrophes are deleted so that
/// suffixes rejoin their stem; every other mark becomes a space.
pub fn strip_punctuation(text: &str) -> String {
    nfc(text).chars().filter(|&c| c != '\'').map(|c| if PunctLabel::is_mark(c) { ' ' } else { c }).collect()
}

/// Overlapping windows with stride `max_len / 2`.
pub fn window_bounds(n: usize, max_len: usize) -> Vec<(usize, usize)> {
    assert!(max_len >= 2, "max_len must be at least 2");
    let stride = max_len / 2;
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let mut start = 0;
    loop {
        let end = (start + max_len).min(n);
        out.push((start, end));
        if end == n {
            break;
        }
        start += stride;
    }
    out
}

/// Picks, for every position, the label from the window in which that
/// position is farthest from a window edge. Ties go to the earlier window.
pub fn merge_window_labels<L: Copy>(n: usize, windows: &[(usize, usize)], labels: &[Vec<L>]) -> Vec<L> {
    assert_eq!(windows.len(), labels.len(), "one label sequence per window");
    let mut best: Vec<Option<(usize, L)>> = vec![None; n];
    for (&(start, end), seq) in windows.iter().zip(labels) {
        assert_eq!(seq.len(), end - start, "window label length");
        for (offset, &label) in seq.iter().enumerate() {
            let pos = start + offset;
            let margin = offset.min(end - 1 - pos);
            match best[pos] {
                Some((m, _)) if m >= margin => {}
                _ => best[pos] = Some((margin, label)),
            }
        }
    }
    best.into_iter().map(|b| b.expect("windows cover every position").1).collect()
}

/// Unpunctuated, lowercased input split into overlapping model windows.
#[derive(Debug, Clone)]
pub struct InferencePlan {
    pub units: Vec<WordUnit>,
    pub tokens: Vec<Token>,
    pub segments: Vec<LabeledSegment>,
}

impl InferencePlan {
    pub fn windows(&self) -> Vec<(usize, usize)> {
        self.segments.iter().map(|s| (s.token_offset, s.token_offset + s.len())).collect()
    }

    pub fn merge<L: Copy>(&self, per_window: &[Vec<L>]) -> Vec<L> {
        merge_window_labels(self.tokens.len(), &self.windows(), per_window)
    }
}

pub fn prepare_inference(text: &str, vocab: &Vocab, max_len: usize) -> InferencePlan {
    let stripped = strip_punctuation(text);
    let units: Vec<WordUnit> = pretokenize(&stripped);
    let tokens = tokenize_units(&units, vocab);
    let segments = window_bounds(tokens.len(), max_len)
        .into_iter()
        .map(|(s, e)| LabeledSegment {
            doc_id: String::new(),
            tokens: tokens[s..e].to_vec(),
            punct: vec![PunctLabel::None; e - s],
            caps: vec![CapTag::Non; e - s],
            source_span: source_span(&units, &tokens[s..e]),
            token_offset: s,
        })
        .collect();
    InferencePlan { units, tokens, segments }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tokenizer::Vocab;
    use PunctLabel as P;

    pub(crate) fn table_vocab() -> Vocab {
        Vocab::from_tokens([
            "[PAD]",
            "[UNK]",
            "[CLS]",
            "[SEP]",
            "türkiye",
            "nin",
            "her",
            "tarafında",
            "devam",
            "etmektedir",
            "y",
            "##tu",
            "en",
            "iyi",
            "okulu",
            "##dur",
        ])
        .unwrap()
    }

    fn surfaces(t: &[Token]) -> Vec<&str> {
        t.iter().map(|t| t.surface.as_str()).collect()
    }

    #[test]
    fn punctuation_labels_follow_words() {
        let doc = label_document("0", "Türkiye'nin her tarafında devam etmektedir.", &table_vocab());
        assert_eq!(surfaces(&doc.tokens), ["türkiye", "nin", "her", "tarafında", "devam", "etmektedir"]);
        assert_eq!(doc.punct, [P::Apostrophe, P::None, P::None, P::None, P::None, P::Period]);
    }

    #[test]
    fn case_labels_on_first_subtoken() {
        let doc = label_document("0", "YTU Türkiye'nin en iyi okuludur.", &table_vocab());
        assert_eq!(surfaces(&doc.tokens), ["y", "##tu", "türkiye", "nin", "en", "iyi", "okulu", "##dur"]);
        use CapTag::*;
        assert_eq!(doc.caps, [Cap, Non, One, Non, Non, Non, Non, Non]);
        assert_eq!(doc.punct[7], P::Period);
        assert_eq!(doc.punct[6], P::None);
    }

    #[test]
    fn empty_text_has_no_labels() {
        let doc = label_document("0", "", &table_vocab());
        assert!(doc.tokens.is_empty() && doc.punct.is_empty() && doc.caps.is_empty());
    }

    #[test]
    fn unk_token_still_carries_labels() {
        let doc = label_document("0", "Qwerty.", &table_vocab());
        assert_eq!(surfaces(&doc.tokens), ["[UNK]"]);
        assert_eq!(doc.punct, [P::Period]);
        assert_eq!(doc.caps, [CapTag::One]);
    }

    #[test]
    fn restart_after_sentence_final_mark() {
        let mut punct = vec![P::None; 10];
        punct[2] = P::Period;
        assert_eq!(segment_bounds(&punct, 4), [(0, 4), (3, 7), (7, 10)]);
    }

    #[test]
    fn short_document_is_one_segment() {
        assert_eq!(segment_bounds(&[P::None; 3], 512), [(0, 3)]);
        assert!(segment_bounds(&[], 4).is_empty());
    }

    #[test]
    fn hard_cut_without_sentence_final_marks() {
        let mut punct = vec![P::None; 8];
        punct[1] = P::Comma;
        assert_eq!(segment_bounds(&punct, 4), [(0, 4), (4, 8)]);
    }

    #[test]
    fn mark_at_window_end_gives_no_overlap() {
        let mut punct = vec![P::None; 8];
        punct[3] = P::Question;
        assert_eq!(segment_bounds(&punct, 4), [(0, 4), (4, 8)]);
    }

    #[test]
    fn segments_copy_labels_and_spans() {
        let text = "Her tarafında devam. Her iyi. En iyi";
        let v = Vocab::from_tokens(["[UNK]", "her", "tarafında", "devam", "iyi", "en"]).unwrap();
        let doc = label_document("d", text, &v);
        let segs = segment(&doc, 4);
        assert_eq!(segs[0].tokens.len(), 4);
        assert_eq!(segs[1].token_offset, 3);
        assert_eq!(segs[1].punct[0], P::None);
        assert_eq!(segs[0].source_span, (0, 24));
        for s in &segs {
            assert_eq!(s.doc_id, "d");
            assert_eq!(s.tokens.len(), s.punct.len());
            assert_eq!(s.tokens.len(), s.caps.len());
        }
    }

    #[test]
    fn stride_windows() {
        assert_eq!(window_bounds(600, 512), [(0, 512), (256, 600)]);
        assert_eq!(window_bounds(10, 512), [(0, 10)]);
        assert_eq!(window_bounds(512, 512), [(0, 512)]);
        assert_eq!(window_bounds(513, 512), [(0, 512), (256, 513)]);
        assert!(window_bounds(0, 512).is_empty());
    }

    #[test]
    fn merge_prefers_central_window() {
        // windows [0,4) and [2,6); position 3 is at margin 0 in the first
        // window and margin 1 in the second.
        let windows = [(0, 4), (2, 6)];
        let labels = vec![vec![1, 1, 1, 1], vec![2, 2, 2, 2]];
        assert_eq!(merge_window_labels(6, &windows, &labels), [1, 1, 1, 2, 2, 2]);
    }

    #[test]
    fn inference_strips_existing_punctuation() {
        let v = Vocab::from_tokens(["[UNK]", "türkiye", "##nin", "her", "a", "b"]).unwrap();
        let plan = prepare_inference("Türkiye'nin her, a.b", &v, 512);
        assert_eq!(surfaces(&plan.tokens), ["türkiye", "##nin", "her", "a", "b"]);
        assert_eq!(plan.segments.len(), 1);
        assert!(plan.segments[0].punct.iter().all(|&p| p == P::None));
        assert!(plan.units.iter().all(|u| u.trailing_punct.is_none()));
    }
}
