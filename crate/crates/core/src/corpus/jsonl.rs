//! Labeled-segment JSON-lines files.
//!
//! One object per line, keys in the order `doc_id`, `tokens`, `punct`,
//! `caps`, compact separators and LF terminators.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{CapTag, CorpusError, LabeledSegment, PunctLabel};
use crate::tokenizer::{Token, Vocab};

#[derive(Serialize)]
struct SegmentRecordRef<'a> {
    doc_id: &'a str,
    tokens: Vec<&'a str>,
    punct: &'a [PunctLabel],
    caps: &'a [CapTag],
}

#[derive(Deserialize)]
struct SegmentRecord {
    doc_id: String,
    tokens: Vec<String>,
    punct: Vec<PunctLabel>,
    caps: Vec<CapTag>,
}

pub fn segment_to_json(seg: &LabeledSegment) -> String {
    let rec = SegmentRecordRef {
        doc_id: &seg.doc_id,
        tokens: seg.tokens.iter().map(|t| t.surface.as_str()).collect(),
        punct: &seg.punct,
        caps: &seg.caps,
    };
    serde_json::to_string(&rec).expect("segment serializes")
}

pub fn write_segments<'a, W: Write>(
    mut out: W,
    segments: impl IntoIterator<Item = &'a LabeledSegment>,
) -> io::Result<()> {
    for seg in segments {
        out.write_all(segment_to_json(seg).as_bytes())?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

/// Rebuilds tokens from their surfaces. Word indices restart at every
/// non-continuation token; source offsets are not stored in the file.
///
/// Token offsets are not stored either. They are recovered from the restart
/// rule: a line with the same `doc_id` as the line before it starts right
/// after the last sentence-final mark of that line, or at its end.
pub fn segments_from_jsonl<R: BufRead>(reader: R, vocab: &Vocab) -> Result<Vec<LabeledSegment>, CorpusError> {
    let prefix = vocab.continuation_prefix();
    let mut out: Vec<LabeledSegment> = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i as u64 + 1;
        let malformed = |reason: String| CorpusError::MalformedRecord { line: line_no, reason };
        let line = line.map_err(|e| {
            if e.kind() == io::ErrorKind::InvalidData {
                malformed("invalid UTF-8".into())
            } else {
                CorpusError::Io(e)
            }
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: SegmentRecord = serde_json::from_str(&line).map_err(|e| malformed(e.to_string()))?;
        if rec.tokens.len() != rec.punct.len() || rec.tokens.len() != rec.caps.len() {
            return Err(malformed(format!(
                "{} tokens, {} punct labels, {} cap labels",
                rec.tokens.len(),
                rec.punct.len(),
                rec.caps.len()
            )));
        }
        let mut word_index = 0usize;
        let tokens = rec
            .tokens
            .into_iter()
            .enumerate()
            .map(|(j, surface)| {
                let is_continuation = surface.len() > prefix.len() && surface.starts_with(prefix);
                if j > 0 && !is_continuation {
                    word_index += 1;
                }
                Token { vocab_id: vocab.id_or_unk(&surface), surface, is_continuation, word_index }
            })
            .collect();
        let token_offset = match out.last() {
            Some(prev) if prev.doc_id == rec.doc_id => {
                prev.token_offset + prev.punct.iter().rposition(|p| p.is_sentence_final()).map_or(prev.len(), |k| k + 1)
            }
            _ => 0,
        };
        out.push(LabeledSegment {
            doc_id: rec.doc_id,
            tokens,
            punct: rec.punct,
            caps: rec.caps,
            source_span: (0, 0),
            token_offset,
        });
    }
    Ok(out)
}

pub fn read_segments(path: impl AsRef<std::path::Path>, vocab: &Vocab) -> Result<Vec<LabeledSegment>, CorpusError> {
    let file = std::fs::File::open(path)?;
    segments_from_jsonl(io::BufReader::new(file), vocab)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{label_document, segment};

    fn vocab() -> Vocab {
        Vocab::from_tokens(["[UNK]", "türkiye", "nin", "her", "y", "##tu"]).unwrap()
    }

    #[test]
    fn exact_line_format() {
        let doc = label_document("7", "YTU Türkiye'nin her", &vocab());
        let seg = &segment(&doc, 512)[0];
        assert_eq!(
            segment_to_json(seg),
            r###"{"doc_id":"7","tokens":["y","##tu","türkiye","nin","her"],"punct":["non","non","apostrophe","non","non"],"caps":["Cap","non","One","non","non"]}"###
        );
    }

    #[test]
    fn read_back() {
        let v = vocab();
        let doc = label_document("7", "YTU Türkiye'nin her.", &v);
        let segs = segment(&doc, 512);
        let mut buf = Vec::new();
        write_segments(&mut buf, &segs).unwrap();
        assert!(buf.ends_with(b"]}\n"));
        let back = segments_from_jsonl(&buf[..], &v).unwrap();
        assert_eq!(back[0].tokens, segs[0].tokens);
        assert_eq!(back[0].punct, segs[0].punct);
        assert_eq!(back[0].caps, segs[0].caps);
    }

    #[test]
    fn offsets_are_recovered() {
        let v = vocab();
        let mut segs = Vec::new();
        for (id, text) in [("0", "her her. her her her her. her her her her her"), ("1", "her. her her her")] {
            segs.extend(segment(&label_document(id, text, &v), 4));
        }
        assert!(segs.len() > 4);
        let mut buf = Vec::new();
        write_segments(&mut buf, &segs).unwrap();
        let back = segments_from_jsonl(&buf[..], &v).unwrap();
        let offsets = |s: &[LabeledSegment]| s.iter().map(|x| x.token_offset).collect::<Vec<_>>();
        assert_eq!(offsets(&back), offsets(&segs));
    }

    #[test]
    fn length_mismatch_is_malformed() {
        let line = br#"{"doc_id":"0","tokens":["her"],"punct":[],"caps":["non"]}"#;
        let err = segments_from_jsonl(&line[..], &vocab()).unwrap_err();
        assert!(matches!(err, CorpusError::MalformedRecord { line: 1, .. }));
        let line = br#"{"doc_id":"0","tokens":["her"],"punct":["dot"],"caps":["non"]}"#;
        assert!(segments_from_jsonl(&line[..], &vocab()).is_err());
    }
}
