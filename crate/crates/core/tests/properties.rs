//! Property tests over whole pipelines: labeling, segmentation, reconstruction,
//! scoring, the baseline and the wire server.

use std::io::Cursor;
use std::sync::OnceLock;

use num_rational::Ratio;
use proptest::prelude::*;
use serde_json::Value;

use noktalama::corpus::{label_document, segment, split_dataset, CapTag, Label, LabeledSegment, PunctLabel, SplitSpec};
use noktalama::evaluation::{evaluate, to_f64, ConfusionMatrix, EvalReport};
use noktalama::par::Execution;
use noktalama::reconstruction::{canonicalize, reconstruct, reconstruct_pieces, Piece, RenderPolicy};
use noktalama::synth;
use noktalama::tagger::protocol::{backend_handler, request_line, serve};
use noktalama::tagger::{train_baseline, BaselineModel};
use noktalama::tokenizer::{pretokenize, Vocab};

const MARKS: &str = ".,!?;:-'";

fn vocab() -> &'static Vocab {
    static V: OnceLock<Vocab> = OnceLock::new();
    V.get_or_init(|| synth::build_vocab(&synth::sentences(0, 2000)))
}

fn model() -> &'static BaselineModel {
    static M: OnceLock<BaselineModel> = OnceLock::new();
    M.get_or_init(|| {
        let segs: Vec<LabeledSegment> = synth::sentences(1, 600)
            .iter()
            .enumerate()
            .flat_map(|(i, s)| segment(&label_document(i.to_string(), s, vocab()), 510))
            .collect();
        train_baseline(&segs, Ratio::from_integer(1)).unwrap()
    })
}

/// Synthetic paragraphs or free-form strings over a Turkish alphabet.
fn text() -> impl Strategy<Value = String> {
    prop_oneof![
        (any::<u64>(), 1usize..6).prop_map(|(seed, n)| synth::paragraphs(seed, 1, 1, n).remove(0)),
        "[a-zçğıöşüA-ZÇĞİÖŞÜ .,!?;:'\\-]{0,120}",
    ]
}

fn segments_of(texts: &[String], max_len: usize) -> Vec<LabeledSegment> {
    texts.iter().enumerate().flat_map(|(i, t)| segment(&label_document(i.to_string(), t, vocab()), max_len)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn labels_sit_on_unit_boundaries(t in text(), max_len in 2usize..40) {
        let doc = label_document("d", &t, vocab());
        let n = doc.tokens.len();
        for i in 0..n {
            let unit_final = i + 1 == n || !doc.tokens[i + 1].is_continuation;
            if doc.punct[i] != PunctLabel::None {
                prop_assert!(unit_final, "mark inside a unit at {i}");
            }
            if doc.caps[i] != CapTag::Non {
                prop_assert!(!doc.tokens[i].is_continuation, "case tag on a continuation at {i}");
            }
        }
        for seg in segment(&doc, max_len) {
            let r = seg.token_offset..seg.token_offset + seg.len();
            prop_assert_eq!(&seg.punct[..], &doc.punct[r.clone()]);
            prop_assert_eq!(&seg.caps[..], &doc.caps[r]);
        }
    }

    #[test]
    fn segments_cover_the_document(t in text(), max_len in 2usize..40) {
        let doc = label_document("d", &t, vocab());
        let segs = segment(&doc, max_len);
        let mut covered = vec![false; doc.tokens.len()];
        let mut prev_end = 0;
        for seg in &segs {
            prop_assert!(seg.len() <= max_len);
            prop_assert!(!seg.is_empty());
            prop_assert!(seg.token_offset <= prev_end);
            prev_end = seg.token_offset + seg.len();
            covered[seg.token_offset..prev_end].iter_mut().for_each(|c| *c = true);
        }
        prop_assert!(covered.iter().all(|&c| c));
        for u in &doc.units {
            prop_assert!(
                segs.iter().any(|s| s.source_span.0 <= u.char_span.0 && u.char_span.1 <= s.source_span.1),
                "unit {:?} outside every segment", u.text
            );
        }
    }

    #[test]
    fn prepare_is_deterministic(texts in prop::collection::vec(text(), 0..12), seed: u64) {
        let mut spec = SplitSpec::default();
        spec.seed = seed;
        let run = || {
            let docs: Vec<(usize, String)> = texts.iter().cloned().enumerate().collect();
            let s = split_dataset(docs, &spec);
            let seg = |d: &[(usize, String)]| {
                d.iter().flat_map(|(i, t)| segment(&label_document(i.to_string(), t, vocab()), 16)).collect::<Vec<_>>()
            };
            (seg(&s.train), seg(&s.test), seg(&s.valid))
        };
        prop_assert_eq!(run(), run());
    }

    #[test]
    fn round_trip_without_unknowns(t in text()) {
        let units = pretokenize(&t);
        let (tokens, punct, caps) = noktalama::corpus::extract_labels(&units, vocab());
        prop_assume!(tokens.iter().all(|tok| tok.vocab_id != vocab().unk_id()));
        let rebuilt = reconstruct(&tokens, &punct, &caps, &RenderPolicy::default()).unwrap();
        prop_assert_eq!(canonicalize(&rebuilt), canonicalize(&t));
    }

    /// Every mark in the output comes from a label, in label order.
    #[test]
    fn no_spontaneous_punctuation(
        words in prop::collection::vec("[a-zçğıöşü]{1,8}", 0..20),
        labels in prop::collection::vec((0usize..9, 0usize..3), 20),
    ) {
        let pieces: Vec<Piece<'_>> = words.iter().map(|w| Piece { text: w, starts_word: true }).collect();
        let punct: Vec<PunctLabel> = labels[..words.len()].iter().map(|l| PunctLabel::ALL[l.0]).collect();
        let caps: Vec<CapTag> = labels[..words.len()].iter().map(|l| CapTag::ALL[l.1]).collect();
        let out = reconstruct_pieces(&pieces, &punct, &caps, &RenderPolicy::default()).unwrap();
        let emitted: String = out.chars().filter(|c| MARKS.contains(*c)).collect();
        let expected: String = punct.iter().filter_map(|p| p.as_char()).collect();
        prop_assert_eq!(emitted, expected);
    }

    #[test]
    fn reconstruct_is_total_and_deterministic(
        pieces in prop::collection::vec(("[a-zçğıöşü]{0,5}", any::<bool>(), 0usize..9, 0usize..3), 0..30),
    ) {
        let ps: Vec<Piece<'_>> = pieces.iter().map(|(t, s, _, _)| Piece { text: t, starts_word: *s }).collect();
        let punct: Vec<PunctLabel> = pieces.iter().map(|p| PunctLabel::ALL[p.2]).collect();
        let caps: Vec<CapTag> = pieces.iter().map(|p| CapTag::ALL[p.3]).collect();
        let policy = RenderPolicy::lenient();
        let a = reconstruct_pieces(&ps, &punct, &caps, &policy).unwrap();
        let b = reconstruct_pieces(&ps, &punct, &caps, &policy).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn weighted_f1_is_bounded(cells in prop::collection::vec(prop::collection::vec(0u64..20, 6), 6)) {
        let mut m = ConfusionMatrix::new((0..6).map(|i| format!("c{i}")).collect());
        for (g, row) in cells.iter().enumerate() {
            for (p, &c) in row.iter().enumerate() {
                m.add_count(g, p, c);
            }
        }
        let r = EvalReport::from_confusion("t", m, "c5");
        let f1s: Vec<f64> = r.classes.iter().filter(|c| c.support > 0).map(|c| to_f64(c.f1)).collect();
        prop_assume!(!f1s.is_empty());
        let lo = f1s.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = f1s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(lo - 1e-12 <= r.weighted_f1 && r.weighted_f1 <= hi + 1e-12);
        prop_assert_eq!(r.micro_f1, r.accuracy);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn segment_order_does_not_change_scores(seed: u64, shuffle_seed: u64) {
        let segs = segments_of(&synth::paragraphs(seed, 30, 1, 4), 24);
        let mut shuffled = segs.clone();
        noktalama::corpus::shuffle_seeded(&mut shuffled, shuffle_seed);
        let a = evaluate(model(), &segs, Execution::Sequential).unwrap();
        let b = evaluate(model(), &shuffled, Execution::default()).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn baseline_training_is_byte_identical(seed: u64, num in 1u64..5, den in 1u64..5) {
        let segs = segments_of(&synth::sentences(seed, 80), 510);
        let alpha = Ratio::new(num, den);
        prop_assert_eq!(train_baseline(&segs, alpha).unwrap().to_json(), train_baseline(&segs, alpha).unwrap().to_json());
    }

    /// The server only ever emits names from the two label alphabets.
    #[test]
    fn server_labels_stay_in_the_alphabets(
        batch in prop::collection::vec(prop::collection::vec("(##)?[a-zçğı]{1,6}|[A-Z]{1,3}", 0..12), 1..6),
    ) {
        let handler = backend_handler(model().clone(), vocab().clone());
        let mut input = String::new();
        for (id, tokens) in batch.iter().enumerate() {
            let refs: Vec<&str> = tokens.iter().map(String::as_str).collect();
            input.push_str(&request_line(id as u64 + 1, &refs));
            input.push('\n');
        }
        let mut out = Vec::new();
        serve(Cursor::new(input), &mut out, &*handler).unwrap();
        let punct_names: Vec<&str> = PunctLabel::ALL.iter().map(|l| l.name()).collect();
        let cap_names: Vec<&str> = CapTag::ALL.iter().map(|l| l.name()).collect();
        let lines: Vec<&str> = std::str::from_utf8(&out).unwrap().lines().collect();
        prop_assert_eq!(lines.len(), batch.len());
        for (line, tokens) in lines.iter().zip(&batch) {
            let v: Value = serde_json::from_str(line).unwrap();
            let names = |key: &str| -> Vec<String> {
                v[key].as_array().unwrap().iter().map(|x| x.as_str().unwrap().to_owned()).collect()
            };
            let (p, c) = (names("punct"), names("caps"));
            prop_assert_eq!(p.len(), tokens.len());
            prop_assert_eq!(c.len(), tokens.len());
            prop_assert!(p.iter().all(|n| punct_names.contains(&n.as_str())));
            prop_assert!(c.iter().all(|n| cap_names.contains(&n.as_str())));
        }
    }
}
