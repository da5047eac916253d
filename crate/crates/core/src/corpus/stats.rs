use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::ser::{Serialize, SerializeMap, Serializer};

use super::{LabeledSegment, PunctLabel};
use crate::tokenizer::pretokenize;

/// Punctuation counts per split, one column per split.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DistributionTable {
    splits: Vec<(String, [u64; 8])>,
}

fn mark_index(label: PunctLabel) -> Option<usize> {
    PunctLabel::MARKS.iter().position(|&m| m == label)
}

impl DistributionTable {
    pub fn from_counts(splits: Vec<(String, [u64; 8])>) -> Self {
        DistributionTable { splits }
    }

    pub fn split_names(&self) -> impl Iterator<Item = &str> {
        self.splits.iter().map(|(n, _)| n.as_str())
    }

    pub fn count(&self, split: &str, label: PunctLabel) -> u64 {
        let Some(i) = mark_index(label) else { return 0 };
        self.splits.iter().find(|(n, _)| n == split).map(|(_, c)| c[i]).unwrap_or(0)
    }

    pub fn counts(&self, split: &str) -> Option<[u64; 8]> {
        self.splits.iter().find(|(n, _)| n == split).map(|(_, c)| *c)
    }

    /// Text table with marks as rows and splits as columns.
    pub fn render(&self) -> String {
        let header: Vec<String> =
            std::iter::once("Split".to_owned()).chain(self.splits.iter().map(|(n, _)| n.clone())).collect();
        let mut rows = vec![header];
        for (i, mark) in PunctLabel::MARKS.iter().enumerate() {
            let mut row = vec![mark.as_char().unwrap().to_string()];
            row.extend(self.splits.iter().map(|(_, c)| group_thousands(c[i])));
            rows.push(row);
        }
        let widths: Vec<usize> =
            (0..rows[0].len()).map(|col| rows.iter().map(|r| r[col].chars().count()).max().unwrap_or(0)).collect();
        let mut out = String::new();
        for row in &rows {
            let cells: Vec<String> = row
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(col, (cell, &w))| if col == 0 { format!("{cell:<w$}") } else { format!("{cell:>w$}") })
                .collect();
            let _ = writeln!(out, "{}", cells.join(" | "));
        }
        out
    }
}

impl Serialize for DistributionTable {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        struct Column<'a>(&'a [u64; 8]);

        impl Serialize for Column<'_> {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                let mut map = serializer.serialize_map(Some(8))?;
                for (mark, count) in PunctLabel::MARKS.iter().zip(self.0) {
                    map.serialize_entry(&mark.as_char().unwrap().to_string(), count)?;
                }
                map.end()
            }
        }

        let mut map = serializer.serialize_map(Some(self.splits.len()))?;
        for (name, counts) in &self.splits {
            map.serialize_entry(name, &Column(counts))?;
        }
        map.end()
    }
}

fn group_thousands(n: u64) -> String {
    let digits = n.to_string();
    let mut out = String::new();
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push('.');
        }
        out.push(c);
    }
    out
}

/// Counts non-`None` punctuation labels per split.
///
/// Segments of one document may overlap after the restart rule; a token
/// position is counted once no matter how many segments contain it.
pub fn distribution(splits: &[(&str, &[LabeledSegment])]) -> DistributionTable {
    let splits = splits
        .iter()
        .map(|(name, segments)| {
            let mut by_doc: BTreeMap<&str, Vec<&LabeledSegment>> = BTreeMap::new();
            for s in segments.iter() {
                by_doc.entry(&s.doc_id).or_default().push(s);
            }
            let mut counts = [0u64; 8];
            for segs in by_doc.values_mut() {
                segs.sort_by_key(|s| s.token_offset);
                let mut covered = 0usize;
                for s in segs.iter() {
                    for (i, &p) in s.punct.iter().enumerate() {
                        if s.token_offset + i < covered {
                            continue;
                        }
                        if let Some(m) = mark_index(p) {
                            counts[m] += 1;
                        }
                    }
                    covered = covered.max(s.token_offset + s.len());
                }
            }
            (name.to_string(), counts)
        })
        .collect();
    DistributionTable { splits }
}

/// Marks that survive pretokenization of raw text, in `MARKS` order.
pub fn count_marks(text: &str) -> [u64; 8] {
    let mut counts = [0u64; 8];
    for unit in pretokenize(text) {
        if let Some(m) = unit.trailing_punct.and_then(mark_index) {
            counts[m] += 1;
        }
    }
    counts
}

/// Like [`distribution`] but over raw documents.
pub fn text_distribution<S: AsRef<str>>(splits: &[(&str, &[S])]) -> DistributionTable {
    let splits = splits
        .iter()
        .map(|(name, docs)| {
            let mut counts = [0u64; 8];
            for d in docs.iter() {
                for (c, n) in counts.iter_mut().zip(count_marks(d.as_ref())) {
                    *c += n;
                }
            }
            (name.to_string(), counts)
        })
        .collect();
    DistributionTable { splits }
}
