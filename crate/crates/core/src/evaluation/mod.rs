//! Token-level precision, recall and F1 from confusion matrices.
//!
//! Every position counts once. Per-class scores are exact fractions; a score
//! whose denominator is zero is zero.

mod bench;
mod report;

use num_rational::Ratio;
use thiserror::Error;

use crate::corpus::{CapTag, Label, LabeledSegment, PunctLabel};
use crate::par::{self, Execution};
use crate::tagger::{TaggerBackend, TaggerError};

pub use bench::{bench, default_hardware_note, BenchReport};
pub use report::{render_evaluation, render_report};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("gold and predicted lengths differ for sequence {index} ({gold} vs {pred})")]
    LengthMismatch { index: usize, gold: usize, pred: usize },
    #[error("unknown class {0:?}")]
    UnknownClass(String),
    #[error("confusion matrices have different label sets")]
    AlphabetMismatch,
    #[error("nothing to benchmark: {0}")]
    EmptyBench(&'static str),
    #[error(transparent)]
    Backend(#[from] TaggerError),
}

/// `cells[g][p]` counts positions with gold label `g` predicted as `p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    labels: Vec<String>,
    cells: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(labels: Vec<String>) -> Self {
        let k = labels.len();
        ConfusionMatrix { labels, cells: vec![vec![0; k]; k] }
    }

    pub fn for_alphabet<L: Label>() -> Self {
        Self::new(L::names())
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn cells(&self) -> &[Vec<u64>] {
        &self.cells
    }

    pub fn cell(&self, gold: usize, pred: usize) -> u64 {
        self.cells[gold][pred]
    }

    pub fn add(&mut self, gold: usize, pred: usize) {
        self.cells[gold][pred] += 1;
    }

    pub fn add_count(&mut self, gold: usize, pred: usize, count: u64) {
        self.cells[gold][pred] += count;
    }

    /// Cell-wise sum. Commutative and associative, so merge order is free.
    pub fn merge(&mut self, other: &ConfusionMatrix) -> Result<(), EvalError> {
        if self.labels != other.labels {
            return Err(EvalError::AlphabetMismatch);
        }
        for (row, orow) in self.cells.iter_mut().zip(&other.cells) {
            for (c, o) in row.iter_mut().zip(orow) {
                *c += o;
            }
        }
        Ok(())
    }

    pub fn index_of(&self, class: &str) -> Result<usize, EvalError> {
        self.labels.iter().position(|l| l == class).ok_or_else(|| EvalError::UnknownClass(class.to_owned()))
    }

    pub fn total(&self) -> u64 {
        self.cells.iter().flatten().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..self.labels.len()).map(|i| self.cells[i][i]).sum()
    }

    pub fn tp(&self, i: usize) -> u64 {
        self.cells[i][i]
    }

    pub fn fp(&self, i: usize) -> u64 {
        self.predicted(i) - self.tp(i)
    }

    pub fn fn_(&self, i: usize) -> u64 {
        self.support(i) - self.tp(i)
    }

    /// Gold occurrences of class `i`.
    pub fn support(&self, i: usize) -> u64 {
        self.cells[i].iter().sum()
    }

    pub fn predicted(&self, i: usize) -> u64 {
        self.cells.iter().map(|row| row[i]).sum()
    }

    /// Header row and column carry label names; rows are gold, columns predicted.
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let mut header = vec!["gold\\pred".to_owned()];
        header.extend(self.labels.iter().cloned());
        w.write_record(&header).expect("write to memory");
        for (label, row) in self.labels.iter().zip(&self.cells) {
            let mut rec = vec![label.clone()];
            rec.extend(row.iter().map(u64::to_string));
            w.write_record(&rec).expect("write to memory");
        }
        String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv output is UTF-8")
    }
}

/// Counts gold/predicted pairs over aligned sequences.
pub fn confusion<L: Label>(gold: &[Vec<L>], pred: &[Vec<L>]) -> Result<ConfusionMatrix, EvalError> {
    confusion_masked(gold, pred, None)
}

/// Like [`confusion`], skipping positions whose mask entry is `false`.
pub fn confusion_masked<L: Label>(
    gold: &[Vec<L>],
    pred: &[Vec<L>],
    mask: Option<&[Vec<bool>]>,
) -> Result<ConfusionMatrix, EvalError> {
    if gold.len() != pred.len() {
        return Err(EvalError::LengthMismatch {
            index: gold.len().min(pred.len()),
            gold: gold.len(),
            pred: pred.len(),
        });
    }
    let mut m = ConfusionMatrix::for_alphabet::<L>();
    for (index, (g, p)) in gold.iter().zip(pred).enumerate() {
        if g.len() != p.len() {
            return Err(EvalError::LengthMismatch { index, gold: g.len(), pred: p.len() });
        }
        let keep = mask.and_then(|m| m.get(index));
        if let Some(k) = keep {
            if k.len() != g.len() {
                return Err(EvalError::LengthMismatch { index, gold: g.len(), pred: k.len() });
            }
        }
        for (j, (a, b)) in g.iter().zip(p).enumerate() {
            if keep.is_none_or(|k| k[j]) {
                m.add(a.index(), b.index());
            }
        }
    }
    Ok(m)
}

fn ratio(num: u64, den: u64) -> Ratio<u64> {
    if den == 0 {
        Ratio::from_integer(0)
    } else {
        Ratio::new(num, den)
    }
}

pub fn to_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Precision, recall and F1.
pub type Scores = (Ratio<u64>, Ratio<u64>, Ratio<u64>);

/// Precision, recall and F1 of one class.
///
/// F1 is computed as `2TP / (2TP + FP + FN)`, which equals `2pr / (p + r)`
/// whenever `p + r > 0` and stays within `u64` for any corpus size.
pub fn precision_recall_f1(matrix: &ConfusionMatrix, class: &str) -> Result<Scores, EvalError> {
    let i = matrix.index_of(class)?;
    Ok(prf_at(matrix, i))
}

fn prf_at(m: &ConfusionMatrix, i: usize) -> Scores {
    let (tp, fp, fn_) = (m.tp(i), m.fp(i), m.fn_(i));
    (ratio(tp, tp + fp), ratio(tp, tp + fn_), ratio(2 * tp, 2 * tp + fp + fn_))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassMetrics {
    pub label: String,
    pub precision: Ratio<u64>,
    pub recall: Ratio<u64>,
    pub f1: Ratio<u64>,
    pub support: u64,
    pub predicted: u64,
}

impl ClassMetrics {
    /// Seen in gold or in predictions. Absent classes are left out of averages.
    pub fn is_present(&self) -> bool {
        self.support > 0 || self.predicted > 0
    }
}

/// Scores for one task.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub task: String,
    pub classes: Vec<ClassMetrics>,
    /// Mean F1 over present classes other than the null class. The headline.
    pub macro_f1: f64,
    /// Mean F1 over all present classes, null included.
    pub macro_f1_all: f64,
    /// Pooled over positions; equal to accuracy.
    pub micro_f1: Ratio<u64>,
    pub weighted_f1: f64,
    pub accuracy: Ratio<u64>,
    pub positions: u64,
    pub confusion: ConfusionMatrix,
}

fn mean(xs: impl Iterator<Item = Ratio<u64>>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + to_f64(x), n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

impl EvalReport {
    /// Derives every score from the matrix. `null` names the class left out
    /// of the headline macro average.
    pub fn from_confusion(task: impl Into<String>, confusion: ConfusionMatrix, null: &str) -> Self {
        let classes: Vec<ClassMetrics> = (0..confusion.labels.len())
            .map(|i| {
                let (precision, recall, f1) = prf_at(&confusion, i);
                ClassMetrics {
                    label: confusion.labels[i].clone(),
                    precision,
                    recall,
                    f1,
                    support: confusion.support(i),
                    predicted: confusion.predicted(i),
                }
            })
            .collect();
        let total = confusion.total();
        let correct = confusion.correct();
        // pooled: TP = correct, FP = FN = total - correct
        let micro_f1 = ratio(2 * correct, 2 * correct + 2 * (total - correct));
        let weighted_f1 = if total == 0 {
            0.0
        } else {
            classes.iter().map(|c| c.support as f64 * to_f64(c.f1)).sum::<f64>() / total as f64
        };
        EvalReport {
            task: task.into(),
            macro_f1: mean(classes.iter().filter(|c| c.is_present() && c.label != null).map(|c| c.f1)),
            macro_f1_all: mean(classes.iter().filter(|c| c.is_present()).map(|c| c.f1)),
            micro_f1,
            weighted_f1,
            accuracy: ratio(correct, total),
            positions: total,
            classes,
            confusion,
        }
    }

    pub fn class(&self, label: &str) -> Option<&ClassMetrics> {
        self.classes.iter().find(|c| c.label == label)
    }
}

/// Reports for the tasks the backend supports.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub model_name: String,
    pub segments: usize,
    pub punct: Option<EvalReport>,
    pub caps: Option<EvalReport>,
}

/// Segments sent to the backend per call.
const BATCH: usize = 64;

/// Runs the backend over every segment and scores it against the gold labels.
///
/// Batches may be predicted in parallel; counts are merged by summation so
/// the result does not depend on segment order.
pub fn evaluate<B: TaggerBackend + ?Sized>(
    backend: &B,
    segments: &[LabeledSegment],
    exec: Execution,
) -> Result<Evaluation, EvalError> {
    let chunks: Vec<&[LabeledSegment]> = segments.chunks(BATCH).collect();
    let partial = par::try_map(exec, &chunks, |chunk| -> Result<_, EvalError> {
        for seg in chunk.iter() {
            if let Some(max) = backend.max_len() {
                if seg.len() > max {
                    return Err(TaggerError::LengthExceeded { len: seg.len(), max }.into());
                }
            }
        }
        let inputs: Vec<&[crate::tokenizer::Token]> =
            chunk.iter().filter(|s| !s.is_empty()).map(|s| s.tokens.as_slice()).collect();
        let preds = if inputs.is_empty() { Vec::new() } else { backend.predict_batch(&inputs)? };
        let mut punct = ConfusionMatrix::for_alphabet::<PunctLabel>();
        let mut caps = ConfusionMatrix::for_alphabet::<CapTag>();
        for (seg, pred) in chunk.iter().filter(|s| !s.is_empty()).zip(&preds) {
            if pred.punct.len() != seg.len() || pred.caps.len() != seg.len() {
                return Err(TaggerError::LengthMismatch(0).into());
            }
            for i in 0..seg.len() {
                punct.add(seg.punct[i].index(), pred.punct[i].index());
                caps.add(seg.caps[i].index(), pred.caps[i].index());
            }
        }
        Ok((punct, caps))
    })?;
    let mut punct = ConfusionMatrix::for_alphabet::<PunctLabel>();
    let mut caps = ConfusionMatrix::for_alphabet::<CapTag>();
    for (p, c) in &partial {
        punct.merge(p)?;
        caps.merge(c)?;
    }
    let capabilities = backend.capabilities();
    Ok(Evaluation {
        model_name: backend.model_name().to_owned(),
        segments: segments.len(),
        punct: capabilities.punct.then(|| EvalReport::from_confusion("punct", punct, PunctLabel::NULL.name())),
        caps: capabilities.caps.then(|| EvalReport::from_confusion("caps", caps, CapTag::NULL.name())),
    })
}
