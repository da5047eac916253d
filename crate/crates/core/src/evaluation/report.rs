use std::fmt::Write as _;

use serde::Serialize;

use super::{to_f64, ConfusionMatrix, EvalReport, Evaluation};

#[derive(Serialize)]
struct ClassJson<'a> {
    label: &'a str,
    precision: f64,
    recall: f64,
    f1: f64,
    support: u64,
    predicted: u64,
}

#[derive(Serialize)]
struct ConfusionJson<'a> {
    labels: &'a [String],
    cells: &'a [Vec<u64>],
}

#[derive(Serialize)]
struct ReportJson<'a> {
    task: &'a str,
    macro_f1: f64,
    macro_f1_all: f64,
    micro_f1: f64,
    weighted_f1: f64,
    accuracy: f64,
    positions: u64,
    classes: Vec<ClassJson<'a>>,
    confusion: ConfusionJson<'a>,
}

#[derive(Serialize)]
struct EvaluationJson<'a> {
    model: &'a str,
    segments: usize,
    punct: Option<ReportJson<'a>>,
    caps: Option<ReportJson<'a>>,
}

fn confusion_json(m: &ConfusionMatrix) -> ConfusionJson<'_> {
    ConfusionJson { labels: m.labels(), cells: m.cells() }
}

fn report_json(r: &EvalReport) -> ReportJson<'_> {
    ReportJson {
        task: &r.task,
        macro_f1: r.macro_f1,
        macro_f1_all: r.macro_f1_all,
        micro_f1: to_f64(r.micro_f1),
        weighted_f1: r.weighted_f1,
        accuracy: to_f64(r.accuracy),
        positions: r.positions,
        classes: r
            .classes
            .iter()
            .map(|c| ClassJson {
                label: &c.label,
                precision: to_f64(c.precision),
                recall: to_f64(c.recall),
                f1: to_f64(c.f1),
                support: c.support,
                predicted: c.predicted,
            })
            .collect(),
        confusion: confusion_json(&r.confusion),
    }
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&report_json(self)).expect("report serializes")
    }
}

impl Evaluation {
    /// Keys come out in a fixed order.
    pub fn to_json(&self) -> String {
        let j = EvaluationJson {
            model: &self.model_name,
            segments: self.segments,
            punct: self.punct.as_ref().map(report_json),
            caps: self.caps.as_ref().map(report_json),
        };
        serde_json::to_string_pretty(&j).expect("evaluation serializes")
    }
}

/// Aligned plain-text table for one task.
pub fn render_report(r: &EvalReport) -> String {
    let width = r.classes.iter().map(|c| c.label.chars().count()).max().unwrap_or(0).max(5);
    let mut out = String::new();
    writeln!(out, "{} ({} positions)", r.task, r.positions).unwrap();
    writeln!(out, "{:<width$}  {:>9}  {:>9}  {:>9}  {:>9}", "class", "precision", "recall", "f1", "support").unwrap();
    for c in &r.classes {
        writeln!(
            out,
            "{:<width$}  {:>9.4}  {:>9.4}  {:>9.4}  {:>9}",
            c.label,
            to_f64(c.precision),
            to_f64(c.recall),
            to_f64(c.f1),
            c.support
        )
        .unwrap();
    }
    let null = r.classes.last().map_or("", |c| c.label.as_str());
    let rows = [
        (format!("macro-F1 (without {null})"), r.macro_f1),
        ("macro-F1 (all present)".to_owned(), r.macro_f1_all),
        ("micro-F1".to_owned(), to_f64(r.micro_f1)),
        ("weighted-F1".to_owned(), r.weighted_f1),
        ("accuracy".to_owned(), to_f64(r.accuracy)),
    ];
    let w = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    for (k, v) in rows {
        writeln!(out, "{k:<w$}  {v:.4}").unwrap();
    }
    out
}

pub fn render_evaluation(e: &Evaluation) -> String {
    let mut out = format!("model: {}, segments: {}\n", e.model_name, e.segments);
    for r in [&e.punct, &e.caps].into_iter().flatten() {
        out.push('\n');
        out.push_str(&render_report(r));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Label, PunctLabel};
    use crate::evaluation::confusion;

    fn report() -> EvalReport {
        use PunctLabel as P;
        let m = confusion(&[vec![P::Period, P::None, P::None]], &[vec![P::Period, P::Comma, P::None]]).unwrap();
        EvalReport::from_confusion("punct", m, PunctLabel::NULL.name())
    }

    #[test]
    fn json_key_order_is_fixed() {
        let j = report().to_json();
        let keys = [
            "\"task\"",
            "\"macro_f1\"",
            "\"macro_f1_all\"",
            "\"micro_f1\"",
            "\"weighted_f1\"",
            "\"accuracy\"",
            "\"positions\"",
            "\"classes\"",
            "\"confusion\"",
        ];
        let pos: Vec<usize> = keys.iter().map(|k| j.find(k).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]), "{j}");
    }

    #[test]
    fn table_lists_every_class() {
        let t = render_report(&report());
        assert!(t.starts_with("punct (3 positions)\nclass"));
        for l in PunctLabel::names() {
            assert!(t.contains(&format!("\n{l} ")), "{l}");
        }
        assert!(t.contains("macro-F1 (without non)"));
    }
}
