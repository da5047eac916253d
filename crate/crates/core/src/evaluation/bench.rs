use std::fmt;
use std::time::{Duration, Instant};

use num_rational::Ratio;
use serde::Serialize;

use super::EvalError;
use crate::tagger::{predict, ModelSpec, Prediction, TaggerBackend};
use crate::tokenizer::Token;

/// Wall-clock timing of `n_examples` single-stream predictions.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub model_name: String,
    pub n_examples: usize,
    pub wall_time: Duration,
    /// `wall_time * 1000 / n_examples`, exact in nanoseconds.
    pub per_example_ms: Ratio<u128>,
    pub hardware_note: String,
    pub model: Option<ModelSpec>,
}

impl BenchReport {
    pub fn wall_time_secs(&self) -> f64 {
        self.wall_time.as_secs_f64()
    }

    pub fn per_example_ms_f64(&self) -> f64 {
        *self.per_example_ms.numer() as f64 / *self.per_example_ms.denom() as f64
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct J<'a> {
            model_name: &'a str,
            n_examples: usize,
            wall_time: f64,
            per_example_ms: f64,
            hardware_note: &'a str,
            model: Option<ModelSpec>,
        }
        serde_json::to_string_pretty(&J {
            model_name: &self.model_name,
            n_examples: self.n_examples,
            wall_time: self.wall_time_secs(),
            per_example_ms: self.per_example_ms_f64(),
            hardware_note: &self.hardware_note,
            model: self.model,
        })
        .expect("bench report serializes")
    }
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "model:          {}", self.model_name)?;
        if let Some(m) = &self.model {
            writeln!(
                f,
                "architecture:   {} (hidden {}, heads {}, layers {}, {}M params)",
                m.name, m.hidden_size, m.attn_heads, m.hidden_layers, m.params_millions
            )?;
        }
        writeln!(f, "examples:       {}", self.n_examples)?;
        writeln!(f, "wall time:      {:.3} s", self.wall_time_secs())?;
        writeln!(f, "per example:    {:.4} ms", self.per_example_ms_f64())?;
        write!(f, "hardware:       {}", self.hardware_note)
    }
}

pub fn default_hardware_note() -> String {
    let cpus = std::thread::available_parallelism().map_or(1, |n| n.get());
    format!("{} logical cpus, {}/{}", cpus, std::env::consts::OS, std::env::consts::ARCH)
}

/// Times exactly `n` predictions, cycling through `examples`, after one
/// untimed warmup call. Returns the report and the timed predictions.
pub fn bench<B: TaggerBackend + ?Sized>(
    backend: &B,
    examples: &[Vec<Token>],
    n: usize,
    hardware_note: impl Into<String>,
) -> Result<(BenchReport, Vec<Prediction>), EvalError> {
    if n == 0 {
        return Err(EvalError::EmptyBench("n must be at least 1"));
    }
    if examples.is_empty() {
        return Err(EvalError::EmptyBench("no examples"));
    }
    predict(backend, &examples[0])?;
    let mut preds = Vec::with_capacity(n);
    let start = Instant::now();
    for i in 0..n {
        preds.push(predict(backend, &examples[i % examples.len()])?);
    }
    let wall_time = start.elapsed();
    let report = BenchReport {
        model_name: backend.model_name().to_owned(),
        n_examples: n,
        wall_time,
        per_example_ms: Ratio::new(wall_time.as_nanos(), n as u128 * 1_000_000),
        hardware_note: hardware_note.into(),
        model: ModelSpec::by_name(backend.model_name()),
    };
    Ok((report, preds))
}
