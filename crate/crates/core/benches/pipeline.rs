//! Sequential against parallel execution for labeling and scoring.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use num_rational::Ratio;

use noktalama::corpus::{label_document, segment, LabeledSegment};
use noktalama::evaluation::evaluate;
use noktalama::par::{self, Execution};
use noktalama::synth;
use noktalama::tagger::train_baseline;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn prepare(c: &mut Criterion) {
    let docs = synth::paragraphs(7, 2000, 2, 8);
    let vocab = synth::build_vocab(&docs);
    let mut group = c.benchmark_group("prepare");
    group.throughput(Throughput::Elements(docs.len() as u64));
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| {
                let segs: Vec<Vec<LabeledSegment>> =
                    par::map(exec, &docs, |t| segment(&label_document("d", t, &vocab), 510));
                black_box(segs)
            })
        });
    }
    group.finish();
}

fn score(c: &mut Criterion) {
    let docs = synth::paragraphs(8, 3000, 2, 8);
    let vocab = synth::build_vocab(&docs);
    let segs: Vec<LabeledSegment> = docs.iter().flat_map(|t| segment(&label_document("d", t, &vocab), 64)).collect();
    let model = train_baseline(&segs, Ratio::from_integer(1)).unwrap();
    let mut group = c.benchmark_group("evaluate");
    group.throughput(Throughput::Elements(segs.len() as u64));
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| black_box(evaluate(&model, &segs, exec).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, prepare, score);
criterion_main!(benches);
