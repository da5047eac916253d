use std::fs;
use std::io::{self, BufReader, Read, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde_json::json;

use noktalama::corpus::{
    distribution, ingest, label_document, read_segments, segment, split_dataset, text_distribution, write_segments,
    Document, LabeledSegment, Splits,
};
use noktalama::correct::correct_text;
use noktalama::evaluation::{self, default_hardware_note, render_evaluation};
use noktalama::par;
use noktalama::synth;
use noktalama::tagger::protocol::{backend_handler, serve as serve_stream, serve_listener};
use noktalama::tagger::{
    train_baseline as fit_baseline, BaselineModel, ExternalBackend, MajorityBackend, OracleBackend, TaggerBackend,
};
use noktalama::tokenizer::{load_vocab, Vocab};

use super::config::{BackendKind, Config, ConfigError};
use super::Opts;

pub struct Ctx {
    pub cfg: Config,
    pub opts: Opts,
}

const SPLIT_FILES: [&str; 3] = ["train", "test", "valid"];

fn required<'a, T>(value: &'a Option<T>, field: &str) -> Result<&'a T, ConfigError> {
    value.as_ref().ok_or_else(|| ConfigError::new(field, "required by this command"))
}

impl Ctx {
    fn vocab(&self) -> Result<Vocab> {
        let path = required(&self.cfg.vocab, "vocab")?;
        load_vocab(path).with_context(|| format!("loading vocabulary {}", path.display()))
    }

    fn input(&self) -> Result<&PathBuf, ConfigError> {
        required(&self.opts.input, "input")
    }

    fn output(&self) -> Result<&PathBuf, ConfigError> {
        required(&self.opts.output, "output")
    }

    /// Labeled segments from a JSONL file, or `<dir>/<name>.jsonl`.
    fn segments(&self, vocab: &Vocab, name: &str) -> Result<Vec<LabeledSegment>> {
        let mut path = self.input()?.clone();
        if path.is_dir() {
            path = path.join(format!("{name}.jsonl"));
        }
        read_segments(&path, vocab).with_context(|| format!("reading {}", path.display()))
    }

    fn backend(&self, vocab: &Vocab, gold: Option<&[LabeledSegment]>) -> Result<Box<dyn TaggerBackend>> {
        let cfg = &self.cfg;
        Ok(match cfg.backend {
            BackendKind::Baseline => {
                let path = required(&cfg.model_path, "model_path")?;
                Box::new(BaselineModel::load(path).with_context(|| format!("loading model {}", path.display()))?)
            }
            BackendKind::External => {
                let endpoint = required(&cfg.endpoint, "endpoint")?;
                let name = cfg.model_name.clone().unwrap_or_else(|| "external".to_owned());
                Box::new(
                    ExternalBackend::connect(endpoint, name, Some(cfg.budget()), cfg.timeout)
                        .with_context(|| format!("connecting to {endpoint}"))?,
                )
            }
            BackendKind::Oracle => match (&cfg.model_path, gold) {
                (Some(path), _) => {
                    let segs = read_segments(path, vocab).with_context(|| format!("reading {}", path.display()))?;
                    Box::new(OracleBackend::from_segments(&segs))
                }
                (None, Some(gold)) => Box::new(OracleBackend::from_segments(gold)),
                (None, None) => {
                    return Err(ConfigError::new("model_path", "the oracle backend needs gold segments").into())
                }
            },
            BackendKind::Majority => Box::new(MajorityBackend),
        })
    }
}

fn read_text(path: Option<&Path>) -> Result<String> {
    let mut bytes = Vec::new();
    match path {
        Some(p) => bytes = fs::read(p).with_context(|| format!("reading {}", p.display()))?,
        None => {
            io::stdin().lock().read_to_end(&mut bytes).context("reading stdin")?;
        }
    }
    match String::from_utf8(bytes) {
        Ok(s) => Ok(s),
        Err(e) => bail!("input is not valid UTF-8 (byte offset {})", e.utf8_error().valid_up_to()),
    }
}

fn print(text: &str) -> Result<()> {
    let mut out = io::stdout().lock();
    out.write_all(text.as_bytes())?;
    if !text.is_empty() && !text.ends_with('\n') {
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

fn read_documents(ctx: &Ctx) -> Result<Vec<Document>> {
    let input = ctx.input()?;
    let docs = ingest(input, ctx.cfg.format, &ctx.cfg.column)
        .with_context(|| format!("reading {}", input.display()))?
        .collect::<Result<Vec<_>, _>>()
        .with_context(|| format!("reading {}", input.display()))?;
    Ok(docs)
}

pub fn prepare(ctx: &Ctx) -> Result<()> {
    let vocab = ctx.vocab()?;
    let out_dir = ctx.output()?;
    let docs = read_documents(ctx)?;
    let splits = split_dataset(docs, &ctx.cfg.split);
    let budget = ctx.cfg.budget();

    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let mut rows = Vec::new();
    for (name, docs) in splits.named() {
        let per_doc = par::map(ctx.cfg.execution, docs, |d| segment(&label_document(d.id(), &d.text, &vocab), budget));
        let segs: Vec<LabeledSegment> = per_doc.into_iter().flatten().collect();
        let tokens: usize = segs.iter().map(LabeledSegment::len).sum();
        let unk = segs.iter().flat_map(|s| &s.tokens).filter(|t| t.is_unk(&vocab)).count();
        let path = out_dir.join(format!("{name}.jsonl"));
        let mut buf = Vec::new();
        write_segments(&mut buf, &segs)?;
        fs::write(&path, buf).with_context(|| format!("writing {}", path.display()))?;
        rows.push((name, docs.len(), segs.len(), tokens, unk));
    }

    if ctx.opts.json {
        let splits: serde_json::Map<String, serde_json::Value> = rows
            .iter()
            .map(|(n, d, s, t, u)| {
                (n.to_string(), json!({"documents": d, "segments": s, "tokens": t, "unknown_tokens": u}))
            })
            .collect();
        return print(&serde_json::to_string_pretty(&json!({ "output": out_dir, "splits": splits }))?);
    }
    let docs: Vec<String> = rows.iter().map(|r| r.1.to_string()).collect();
    let mut text = format!("documents (train/test/valid): {}\n", docs.join("/"));
    text.push_str(&format!(
        "{:<6} {:>10} {:>10} {:>12} {:>8}\n",
        "split", "documents", "segments", "tokens", "unknown"
    ));
    for (n, d, s, t, u) in &rows {
        text.push_str(&format!("{n:<6} {d:>10} {s:>10} {t:>12} {u:>8}\n"));
    }
    text.push_str(&format!("wrote {}/{{train,test,valid}}.jsonl\n", out_dir.display()));
    print(&text)
}

pub fn correct(ctx: &Ctx, args: &[String]) -> Result<()> {
    let vocab = ctx.vocab()?;
    let text = if !args.is_empty() { args.join(" ") } else { read_text(ctx.opts.input.as_deref())? };
    if text.trim().is_empty() {
        return Ok(());
    }
    let backend = ctx.backend(&vocab, None)?;
    // everything is corrected before anything is printed
    let mut out = String::new();
    for line in text.lines() {
        let fixed = correct_text(line, &vocab, &backend, ctx.cfg.budget(), &ctx.cfg.render)?;
        out.push_str(&fixed);
        out.push('\n');
    }
    print(&out)
}

pub fn evaluate(ctx: &Ctx) -> Result<()> {
    let vocab = ctx.vocab()?;
    let segs = ctx.segments(&vocab, "test")?;
    let backend = ctx.backend(&vocab, Some(&segs))?;
    let report = evaluation::evaluate(&backend, &segs, ctx.cfg.execution)?;
    if let Some(dir) = &ctx.opts.output {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        fs::write(dir.join("evaluation.json"), report.to_json() + "\n")?;
        for r in [&report.punct, &report.caps].into_iter().flatten() {
            fs::write(dir.join(format!("{}_confusion.csv", r.task)), r.confusion.to_csv())?;
        }
    }
    if ctx.opts.json {
        print(&report.to_json())
    } else {
        print(&render_evaluation(&report))
    }
}

pub fn stats(ctx: &Ctx, split: bool) -> Result<()> {
    let input = ctx.input()?;
    let table = if input.is_dir() {
        let vocab = match &ctx.cfg.vocab {
            Some(_) => ctx.vocab()?,
            // ids are irrelevant for counting
            None => Vocab::from_tokens(["[UNK]"])?,
        };
        let mut loaded = Vec::new();
        for name in SPLIT_FILES {
            let path = input.join(format!("{name}.jsonl"));
            if path.exists() {
                let segs = read_segments(&path, &vocab).with_context(|| format!("reading {}", path.display()))?;
                loaded.push((name, segs));
            }
        }
        if loaded.is_empty() {
            bail!("no train/test/valid.jsonl in {}", input.display());
        }
        let views: Vec<(&str, &[LabeledSegment])> = loaded.iter().map(|(n, s)| (*n, s.as_slice())).collect();
        distribution(&views)
    } else {
        let docs: Vec<String> = read_documents(ctx)?.into_iter().map(|d| d.text).collect();
        if split {
            let Splits { train, test, valid } = split_dataset(docs, &ctx.cfg.split);
            text_distribution(&[("train", &train), ("test", &test), ("valid", &valid)])
        } else {
            text_distribution(&[("corpus", &docs)])
        }
    };
    if ctx.opts.json {
        print(&serde_json::to_string_pretty(&table)?)
    } else {
        print(&table.render())
    }
}

pub fn train_baseline(ctx: &Ctx) -> Result<()> {
    let vocab = ctx.vocab()?;
    let segs = ctx.segments(&vocab, "train")?;
    let out = ctx.opts.output.as_ref().or(ctx.cfg.model_path.as_ref());
    let out = required(&out.cloned(), "output")?.clone();
    let model = fit_baseline(&segs, ctx.cfg.alpha)?;
    model.save(&out).with_context(|| format!("writing {}", out.display()))?;
    let tokens: usize = segs.iter().map(LabeledSegment::len).sum();
    if ctx.opts.json {
        return print(&serde_json::to_string_pretty(&json!({
            "segments": segs.len(),
            "tokens": tokens,
            "trigram_contexts": model.trigrams.len(),
            "unigram_contexts": model.unigrams.len(),
            "model_path": out,
        }))?);
    }
    print(&format!(
        "trained on {} segments ({} tokens): {} trigram and {} unigram contexts\nwrote {}\n",
        segs.len(),
        tokens,
        model.trigrams.len(),
        model.unigrams.len(),
        out.display()
    ))
}

pub fn bench(ctx: &Ctx) -> Result<()> {
    let vocab = ctx.vocab()?;
    let segs = ctx.segments(&vocab, "test")?;
    let examples: Vec<_> = segs.iter().filter(|s| !s.is_empty()).map(|s| s.tokens.clone()).collect();
    let backend = ctx.backend(&vocab, Some(&segs))?;
    let n = ctx.opts.n.unwrap_or(1000);
    if n == 0 {
        return Err(ConfigError::new("n", "must be at least 1").into());
    }
    let note = ctx.cfg.hardware_note.clone().unwrap_or_else(default_hardware_note);
    let (report, _) = evaluation::bench(&backend, &examples, n, note)?;
    if ctx.opts.json {
        print(&report.to_json())
    } else {
        print(&report.to_string())
    }
}

pub fn serve(ctx: &Ctx, listen: Option<&str>) -> Result<()> {
    let vocab = ctx.vocab()?;
    let gold = match (ctx.cfg.backend, &ctx.opts.input) {
        (BackendKind::Oracle, Some(_)) if ctx.cfg.model_path.is_none() => Some(ctx.segments(&vocab, "test")?),
        _ => None,
    };
    let backend = ctx.backend(&vocab, gold.as_deref())?;
    let handler = backend_handler(backend, vocab);
    match listen {
        Some(addr) => {
            let listener = TcpListener::bind(addr).with_context(|| format!("binding {addr}"))?;
            eprintln!("listening on {}", listener.local_addr()?);
            serve_listener(listener, handler)?;
        }
        None => serve_stream(BufReader::new(io::stdin().lock()), io::stdout().lock(), &*handler)?,
    }
    Ok(())
}

pub fn synth(ctx: &Ctx) -> Result<()> {
    let out_dir = ctx.output()?;
    let n = ctx.opts.n.unwrap_or(1000);
    let docs = synth::paragraphs(ctx.cfg.split.seed, n, 2, 8);
    let vocab = synth::build_vocab(&docs);
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;

    let corpus = out_dir.join("corpus.csv");
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(&corpus)?;
    w.write_record(["content"])?;
    for d in &docs {
        w.write_record([d])?;
    }
    w.flush()?;
    let vocab_path = out_dir.join("vocab.txt");
    let mut text = vocab.tokens().join("\n");
    text.push('\n');
    fs::write(&vocab_path, text)?;
    print(&format!(
        "wrote {} documents to {} and {} tokens to {}\n",
        docs.len(),
        corpus.display(),
        vocab.len(),
        vocab_path.display()
    ))
}
