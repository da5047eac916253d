pub mod commands;
pub mod config;

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::{Config, ConfigError, ENV_VAR};

#[derive(Debug, Parser)]
#[command(name = "noktalama", version, about = "Turkish punctuation and capitalization restoration toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Opts,
}

/// Flags shared by every subcommand. Settings given here override the
/// config file.
#[derive(Debug, Args)]
pub struct Opts {
    /// Config file of `key = value` lines (default: $NOKTALAMA_CONFIG).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Corpus format: csv or jsonl.
    #[arg(long, global = true)]
    pub format: Option<String>,
    /// Name of the text column or field.
    #[arg(long, global = true)]
    pub column: Option<String>,
    /// WordPiece vocabulary, one token per line.
    #[arg(long, global = true)]
    pub vocab: Option<PathBuf>,
    /// Sequence limit including reserved special slots.
    #[arg(long, global = true)]
    pub max_len: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<String>,
    /// baseline, external, oracle or majority.
    #[arg(long, global = true)]
    pub backend: Option<String>,
    /// External tagger: host:port or exec:<command>.
    #[arg(long, global = true)]
    pub endpoint: Option<String>,
    #[arg(long, global = true)]
    pub model_path: Option<PathBuf>,
    /// Print JSON instead of tables.
    #[arg(long, global = true)]
    pub json: bool,
    /// Number of examples (bench) or documents (synth).
    #[arg(short = 'n', global = true)]
    pub n: Option<usize>,
    /// Any config key, as key=value. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Label a raw corpus and write train/test/valid JSONL segments.
    Prepare,
    /// Restore punctuation and case in text from arguments, --input or stdin.
    Correct { text: Vec<String> },
    /// Score a backend on labeled segments.
    Evaluate,
    /// Count punctuation marks in prepared splits or a raw corpus.
    Stats {
        /// Split a raw corpus by the configured fractions and seed first.
        #[arg(long)]
        split: bool,
    },
    /// Fit the n-gram baseline tagger on labeled segments.
    TrainBaseline,
    /// Time single-stream predictions.
    Bench,
    /// Answer tagging requests over JSON lines on stdio or a TCP socket.
    Serve {
        /// Address to listen on, e.g. 127.0.0.1:7878. Stdio when absent.
        #[arg(long)]
        listen: Option<String>,
    },
    /// Generate a toy corpus and a matching vocabulary.
    Synth,
}

impl Opts {
    fn overrides(&self) -> Result<BTreeMap<String, String>, ConfigError> {
        let mut kv = BTreeMap::new();
        let path = |p: &PathBuf| p.to_string_lossy().into_owned();
        let flags = [
            ("format", self.format.clone()),
            ("column", self.column.clone()),
            ("vocab", self.vocab.as_ref().map(path)),
            ("max_len", self.max_len.clone()),
            ("seed", self.seed.clone()),
            ("backend", self.backend.clone()),
            ("endpoint", self.endpoint.clone()),
            ("model_path", self.model_path.as_ref().map(path)),
        ];
        for s in &self.set {
            let (k, v) =
                s.split_once('=').ok_or_else(|| ConfigError::new("--set", format!("expected KEY=VALUE, got {s:?}")))?;
            kv.insert(k.trim().to_owned(), v.trim().to_owned());
        }
        for (k, v) in flags {
            if let Some(v) = v {
                kv.insert(k.to_owned(), v);
            }
        }
        Ok(kv)
    }
}

/// Merges the config file and flags into a validated [`Config`].
pub fn resolve_config(opts: &Opts) -> Result<Config, ConfigError> {
    let file = opts.config.clone().or_else(|| std::env::var_os(ENV_VAR).filter(|v| !v.is_empty()).map(PathBuf::from));
    let mut kv = match &file {
        Some(p) => config::load_file(p)?,
        None => BTreeMap::new(),
    };
    kv.extend(opts.overrides()?);
    Config::from_map(&kv)
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    let cfg = resolve_config(&cli.opts)?;
    let ctx = commands::Ctx { cfg, opts: cli.opts };
    match cli.command {
        Command::Prepare => commands::prepare(&ctx),
        Command::Correct { text } => commands::correct(&ctx, &text),
        Command::Evaluate => commands::evaluate(&ctx),
        Command::Stats { split } => commands::stats(&ctx, split),
        Command::TrainBaseline => commands::train_baseline(&ctx),
        Command::Bench => commands::bench(&ctx),
        Command::Serve { listen } => commands::serve(&ctx, listen.as_deref()),
        Command::Synth => commands::synth(&ctx),
    }
}
