//! Flat `key = value` configuration. Defaults, then the config file, then
//! command-line flags; later sources win.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Duration;

use num_rational::Ratio;

use noktalama::corpus::{parse_ratio, Format, Label, PunctLabel, SplitSpec};
use noktalama::par::Execution;
use noktalama::reconstruction::RenderPolicy;
use noktalama::tagger::Endpoint;

pub const ENV_VAR: &str = "NOKTALAMA_CONFIG";

/// A usage or configuration problem. Exits with status 2.
#[derive(Debug)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError { field: field.into(), message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid configuration: {}: {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendKind {
    Baseline,
    External,
    Oracle,
    Majority,
}

#[derive(Debug, Clone)]
pub struct Config {
    pub vocab: Option<PathBuf>,
    pub max_len: usize,
    pub reserved_specials: usize,
    pub split: SplitSpec,
    pub format: Format,
    pub column: String,
    pub backend: BackendKind,
    pub endpoint: Option<Endpoint>,
    pub model_path: Option<PathBuf>,
    pub model_name: Option<String>,
    pub timeout: Duration,
    pub alpha: Ratio<u64>,
    pub hardware_note: Option<String>,
    pub execution: Execution,
    pub render: RenderPolicy,
}

const KEYS: &[&str] = &[
    "vocab",
    "max_len",
    "reserved_specials",
    "train",
    "test",
    "valid",
    "seed",
    "format",
    "column",
    "backend",
    "endpoint",
    "model_path",
    "model_name",
    "timeout_ms",
    "alpha",
    "hardware_note",
    "parallel",
];

/// Parses `key = value` lines. `#` starts a comment line.
pub fn parse_file(text: &str, origin: &Path) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut kv = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(ConfigError::new(
                format!("{}:{}", origin.display(), n + 1),
                format!("expected key = value, got {line:?}"),
            ));
        };
        kv.insert(k.trim().to_owned(), v.trim().to_owned());
    }
    Ok(kv)
}

pub fn load_file(path: &Path) -> Result<BTreeMap<String, String>, ConfigError> {
    let bytes = std::fs::read(path).map_err(|e| ConfigError::new("config", format!("{}: {e}", path.display())))?;
    let text = String::from_utf8(bytes)
        .map_err(|_| ConfigError::new("config", format!("{} is not valid UTF-8", path.display())))?;
    parse_file(&text, path)
}

fn number<T: std::str::FromStr>(kv: &BTreeMap<String, String>, key: &str, default: T) -> Result<T, ConfigError> {
    match kv.get(key) {
        None => Ok(default),
        Some(v) => v.parse().map_err(|_| ConfigError::new(key, format!("expected a non-negative integer, got {v:?}"))),
    }
}

fn boolean(key: &str, v: &str) -> Result<bool, ConfigError> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(ConfigError::new(key, format!("expected true or false, got {v:?}"))),
    }
}

impl Config {
    /// Validates every entry. Keys of the form `space_after_<mark>` override
    /// the render policy, for example `space_after_apostrophe = true`.
    pub fn from_map(kv: &BTreeMap<String, String>) -> Result<Config, ConfigError> {
        let mut render = RenderPolicy::lenient();
        for (k, v) in kv {
            if let Some(mark) = k.strip_prefix("space_after_") {
                let label = PunctLabel::from_name(mark)
                    .ok()
                    .filter(|l| *l != PunctLabel::None)
                    .ok_or_else(|| ConfigError::new(k.as_str(), "unknown punctuation mark"))?;
                let space = boolean(k, v)?;
                if label == PunctLabel::Apostrophe {
                    render.join_after_apostrophe = !space;
                }
                render.set_space_after(label, space);
            } else if !KEYS.contains(&k.as_str()) {
                return Err(ConfigError::new(k.as_str(), "unknown configuration key"));
            }
        }

        let max_len = number(kv, "max_len", noktalama::corpus::DEFAULT_MAX_LEN)?;
        let reserved_specials = number(kv, "reserved_specials", 2usize)?;
        if max_len < reserved_specials + 2 {
            return Err(ConfigError::new(
                "max_len",
                format!("must leave at least 2 content tokens after {reserved_specials} reserved slots"),
            ));
        }

        let frac = |key: &str, default: &str| -> Result<Ratio<u64>, ConfigError> {
            let v = kv.get(key).map_or(default, String::as_str);
            parse_ratio(v).map_err(|e| ConfigError::new(key, e.to_string()))
        };
        let seed = number(kv, "seed", 42u64)?;
        let split = SplitSpec::new(frac("train", "0.7")?, frac("test", "0.2")?, frac("valid", "0.1")?, seed)
            .map_err(|e| ConfigError::new("train/test/valid", e.to_string()))?;

        let format = match kv.get("format") {
            None => Format::Csv,
            Some(v) => v.parse().map_err(|e: String| ConfigError::new("format", e))?,
        };
        let backend = match kv.get("backend").map(String::as_str) {
            None | Some("baseline") => BackendKind::Baseline,
            Some("external") => BackendKind::External,
            Some("oracle") => BackendKind::Oracle,
            Some("majority") => BackendKind::Majority,
            Some(other) => {
                return Err(ConfigError::new(
                    "backend",
                    format!("unknown backend {other:?}, expected baseline, external, oracle or majority"),
                ))
            }
        };
        let endpoint = kv
            .get("endpoint")
            .map(|v| v.parse::<Endpoint>().map_err(|e| ConfigError::new("endpoint", e)))
            .transpose()?;
        if backend == BackendKind::External && endpoint.is_none() {
            return Err(ConfigError::new("endpoint", "required by the external backend"));
        }
        let alpha = frac("alpha", "1")?;
        if alpha == Ratio::from_integer(0) {
            return Err(ConfigError::new("alpha", "must be positive"));
        }
        let timeout_ms = number(kv, "timeout_ms", 30_000u64)?;
        if timeout_ms == 0 {
            return Err(ConfigError::new("timeout_ms", "must be positive"));
        }
        let execution = match kv.get("parallel") {
            Some(v) if !boolean("parallel", v)? => Execution::Sequential,
            _ => Execution::default(),
        };

        Ok(Config {
            vocab: kv.get("vocab").map(PathBuf::from),
            max_len,
            reserved_specials,
            split,
            format,
            column: kv.get("column").cloned().unwrap_or_else(|| "content".to_owned()),
            backend,
            endpoint,
            model_path: kv.get("model_path").map(PathBuf::from),
            model_name: kv.get("model_name").cloned(),
            timeout: Duration::from_millis(timeout_ms),
            alpha,
            hardware_note: kv.get("hardware_note").cloned(),
            execution,
            render,
        })
    }

    /// Content tokens per segment once the reserved slots are taken out.
    pub fn budget(&self) -> usize {
        self.max_len - self.reserved_specials
    }
}
