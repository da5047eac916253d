//! JSON-lines tagging protocol.
//!
//! Each line is one JSON object:
//!
//! ```text
//! request:  {"id":7,"tokens":["türkiye","nin"]}
//! response: {"id":7,"punct":["apostrophe","non"],"caps":["One","non"]}
//! error:    {"id":7,"error":"length exceeded"}
//! ```
//!
//! The server answers every request id exactly once; unknown fields are
//! ignored. A line that is not valid JSON is answered with an error object
//! carrying id 0.

use std::collections::HashMap;
use std::fmt;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream, ToSocketAddrs};
use std::process::{Child, Command, Stdio};
use std::str::FromStr;
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use serde::Serialize;
use serde_json::Value;

use super::{Capabilities, Prediction, TaggerBackend, TaggerError};
use crate::corpus::{CapTag, Label, PunctLabel};
use crate::tokenizer::{Token, Vocab};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Serialize)]
struct RequestLine<'a> {
    id: u64,
    tokens: &'a [&'a str],
}

#[derive(Serialize)]
struct ResponseLine<'a> {
    id: u64,
    punct: &'a [PunctLabel],
    caps: &'a [CapTag],
}

#[derive(Serialize)]
struct ErrorLine<'a> {
    id: u64,
    error: &'a str,
}

pub fn request_line(id: u64, tokens: &[&str]) -> String {
    serde_json::to_string(&RequestLine { id, tokens }).expect("request serializes")
}

pub fn response_line(id: u64, pred: &Prediction) -> String {
    serde_json::to_string(&ResponseLine { id, punct: &pred.punct, caps: &pred.caps }).expect("response serializes")
}

pub fn error_line(id: u64, message: &str) -> String {
    serde_json::to_string(&ErrorLine { id, error: message }).expect("error serializes")
}

/// A decoded response line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Reply {
    Labels { id: u64, prediction: Prediction },
    Error { id: u64, message: String },
}

impl Reply {
    pub fn id(&self) -> u64 {
        match self {
            Reply::Labels { id, .. } | Reply::Error { id, .. } => *id,
        }
    }
}

fn label_array<L: Label>(value: Option<&Value>, key: &str) -> Result<Vec<L>, String> {
    let arr = value.and_then(Value::as_array).ok_or_else(|| format!("missing {key:?} array"))?;
    arr.iter()
        .map(|v| {
            let s = v.as_str().ok_or_else(|| format!("non-string entry in {key:?}"))?;
            L::from_name(s).map_err(|e| e.to_string())
        })
        .collect()
}

pub fn parse_reply(line: &str) -> Result<Reply, String> {
    let value: Value = serde_json::from_str(line).map_err(|e| format!("invalid JSON: {e}"))?;
    let obj = value.as_object().ok_or("response is not an object")?;
    let id = obj.get("id").and_then(Value::as_u64).ok_or("missing or invalid \"id\"")?;
    if let Some(err) = obj.get("error") {
        let message = err.as_str().map(str::to_owned).unwrap_or_else(|| err.to_string());
        return Ok(Reply::Error { id, message });
    }
    let punct = label_array::<PunctLabel>(obj.get("punct"), "punct")?;
    let caps = label_array::<CapTag>(obj.get("caps"), "caps")?;
    Ok(Reply::Labels { id, prediction: Prediction { punct, caps } })
}

/// Where an external tagger listens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Endpoint {
    /// `host:port` or `tcp://host:port`.
    Tcp(String),
    /// `exec:<program> [args...]`: talk to a child process over its stdio.
    Exec(Vec<String>),
}

impl FromStr for Endpoint {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(cmd) = s.strip_prefix("exec:") {
            let argv: Vec<String> = cmd.split_whitespace().map(str::to_owned).collect();
            if argv.is_empty() {
                return Err("exec endpoint needs a command".into());
            }
            return Ok(Endpoint::Exec(argv));
        }
        let addr = s.strip_prefix("tcp://").unwrap_or(s);
        if addr.rsplit_once(':').is_none_or(|(h, p)| h.is_empty() || p.parse::<u16>().is_err()) {
            return Err(format!("endpoint {s:?} is not host:port or exec:<command>"));
        }
        Ok(Endpoint::Tcp(addr.to_owned()))
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::Tcp(a) => write!(f, "tcp://{a}"),
            Endpoint::Exec(argv) => write!(f, "exec:{}", argv.join(" ")),
        }
    }
}

/// One connection to an external tagger. Requests may be pipelined; replies
/// are matched back to requests by id.
pub struct ExternalClient {
    writer: Option<Box<dyn Write + Send>>,
    lines: Receiver<io::Result<String>>,
    child: Option<Child>,
    timeout: Duration,
    next_id: u64,
}

fn spawn_reader<R: Read + Send + 'static>(reader: R) -> Receiver<io::Result<String>> {
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        let mut reader = BufReader::new(reader);
        loop {
            let mut line = String::new();
            match reader.read_line(&mut line) {
                Ok(0) => break,
                Ok(_) => {
                    if tx.send(Ok(line)).is_err() {
                        break;
                    }
                }
                Err(e) => {
                    let _ = tx.send(Err(e));
                    break;
                }
            }
        }
    });
    rx
}

impl ExternalClient {
    pub fn connect(endpoint: &Endpoint, timeout: Duration) -> Result<Self, TaggerError> {
        match endpoint {
            Endpoint::Tcp(addr) => {
                let unavailable = |e: io::Error| TaggerError::BackendUnavailable(format!("{addr}: {e}"));
                let addrs: Vec<_> = addr.to_socket_addrs().map_err(unavailable)?.collect();
                if addrs.is_empty() {
                    return Err(TaggerError::BackendUnavailable(format!("{addr}: no address")));
                }
                // keep retrying until the deadline: an adapter may still be starting
                let deadline = Instant::now() + timeout;
                loop {
                    for a in &addrs {
                        let left = deadline.saturating_duration_since(Instant::now()).max(Duration::from_millis(1));
                        if let Ok(stream) = TcpStream::connect_timeout(a, left) {
                            stream.set_nodelay(true)?;
                            let reader = stream.try_clone()?;
                            return Ok(Self::from_parts(Box::new(stream), reader, None, timeout));
                        }
                    }
                    if Instant::now() >= deadline {
                        return Err(TaggerError::Timeout(timeout));
                    }
                    thread::sleep(Duration::from_millis(25).min(deadline.saturating_duration_since(Instant::now())));
                }
            }
            Endpoint::Exec(argv) => {
                let mut child = Command::new(&argv[0])
                    .args(&argv[1..])
                    .stdin(Stdio::piped())
                    .stdout(Stdio::piped())
                    .stderr(Stdio::inherit())
                    .spawn()
                    .map_err(|e| TaggerError::BackendUnavailable(format!("{}: {e}", argv[0])))?;
                let stdin = child.stdin.take().expect("piped stdin");
                let stdout = child.stdout.take().expect("piped stdout");
                Ok(Self::from_parts(Box::new(stdin), stdout, Some(child), timeout))
            }
        }
    }

    /// Wraps an already open duplex stream.
    pub fn from_parts<R: Read + Send + 'static>(
        writer: Box<dyn Write + Send>,
        reader: R,
        child: Option<Child>,
        timeout: Duration,
    ) -> Self {
        ExternalClient { writer: Some(writer), lines: spawn_reader(reader), child, timeout, next_id: 1 }
    }

    /// Sends every sequence, then collects replies in input order.
    pub fn predict_batch<S: AsRef<str>>(&mut self, batch: &[Vec<S>]) -> Result<Vec<Prediction>, TaggerError> {
        let writer = self.writer.as_mut().ok_or_else(|| TaggerError::Protocol("connection closed".into()))?;
        let mut pending: HashMap<u64, usize> = HashMap::with_capacity(batch.len());
        for (i, seq) in batch.iter().enumerate() {
            let id = self.next_id;
            self.next_id += 1;
            let tokens: Vec<&str> = seq.iter().map(AsRef::as_ref).collect();
            let mut line = request_line(id, &tokens);
            line.push('\n');
            writer.write_all(line.as_bytes())?;
            pending.insert(id, i);
        }
        writer.flush()?;

        let mut out: Vec<Option<Prediction>> = vec![None; batch.len()];
        while !pending.is_empty() {
            let line = match self.lines.recv_timeout(self.timeout) {
                Ok(line) => line?,
                Err(RecvTimeoutError::Timeout) => return Err(TaggerError::Timeout(self.timeout)),
                Err(RecvTimeoutError::Disconnected) => {
                    return Err(TaggerError::Protocol(format!(
                        "connection closed with {} request(s) unanswered",
                        pending.len()
                    )))
                }
            };
            if line.trim().is_empty() {
                continue;
            }
            let reply = parse_reply(&line).map_err(TaggerError::Protocol)?;
            let id = reply.id();
            let Some(i) = pending.remove(&id) else {
                return Err(TaggerError::Protocol(format!("response for unknown or repeated id {id}")));
            };
            match reply {
                Reply::Error { message, .. } => {
                    return Err(TaggerError::Protocol(format!("request {id} failed: {message}")))
                }
                Reply::Labels { prediction, .. } => {
                    let n = batch[i].len();
                    if prediction.punct.len() != n || prediction.caps.len() != n {
                        return Err(TaggerError::LengthMismatch(id));
                    }
                    out[i] = Some(prediction);
                }
            }
        }
        Ok(out.into_iter().map(|p| p.expect("all ids answered")).collect())
    }
}

impl Drop for ExternalClient {
    fn drop(&mut self) {
        // closing stdin lets a child server exit on its own
        self.writer.take();
        if let Some(mut child) = self.child.take() {
            if !matches!(child.try_wait(), Ok(Some(_))) {
                thread::sleep(Duration::from_millis(20));
                if !matches!(child.try_wait(), Ok(Some(_))) {
                    let _ = child.kill();
                }
            }
            let _ = child.wait();
        }
    }
}

/// Sends a batch over an endpoint and returns predictions in input order.
pub fn external_predict_batch<S: AsRef<str>>(
    endpoint: &Endpoint,
    batch: &[Vec<S>],
    timeout: Duration,
) -> Result<Vec<Prediction>, TaggerError> {
    ExternalClient::connect(endpoint, timeout)?.predict_batch(batch)
}

/// A tagger reached through the protocol, one connection shared behind a lock.
pub struct ExternalBackend {
    name: String,
    max_len: Option<usize>,
    client: Mutex<ExternalClient>,
}

impl ExternalBackend {
    pub fn connect(
        endpoint: &Endpoint,
        name: impl Into<String>,
        max_len: Option<usize>,
        timeout: Duration,
    ) -> Result<Self, TaggerError> {
        Ok(Self::from_client(ExternalClient::connect(endpoint, timeout)?, name, max_len))
    }

    pub fn from_client(client: ExternalClient, name: impl Into<String>, max_len: Option<usize>) -> Self {
        ExternalBackend { name: name.into(), max_len, client: Mutex::new(client) }
    }
}

impl TaggerBackend for ExternalBackend {
    fn model_name(&self) -> &str {
        &self.name
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities::BOTH
    }

    fn max_len(&self) -> Option<usize> {
        self.max_len
    }

    fn predict_tokens(&self, tokens: &[Token]) -> Result<Prediction, TaggerError> {
        let mut preds = self.predict_batch(&[tokens])?;
        Ok(preds.pop().expect("one prediction"))
    }

    fn predict_batch(&self, batch: &[&[Token]]) -> Result<Vec<Prediction>, TaggerError> {
        if let Some(max) = self.max_len {
            if let Some(long) = batch.iter().find(|t| t.len() > max) {
                return Err(TaggerError::LengthExceeded { len: long.len(), max });
            }
        }
        let surfaces: Vec<Vec<&str>> = batch.iter().map(|t| t.iter().map(|x| x.surface.as_str()).collect()).collect();
        let mut client = self.client.lock().map_err(|_| TaggerError::Protocol("client lock poisoned".into()))?;
        client.predict_batch(&surfaces)
    }
}

/// Answers requests from surfaces.
pub type Handler = dyn Fn(&[String]) -> Result<Prediction, String> + Send + Sync;

/// Adapts a backend: surfaces are mapped to vocabulary ids, unknown ones to
/// the unknown token.
pub fn backend_handler<B: TaggerBackend + 'static>(backend: B, vocab: Vocab) -> Arc<Handler> {
    Arc::new(move |surfaces: &[String]| {
        let prefix = vocab.continuation_prefix();
        let mut word_index = 0;
        let tokens: Vec<Token> = surfaces
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let is_continuation = s.len() > prefix.len() && s.starts_with(prefix);
                if i > 0 && !is_continuation {
                    word_index += 1;
                }
                Token { surface: s.clone(), is_continuation, vocab_id: vocab.id_or_unk(s), word_index }
            })
            .collect();
        super::predict(&backend, &tokens).map_err(|e| match e {
            TaggerError::LengthExceeded { .. } => format!("length exceeded: {e}"),
            other => other.to_string(),
        })
    })
}

fn answer(line: &str, handler: &Handler) -> String {
    let value: Value = match serde_json::from_str(line) {
        Ok(v) => v,
        Err(e) => return error_line(0, &format!("malformed request: {e}")),
    };
    let id = value.get("id").and_then(Value::as_u64);
    let Some(id) = id else {
        return error_line(0, "request without a valid \"id\"");
    };
    let tokens: Option<Vec<String>> = value
        .get("tokens")
        .and_then(Value::as_array)
        .and_then(|a| a.iter().map(|t| t.as_str().map(str::to_owned)).collect());
    let Some(tokens) = tokens else {
        return error_line(id, "request without a \"tokens\" string array");
    };
    match handler(&tokens) {
        Ok(pred) if pred.punct.len() == tokens.len() && pred.caps.len() == tokens.len() => response_line(id, &pred),
        Ok(_) => error_line(id, "tagger returned the wrong number of labels"),
        Err(msg) => error_line(id, &msg),
    }
}

/// Serves one connection until the reader is exhausted.
pub fn serve<R: BufRead, W: Write>(reader: R, mut writer: W, handler: &Handler) -> io::Result<()> {
    for line in reader.lines() {
        let line = match line {
            Ok(l) => l,
            Err(e) if e.kind() == io::ErrorKind::InvalidData => {
                writeln!(writer, "{}", error_line(0, "request is not valid UTF-8"))?;
                writer.flush()?;
                continue;
            }
            Err(e) => return Err(e),
        };
        if line.trim().is_empty() {
            continue;
        }
        writeln!(writer, "{}", answer(&line, handler))?;
        writer.flush()?;
    }
    Ok(())
}

/// Accepts connections forever, one thread per connection.
pub fn serve_listener(listener: TcpListener, handler: Arc<Handler>) -> io::Result<()> {
    for stream in listener.incoming() {
        let stream = stream?;
        let handler = Arc::clone(&handler);
        thread::spawn(move || {
            let reader = match stream.try_clone() {
                Ok(r) => BufReader::new(r),
                Err(_) => return,
            };
            let _ = serve(reader, stream, &*handler);
        });
    }
    Ok(())
}
