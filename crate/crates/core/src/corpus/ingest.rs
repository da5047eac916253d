use std::fs::File;
use std::io::{self, BufRead, BufReader, Read};
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("column {0:?} not found")]
    MissingColumn(String),
    #[error("malformed record on line {line}: {reason}")]
    MalformedRecord { line: u64, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Jsonl,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "jsonl" => Ok(Format::Jsonl),
            other => Err(format!("unknown format {other:?}, expected csv or jsonl")),
        }
    }
}

/// One input record's text. `index` is the record's position in the file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub index: usize,
    pub text: String,
}

impl Document {
    pub fn id(&self) -> String {
        self.index.to_string()
    }
}

pub type DocumentStream = Box<dyn Iterator<Item = Result<Document, CorpusError>>>;

pub fn ingest(path: impl AsRef<Path>, format: Format, column: &str) -> Result<DocumentStream, CorpusError> {
    let file = File::open(path)?;
    ingest_reader(file, format, column)
}

/// Streams documents from `reader`, keeping only `column`.
///
/// CSV input needs a header row; the column is checked before the first
/// record is read. Invalid UTF-8 anywhere is a [`CorpusError::MalformedRecord`].
pub fn ingest_reader<R: Read + 'static>(
    reader: R,
    format: Format,
    column: &str,
) -> Result<DocumentStream, CorpusError> {
    match format {
        Format::Csv => csv_stream(reader, column),
        Format::Jsonl => Ok(jsonl_stream(reader, column)),
    }
}

fn csv_error(err: csv::Error) -> CorpusError {
    let line = err.position().map(|p| p.line()).unwrap_or(0);
    match err.kind() {
        csv::ErrorKind::Io(_) => match err.into_kind() {
            csv::ErrorKind::Io(e) => CorpusError::Io(e),
            _ => unreachable!(),
        },
        csv::ErrorKind::Utf8 { .. } => CorpusError::MalformedRecord { line, reason: "invalid UTF-8".into() },
        _ => CorpusError::MalformedRecord { line, reason: err.to_string() },
    }
}

fn csv_stream<R: Read + 'static>(reader: R, column: &str) -> Result<DocumentStream, CorpusError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers().map_err(csv_error)?.clone();
    let col = headers.iter().position(|h| h == column).ok_or_else(|| CorpusError::MissingColumn(column.to_owned()))?;
    let iter = rdr.into_records().enumerate().map(move |(index, rec)| {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let text =
            rec.get(col).ok_or_else(|| CorpusError::MalformedRecord { line, reason: "record too short".into() })?;
        Ok(Document { index, text: text.to_owned() })
    });
    Ok(Box::new(iter))
}

fn jsonl_stream<R: Read + 'static>(reader: R, column: &str) -> DocumentStream {
    let column = column.to_owned();
    let mut index = 0usize;
    let iter = BufReader::new(reader).lines().enumerate().filter_map(move |(i, line)| {
        let line_no = i as u64 + 1;
        let line = match line {
            Ok(l) => l,
            Err(e) if e.kind() == io::ErrorKind::InvalidData => {
                return Some(Err(CorpusError::MalformedRecord { line: line_no, reason: "invalid UTF-8".into() }))
            }
            Err(e) => return Some(Err(e.into())),
        };
        if line.trim().is_empty() {
            return None;
        }
        let result = parse_jsonl_record(&line, &column, line_no).map(|text| {
            let doc = Document { index, text };
            index += 1;
            doc
        });
        Some(result)
    });
    Box::new(iter)
}

fn parse_jsonl_record(line: &str, column: &str, line_no: u64) -> Result<String, CorpusError> {
    let malformed = |reason: String| CorpusError::MalformedRecord { line: line_no, reason };
    let value: serde_json::Value = serde_json::from_str(line).map_err(|e| malformed(e.to_string()))?;
    let obj = value.as_object().ok_or_else(|| malformed("record is not a JSON object".into()))?;
    match obj.get(column) {
        None => Err(CorpusError::MissingColumn(column.to_owned())),
        Some(serde_json::Value::String(s)) => Ok(s.clone()),
        Some(serde_json::Value::Null) => Err(malformed(format!("{column:?} is null"))),
        Some(_) => Err(malformed(format!("{column:?} is not a string"))),
    }
}
