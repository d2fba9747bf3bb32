//! Document collection and topic definitions.
//!
//! Corpus files are newline-delimited JSON, one record per line:
//!
//! ```text
//! {"id":"d1","title":"...","abstract":"...","keywords":["poverty"],"authors":["Meyer, A."],"issn":"0340-1804","journal":"...","year":2004}
//! ```
//!
//! Topic files are a JSON array of `{id, title, description}` objects.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text;

/// The ten CLEF topics used in the assessment study, bundled as JSON.
pub const BUNDLED_TOPICS_JSON: &str = include_str!("../fixtures/clef_topics.json");

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: empty document id")]
    EmptyId { line: usize },
    #[error("duplicate document id {id:?} on lines {first} and {second}")]
    DuplicateId { id: String, first: usize, second: usize },
    #[error("topic file: {0}")]
    TopicParse(String),
    #[error("duplicate topic id {0}")]
    DuplicateTopic(u32),
    #[error("topic {0}: title and description must be non-empty")]
    EmptyTopic(u32),
}

/// One metadata record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentRecord {
    #[serde(rename = "id")]
    pub doc_id: String,
    pub title: String,
    #[serde(rename = "abstract", default)]
    pub abstract_text: String,
    #[serde(default)]
    pub keywords: Vec<String>,
    #[serde(default)]
    pub authors: Vec<String>,
    #[serde(default)]
    pub issn: Option<String>,
    #[serde(default)]
    pub journal: Option<String>,
    pub year: i32,
}

/// Checks the `NNNN-NNNC` shape (C is a digit or `X`). No check-digit validation.
pub fn is_valid_issn(issn: &str) -> bool {
    let b = issn.as_bytes();
    b.len() == 9
        && b[..4].iter().all(u8::is_ascii_digit)
        && b[4] == b'-'
        && b[5..8].iter().all(u8::is_ascii_digit)
        && (b[8].is_ascii_digit() || b[8] == b'X')
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LoadWarning {
    InvalidIssn { line: usize, doc_id: String, issn: String },
    DuplicateAuthor { line: usize, doc_id: String, author: String },
}

impl fmt::Display for LoadWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoadWarning::InvalidIssn { line, doc_id, issn } => {
                write!(f, "line {line}: document {doc_id}: invalid ISSN {issn:?} cleared")
            }
            LoadWarning::DuplicateAuthor { line, doc_id, author } => {
                write!(f, "line {line}: document {doc_id}: duplicate author {author:?} removed")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CorpusStats {
    pub doc_count: usize,
    pub vocab_size: usize,
    pub title_tokens: usize,
    pub abstract_tokens: usize,
    pub keyword_tokens: usize,
}

/// A validated, immutable document collection with id lookup.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    records: Vec<DocumentRecord>,
    by_id: HashMap<String, usize>,
    lines: Vec<usize>,
    warnings: Vec<LoadWarning>,
}

impl Corpus {
    /// Builds a corpus from already-constructed records, applying the same
    /// validation as the file loader (line numbers are 1-based positions).
    pub fn from_records(records: Vec<DocumentRecord>) -> Result<Self, CorpusError> {
        let mut corpus = Corpus::default();
        for (i, record) in records.into_iter().enumerate() {
            corpus.push(record, i + 1)?;
        }
        Ok(corpus)
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<Self, CorpusError> {
        let mut corpus = Corpus::default();
        for (i, line) in BufReader::new(reader).lines().enumerate() {
            let line_no = i + 1;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record: DocumentRecord = serde_json::from_str(&line)
                .map_err(|e| CorpusError::Parse { line: line_no, message: e.to_string() })?;
            corpus.push(record, line_no)?;
        }
        Ok(corpus)
    }

    fn push(&mut self, mut record: DocumentRecord, line: usize) -> Result<(), CorpusError> {
        record.doc_id = record.doc_id.trim().to_string();
        if record.doc_id.is_empty() {
            return Err(CorpusError::EmptyId { line });
        }
        if let Some(&prev) = self.by_id.get(&record.doc_id) {
            return Err(CorpusError::DuplicateId {
                id: record.doc_id,
                first: self.lines[prev],
                second: line,
            });
        }
        if let Some(issn) = record.issn.take() {
            let issn = issn.trim().to_string();
            if is_valid_issn(&issn) {
                record.issn = Some(issn);
            } else {
                self.warnings.push(LoadWarning::InvalidIssn {
                    line,
                    doc_id: record.doc_id.clone(),
                    issn,
                });
            }
        }
        let mut seen = HashSet::new();
        let mut authors = Vec::with_capacity(record.authors.len());
        for author in record.authors.drain(..) {
            let author = author.trim().to_string();
            if author.is_empty() {
                continue;
            }
            if seen.insert(author.clone()) {
                authors.push(author);
            } else {
                self.warnings.push(LoadWarning::DuplicateAuthor {
                    line,
                    doc_id: record.doc_id.clone(),
                    author,
                });
            }
        }
        record.authors = authors;
        self.by_id.insert(record.doc_id.clone(), self.records.len());
        self.records.push(record);
        self.lines.push(line);
        Ok(())
    }

    pub fn records(&self) -> &[DocumentRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<DocumentRecord> {
        self.records
    }

    pub fn get(&self, doc_id: &str) -> Option<&DocumentRecord> {
        self.by_id.get(doc_id).map(|&i| &self.records[i])
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn warnings(&self) -> &[LoadWarning] {
        &self.warnings
    }

    pub fn stats(&self) -> CorpusStats {
        let mut vocab = HashSet::new();
        let mut stats = CorpusStats { doc_count: self.records.len(), ..Default::default() };
        for r in &self.records {
            let title = text::tokenize(&r.title);
            let abs = text::tokenize(&r.abstract_text);
            let kw: Vec<String> = r.keywords.iter().flat_map(|k| text::tokenize(k)).collect();
            stats.title_tokens += title.len();
            stats.abstract_tokens += abs.len();
            stats.keyword_tokens += kw.len();
            vocab.extend(title.into_iter().chain(abs).chain(kw));
        }
        stats.vocab_size = vocab.len();
        stats
    }

    /// Writes records back out in the corpus line format.
    pub fn write_to<W: Write>(&self, mut out: W) -> io::Result<()> {
        write_records(&self.records, &mut out)
    }
}

pub fn write_records<W: Write>(records: &[DocumentRecord], out: &mut W) -> io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut *out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Loads and validates a corpus file.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus, CorpusError> {
    Corpus::from_reader(fs::File::open(path)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topic {
    #[serde(rename = "id")]
    pub topic_id: u32,
    pub title: String,
    pub description: String,
}

pub fn parse_topics(json: &str) -> Result<Vec<Topic>, CorpusError> {
    if json.trim().is_empty() {
        return Ok(Vec::new());
    }
    let topics: Vec<Topic> =
        serde_json::from_str(json).map_err(|e| CorpusError::TopicParse(e.to_string()))?;
    let mut seen = HashSet::new();
    for t in &topics {
        if !seen.insert(t.topic_id) {
            return Err(CorpusError::DuplicateTopic(t.topic_id));
        }
        if t.title.trim().is_empty() || t.description.trim().is_empty() {
            return Err(CorpusError::EmptyTopic(t.topic_id));
        }
    }
    Ok(topics)
}

pub fn load_topics(path: impl AsRef<Path>) -> Result<Vec<Topic>, CorpusError> {
    parse_topics(&fs::read_to_string(path)?)
}

/// The bundled ten-topic fixture.
pub fn bundled_topics() -> Vec<Topic> {
    parse_topics(BUNDLED_TOPICS_JSON).expect("bundled topic fixture is valid")
}
