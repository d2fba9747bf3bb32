//! Ranked result lists and the tabular run-file format.
//!
//! A run file holds one line per ranked entry:
//!
//! ```text
//! topic_id  doc_id  rank  score  service_label
//! ```
//!
//! Fields are separated by whitespace; lines starting with `#` are ignored.

use std::fmt;
use std::io::{self, BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The four retrieval arms. Ordering follows the column order used in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ServiceLabel {
    /// Author-centrality re-ranking.
    Auth,
    /// Bradfordizing re-ranking.
    Brad,
    /// tf-idf baseline.
    Solr,
    /// Search-term-recommender query expansion.
    Str,
}

impl ServiceLabel {
    pub const ALL: [ServiceLabel; 4] = [ServiceLabel::Auth, ServiceLabel::Brad, ServiceLabel::Solr, ServiceLabel::Str];

    pub fn as_str(self) -> &'static str {
        match self {
            ServiceLabel::Auth => "AUTH",
            ServiceLabel::Brad => "BRAD",
            ServiceLabel::Solr => "SOLR",
            ServiceLabel::Str => "STR",
        }
    }
}

impl fmt::Display for ServiceLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ServiceLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "AUTH" => Ok(ServiceLabel::Auth),
            "BRAD" => Ok(ServiceLabel::Brad),
            "SOLR" => Ok(ServiceLabel::Solr),
            "STR" => Ok(ServiceLabel::Str),
            _ => Err(format!("unknown service label {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedEntry {
    pub rank: usize,
    pub doc_id: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedList {
    pub service: ServiceLabel,
    pub topic_id: u32,
    pub entries: Vec<RankedEntry>,
}

impl RankedList {
    /// Builds a list from `(doc_id, score)` pairs already in rank order.
    pub fn from_scored(service: ServiceLabel, topic_id: u32, scored: impl IntoIterator<Item = (String, f64)>) -> Self {
        let entries = scored
            .into_iter()
            .enumerate()
            .map(|(i, (doc_id, score))| RankedEntry { rank: i + 1, doc_id, score })
            .collect();
        RankedList { service, topic_id, entries }
    }

    pub fn with_topic(mut self, topic_id: u32) -> Self {
        self.topic_id = topic_id;
        self
    }

    pub fn with_service(mut self, service: ServiceLabel) -> Self {
        self.service = service;
        self
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn doc_ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.doc_id.as_str())
    }

    /// The first `k` entries as a new list.
    pub fn truncated(&self, k: usize) -> RankedList {
        RankedList {
            service: self.service,
            topic_id: self.topic_id,
            entries: self.entries.iter().take(k).cloned().collect(),
        }
    }
}

#[derive(Debug, Error)]
pub enum RunFileError {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("run file line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub fn write_run<W: Write>(list: &RankedList, out: &mut W) -> io::Result<()> {
    for e in &list.entries {
        writeln!(out, "{}\t{}\t{}\t{}\t{}", list.topic_id, e.doc_id, e.rank, e.score, list.service)?;
    }
    Ok(())
}

/// Reads every list in a run file, grouped by `(topic_id, service)` in order of first appearance.
/// Entries are sorted by rank within each list.
pub fn read_runs<R: BufRead>(reader: R) -> Result<Vec<RankedList>, RunFileError> {
    let mut lists: Vec<RankedList> = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let err = |message: String| RunFileError::Parse { line: i + 1, message };
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(err(format!("expected 5 fields, found {}", fields.len())));
        }
        let topic_id: u32 = fields[0].parse().map_err(|_| err(format!("bad topic id {:?}", fields[0])))?;
        let rank: usize = fields[2].parse().map_err(|_| err(format!("bad rank {:?}", fields[2])))?;
        let score: f64 = fields[3].parse().map_err(|_| err(format!("bad score {:?}", fields[3])))?;
        let service: ServiceLabel = fields[4].parse().map_err(err)?;
        let entry = RankedEntry { rank, doc_id: fields[1].to_string(), score };
        match lists.iter_mut().find(|l| l.topic_id == topic_id && l.service == service) {
            Some(list) => list.entries.push(entry),
            None => lists.push(RankedList { service, topic_id, entries: vec![entry] }),
        }
    }
    for list in &mut lists {
        list.entries.sort_by_key(|e| e.rank);
    }
    Ok(lists)
}
