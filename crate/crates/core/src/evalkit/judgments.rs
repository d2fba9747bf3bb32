//! Binary relevance judgments and the tabular judgment file.
//!
//! ```text
//! assessor_id  topic_id  doc_id  label  timestamp
//! ```
//!
//! `label` is `1` (relevant) or `0` (not relevant); `timestamp` is Unix seconds.

use std::collections::HashMap;
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use super::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relevance {
    Relevant,
    NotRelevant,
}

impl Relevance {
    pub fn from_bool(relevant: bool) -> Self {
        if relevant {
            Relevance::Relevant
        } else {
            Relevance::NotRelevant
        }
    }

    pub fn is_relevant(self) -> bool {
        self == Relevance::Relevant
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Judgment {
    pub assessor_id: String,
    pub topic_id: u32,
    pub doc_id: String,
    pub label: Relevance,
    pub timestamp: u64,
}

impl Judgment {
    pub fn new(assessor_id: &str, topic_id: u32, doc_id: &str, label: Relevance) -> Self {
        Judgment { assessor_id: assessor_id.into(), topic_id, doc_id: doc_id.into(), label, timestamp: 0 }
    }

    fn key(&self) -> (&str, u32, &str) {
        (&self.assessor_id, self.topic_id, &self.doc_id)
    }
}

/// Collapses resubmissions: the last judgment per `(assessor, topic, doc)`
/// wins and takes the position of the first.
pub fn upsert_judgments(judgments: impl IntoIterator<Item = Judgment>) -> Vec<Judgment> {
    let mut out: Vec<Judgment> = Vec::new();
    let mut slot: HashMap<(String, u32, String), usize> = HashMap::new();
    for j in judgments {
        let (a, t, d) = j.key();
        let key = (a.to_string(), t, d.to_string());
        match slot.get(&key) {
            Some(&i) => out[i] = j,
            None => {
                slot.insert(key, out.len());
                out.push(j);
            }
        }
    }
    out
}

pub fn write_judgments<W: Write>(judgments: &[Judgment], out: &mut W) -> io::Result<()> {
    for j in judgments {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            j.assessor_id,
            j.topic_id,
            j.doc_id,
            u8::from(j.label.is_relevant()),
            j.timestamp
        )?;
    }
    Ok(())
}

/// Parses a judgment file. Duplicate keys are kept as separate lines; use
/// [`upsert_judgments`] for last-write-wins semantics.
pub fn read_judgments<R: BufRead>(reader: R) -> Result<Vec<Judgment>, EvalError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let err = |message: String| EvalError::Parse { line: i + 1, message };
        let f: Vec<&str> = trimmed.split_whitespace().collect();
        if f.len() != 5 {
            return Err(err(format!("expected 5 fields, found {}", f.len())));
        }
        let topic_id = f[1].parse().map_err(|_| err(format!("bad topic id {:?}", f[1])))?;
        let label = match f[3] {
            "1" => Relevance::Relevant,
            "0" => Relevance::NotRelevant,
            other => return Err(err(format!("label must be 1 or 0, found {other:?}"))),
        };
        let timestamp = f[4].parse().map_err(|_| err(format!("bad timestamp {:?}", f[4])))?;
        out.push(Judgment { assessor_id: f[0].into(), topic_id, doc_id: f[2].into(), label, timestamp });
    }
    Ok(out)
}
