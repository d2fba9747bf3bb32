//! Inverted index with tf-idf ranking and ISSN faceting.
//!
//! Scoring follows the classic practical tf-idf formula:
//!
//! ```text
//! score(d) = coord(d) · Σ sqrt(tf(t,d)) · idf(t)² / sqrt(len(d))
//! idf(t)   = 1 + ln(N / (df(t) + 1))
//! ```
//!
//! `coord` is the fraction of top-level clauses that match `d`. The sum runs
//! over the terms of every sub-clause that matched. `len(d)` is the combined
//! token count of title, abstract and keywords.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, DocumentRecord};
use crate::query::QueryAst;
use crate::run::{RankedList, ServiceLabel};
use crate::text;

pub const INDEX_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("unknown document id {0:?}")]
    UnknownDoc(String),
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("index file: {0}")]
    Format(String),
}

/// Read access to the per-document metadata the re-rankers need.
pub trait DocMetadata {
    fn issn(&self, doc_id: &str) -> Option<&str>;
    fn authors(&self, doc_id: &str) -> &[String];
}

impl DocMetadata for Corpus {
    fn issn(&self, doc_id: &str) -> Option<&str> {
        self.get(doc_id).and_then(|r| r.issn.as_deref())
    }

    fn authors(&self, doc_id: &str) -> &[String] {
        self.get(doc_id).map_or(&[], |r| r.authors.as_slice())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Posting {
    pub doc: u32,
    /// Term frequency in title, abstract and keywords.
    pub field_tf: [u32; 3],
}

impl Posting {
    pub fn tf(&self) -> u32 {
        self.field_tf.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct StoredDoc {
    doc_id: String,
    issn: Option<String>,
    authors: Vec<String>,
    len: u32,
    title: Vec<String>,
    abstract_text: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvertedIndex {
    version: u32,
    docs: Vec<StoredDoc>,
    postings: BTreeMap<String, Vec<Posting>>,
    /// Normalized untokenized keyword → docs carrying it (once per occurrence).
    keywords: BTreeMap<String, Vec<u32>>,
    #[serde(skip)]
    by_id: HashMap<String, u32>,
}

/// Tokens of the three indexed fields, in field order.
fn field_tokens(record: &DocumentRecord) -> [Vec<String>; 3] {
    [
        text::tokenize(&record.title),
        text::tokenize(&record.abstract_text),
        record.keywords.iter().flat_map(|k| text::tokenize(k)).collect(),
    ]
}

pub fn build_index(corpus: &[DocumentRecord]) -> InvertedIndex {
    let mut postings: BTreeMap<String, Vec<Posting>> = BTreeMap::new();
    let mut keywords: BTreeMap<String, Vec<u32>> = BTreeMap::new();
    let mut docs = Vec::with_capacity(corpus.len());
    for (doc, record) in corpus.iter().enumerate() {
        let doc = doc as u32;
        let fields = field_tokens(record);
        let mut tf: BTreeMap<&str, [u32; 3]> = BTreeMap::new();
        for (f, tokens) in fields.iter().enumerate() {
            for t in tokens {
                tf.entry(t.as_str()).or_default()[f] += 1;
            }
        }
        for (term, field_tf) in tf {
            postings.entry(term.to_string()).or_default().push(Posting { doc, field_tf });
        }
        for kw in &record.keywords {
            let kw = text::normalize_keyword(kw);
            if !kw.is_empty() {
                keywords.entry(kw).or_default().push(doc);
            }
        }
        let len = fields.iter().map(Vec::len).sum::<usize>() as u32;
        let [title, abstract_text, _] = fields;
        docs.push(StoredDoc {
            doc_id: record.doc_id.clone(),
            issn: record.issn.clone(),
            authors: record.authors.clone(),
            len,
            title,
            abstract_text,
        });
    }
    let mut index = InvertedIndex { version: INDEX_FORMAT_VERSION, docs, postings, keywords, by_id: HashMap::new() };
    index.rebuild_lookup();
    index
}

type ScoreMap = HashMap<u32, f64>;

impl InvertedIndex {
    fn rebuild_lookup(&mut self) {
        self.by_id = self.docs.iter().enumerate().map(|(i, d)| (d.doc_id.clone(), i as u32)).collect();
    }

    pub fn num_docs(&self) -> usize {
        self.docs.len()
    }

    pub fn doc_freq(&self, term: &str) -> usize {
        self.postings.get(term).map_or(0, Vec::len)
    }

    pub fn idf(&self, term: &str) -> f64 {
        idf(self.num_docs(), self.doc_freq(term))
    }

    pub fn postings(&self, term: &str) -> &[Posting] {
        self.postings.get(term).map_or(&[], Vec::as_slice)
    }

    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.postings.keys().map(String::as_str)
    }

    /// Index terms starting with `stem`, in lexicographic order.
    pub fn terms_with_prefix<'a>(&'a self, stem: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.postings
            .range::<str, _>((std::ops::Bound::Included(stem), std::ops::Bound::Unbounded))
            .map(|(t, _)| t.as_str())
            .take_while(move |t| t.starts_with(stem))
    }

    pub fn doc_id(&self, doc: u32) -> &str {
        &self.docs[doc as usize].doc_id
    }

    pub fn contains(&self, doc_id: &str) -> bool {
        self.by_id.contains_key(doc_id)
    }

    /// Combined token length of a document.
    pub fn doc_len(&self, doc_id: &str) -> Option<u32> {
        self.by_id.get(doc_id).map(|&d| self.docs[d as usize].len)
    }

    fn norm(&self, doc: u32) -> f64 {
        1.0 / f64::from(self.docs[doc as usize].len.max(1)).sqrt()
    }

    fn term_scores(&self, term: &str) -> ScoreMap {
        let w = self.idf(term).powi(2);
        self.postings(term)
            .iter()
            .map(|p| (p.doc, f64::from(p.tf()).sqrt() * w * self.norm(p.doc)))
            .collect()
    }

    fn phrase_scores(&self, phrase: &str) -> ScoreMap {
        let tokens = text::tokenize(phrase);
        let mut freq: HashMap<u32, u32> = HashMap::new();
        if let Some(docs) = self.keywords.get(&text::normalize_keyword(phrase)) {
            for &d in docs {
                *freq.entry(d).or_default() += 1;
            }
        }
        if let Some((first, rest)) = tokens.split_first() {
            for p in self.postings(first) {
                if !rest.iter().all(|t| self.postings(t).binary_search_by_key(&p.doc, |q| q.doc).is_ok()) {
                    continue;
                }
                let stored = &self.docs[p.doc as usize];
                let hits = count_runs(&stored.title, &tokens) + count_runs(&stored.abstract_text, &tokens);
                if hits > 0 {
                    *freq.entry(p.doc).or_default() += hits;
                }
            }
        }
        let idf_sum: f64 = if tokens.is_empty() { 1.0 } else { tokens.iter().map(|t| self.idf(t)).sum() };
        let w = idf_sum.powi(2);
        freq.into_iter().map(|(d, f)| (d, f64::from(f).sqrt() * w * self.norm(d))).collect()
    }

    /// Matching docs of a node with their raw (un-coordinated) score.
    fn eval(&self, node: &QueryAst) -> ScoreMap {
        match node {
            QueryAst::Term(t) => self.term_scores(t),
            QueryAst::PrefixTerm(stem) => {
                let mut acc = ScoreMap::new();
                for term in self.terms_with_prefix(stem) {
                    for (d, s) in self.term_scores(term) {
                        *acc.entry(d).or_default() += s;
                    }
                }
                acc
            }
            QueryAst::Phrase(p) => self.phrase_scores(p),
            QueryAst::And(children) => {
                let mut maps = children.iter().map(|c| self.eval(c));
                let Some(mut acc) = maps.next() else { return ScoreMap::new() };
                for m in maps {
                    acc = acc.into_iter().filter_map(|(d, s)| m.get(&d).map(|t| (d, s + t))).collect();
                }
                acc
            }
            QueryAst::Or(children) => {
                let mut acc = ScoreMap::new();
                for m in children.iter().map(|c| self.eval(c)) {
                    for (d, s) in m {
                        *acc.entry(d).or_default() += s;
                    }
                }
                acc
            }
        }
    }

    /// All matching documents with their final scores, unsorted.
    pub fn score_all(&self, ast: &QueryAst) -> Vec<(u32, f64)> {
        match ast {
            QueryAst::And(children) | QueryAst::Or(children) => {
                let clauses: Vec<ScoreMap> = children.iter().map(|c| self.eval(c)).collect();
                let total = clauses.len() as f64;
                let root = self.eval_combined(ast, &clauses);
                root.into_iter()
                    .map(|(d, s)| {
                        let matched = clauses.iter().filter(|m| m.contains_key(&d)).count() as f64;
                        (d, s * matched / total)
                    })
                    .collect()
            }
            leaf => self.eval(leaf).into_iter().collect(),
        }
    }

    fn eval_combined(&self, ast: &QueryAst, clauses: &[ScoreMap]) -> ScoreMap {
        let mut acc = ScoreMap::new();
        match ast {
            QueryAst::And(_) => {
                if let Some((first, rest)) = clauses.split_first() {
                    for (&d, &s) in first {
                        if rest.iter().all(|m| m.contains_key(&d)) {
                            acc.insert(d, s + rest.iter().map(|m| m[&d]).sum::<f64>());
                        }
                    }
                }
            }
            _ => {
                for m in clauses {
                    for (&d, &s) in m {
                        *acc.entry(d).or_default() += s;
                    }
                }
            }
        }
        acc
    }

    /// Boolean retrieval ranked by tf-idf; ties broken by doc id ascending.
    /// The returned list is labeled SOLR with topic id 0.
    pub fn search(&self, ast: &QueryAst, limit: usize) -> RankedList {
        let mut scored: Vec<(&str, f64)> =
            self.score_all(ast).into_iter().map(|(d, s)| (self.doc_id(d), s)).collect();
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        scored.truncate(limit);
        RankedList::from_scored(ServiceLabel::Solr, 0, scored.into_iter().map(|(d, s)| (d.to_string(), s)))
    }

    /// Number of documents per ISSN among `docs`. Documents without ISSN are skipped.
    pub fn facet_counts<S: AsRef<str>>(&self, docs: &[S]) -> Result<BTreeMap<String, usize>, IndexError> {
        let mut counts = BTreeMap::new();
        for id in docs {
            let id = id.as_ref();
            let &d = self.by_id.get(id).ok_or_else(|| IndexError::UnknownDoc(id.to_string()))?;
            if let Some(issn) = &self.docs[d as usize].issn {
                *counts.entry(issn.clone()).or_insert(0) += 1;
            }
        }
        Ok(counts)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), IndexError> {
        let f = io::BufWriter::new(fs::File::create(path)?);
        serde_json::to_writer(f, self).map_err(|e| IndexError::Format(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, IndexError> {
        let f = io::BufReader::new(fs::File::open(path)?);
        let mut index: InvertedIndex = serde_json::from_reader(f).map_err(|e| IndexError::Format(e.to_string()))?;
        if index.version != INDEX_FORMAT_VERSION {
            return Err(IndexError::Format(format!(
                "unsupported index version {} (expected {INDEX_FORMAT_VERSION})",
                index.version
            )));
        }
        index.rebuild_lookup();
        Ok(index)
    }
}

impl DocMetadata for InvertedIndex {
    fn issn(&self, doc_id: &str) -> Option<&str> {
        self.by_id.get(doc_id).and_then(|&d| self.docs[d as usize].issn.as_deref())
    }

    fn authors(&self, doc_id: &str) -> &[String] {
        self.by_id.get(doc_id).map_or(&[], |&d| self.docs[d as usize].authors.as_slice())
    }
}

pub fn idf(num_docs: usize, doc_freq: usize) -> f64 {
    1.0 + (num_docs as f64 / (doc_freq as f64 + 1.0)).ln()
}

fn count_runs(haystack: &[String], needle: &[String]) -> u32 {
    if needle.is_empty() || haystack.len() < needle.len() {
        return 0;
    }
    haystack.windows(needle.len()).filter(|w| *w == needle).count() as u32
}
