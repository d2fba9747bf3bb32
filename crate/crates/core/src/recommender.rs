//! Search term recommender.
//!
//! Associates free-text terms (title and abstract tokens) with controlled
//! vocabulary terms (the keyword field) by document-level co-occurrence.
//! Each `(free, controlled)` pair gets the log-likelihood ratio of its 2×2
//! contingency table, signed negative when the pair co-occurs less often than
//! independence predicts.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::DocumentRecord;
use crate::query::QueryAst;
use crate::text;

pub const DEFAULT_EXPANSION_TERMS: usize = 4;
const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum RecommenderError {
    #[error("no controlled vocabulary present")]
    NoControlledVocabulary,
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("model file: {0}")]
    Format(String),
}

/// Document counts of a 2×2 contingency table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContingencyTable {
    /// Docs containing both terms.
    pub both: u64,
    /// Docs containing only the free term.
    pub free_only: u64,
    /// Docs containing only the controlled term.
    pub controlled_only: u64,
    /// Docs containing neither.
    pub neither: u64,
}

impl ContingencyTable {
    pub fn from_counts(joint: u64, free: u64, controlled: u64, total: u64) -> Self {
        ContingencyTable {
            both: joint,
            free_only: free - joint,
            controlled_only: controlled - joint,
            neither: total + joint - free - controlled,
        }
    }

    pub fn total(&self) -> u64 {
        self.both + self.free_only + self.controlled_only + self.neither
    }

    /// Signed log-likelihood ratio (G²). Positive when the terms attract.
    pub fn signed_llr(&self) -> f64 {
        fn xlogx(x: u64) -> f64 {
            if x == 0 {
                0.0
            } else {
                let x = x as f64;
                x * x.ln()
            }
        }
        fn entropy(ks: &[u64]) -> f64 {
            xlogx(ks.iter().sum()) - ks.iter().map(|&k| xlogx(k)).sum::<f64>()
        }
        let (a, b, c, d) = (self.both, self.free_only, self.controlled_only, self.neither);
        let rows = entropy(&[a + b, c + d]);
        let cols = entropy(&[a + c, b + d]);
        let cells = entropy(&[a, b, c, d]);
        let llr = (2.0 * (rows + cols - cells)).max(0.0);
        // observed joint vs expected joint, compared in integers
        let observed = u128::from(a) * u128::from(self.total());
        let expected = u128::from(a + b) * u128::from(a + c);
        if observed >= expected {
            llr
        } else {
            -llr
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AssociationModel {
    doc_count: u64,
    free_counts: BTreeMap<String, u64>,
    controlled_counts: BTreeMap<String, u64>,
    joint: BTreeMap<String, BTreeMap<String, u64>>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    version: u32,
    doc_count: u64,
    free_terms: Vec<(String, u64)>,
    controlled_terms: Vec<(String, u64)>,
    pairs: Vec<(String, String, u64)>,
}

pub fn train_model(corpus: &[DocumentRecord]) -> Result<AssociationModel, RecommenderError> {
    let mut model = AssociationModel { doc_count: corpus.len() as u64, ..Default::default() };
    for record in corpus {
        let free: BTreeSet<String> = text::tokenize(&record.title)
            .into_iter()
            .chain(text::tokenize(&record.abstract_text))
            .collect();
        let controlled: BTreeSet<&str> =
            record.keywords.iter().map(|k| k.trim()).filter(|k| !k.is_empty()).collect();
        for f in &free {
            *model.free_counts.entry(f.clone()).or_default() += 1;
        }
        for c in &controlled {
            *model.controlled_counts.entry(c.to_string()).or_default() += 1;
        }
        for f in &free {
            let row = model.joint.entry(f.clone()).or_default();
            for c in &controlled {
                *row.entry(c.to_string()).or_default() += 1;
            }
        }
    }
    if model.controlled_counts.is_empty() {
        return Err(RecommenderError::NoControlledVocabulary);
    }
    model.joint.retain(|_, row| !row.is_empty());
    Ok(model)
}

impl AssociationModel {
    pub fn doc_count(&self) -> u64 {
        self.doc_count
    }

    pub fn free_term_count(&self) -> usize {
        self.free_counts.len()
    }

    pub fn controlled_terms(&self) -> impl Iterator<Item = &str> {
        self.controlled_counts.keys().map(String::as_str)
    }

    pub fn has_free_term(&self, term: &str) -> bool {
        self.free_counts.contains_key(term)
    }

    pub fn joint_count(&self, free: &str, controlled: &str) -> u64 {
        self.joint.get(free).and_then(|r| r.get(controlled)).copied().unwrap_or(0)
    }

    pub fn table(&self, free: &str, controlled: &str) -> Option<ContingencyTable> {
        let nf = *self.free_counts.get(free)?;
        let nc = *self.controlled_counts.get(controlled)?;
        Some(ContingencyTable::from_counts(self.joint_count(free, controlled), nf, nc, self.doc_count))
    }

    /// Association score of a pair; `None` when either term is unknown.
    pub fn score(&self, free: &str, controlled: &str) -> Option<f64> {
        self.table(free, controlled).map(|t| t.signed_llr())
    }

    /// Free terms of the model referenced by a query's leaves.
    pub fn query_free_terms(&self, ast: &QueryAst) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for leaf in ast.leaves() {
            match leaf {
                QueryAst::Term(t) => {
                    if self.has_free_term(t) {
                        out.insert(t.clone());
                    }
                }
                QueryAst::PrefixTerm(stem) => {
                    out.extend(
                        self.free_counts
                            .range::<str, _>((std::ops::Bound::Included(stem.as_str()), std::ops::Bound::Unbounded))
                            .map(|(t, _)| t)
                            .take_while(|t| t.starts_with(stem.as_str()))
                            .cloned(),
                    );
                }
                QueryAst::Phrase(p) => {
                    out.extend(text::tokenize(p).into_iter().filter(|t| self.has_free_term(t)));
                }
                QueryAst::And(_) | QueryAst::Or(_) => unreachable!("leaves() yields leaves only"),
            }
        }
        out
    }

    /// Controlled terms ranked by summed association with the query's free
    /// terms; only positive totals qualify. Ties sort lexicographically.
    pub fn recommend_terms(&self, ast: &QueryAst, n: usize) -> Vec<String> {
        self.ranked_recommendations(ast).into_iter().take(n).map(|(c, _)| c).collect()
    }

    /// Every positively associated controlled term with its aggregate score.
    pub fn ranked_recommendations(&self, ast: &QueryAst) -> Vec<(String, f64)> {
        let free = self.query_free_terms(ast);
        if free.is_empty() {
            return Vec::new();
        }
        let mut scored: Vec<(String, f64)> = self
            .controlled_counts
            .keys()
            .map(|c| {
                let total: f64 = free.iter().filter_map(|f| self.score(f, c)).sum();
                (c.clone(), total)
            })
            .filter(|(_, s)| *s > 0.0)
            .collect();
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        scored
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), RecommenderError> {
        let file = ModelFile {
            version: MODEL_FORMAT_VERSION,
            doc_count: self.doc_count,
            free_terms: self.free_counts.iter().map(|(k, v)| (k.clone(), *v)).collect(),
            controlled_terms: self.controlled_counts.iter().map(|(k, v)| (k.clone(), *v)).collect(),
            pairs: self
                .joint
                .iter()
                .flat_map(|(f, row)| row.iter().map(move |(c, n)| (f.clone(), c.clone(), *n)))
                .collect(),
        };
        let out = io::BufWriter::new(fs::File::create(path)?);
        serde_json::to_writer(out, &file).map_err(|e| RecommenderError::Format(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, RecommenderError> {
        let file: ModelFile = serde_json::from_reader(io::BufReader::new(fs::File::open(path)?))
            .map_err(|e| RecommenderError::Format(e.to_string()))?;
        if file.version != MODEL_FORMAT_VERSION {
            return Err(RecommenderError::Format(format!("unsupported model version {}", file.version)));
        }
        let mut model = AssociationModel {
            doc_count: file.doc_count,
            free_counts: file.free_terms.into_iter().collect(),
            controlled_counts: file.controlled_terms.into_iter().collect(),
            joint: BTreeMap::new(),
        };
        let mut seen = HashSet::new();
        for (f, c, n) in file.pairs {
            let nf = model.free_counts.get(&f).copied().unwrap_or(0);
            let nc = model.controlled_counts.get(&c).copied().unwrap_or(0);
            if n > nf.min(nc) || !seen.insert((f.clone(), c.clone())) {
                return Err(RecommenderError::Format(format!("inconsistent pair ({f:?}, {c:?}, {n})")));
            }
            model.joint.entry(f).or_default().insert(c, n);
        }
        Ok(model)
    }
}
