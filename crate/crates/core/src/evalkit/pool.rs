use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::run::{RankedList, ServiceLabel};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoolEntry {
    pub doc_id: String,
    pub services: BTreeSet<ServiceLabel>,
    /// Position in the presentation order (0-based).
    pub order: usize,
}

/// Deduplicated union of the services' top documents for one topic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pool {
    pub topic_id: u32,
    pub depth: usize,
    /// Entries in presentation order.
    pub entries: Vec<PoolEntry>,
    /// Each service's pooled documents in its own rank order.
    pub service_docs: BTreeMap<ServiceLabel, Vec<String>>,
}

/// Which rows a judgment matrix gets for a pool.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubjectMode {
    /// One row per pooled (service, document) slot, so a document returned
    /// by two services appears twice: N = services × depth.
    #[default]
    ServiceSlots,
    /// One row per distinct pooled document.
    Documents,
}

/// Pools the top `depth` documents of every run. Presentation order is a
/// shuffle seeded by `seed`, so the pool hides which service returned what.
pub fn build_pool(runs: &[RankedList], depth: usize, seed: u64) -> Result<Pool, EvalError> {
    if depth == 0 {
        return Err(EvalError::InvalidDepth);
    }
    let first = runs.first().ok_or(EvalError::NoRuns)?;
    let mut service_docs = BTreeMap::new();
    for run in runs {
        if run.topic_id != first.topic_id {
            return Err(EvalError::MismatchedTopics(first.topic_id, run.topic_id));
        }
        let top: Vec<String> = run.entries.iter().take(depth).map(|e| e.doc_id.clone()).collect();
        if service_docs.insert(run.service, top).is_some() {
            return Err(EvalError::DuplicateService(run.service));
        }
    }
    let mut entries: Vec<PoolEntry> = Vec::new();
    let mut slot: HashMap<String, usize> = HashMap::new();
    for (service, docs) in &service_docs {
        for doc in docs {
            let i = *slot.entry(doc.clone()).or_insert_with(|| {
                entries.push(PoolEntry { doc_id: doc.clone(), services: BTreeSet::new(), order: 0 });
                entries.len() - 1
            });
            entries[i].services.insert(*service);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    entries.shuffle(&mut rng);
    for (i, e) in entries.iter_mut().enumerate() {
        e.order = i;
    }
    Ok(Pool { topic_id: first.topic_id, depth, entries, service_docs })
}

impl Pool {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Document ids in presentation order.
    pub fn doc_ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.doc_id.as_str())
    }

    pub fn contains(&self, doc_id: &str) -> bool {
        self.entries.iter().any(|e| e.doc_id == doc_id)
    }

    /// Services credited with a document (empty if not pooled).
    pub fn services_for(&self, doc_id: &str) -> BTreeSet<ServiceLabel> {
        self.entries.iter().find(|e| e.doc_id == doc_id).map(|e| e.services.clone()).unwrap_or_default()
    }

    pub fn docs_for(&self, service: ServiceLabel) -> &[String] {
        self.service_docs.get(&service).map_or(&[], Vec::as_slice)
    }

    pub fn subjects(&self, mode: SubjectMode) -> Vec<String> {
        match mode {
            SubjectMode::Documents => self.doc_ids().map(String::from).collect(),
            SubjectMode::ServiceSlots => self.service_docs.values().flatten().cloned().collect(),
        }
    }
}
