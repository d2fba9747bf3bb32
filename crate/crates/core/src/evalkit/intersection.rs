use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::run::ServiceLabel;

/// Relevant document sets keyed by `(topic_id, service)`.
pub type RelevantSets = BTreeMap<(u32, ServiceLabel), BTreeSet<String>>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairCount {
    pub a: ServiceLabel,
    pub b: ServiceLabel,
    pub count: usize,
}

/// Pairwise intersections of relevant sets summed over topics.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntersectionMatrix {
    /// One entry per unordered service pair, in label order.
    pub pairs: Vec<PairCount>,
    pub total: usize,
    /// Sum of the relevant-set sizes that went in.
    pub relevant_docs: usize,
}

impl IntersectionMatrix {
    pub fn get(&self, a: ServiceLabel, b: ServiceLabel) -> Option<usize> {
        if a == b {
            return None;
        }
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        self.pairs.iter().find(|p| p.a == a && p.b == b).map(|p| p.count)
    }
}

pub fn intersection_matrix(sets: &RelevantSets) -> IntersectionMatrix {
    let topics: BTreeSet<u32> = sets.keys().map(|(t, _)| *t).collect();
    let empty = BTreeSet::new();
    let mut pairs = Vec::new();
    for (i, &a) in ServiceLabel::ALL.iter().enumerate() {
        for &b in &ServiceLabel::ALL[i + 1..] {
            let count = topics
                .iter()
                .map(|&t| {
                    let sa = sets.get(&(t, a)).unwrap_or(&empty);
                    let sb = sets.get(&(t, b)).unwrap_or(&empty);
                    sa.intersection(sb).count()
                })
                .sum();
            pairs.push(PairCount { a, b, count });
        }
    }
    let total = pairs.iter().map(|p| p.count).sum();
    IntersectionMatrix { pairs, total, relevant_docs: sets.values().map(BTreeSet::len).sum() }
}
