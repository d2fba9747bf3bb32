//! Result-set re-ranking: Bradfordizing and author centrality.

use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::corpus::DocumentRecord;
use crate::index::DocMetadata;
use crate::run::{RankedList, ServiceLabel};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BradfordOptions {
    /// Append documents without ISSN after all journal groups instead of dropping them.
    pub keep_unidentified: bool,
}

/// Re-ranks a result list so documents from the journals most frequent in it
/// come first.
///
/// Journals are ordered by document count (descending), then by their best
/// base rank, then by ISSN. Within a journal the base order is kept. Each
/// output score is the document's journal count.
pub fn bradfordize(base: &RankedList, meta: &impl DocMetadata) -> RankedList {
    bradfordize_with(base, meta, BradfordOptions::default())
}

pub fn bradfordize_with(base: &RankedList, meta: &impl DocMetadata, opts: BradfordOptions) -> RankedList {
    struct Journal<'a> {
        issn: &'a str,
        first_pos: usize,
        docs: Vec<&'a str>,
    }
    let mut journals: Vec<Journal> = Vec::new();
    let mut slot: HashMap<&str, usize> = HashMap::new();
    let mut unidentified = Vec::new();
    for (pos, entry) in base.entries.iter().enumerate() {
        match meta.issn(&entry.doc_id) {
            Some(issn) => {
                let i = *slot.entry(issn).or_insert_with(|| {
                    journals.push(Journal { issn, first_pos: pos, docs: Vec::new() });
                    journals.len() - 1
                });
                journals[i].docs.push(&entry.doc_id);
            }
            None => unidentified.push(entry.doc_id.as_str()),
        }
    }
    journals.sort_by(|a, b| {
        b.docs
            .len()
            .cmp(&a.docs.len())
            .then(a.first_pos.cmp(&b.first_pos))
            .then_with(|| a.issn.cmp(b.issn))
    });
    let mut scored: Vec<(String, f64)> = journals
        .iter()
        .flat_map(|j| j.docs.iter().map(move |d| (d.to_string(), j.docs.len() as f64)))
        .collect();
    if opts.keep_unidentified {
        scored.extend(unidentified.into_iter().map(|d| (d.to_string(), 0.0)));
    }
    RankedList::from_scored(ServiceLabel::Brad, base.topic_id, scored)
}

/// Undirected, unweighted co-authorship network.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CoauthorGraph {
    names: Vec<String>,
    ids: HashMap<String, usize>,
    adjacency: Vec<Vec<usize>>,
}

impl CoauthorGraph {
    /// One node per distinct author (in order of first appearance) and an
    /// edge between every pair of authors sharing a list.
    pub fn from_author_lists<I, L, S>(lists: I) -> Self
    where
        I: IntoIterator<Item = L>,
        L: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut graph = CoauthorGraph::default();
        let mut edges: Vec<BTreeSet<usize>> = Vec::new();
        for list in lists {
            let mut members: Vec<usize> = Vec::new();
            for name in list {
                let name = name.as_ref().trim();
                if name.is_empty() {
                    continue;
                }
                let id = match graph.ids.get(name) {
                    Some(&id) => id,
                    None => {
                        graph.names.push(name.to_string());
                        graph.ids.insert(name.to_string(), graph.names.len() - 1);
                        edges.push(BTreeSet::new());
                        graph.names.len() - 1
                    }
                };
                if !members.contains(&id) {
                    members.push(id);
                }
            }
            for (i, &a) in members.iter().enumerate() {
                for &b in &members[i + 1..] {
                    edges[a].insert(b);
                    edges[b].insert(a);
                }
            }
        }
        graph.adjacency = edges.into_iter().map(|s| s.into_iter().collect()).collect();
        graph
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn node(&self, name: &str) -> Option<usize> {
        self.ids.get(name).copied()
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn has_edge(&self, a: &str, b: &str) -> bool {
        match (self.node(a), self.node(b)) {
            (Some(a), Some(b)) => self.adjacency[a].binary_search(&b).is_ok(),
            _ => false,
        }
    }

    /// Edges as sorted name pairs, sorted.
    pub fn edges(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for (a, nbrs) in self.adjacency.iter().enumerate() {
            for &b in nbrs {
                if a < b {
                    let (x, y) = (&self.names[a], &self.names[b]);
                    out.push(if x <= y { (x.clone(), y.clone()) } else { (y.clone(), x.clone()) });
                }
            }
        }
        out.sort();
        out
    }
}

pub fn build_coauthor_graph(docs: &[DocumentRecord]) -> CoauthorGraph {
    CoauthorGraph::from_author_lists(docs.iter().map(|d| d.authors.iter()))
}

/// Betweenness per author.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralityScores {
    names: Vec<String>,
    values: Vec<f64>,
}

impl CentralityScores {
    pub fn get(&self, author: &str) -> Option<f64> {
        self.names.iter().position(|n| n == author).map(|i| self.values[i])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.names.iter().map(String::as_str).zip(self.values.iter().copied())
    }

    fn by_name(&self) -> HashMap<&str, f64> {
        self.iter().collect()
    }
}

/// Exact, unnormalized betweenness (each unordered pair counted once),
/// computed by shortest-path counting and dependency accumulation from
/// every source.
pub fn betweenness(graph: &CoauthorGraph) -> CentralityScores {
    let n = graph.node_count();
    let mut total = vec![0.0f64; n];
    let mut order = Vec::with_capacity(n);
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut sigma = vec![0.0f64; n];
    let mut dist = vec![usize::MAX; n];
    let mut delta = vec![0.0f64; n];
    let mut queue = VecDeque::new();

    for s in 0..n {
        order.clear();
        preds.iter_mut().for_each(Vec::clear);
        sigma.fill(0.0);
        dist.fill(usize::MAX);
        delta.fill(0.0);
        sigma[s] = 1.0;
        dist[s] = 0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &w in graph.neighbors(v) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    preds[w].push(v);
                }
            }
        }
        while let Some(w) = order.pop() {
            for &v in &preds[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                total[w] += delta[w];
            }
        }
    }
    // every unordered pair was visited from both ends
    total.iter_mut().for_each(|b| *b /= 2.0);
    CentralityScores { names: graph.names.clone(), values: total }
}

/// How a document's author betweenness values collapse to one score.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AuthorAggregate {
    #[default]
    Max,
    Sum,
}

/// Re-ranks by the betweenness of each document's authors within the
/// co-authorship network of the list itself. Stable: equal scores keep base order.
pub fn author_centrality_rerank(base: &RankedList, meta: &impl DocMetadata) -> RankedList {
    author_centrality_rerank_with(base, meta, AuthorAggregate::Max)
}

pub fn author_centrality_rerank_with(base: &RankedList, meta: &impl DocMetadata, agg: AuthorAggregate) -> RankedList {
    let graph = CoauthorGraph::from_author_lists(base.entries.iter().map(|e| meta.authors(&e.doc_id).iter()));
    let scores = betweenness(&graph);
    let lookup = scores.by_name();
    let mut scored: Vec<(String, f64)> = base
        .entries
        .iter()
        .map(|e| {
            let values = meta.authors(&e.doc_id).iter().map(|a| lookup.get(a.trim()).copied().unwrap_or(0.0));
            let score = match agg {
                AuthorAggregate::Max => values.fold(0.0, f64::max),
                AuthorAggregate::Sum => values.fold(0.0, |acc, v| acc + v),
            };
            (e.doc_id.clone(), score)
        })
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1));
    RankedList::from_scored(ServiceLabel::Auth, base.topic_id, scored)
}
