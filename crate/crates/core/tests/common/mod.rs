//! Independent reference implementations and generators shared by the
//! property suites and the acceptance target.
#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};

use proptest::prelude::*;

use irbench::corpus::DocumentRecord;
use irbench::evalkit::{Judgment, JudgmentMatrix, Relevance};
use irbench::run::{RankedList, ServiceLabel};

/// Builds a complete matrix from `labels[subject][rater]`.
pub fn matrix(labels: &[Vec<bool>]) -> JudgmentMatrix {
    let subjects: Vec<String> = (0..labels.len()).map(|i| format!("s{i:03}")).collect();
    let mut judgments = Vec::new();
    for (i, row) in labels.iter().enumerate() {
        for (r, &rel) in row.iter().enumerate() {
            judgments.push(Judgment::new(&format!("r{r:03}"), 1, &subjects[i], Relevance::from_bool(rel)));
        }
    }
    JudgmentMatrix::from_judgments(1, &subjects, &judgments)
}

/// Fleiss' kappa evaluated term by term from its textbook definition.
pub fn kappa_direct(labels: &[Vec<bool>]) -> Option<f64> {
    let big_n = labels.len() as f64;
    let n = labels[0].len() as f64;
    let counts: Vec<[f64; 2]> = labels
        .iter()
        .map(|row| {
            let rel = row.iter().filter(|&&b| b).count() as f64;
            [rel, n - rel]
        })
        .collect();
    let p_j: Vec<f64> = (0..2).map(|j| counts.iter().map(|c| c[j]).sum::<f64>() / (big_n * n)).collect();
    let p_i: Vec<f64> =
        counts.iter().map(|c| (c[0] * c[0] + c[1] * c[1] - n) / (n * (n - 1.0))).collect();
    let p_bar = p_i.iter().sum::<f64>() / big_n;
    let p_e = p_j.iter().map(|p| p * p).sum::<f64>();
    if p_e >= 1.0 {
        return None;
    }
    Some((p_bar - p_e) / (1.0 - p_e))
}

pub fn labels_strategy(max_subjects: usize, max_raters: usize) -> impl Strategy<Value = Vec<Vec<bool>>> {
    (2..=max_subjects, 2..=max_raters)
        .prop_flat_map(|(s, r)| prop::collection::vec(prop::collection::vec(any::<bool>(), r), s))
}

/// Node count and undirected edge list without self loops or duplicates.
pub fn graph_strategy(max_nodes: usize) -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (1..=max_nodes).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        let len = pairs.len();
        (Just(n), prop::collection::vec(any::<bool>(), len)).prop_map(move |(n, keep)| {
            let edges = pairs.iter().zip(keep).filter(|(_, k)| *k).map(|(p, _)| *p).collect();
            (n, edges)
        })
    })
}

fn adjacency(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    adj
}

fn distances(adj: &[Vec<usize>], s: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; adj.len()];
    dist[s] = Some(0);
    let mut q = VecDeque::from([s]);
    while let Some(v) = q.pop_front() {
        for &w in &adj[v] {
            if dist[w].is_none() {
                dist[w] = Some(dist[v].unwrap() + 1);
                q.push_back(w);
            }
        }
    }
    dist
}

/// Every shortest path from `s` to `t`, as node sequences.
fn shortest_paths(adj: &[Vec<usize>], s: usize, t: usize) -> Vec<Vec<usize>> {
    let dist_s = distances(adj, s);
    let Some(d) = dist_s[t] else { return Vec::new() };
    let mut out = Vec::new();
    let mut stack = vec![vec![s]];
    while let Some(path) = stack.pop() {
        let last = *path.last().unwrap();
        if path.len() == d + 1 {
            if last == t {
                out.push(path);
            }
            continue;
        }
        for &w in &adj[last] {
            if dist_s[w] == Some(path.len()) {
                let mut next = path.clone();
                next.push(w);
                stack.push(next);
            }
        }
    }
    out
}

/// Betweenness by explicit enumeration of all shortest paths between every
/// unordered pair of nodes.
pub fn brute_betweenness(n: usize, edges: &[(usize, usize)]) -> Vec<f64> {
    let adj = adjacency(n, edges);
    let mut bc = vec![0.0; n];
    for s in 0..n {
        for t in s + 1..n {
            let paths = shortest_paths(&adj, s, t);
            if paths.is_empty() {
                continue;
            }
            let total = paths.len() as f64;
            for (v, score) in bc.iter_mut().enumerate() {
                if v == s || v == t {
                    continue;
                }
                let through = paths.iter().filter(|p| p.contains(&v)).count() as f64;
                *score += through / total;
            }
        }
    }
    bc
}

/// Author name of node `i` in graph-derived test data.
pub fn author(i: usize) -> String {
    format!("Author {i:02}")
}

const VOCAB: &[&str] = &["alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta", "iota", "kappa"];
const CONTROLLED: &[&str] = &["Social Policy", "labour market", "youth", "media research", "poverty"];

fn words(max: usize) -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(VOCAB), 0..=max).prop_map(|w| w.join(" "))
}

/// Small documents over a ten-word vocabulary.
pub fn record_strategy() -> impl Strategy<Value = (String, String, Vec<String>, Vec<String>, Option<usize>)> {
    (
        words(4),
        words(12),
        prop::collection::vec(prop::sample::select(CONTROLLED).prop_map(String::from), 0..3),
        prop::collection::vec((0..8usize).prop_map(author), 0..4),
        prop::option::of(0..4usize),
    )
}

pub fn corpus_strategy(max_docs: usize) -> impl Strategy<Value = Vec<DocumentRecord>> {
    prop::collection::vec(record_strategy(), 1..=max_docs).prop_map(|docs| {
        docs.into_iter()
            .enumerate()
            .map(|(i, (title, abstract_text, keywords, mut authors, issn))| {
                let mut seen = BTreeSet::new();
                authors.retain(|a| seen.insert(a.clone()));
                DocumentRecord {
                    doc_id: format!("d{i:03}"),
                    title,
                    abstract_text,
                    keywords,
                    authors,
                    issn: issn.map(|j| format!("1234-56{j:02}")),
                    journal: None,
                    year: 2000,
                }
            })
            .collect()
    })
}

pub fn vocab() -> &'static [&'static str] {
    VOCAB
}

/// A SOLR-labeled list over the given documents in the given order.
pub fn ranked(docs: &[DocumentRecord], order: &[usize]) -> RankedList {
    RankedList::from_scored(
        ServiceLabel::Solr,
        7,
        order.iter().enumerate().map(|(i, &d)| (docs[d].doc_id.clone(), 1.0 / (i + 1) as f64)),
    )
}
