//! Author-centrality re-ranking: documents are ordered by the betweenness of
//! their authors in the co-authorship graph of the result set.

use irbench::corpus::Corpus;
use irbench::index::build_index;
use irbench::query::parse_query;
use irbench::rerank::{author_centrality_rerank_with, betweenness, build_coauthor_graph, AuthorAggregate};
use irbench::synthetic::{generate, SyntheticOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let query = std::env::args().nth(1).unwrap_or_else(|| "povert* AND german*".into());
    let corpus = Corpus::from_records(generate(SyntheticOptions::default()).records)?;
    let index = build_index(corpus.records());
    let base = index.search(&parse_query(&query)?, 1000).with_topic(166);

    let docs: Vec<_> = base.doc_ids().filter_map(|d| corpus.get(d).cloned()).collect();
    let graph = build_coauthor_graph(&docs);
    println!("co-authorship graph: {} authors, {} edges", graph.node_count(), graph.edge_count());

    let scores = betweenness(&graph);
    let mut top: Vec<(&str, f64)> = scores.iter().collect();
    top.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(b.0)));
    for (name, s) in top.iter().take(5) {
        println!("  {name:<24} {s:>8.1}");
    }

    for agg in [AuthorAggregate::Max, AuthorAggregate::Sum] {
        let auth = author_centrality_rerank_with(&base, &corpus, agg);
        let head: Vec<String> = auth.entries.iter().take(5).map(|e| format!("{} ({:.1})", e.doc_id, e.score)).collect();
        println!("{agg:?}: {}", head.join(", "));
    }
    Ok(())
}
