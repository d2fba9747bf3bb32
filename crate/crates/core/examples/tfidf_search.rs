//! Boolean tf-idf retrieval over a small generated corpus.
//!
//! cargo run --example tfidf_search -- 'burnout* AND (nurs* OR teach*)'

use irbench::corpus::Corpus;
use irbench::index::build_index;
use irbench::query::{parse_query, render_query};
use irbench::synthetic::{generate, SyntheticOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let query = std::env::args().nth(1).unwrap_or_else(|| "povert* AND german*".into());
    let corpus = Corpus::from_records(generate(SyntheticOptions::default()).records)?;
    let index = build_index(corpus.records());
    println!("{} documents, {} distinct terms", index.num_docs(), index.terms().count());

    let ast = parse_query(&query)?;
    println!("query: {}", render_query(&ast));
    let hits = index.search(&ast, 10);
    for e in &hits.entries {
        let title = corpus.get(&e.doc_id).map_or("", |d| d.title.as_str());
        println!("{:>3}  {:<10} {:>7.3}  {}", e.rank, e.doc_id, e.score, title);
    }

    let matches = index.search(&ast, usize::MAX);
    let all: Vec<&str> = matches.doc_ids().collect();
    println!("\n{} matches; journals among them:", all.len());
    for (issn, n) in index.facet_counts(&all)? {
        println!("  {issn}  {n}");
    }
    Ok(())
}
