//! Journal-productivity re-ranking. Documents from journals that contribute
//! most to the result set move up; within a journal the original order holds.

use std::collections::BTreeMap;

use irbench::corpus::Corpus;
use irbench::index::build_index;
use irbench::query::parse_query;
use irbench::rerank::{bradfordize, bradfordize_with, BradfordOptions};
use irbench::synthetic::{generate, SyntheticOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let query = std::env::args().nth(1).unwrap_or_else(|| "burnout*".into());
    let corpus = Corpus::from_records(generate(SyntheticOptions::default()).records)?;
    let index = build_index(corpus.records());
    let base = index.search(&parse_query(&query)?, 1000).with_topic(93);

    let brad = bradfordize(&base, &corpus);
    println!("{} results, {} with an ISSN", base.len(), brad.len());
    println!("rank  base  doc         issn       journal size");
    let base_rank: BTreeMap<&str, usize> = base.entries.iter().map(|e| (e.doc_id.as_str(), e.rank)).collect();
    for e in brad.entries.iter().take(12) {
        let issn = corpus.get(&e.doc_id).and_then(|d| d.issn.as_deref()).unwrap_or("-");
        println!("{:>4}  {:>4}  {:<10}  {issn}  {:>4}", e.rank, base_rank[e.doc_id.as_str()], e.doc_id, e.score);
    }

    let kept = bradfordize_with(&base, &corpus, BradfordOptions { keep_unidentified: true });
    println!("\nkeeping unidentified documents at the tail: {} entries", kept.len());
    Ok(())
}
