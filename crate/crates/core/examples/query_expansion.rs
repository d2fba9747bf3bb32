//! Search term recommendation: free terms of a query are mapped to the
//! controlled vocabulary by co-occurrence, and the best terms are ORed into
//! the query.
//!
//! cargo run --example query_expansion -- 'suicid* AND (youth OR young)' 4

use irbench::corpus::Corpus;
use irbench::index::build_index;
use irbench::query::{expand_query, parse_query, render_query};
use irbench::recommender::train_model;
use irbench::synthetic::{generate, SyntheticOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let query = args.next().unwrap_or_else(|| "suicid* AND (youth OR young)".into());
    let n: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(4);

    let corpus = Corpus::from_records(generate(SyntheticOptions::default()).records)?;
    let model = train_model(corpus.records())?;
    let index = build_index(corpus.records());
    let ast = parse_query(&query)?;

    println!("free terms seen by the model: {:?}", model.query_free_terms(&ast));
    println!("controlled term                     score");
    for (term, score) in model.ranked_recommendations(&ast).iter().take(8) {
        println!("{term:<32} {score:>8.2}");
    }

    let terms = model.recommend_terms(&ast, n);
    let expanded = expand_query(&ast, &terms);
    println!("\noriginal: {}\nexpanded: {}", render_query(&ast), render_query(&expanded));
    let before = index.search(&ast, usize::MAX).len();
    let after = index.search(&expanded, usize::MAX).len();
    println!("matches: {before} -> {after}");
    Ok(())
}
