//! The whole campaign on generated data: retrieval with four services,
//! pooling, scripted assessors judging through the assessment service, and
//! the final report.
//!
//! cargo run --example synthetic_campaign -- 2010

use irbench::corpus::Corpus;
use irbench::pipeline::{run_pipeline, JudgmentSource, PipelineSettings};
use irbench::synthetic::{generate, AssessorScript, SyntheticOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed: u64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(2010);
    let c = generate(SyntheticOptions { seed, ..Default::default() });
    let corpus = Corpus::from_records(c.records)?;
    let settings = PipelineSettings { seed, ..Default::default() };
    let source = JudgmentSource::Scripted { script: AssessorScript::study_distribution(seed), truth: c.truth };
    let out = run_pipeline(&corpus, &c.topics, &c.queries, &settings, source)?;

    for t in &out.runs {
        println!("{:>4}  {}  ->  {}", t.topic_id, t.query, t.expanded_query);
    }
    let sizes: Vec<String> = out.pools.iter().map(|p| format!("{}:{}", p.topic_id, p.len())).collect();
    println!("pool sizes {}\n{} judgments\n", sizes.join(" "), out.judgments.len());
    print!("{}", out.report.render_text());
    Ok(())
}
