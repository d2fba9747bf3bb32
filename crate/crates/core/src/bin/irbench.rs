use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};

use irbench::corpus::{self, load_corpus, Corpus};
use irbench::evalkit::{read_judgments, Pool, SubjectMode};
use irbench::index::{build_index, InvertedIndex};
use irbench::study_fixture;
use irbench::pipeline::{
    build_pools, evaluate_pools, pool_seed, run_pipeline, CampaignConfig, JudgmentSource, PipelineSettings, Retrieval,
    TopicRuns,
};
use irbench::query::{expand_query, parse_query, render_query};
use irbench::recommender::{train_model, AssociationModel};
use irbench::report::ReportBundle;
use irbench::rerank::{author_centrality_rerank_with, bradfordize_with, AuthorAggregate, BradfordOptions};
use irbench::run::{read_runs, write_run, RankedList, ServiceLabel};
use irbench::service::{self, Campaign};
use irbench::synthetic::{generate, AssessorScript, SyntheticOptions};

type DataResult<T = ()> = Result<T, Box<dyn std::error::Error>>;

#[derive(Parser)]
#[command(name = "irbench", version, about = "Search term recommendation, re-ranking and assessment-campaign evaluation")]
struct Cli {
    #[command(flatten)]
    knobs: Knobs,
    #[command(subcommand)]
    command: Command,
}

/// Overrides shared by the campaign commands.
#[derive(Args)]
struct Knobs {
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    depth: Option<usize>,
    #[arg(long = "expansion-n", global = true)]
    expansion_n: Option<usize>,
    #[arg(long = "kappa-threshold", global = true)]
    kappa_threshold: Option<f64>,
    #[arg(long = "overlap-threshold", global = true)]
    overlap_threshold: Option<f64>,
}

impl Knobs {
    fn apply(&self, s: &mut PipelineSettings) {
        s.seed = self.seed.unwrap_or(s.seed);
        s.depth = self.depth.unwrap_or(s.depth);
        s.expansion_n = self.expansion_n.unwrap_or(s.expansion_n);
        s.kappa_threshold = self.kappa_threshold.unwrap_or(s.kappa_threshold);
        s.overlap_threshold = self.overlap_threshold.unwrap_or(s.overlap_threshold);
    }

    fn settings(&self) -> PipelineSettings {
        let mut s = PipelineSettings::default();
        self.apply(&mut s);
        s
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Brad,
    Auth,
}

#[derive(Clone, Copy, ValueEnum)]
enum Aggregate {
    Max,
    Sum,
}

#[derive(Clone, Copy, ValueEnum)]
enum Subjects {
    ServiceSlots,
    Documents,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a JSONL corpus and write it back normalized.
    Ingest {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Build the inverted index of a corpus.
    Index {
        corpus: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Train the free-term/controlled-term association model.
    TrainStr {
        corpus: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Run a query. With --model the query is expanded first (STR run).
    Search {
        #[arg(long)]
        index: PathBuf,
        #[arg(short, long)]
        query: String,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        topic: u32,
        #[arg(long, default_value_t = 1000)]
        limit: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Re-rank a run file by journal productivity or author centrality.
    Rerank {
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        run: PathBuf,
        #[arg(long, value_enum)]
        method: Method,
        #[arg(long, value_enum, default_value = "max")]
        aggregate: Aggregate,
        #[arg(long)]
        keep_unidentified: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Pool run files per topic; optionally lay out a campaign directory.
    Pool {
        #[arg(required = true)]
        runs: Vec<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, requires = "corpus")]
        campaign: Option<PathBuf>,
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        topics: Option<PathBuf>,
    },
    /// Serve the assessment API of a campaign directory.
    Serve {
        #[arg(long)]
        campaign: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Directory with the static assessment UI.
        #[arg(long)]
        ui: Option<PathBuf>,
    },
    /// Compute agreement, precision and intersections from judgments.
    Evaluate {
        /// Campaign directory (pools and judgment log).
        #[arg(long, conflicts_with_all = ["pools", "judgments"])]
        campaign: Option<PathBuf>,
        #[arg(long, requires = "judgments")]
        pools: Option<PathBuf>,
        #[arg(long)]
        judgments: Option<PathBuf>,
        #[arg(long)]
        topics: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "service-slots")]
        subjects: Subjects,
        /// Also write the machine-readable report here.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Print a report: a saved JSON report or the published figures.
    Report {
        #[arg(long, conflicts_with = "study_fixture", required_unless_present = "study_fixture")]
        input: Option<PathBuf>,
        #[arg(long = "paper-fixture")]
        study_fixture: bool,
        #[arg(long)]
        json: bool,
    },
    /// Run the whole campaign from a config file or on the synthetic corpus.
    Run {
        #[arg(long, conflicts_with = "synthetic", required_unless_present = "synthetic")]
        config: Option<PathBuf>,
        #[arg(long)]
        synthetic: bool,
        /// Directory for corpus, runs, pools, judgments and reports.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn writer(path: Option<&Path>) -> DataResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_lists(lists: &[RankedList], out: Option<&Path>) -> DataResult {
    let mut w = writer(out)?;
    for l in lists {
        write_run(l, &mut w)?;
    }
    w.flush()?;
    Ok(())
}

fn load_runs(path: &Path) -> DataResult<Vec<RankedList>> {
    Ok(read_runs(BufReader::new(File::open(path).map_err(|e| format!("{}: {e}", path.display()))?))?)
}

fn load_pools(path: &Path) -> DataResult<Vec<Pool>> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

fn topics_or_bundled(path: Option<&Path>) -> DataResult<Vec<corpus::Topic>> {
    Ok(match path {
        Some(p) => corpus::load_topics(p)?,
        None => corpus::bundled_topics(),
    })
}

fn print_report(report: &ReportBundle, json: Option<&Path>) -> DataResult {
    print!("{}", report.render_text());
    if let Some(p) = json {
        fs::write(p, report.to_json())?;
    }
    Ok(())
}

fn save_outputs(dir: &Path, corpus: &Corpus, runs: &[TopicRuns], pools: &[Pool], judgments: &[irbench::evalkit::Judgment], report: &ReportBundle) -> DataResult {
    fs::create_dir_all(dir)?;
    let mut w = BufWriter::new(File::create(dir.join("corpus.jsonl"))?);
    corpus.write_to(&mut w)?;
    w.flush()?;
    let lists: Vec<RankedList> = runs.iter().flat_map(|t| t.runs.iter().cloned()).collect();
    write_lists(&lists, Some(&dir.join("runs.tsv")))?;
    let queries: BTreeMap<u32, (&str, &[String], &str)> =
        runs.iter().map(|t| (t.topic_id, (t.query.as_str(), t.expansion_terms.as_slice(), t.expanded_query.as_str()))).collect();
    fs::write(dir.join("queries.json"), serde_json::to_string_pretty(&queries)?)?;
    fs::write(dir.join("pools.json"), serde_json::to_string_pretty(pools)?)?;
    let mut w = BufWriter::new(File::create(dir.join("judgments.tsv"))?);
    irbench::evalkit::write_judgments(judgments, &mut w)?;
    w.flush()?;
    fs::write(dir.join("report.txt"), report.render_text())?;
    fs::write(dir.join("report.json"), report.to_json())?;
    Ok(())
}

fn execute(cli: Cli) -> DataResult {
    let knobs = &cli.knobs;
    match cli.command {
        Command::Ingest { input, output } => {
            let corpus = load_corpus(&input)?;
            for w in corpus.warnings() {
                eprintln!("warning: {w}");
            }
            let s = corpus.stats();
            eprintln!("{} documents, {} distinct terms", s.doc_count, s.vocab_size);
            if let Some(out) = output {
                let mut w = BufWriter::new(File::create(out)?);
                corpus.write_to(&mut w)?;
                w.flush()?;
            }
        }
        Command::Index { corpus, output } => {
            let corpus = load_corpus(corpus)?;
            let index = build_index(corpus.records());
            index.save(&output)?;
            eprintln!("indexed {} documents, {} terms", index.num_docs(), index.terms().count());
        }
        Command::TrainStr { corpus, output } => {
            let corpus = load_corpus(corpus)?;
            let model = train_model(corpus.records())?;
            model.save(&output)?;
            eprintln!("trained on {} documents, {} free terms", model.doc_count(), model.free_term_count());
        }
        Command::Search { index, query, model, topic, limit, output } => {
            let index = InvertedIndex::load(index)?;
            let mut ast = parse_query(&query)?;
            let mut service = ServiceLabel::Solr;
            if let Some(m) = model {
                let model = AssociationModel::load(m)?;
                let n = knobs.expansion_n.unwrap_or(irbench::recommender::DEFAULT_EXPANSION_TERMS);
                ast = expand_query(&ast, &model.recommend_terms(&ast, n));
                eprintln!("expanded: {}", render_query(&ast));
                service = ServiceLabel::Str;
            }
            let list = index.search(&ast, limit).with_topic(topic).with_service(service);
            write_lists(&[list], output.as_deref())?;
        }
        Command::Rerank { index, run, method, aggregate, keep_unidentified, output } => {
            let index = InvertedIndex::load(index)?;
            let agg = match aggregate {
                Aggregate::Max => AuthorAggregate::Max,
                Aggregate::Sum => AuthorAggregate::Sum,
            };
            let lists: Vec<RankedList> = load_runs(&run)?
                .iter()
                .map(|l| match method {
                    Method::Brad => bradfordize_with(l, &index, BradfordOptions { keep_unidentified }),
                    Method::Auth => author_centrality_rerank_with(l, &index, agg),
                })
                .collect();
            write_lists(&lists, output.as_deref())?;
        }
        Command::Pool { runs, output, campaign, corpus, topics } => {
            let settings = knobs.settings();
            let mut by_topic: BTreeMap<u32, Vec<RankedList>> = BTreeMap::new();
            for path in &runs {
                for l in load_runs(path)? {
                    by_topic.entry(l.topic_id).or_default().push(l);
                }
            }
            let pools = by_topic
                .into_iter()
                .map(|(t, lists)| irbench::evalkit::build_pool(&lists, settings.depth, pool_seed(settings.seed, t)))
                .collect::<Result<Vec<_>, _>>()?;
            for p in &pools {
                eprintln!("topic {}: {} pooled documents", p.topic_id, p.len());
            }
            let json = serde_json::to_string_pretty(&pools)?;
            match &output {
                Some(p) => fs::write(p, json)?,
                None if campaign.is_none() => println!("{json}"),
                None => {}
            }
            if let (Some(dir), Some(corpus)) = (campaign, corpus) {
                let corpus = load_corpus(corpus)?;
                Campaign::create_dir(&dir, &topics_or_bundled(topics.as_deref())?, &corpus, &pools)?;
                eprintln!("campaign written to {}", dir.display());
            }
        }
        Command::Serve { campaign, port, host, ui } => {
            let c = Arc::new(Campaign::open(&campaign)?);
            let addr: SocketAddr = format!("{host}:{port}").parse()?;
            let rt = tokio::runtime::Runtime::new()?;
            eprintln!("serving {} on http://{addr}", campaign.display());
            rt.block_on(service::serve(c, addr, ui))?;
        }
        Command::Evaluate { campaign, pools, judgments, topics, subjects, json } => {
            let mut settings = knobs.settings();
            settings.subject_mode = match subjects {
                Subjects::ServiceSlots => SubjectMode::ServiceSlots,
                Subjects::Documents => SubjectMode::Documents,
            };
            let (pools, judgments, topics) = match (campaign, pools, judgments) {
                (Some(dir), _, _) => {
                    let c = Campaign::open(&dir)?;
                    let pools = c.topics().iter().filter_map(|t| c.pool(t.topic_id).cloned()).collect();
                    (pools, c.export_judgments(), c.topics().to_vec())
                }
                (None, Some(p), Some(j)) => {
                    let judgments = read_judgments(BufReader::new(File::open(j)?))?;
                    (load_pools(&p)?, judgments, topics_or_bundled(topics.as_deref())?)
                }
                _ => return Err("evaluate needs --campaign or --pools with --judgments".into()),
            };
            let report = evaluate_pools(&pools, &judgments, &topics, &settings)?;
            print_report(&report, json.as_deref())?;
        }
        Command::Report { input, study_fixture: fixture, json } => {
            let report = if fixture {
                let s = knobs.settings();
                let titles = corpus::bundled_topics().into_iter().map(|t| (t.topic_id, t.title)).collect();
                ReportBundle::build(study_fixture::topic_metrics(), titles, s.kappa_threshold, s.overlap_threshold, None)?
            } else {
                let path = input.expect("clap enforces --input");
                serde_json::from_str(&fs::read_to_string(path)?)?
            };
            if json {
                println!("{}", report.to_json());
            } else {
                print!("{}", report.render_text());
            }
        }
        Command::Run { config, synthetic, out } => {
            let (corpus, topics, queries, settings, source) = if synthetic {
                let settings = knobs.settings();
                let c = generate(SyntheticOptions { seed: settings.seed, ..Default::default() });
                let script = AssessorScript::study_distribution(settings.seed);
                let corpus = Corpus::from_records(c.records)?;
                (corpus, c.topics, c.queries, settings, JudgmentSource::Scripted { script, truth: c.truth })
            } else {
                let cfg = CampaignConfig::load(config.expect("clap enforces --config"))?;
                let mut settings = cfg.settings.clone();
                knobs.apply(&mut settings);
                settings.validate()?;
                let corpus = load_corpus(&cfg.corpus)?;
                let topics = cfg.load_topics()?;
                let queries = cfg.topic_queries()?;
                let Some(judgments_path) = cfg.judgments.clone() else {
                    // nothing judged yet: retrieve, pool and lay out the campaign
                    let dir = out.ok_or("without a judgments file, --out must name the campaign directory to create")?;
                    let runs = Retrieval::build(&corpus)?.retrieve_all(&queries, &settings)?;
                    let pools = build_pools(&runs, settings.depth, settings.seed)?;
                    Campaign::create_dir(&dir, &topics, &corpus, &pools)?;
                    let lists: Vec<RankedList> = runs.iter().flat_map(|t| t.runs.iter().cloned()).collect();
                    write_lists(&lists, Some(&dir.join("runs.tsv")))?;
                    eprintln!("campaign written to {}; collect judgments with `irbench serve --campaign {}`", dir.display(), dir.display());
                    return Ok(());
                };
                let judgments = read_judgments(BufReader::new(File::open(judgments_path)?))?;
                (corpus, topics, queries, settings, JudgmentSource::Provided(judgments))
            };
            let output = run_pipeline(&corpus, &topics, &queries, &settings, source)?;
            if let Some(dir) = out {
                save_outputs(&dir, &corpus, &output.runs, &output.pools, &output.judgments, &output.report)?;
                eprintln!("outputs written to {}", dir.display());
            }
            print!("{}", output.report.render_text());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
