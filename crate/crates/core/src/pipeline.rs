//! End-to-end campaign: retrieval with the four services, pooling,
//! judging and evaluation into a [`ReportBundle`].

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, CorpusError, Topic};
use crate::evalkit::{
    build_pool, evaluate_topic, intersection_matrix, EvalError, Judgment, Pool, RelevantSets, SubjectMode,
    DEFAULT_KAPPA_THRESHOLD, DEFAULT_OVERLAP_THRESHOLD, DEFAULT_POOL_DEPTH,
};
use crate::index::{build_index, InvertedIndex};
use crate::query::{expand_query, parse_query, render_query, QueryError};
use crate::recommender::{train_model, AssociationModel, RecommenderError, DEFAULT_EXPANSION_TERMS};
use crate::report::ReportBundle;
use crate::rerank::{author_centrality_rerank_with, bradfordize_with, AuthorAggregate, BradfordOptions};
use crate::run::{RankedList, ServiceLabel};
use crate::service::{Campaign, ServiceError};
use crate::synthetic::{run_scripted_sessions, AssessorScript};

pub const DEFAULT_SEED: u64 = 2010;
pub const DEFAULT_CANDIDATES: usize = 1000;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("topic {topic}: query {query:?}: {source}")]
    Query { topic: u32, query: String, source: QueryError },
    #[error(transparent)]
    Recommender(#[from] RecommenderError),
    #[error("topic {topic}: {source}")]
    Eval { topic: u32, source: EvalError },
    #[error(transparent)]
    Report(EvalError),
    #[error(transparent)]
    Service(#[from] ServiceError),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

fn default_depth() -> usize {
    DEFAULT_POOL_DEPTH
}
fn default_expansion() -> usize {
    DEFAULT_EXPANSION_TERMS
}
fn default_seed() -> u64 {
    DEFAULT_SEED
}
fn default_kappa() -> f64 {
    DEFAULT_KAPPA_THRESHOLD
}
fn default_overlap() -> f64 {
    DEFAULT_OVERLAP_THRESHOLD
}
fn default_candidates() -> usize {
    DEFAULT_CANDIDATES
}

/// Numeric knobs of a campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineSettings {
    #[serde(default = "default_depth")]
    pub depth: usize,
    #[serde(default = "default_expansion")]
    pub expansion_n: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_kappa")]
    pub kappa_threshold: f64,
    #[serde(default = "default_overlap")]
    pub overlap_threshold: f64,
    /// Result list length of the SOLR and STR searches; the re-rankers work on
    /// the full SOLR list.
    #[serde(default = "default_candidates")]
    pub candidates: usize,
    #[serde(default)]
    pub author_aggregate: AuthorAggregate,
    #[serde(default)]
    pub keep_unidentified: bool,
    #[serde(default)]
    pub subject_mode: SubjectMode,
}

impl Default for PipelineSettings {
    fn default() -> Self {
        PipelineSettings {
            depth: DEFAULT_POOL_DEPTH,
            expansion_n: DEFAULT_EXPANSION_TERMS,
            seed: DEFAULT_SEED,
            kappa_threshold: DEFAULT_KAPPA_THRESHOLD,
            overlap_threshold: DEFAULT_OVERLAP_THRESHOLD,
            candidates: DEFAULT_CANDIDATES,
            author_aggregate: AuthorAggregate::Max,
            keep_unidentified: false,
            subject_mode: SubjectMode::ServiceSlots,
        }
    }
}

impl PipelineSettings {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.depth == 0 {
            return Err(PipelineError::Config("depth must be at least 1".into()));
        }
        if self.candidates < self.depth {
            return Err(PipelineError::Config("candidates must be at least the pool depth".into()));
        }
        for (name, t) in [("kappa_threshold", self.kappa_threshold), ("overlap_threshold", self.overlap_threshold)] {
            if !(0.0..=1.0).contains(&t) {
                return Err(PipelineError::Config(format!("{name} {t} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

/// Campaign configuration file (TOML). Relative paths resolve against the
/// file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub corpus: PathBuf,
    /// Topic file; the bundled topics when absent.
    #[serde(default)]
    pub topics: Option<PathBuf>,
    /// Judgment file to evaluate instead of collecting judgments.
    #[serde(default)]
    pub judgments: Option<PathBuf>,
    /// Query per topic id.
    pub queries: BTreeMap<String, String>,
    #[serde(flatten)]
    pub settings: PipelineSettings,
}

impl CampaignConfig {
    pub fn from_toml(text: &str, base: &Path) -> Result<Self, PipelineError> {
        let mut cfg: CampaignConfig = toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))?;
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        resolve(&mut cfg.corpus);
        cfg.topics.as_mut().map(resolve);
        cfg.judgments.as_mut().map(resolve);
        cfg.settings.validate()?;
        cfg.topic_queries()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, PipelineError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        Self::from_toml(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Queries keyed by numeric topic id.
    pub fn topic_queries(&self) -> Result<BTreeMap<u32, String>, PipelineError> {
        self.queries
            .iter()
            .map(|(k, q)| {
                let id = k.trim().parse().map_err(|_| PipelineError::Config(format!("query key {k:?} is not a topic id")))?;
                Ok((id, q.clone()))
            })
            .collect()
    }

    pub fn load_topics(&self) -> Result<Vec<Topic>, PipelineError> {
        Ok(match &self.topics {
            Some(p) => crate::corpus::load_topics(p)?,
            None => crate::corpus::bundled_topics(),
        })
    }
}

/// Retrieval output of one topic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicRuns {
    pub topic_id: u32,
    pub query: String,
    pub expansion_terms: Vec<String>,
    pub expanded_query: String,
    /// One list per service in label order.
    pub runs: Vec<RankedList>,
}

impl TopicRuns {
    pub fn run(&self, service: ServiceLabel) -> Option<&RankedList> {
        self.runs.iter().find(|r| r.service == service)
    }
}

/// Index and association model shared by every topic.
pub struct Retrieval {
    pub index: InvertedIndex,
    pub model: AssociationModel,
}

impl Retrieval {
    pub fn build(corpus: &Corpus) -> Result<Self, PipelineError> {
        Ok(Retrieval { index: build_index(corpus.records()), model: train_model(corpus.records())? })
    }

    /// Runs the four services for one topic.
    pub fn retrieve(&self, topic_id: u32, query: &str, settings: &PipelineSettings) -> Result<TopicRuns, PipelineError> {
        let ast = parse_query(query).map_err(|source| PipelineError::Query { topic: topic_id, query: query.into(), source })?;
        let solr = self.index.search(&ast, settings.candidates).with_topic(topic_id);
        let terms = self.model.recommend_terms(&ast, settings.expansion_n);
        let expanded = expand_query(&ast, &terms);
        let str_run = self.index.search(&expanded, settings.candidates).with_topic(topic_id).with_service(ServiceLabel::Str);
        let brad = bradfordize_with(&solr, &self.index, BradfordOptions { keep_unidentified: settings.keep_unidentified });
        let auth = author_centrality_rerank_with(&solr, &self.index, settings.author_aggregate);
        let mut runs = vec![auth, brad, solr, str_run];
        runs.sort_by_key(|r| r.service);
        Ok(TopicRuns { topic_id, query: query.into(), expansion_terms: terms, expanded_query: render_query(&expanded), runs })
    }

    /// Retrieves all topics, one thread per topic. Output is in topic order.
    pub fn retrieve_all(&self, queries: &BTreeMap<u32, String>, settings: &PipelineSettings) -> Result<Vec<TopicRuns>, PipelineError> {
        std::thread::scope(|s| {
            let handles: Vec<_> = queries.iter().map(|(&t, q)| s.spawn(move || self.retrieve(t, q, settings))).collect();
            handles.into_iter().map(|h| h.join().expect("retrieval thread panicked")).collect()
        })
    }
}

/// Shuffle seed of one topic's pool.
pub fn pool_seed(seed: u64, topic_id: u32) -> u64 {
    seed ^ u64::from(topic_id).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

pub fn build_pools(runs: &[TopicRuns], depth: usize, seed: u64) -> Result<Vec<Pool>, PipelineError> {
    runs.iter()
        .map(|t| build_pool(&t.runs, depth, pool_seed(seed, t.topic_id)).map_err(|source| PipelineError::Eval { topic: t.topic_id, source }))
        .collect()
}

/// Evaluates every pool that received judgments and assembles the report.
pub fn evaluate_pools(
    pools: &[Pool],
    judgments: &[Judgment],
    topics: &[Topic],
    settings: &PipelineSettings,
) -> Result<ReportBundle, PipelineError> {
    let judged: BTreeSet<u32> = judgments.iter().map(|j| j.topic_id).collect();
    let mut metrics = Vec::new();
    let mut sets = RelevantSets::new();
    for pool in pools.iter().filter(|p| judged.contains(&p.topic_id)) {
        let eval = evaluate_topic(pool, judgments, settings.subject_mode)
            .map_err(|source| PipelineError::Eval { topic: pool.topic_id, source })?;
        for (s, docs) in eval.relevant {
            sets.insert((pool.topic_id, s), docs);
        }
        metrics.push(eval.metrics);
    }
    if metrics.is_empty() {
        return Err(PipelineError::Config("no judged topic to evaluate".into()));
    }
    let titles = topics.iter().map(|t| (t.topic_id, t.title.clone())).collect();
    ReportBundle::build(metrics, titles, settings.kappa_threshold, settings.overlap_threshold, Some(intersection_matrix(&sets)))
        .map_err(PipelineError::Report)
}

pub enum JudgmentSource {
    /// Judgments collected elsewhere.
    Provided(Vec<Judgment>),
    /// Scripted assessors judging through an in-memory campaign.
    Scripted { script: AssessorScript, truth: BTreeMap<u32, BTreeSet<String>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineOutput {
    pub runs: Vec<TopicRuns>,
    pub pools: Vec<Pool>,
    pub judgments: Vec<Judgment>,
    pub report: ReportBundle,
}

/// Runs the whole campaign. The report is computed from the exported
/// judgments, exactly as a later `evaluate` on that export would.
pub fn run_pipeline(
    corpus: &Corpus,
    topics: &[Topic],
    queries: &BTreeMap<u32, String>,
    settings: &PipelineSettings,
    source: JudgmentSource,
) -> Result<PipelineOutput, PipelineError> {
    settings.validate()?;
    if let Some(t) = queries.keys().find(|t| !topics.iter().any(|x| x.topic_id == **t)) {
        return Err(PipelineError::Config(format!("query for unknown topic {t}")));
    }
    let retrieval = Retrieval::build(corpus)?;
    let runs = retrieval.retrieve_all(queries, settings)?;
    let pools = build_pools(&runs, settings.depth, settings.seed)?;
    let judgments = match source {
        JudgmentSource::Provided(j) => j,
        JudgmentSource::Scripted { script, truth } => {
            // logical clock so exported timestamps are reproducible
            let tick = std::sync::atomic::AtomicU64::new(1_262_304_000);
            let campaign = Campaign::in_memory(topics.to_vec(), corpus.clone(), pools.clone())?
                .with_clock(move || tick.fetch_add(1, std::sync::atomic::Ordering::Relaxed));
            run_scripted_sessions(&campaign, &truth, &script)?;
            campaign.export_judgments()
        }
    };
    let report = evaluate_pools(&pools, &judgments, topics, settings)?;
    Ok(PipelineOutput { runs, pools, judgments, report })
}
