//! Pooling, judgment aggregation, inter-rater agreement, precision and
//! result-set intersection analysis.

mod agreement;
mod intersection;
mod judgments;
mod pool;
mod precision;

use std::io;

use thiserror::Error;

pub use agreement::{
    complete_submatrix, fleiss_kappa, fleiss_kappa_from_counts, group_overlap, interpret_kappa,
    mean_pairwise_overlap, pairwise_overlap, thresholded_agreed_count, thresholded_mean_overlap, JudgmentMatrix,
    KappaBand, Overlap,
};
pub use intersection::{intersection_matrix, IntersectionMatrix, PairCount, RelevantSets};
pub use judgments::{read_judgments, upsert_judgments, write_judgments, Judgment, Relevance};
pub use pool::{build_pool, Pool, PoolEntry, SubjectMode};
pub use precision::{
    evaluate_topic, filtered_average_precision, precision, relevant_set, service_counts, JudgmentCounts,
    TopicEvaluation, TopicFilter, TopicMetrics,
};

pub const DEFAULT_POOL_DEPTH: usize = 10;
pub const DEFAULT_KAPPA_THRESHOLD: f64 = 0.40;
pub const DEFAULT_OVERLAP_THRESHOLD: f64 = 0.35;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("runs belong to different topics ({0} and {1})")]
    MismatchedTopics(u32, u32),
    #[error("service {0} contributes more than one run")]
    DuplicateService(crate::run::ServiceLabel),
    #[error("no runs to pool")]
    NoRuns,
    #[error("pool depth must be at least 1")]
    InvalidDepth,
    #[error("judgment matrix is incomplete; use complete_submatrix first")]
    IncompleteMatrix,
    #[error("at least two raters are required (found {0})")]
    TooFewRaters(usize),
    #[error("at least two subjects are required (found {0})")]
    TooFewSubjects(usize),
    #[error("topic {topic}: insufficient raters ({complete} complete)")]
    InsufficientRaters { topic: u32, complete: usize },
    #[error("threshold {0} outside (0, 1]")]
    InvalidThreshold(f64),
    #[error("empty topic set after filtering")]
    EmptyAfterFilter,
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("judgment file line {line}: {message}")]
    Parse { line: usize, message: String },
}
