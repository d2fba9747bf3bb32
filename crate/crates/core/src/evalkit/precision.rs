use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::agreement::{complete_submatrix, fleiss_kappa, interpret_kappa, thresholded_mean_overlap, JudgmentMatrix, KappaBand};
use super::judgments::{Judgment, Relevance};
use super::pool::{Pool, SubjectMode};
use super::EvalError;
use crate::run::ServiceLabel;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgmentCounts {
    pub relevant: u64,
    pub not_relevant: u64,
}

impl JudgmentCounts {
    pub fn total(&self) -> u64 {
        self.relevant + self.not_relevant
    }

    /// Relevant share of the judgments; `None` when nothing was judged.
    pub fn precision(&self) -> Option<f64> {
        match self.total() {
            0 => None,
            t => Some(self.relevant as f64 / t as f64),
        }
    }

    fn add(&mut self, label: Relevance) {
        match label {
            Relevance::Relevant => self.relevant += 1,
            Relevance::NotRelevant => self.not_relevant += 1,
        }
    }
}

/// Judgment counts per service. A judgment on a document returned by
/// several services counts once for each of them.
pub fn service_counts(judgments: &[Judgment], pool: &Pool) -> BTreeMap<ServiceLabel, JudgmentCounts> {
    let mut counts: BTreeMap<ServiceLabel, JudgmentCounts> =
        pool.service_docs.keys().map(|&s| (s, JudgmentCounts::default())).collect();
    let credited: BTreeMap<&str, &BTreeSet<ServiceLabel>> =
        pool.entries.iter().map(|e| (e.doc_id.as_str(), &e.services)).collect();
    for j in judgments.iter().filter(|j| j.topic_id == pool.topic_id) {
        if let Some(services) = credited.get(j.doc_id.as_str()) {
            for s in *services {
                counts.entry(*s).or_default().add(j.label);
            }
        }
    }
    counts
}

/// Relevant judgments over all judgments on the service's pooled documents,
/// across every assessor of the topic.
pub fn precision(judgments: &[Judgment], service: ServiceLabel, pool: &Pool) -> Option<f64> {
    service_counts(judgments, pool).get(&service).and_then(JudgmentCounts::precision)
}

/// Pooled documents of `service` judged relevant by a strict majority of the
/// matrix's raters (ties count as not relevant).
pub fn relevant_set(matrix: &JudgmentMatrix, service: ServiceLabel, pool: &Pool) -> BTreeSet<String> {
    let counts = matrix.category_counts();
    let mut by_doc: BTreeMap<&str, [usize; 2]> = BTreeMap::new();
    for (s, c) in matrix.subjects.iter().zip(counts) {
        by_doc.entry(s.as_str()).or_insert(c);
    }
    pool.docs_for(service)
        .iter()
        .filter(|d| by_doc.get(d.as_str()).is_some_and(|[rel, non]| rel > non))
        .cloned()
        .collect()
}

/// Per-topic agreement and precision figures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicMetrics {
    pub topic_id: u32,
    /// Raters in the complete matrix (n).
    pub raters: usize,
    /// Subjects in the matrix (N).
    pub subjects: usize,
    /// Categories (k).
    pub categories: usize,
    pub kappa: Option<f64>,
    pub band: Option<KappaBand>,
    /// Thresholded mean overlap at 0.8.
    pub overlap_08: f64,
    /// Thresholded mean overlap at 1.0 (unanimous).
    pub overlap_10: f64,
    pub counts: BTreeMap<ServiceLabel, JudgmentCounts>,
    pub precision: BTreeMap<ServiceLabel, f64>,
}

impl TopicMetrics {
    pub fn with_counts(mut self, counts: BTreeMap<ServiceLabel, JudgmentCounts>) -> Self {
        self.precision = counts.iter().filter_map(|(s, c)| c.precision().map(|p| (*s, p))).collect();
        self.counts = counts;
        self
    }
}

/// Topic selection before averaging precision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "threshold")]
pub enum TopicFilter {
    All,
    /// Keep topics with a defined kappa ≥ threshold.
    KappaAtLeast(f64),
    /// Keep topics whose unanimous overlap is ≥ threshold.
    OverlapAtLeast(f64),
}

impl TopicFilter {
    pub fn keeps(&self, m: &TopicMetrics) -> bool {
        match *self {
            TopicFilter::All => true,
            TopicFilter::KappaAtLeast(t) => m.kappa.is_some_and(|k| k >= t),
            TopicFilter::OverlapAtLeast(t) => m.overlap_10 >= t,
        }
    }
}

/// Mean per-topic precision of each service over the topics the filter keeps.
pub fn filtered_average_precision(
    metrics: &[TopicMetrics],
    filter: TopicFilter,
) -> Result<BTreeMap<ServiceLabel, f64>, EvalError> {
    let kept: Vec<&TopicMetrics> = metrics.iter().filter(|m| filter.keeps(m)).collect();
    if kept.is_empty() {
        return Err(EvalError::EmptyAfterFilter);
    }
    let mut sums: BTreeMap<ServiceLabel, (f64, usize)> = BTreeMap::new();
    for m in kept {
        for (s, p) in &m.precision {
            let e = sums.entry(*s).or_default();
            e.0 += p;
            e.1 += 1;
        }
    }
    Ok(sums.into_iter().map(|(s, (sum, n))| (s, sum / n as f64)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicEvaluation {
    pub metrics: TopicMetrics,
    pub matrix: JudgmentMatrix,
    pub relevant: BTreeMap<ServiceLabel, BTreeSet<String>>,
}

/// Runs the whole per-topic evaluation: completes the matrix, computes kappa
/// and the two thresholded overlaps, per-service precision, and the
/// majority-relevant set of every service.
pub fn evaluate_topic(pool: &Pool, judgments: &[Judgment], mode: SubjectMode) -> Result<TopicEvaluation, EvalError> {
    let subjects = pool.subjects(mode);
    let matrix = complete_submatrix(judgments, pool.topic_id, &subjects)?;
    let kappa = fleiss_kappa(&matrix)?;
    let metrics = TopicMetrics {
        topic_id: pool.topic_id,
        raters: matrix.n_raters(),
        subjects: matrix.n_subjects(),
        categories: 2,
        kappa,
        band: kappa.map(interpret_kappa),
        overlap_08: thresholded_mean_overlap(&matrix, 0.8)?,
        overlap_10: thresholded_mean_overlap(&matrix, 1.0)?,
        counts: BTreeMap::new(),
        precision: BTreeMap::new(),
    }
    .with_counts(service_counts(judgments, pool));
    let relevant = pool.service_docs.keys().map(|&s| (s, relevant_set(&matrix, s, pool))).collect();
    Ok(TopicEvaluation { metrics, matrix, relevant })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evalkit::build_pool;
    use crate::run::RankedList;
    use Relevance::{NotRelevant as N, Relevant as R};

    fn pool() -> Pool {
        let runs = vec![
            RankedList::from_scored(ServiceLabel::Solr, 5, [("a".to_string(), 1.0), ("b".to_string(), 0.5)]),
            RankedList::from_scored(ServiceLabel::Str, 5, [("b".to_string(), 1.0), ("c".to_string(), 0.5)]),
        ];
        build_pool(&runs, 10, 0).unwrap()
    }

    #[test]
    fn shared_documents_count_for_each_service() {
        let js = vec![
            Judgment::new("x", 5, "a", R),
            Judgment::new("x", 5, "b", N),
            Judgment::new("x", 5, "c", R),
            Judgment::new("y", 5, "b", R),
            Judgment::new("y", 6, "a", N),
        ];
        let counts = service_counts(&js, &pool());
        assert_eq!(counts[&ServiceLabel::Solr], JudgmentCounts { relevant: 2, not_relevant: 1 });
        assert_eq!(counts[&ServiceLabel::Str], JudgmentCounts { relevant: 2, not_relevant: 1 });
        assert_eq!(precision(&js, ServiceLabel::Solr, &pool()), Some(2.0 / 3.0));
        assert_eq!(precision(&js, ServiceLabel::Brad, &pool()), None);
    }

    #[test]
    fn count_precision() {
        assert_eq!(JudgmentCounts { relevant: 72, not_relevant: 28 }.precision(), Some(0.72));
        assert_eq!(JudgmentCounts { relevant: 9, not_relevant: 51 }.precision(), Some(0.15));
        assert_eq!(JudgmentCounts { relevant: 0, not_relevant: 10 }.precision(), Some(0.0));
        assert_eq!(JudgmentCounts::default().precision(), None);
    }

    #[test]
    fn majority_relevance_with_tie_rule() {
        let p = pool();
        let js = vec![
            Judgment::new("x", 5, "a", R),
            Judgment::new("y", 5, "a", R),
            Judgment::new("x", 5, "b", R),
            Judgment::new("y", 5, "b", N),
            Judgment::new("x", 5, "c", R),
            Judgment::new("y", 5, "c", R),
        ];
        let m = complete_submatrix(&js, 5, &p.subjects(SubjectMode::Documents)).unwrap();
        assert_eq!(relevant_set(&m, ServiceLabel::Solr, &p), ["a".to_string()].into());
        assert_eq!(relevant_set(&m, ServiceLabel::Str, &p), ["c".to_string()].into());
    }

    fn metrics(topic: u32, kappa: f64, overlap: f64, prec: f64) -> TopicMetrics {
        TopicMetrics {
            topic_id: topic,
            raters: 2,
            subjects: 40,
            categories: 2,
            kappa: Some(kappa),
            band: Some(interpret_kappa(kappa)),
            overlap_08: overlap,
            overlap_10: overlap,
            counts: BTreeMap::new(),
            precision: [(ServiceLabel::Solr, prec)].into(),
        }
    }

    #[test]
    fn filters() {
        let ms = vec![metrics(1, 0.5, 0.5, 0.6), metrics(2, 0.3, 0.35, 0.2), metrics(3, 0.45, 0.1, 0.4)];
        assert!((filtered_average_precision(&ms, TopicFilter::All).unwrap()[&ServiceLabel::Solr] - 0.4).abs() < 1e-12);
        assert!((filtered_average_precision(&ms, TopicFilter::KappaAtLeast(0.4)).unwrap()[&ServiceLabel::Solr] - 0.5).abs() < 1e-12);
        // 0.35 sits exactly on the threshold and is kept
        assert!((filtered_average_precision(&ms, TopicFilter::OverlapAtLeast(0.35)).unwrap()[&ServiceLabel::Solr] - 0.4).abs() < 1e-12);
        assert!(matches!(filtered_average_precision(&ms, TopicFilter::KappaAtLeast(0.9)), Err(EvalError::EmptyAfterFilter)));
        assert_eq!(filtered_average_precision(&ms[..1], TopicFilter::All).unwrap()[&ServiceLabel::Solr], 0.6);
    }
}
