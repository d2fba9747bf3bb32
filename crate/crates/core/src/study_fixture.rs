//! Published per-topic figures of the student assessment study, bundled
//! for report reproduction.
//!
//! `agreement.tsv` holds the agreement figures (raters, subjects, categories,
//! kappa, overlap at 0.8 and 1.0); `precision_counts.tsv` holds the per-service
//! judgment counts, printed precisions and printed averages. Service
//! columns are in `AUTH BRAD SOLR STR` order.

use std::collections::BTreeMap;

use crate::evalkit::{interpret_kappa, JudgmentCounts, TopicMetrics};
use crate::run::ServiceLabel;

pub const AGREEMENT_TSV: &str = include_str!("../fixtures/agreement.tsv");
pub const PRECISION_COUNTS_TSV: &str = include_str!("../fixtures/precision_counts.tsv");

#[derive(Debug, Clone, PartialEq)]
pub struct AgreementRow {
    pub topic_id: u32,
    pub raters: usize,
    pub subjects: usize,
    pub categories: usize,
    pub kappa: f64,
    pub overlap_08: f64,
    pub overlap_10: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JudgmentRow {
    pub topic_id: u32,
    pub counts: BTreeMap<ServiceLabel, JudgmentCounts>,
    pub printed_precision: BTreeMap<ServiceLabel, f64>,
}

/// The three printed average rows of the precision table.
#[derive(Debug, Clone, PartialEq)]
pub struct PrintedAverages {
    pub unfiltered: BTreeMap<ServiceLabel, f64>,
    pub kappa_filtered: BTreeMap<ServiceLabel, f64>,
    pub overlap_filtered: BTreeMap<ServiceLabel, f64>,
}

fn data_lines(tsv: &str) -> impl Iterator<Item = Vec<&str>> {
    tsv.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.split_whitespace().collect())
}

fn by_service<T: Copy>(values: &[T]) -> BTreeMap<ServiceLabel, T> {
    ServiceLabel::ALL.iter().copied().zip(values.iter().copied()).collect()
}

fn num<T: std::str::FromStr>(s: &str) -> T {
    s.parse().unwrap_or_else(|_| panic!("bundled fixture holds a malformed number {s:?}"))
}

pub fn agreement_table() -> Vec<AgreementRow> {
    data_lines(AGREEMENT_TSV)
        .filter(|f| f[0] != "avg")
        .map(|f| AgreementRow {
            topic_id: num(f[0]),
            raters: num(f[1]),
            subjects: num(f[2]),
            categories: num(f[3]),
            kappa: num(f[4]),
            overlap_08: num(f[5]),
            overlap_10: num(f[6]),
        })
        .collect()
}

/// Printed `(kappa, overlap ≥ 0.8, overlap = 1)` averages.
pub fn agreement_averages() -> (f64, f64, f64) {
    let f = data_lines(AGREEMENT_TSV).find(|f| f[0] == "avg").expect("avg row");
    (num(f[4]), num(f[5]), num(f[6]))
}

pub fn judgment_table() -> Vec<JudgmentRow> {
    data_lines(PRECISION_COUNTS_TSV)
        .filter(|f| !f[0].starts_with("avg"))
        .map(|f| {
            let non: Vec<u64> = f[1..5].iter().map(|s| num(s)).collect();
            let rel: Vec<u64> = f[5..9].iter().map(|s| num(s)).collect();
            let prec: Vec<f64> = f[9..13].iter().map(|s| num(s)).collect();
            let counts = ServiceLabel::ALL
                .iter()
                .enumerate()
                .map(|(i, &s)| (s, JudgmentCounts { relevant: rel[i], not_relevant: non[i] }))
                .collect();
            JudgmentRow { topic_id: num(f[0]), counts, printed_precision: by_service(&prec) }
        })
        .collect()
}

pub fn printed_averages() -> PrintedAverages {
    let row = |name: &str| {
        let f = data_lines(PRECISION_COUNTS_TSV).find(|f| f[0] == name).expect("average row");
        by_service(&f[1..5].iter().map(|s| num::<f64>(s)).collect::<Vec<_>>())
    };
    PrintedAverages {
        unfiltered: row("avg"),
        kappa_filtered: row("avg_kappa"),
        overlap_filtered: row("avg_overlap"),
    }
}

/// Per-topic metrics assembled from both tables: agreement figures as
/// printed, precision recomputed from the judgment counts.
pub fn topic_metrics() -> Vec<TopicMetrics> {
    let agreement: BTreeMap<u32, AgreementRow> = agreement_table().into_iter().map(|r| (r.topic_id, r)).collect();
    judgment_table()
        .into_iter()
        .map(|row| {
            let a = &agreement[&row.topic_id];
            TopicMetrics {
                topic_id: row.topic_id,
                raters: a.raters,
                subjects: a.subjects,
                categories: a.categories,
                kappa: Some(a.kappa),
                band: Some(interpret_kappa(a.kappa)),
                overlap_08: a.overlap_08,
                overlap_10: a.overlap_10,
                counts: BTreeMap::new(),
                precision: BTreeMap::new(),
            }
            .with_counts(row.counts)
        })
        .collect()
}

/// Assessment sessions per topic in the study (the `n` column).
pub fn sessions_per_topic() -> BTreeMap<u32, usize> {
    agreement_table().into_iter().map(|r| (r.topic_id, r.raters)).collect()
}
