//! Campaign report: agreement table, judgment/precision table with the
//! filtered averages, and the relevant-set intersection block.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::evalkit::{filtered_average_precision, EvalError, IntersectionMatrix, TopicFilter, TopicMetrics};
use crate::run::ServiceLabel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilteredAverage {
    pub filter: TopicFilter,
    pub topics: Vec<u32>,
    /// `None` when the filter keeps no topic.
    pub precision: Option<BTreeMap<ServiceLabel, f64>>,
}

impl FilteredAverage {
    pub fn compute(metrics: &[TopicMetrics], filter: TopicFilter) -> Result<Self, EvalError> {
        let topics = metrics.iter().filter(|m| filter.keeps(m)).map(|m| m.topic_id).collect();
        let precision = match filtered_average_precision(metrics, filter) {
            Ok(p) => Some(p),
            Err(EvalError::EmptyAfterFilter) => None,
            Err(e) => return Err(e),
        };
        Ok(FilteredAverage { filter, topics, precision })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub topic_titles: BTreeMap<u32, String>,
    /// Topics in ascending id order.
    pub topics: Vec<TopicMetrics>,
    pub kappa_threshold: f64,
    pub overlap_threshold: f64,
    pub mean_kappa: Option<f64>,
    pub mean_overlap_08: f64,
    pub mean_overlap_10: f64,
    pub all_topics: FilteredAverage,
    pub kappa_filtered: FilteredAverage,
    pub overlap_filtered: FilteredAverage,
    pub intersections: Option<IntersectionMatrix>,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

impl ReportBundle {
    pub fn build(
        mut topics: Vec<TopicMetrics>,
        topic_titles: BTreeMap<u32, String>,
        kappa_threshold: f64,
        overlap_threshold: f64,
        intersections: Option<IntersectionMatrix>,
    ) -> Result<Self, EvalError> {
        topics.sort_by_key(|m| m.topic_id);
        Ok(ReportBundle {
            mean_kappa: mean(topics.iter().filter_map(|m| m.kappa)),
            mean_overlap_08: mean(topics.iter().map(|m| m.overlap_08)).unwrap_or(0.0),
            mean_overlap_10: mean(topics.iter().map(|m| m.overlap_10)).unwrap_or(0.0),
            all_topics: FilteredAverage::compute(&topics, TopicFilter::All)?,
            kappa_filtered: FilteredAverage::compute(&topics, TopicFilter::KappaAtLeast(kappa_threshold))?,
            overlap_filtered: FilteredAverage::compute(&topics, TopicFilter::OverlapAtLeast(overlap_threshold))?,
            topic_titles,
            topics,
            kappa_threshold,
            overlap_threshold,
            intersections,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Aligned plain-text rendering. Identical bundles render identically.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let services = ServiceLabel::ALL;
        let title_width = self.topic_titles.values().map(|t| t.chars().count()).max().unwrap_or(5).max(5);

        let _ = writeln!(out, "Inter-rater agreement");
        let _ = writeln!(
            out,
            "{:<6} {:<tw$} {:>3} {:>4} {:>2} {:>7} {:<14} {:>6} {:>6}",
            "topic", "title", "n", "N", "k", "kappa", "band", ">=0.8", "=1.0",
            tw = title_width
        );
        for m in &self.topics {
            let title = self.topic_titles.get(&m.topic_id).map_or("", String::as_str);
            let kappa = m.kappa.map_or_else(|| "-".to_string(), |k| format!("{k:.3}"));
            let band = m.band.map_or_else(|| "undefined".to_string(), |b| b.to_string());
            let _ = writeln!(
                out,
                "{:<6} {:<tw$} {:>3} {:>4} {:>2} {:>7} {:<14} {:>6.3} {:>6.3}",
                m.topic_id, title, m.raters, m.subjects, m.categories, kappa, band, m.overlap_08, m.overlap_10,
                tw = title_width
            );
        }
        let mean_kappa = self.mean_kappa.map_or_else(|| "-".to_string(), |k| format!("{k:.3}"));
        let _ = writeln!(
            out,
            "{:<6} {:<tw$} {:>3} {:>4} {:>2} {:>7} {:<14} {:>6.3} {:>6.3}",
            "avg", "", "", "", "", mean_kappa, "", self.mean_overlap_08, self.mean_overlap_10,
            tw = title_width
        );

        let _ = writeln!(out);
        let _ = writeln!(out, "Judgments and precision");
        let mut header = format!("{:<24}", "topic");
        for group in ["not relevant", "relevant", "precision"] {
            let _ = write!(header, " | {group:<23}");
        }
        let _ = writeln!(out, "{}", header.trim_end());
        let mut labels = format!("{:<24}", "");
        for _ in 0..3 {
            labels.push_str(" |");
            for s in services {
                let _ = write!(labels, " {:>5}", s.as_str());
            }
        }
        let _ = writeln!(out, "{labels}");
        for m in &self.topics {
            let mut line = format!("{:<24}", m.topic_id);
            for pick in [0, 1] {
                line.push_str(" |");
                for s in services {
                    let c = m.counts.get(&s).copied().unwrap_or_default();
                    let v = if pick == 0 { c.not_relevant } else { c.relevant };
                    let _ = write!(line, " {v:>5}");
                }
            }
            line.push_str(" |");
            for s in services {
                let _ = write!(line, " {:>5}", m.precision.get(&s).map_or_else(|| "-".to_string(), |p| format!("{p:.2}")));
            }
            let _ = writeln!(out, "{line}");
        }
        for (name, avg) in [
            ("avg".to_string(), &self.all_topics),
            (format!("avg (kappa >= {:.2})", self.kappa_threshold), &self.kappa_filtered),
            (format!("avg (overlap >= {:.2})", self.overlap_threshold), &self.overlap_filtered),
        ] {
            let mut line = format!("{name:<24}");
            line.push_str(&" ".repeat(2 * (2 + 6 * services.len())));
            line.push_str(" |");
            for s in services {
                let v = avg.precision.as_ref().and_then(|p| p.get(&s));
                let _ = write!(line, " {:>5}", v.map_or_else(|| "-".to_string(), |p| format!("{p:.2}")));
            }
            let kept: Vec<String> = avg.topics.iter().map(u32::to_string).collect();
            let kept = if kept.is_empty() { "none".to_string() } else { kept.join(" ") };
            let _ = writeln!(out, "{line}   topics: {kept}");
        }

        if let Some(ix) = &self.intersections {
            let _ = writeln!(out);
            let _ = writeln!(out, "Intersections of majority-relevant sets");
            for p in &ix.pairs {
                let _ = writeln!(out, "{:<10} {:>5}", format!("{}-{}", p.a, p.b), p.count);
            }
            let _ = writeln!(out, "{:<10} {:>5}  of {} relevant documents", "total", ix.total, ix.relevant_docs);
        }
        out
    }
}
