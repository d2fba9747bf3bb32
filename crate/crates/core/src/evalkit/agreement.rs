//! Inter-rater agreement: Fleiss' kappa and overlap measures.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::judgments::{Judgment, Relevance};
use super::EvalError;

/// Subjects × raters table of binary judgments for one topic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgmentMatrix {
    pub topic_id: u32,
    /// Row labels (document ids; may repeat when rows are service slots).
    pub subjects: Vec<String>,
    /// Column labels, assessor ids in ascending order.
    pub raters: Vec<String>,
    /// `cells[subject][rater]`.
    pub cells: Vec<Vec<Option<Relevance>>>,
}

impl JudgmentMatrix {
    /// Lays out every judgment of `topic_id` on the given subjects. Raters are
    /// the assessors with at least one such judgment; later judgments for the
    /// same cell overwrite earlier ones.
    pub fn from_judgments<S: AsRef<str>>(topic_id: u32, subjects: &[S], judgments: &[Judgment]) -> Self {
        let mut rows: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, s) in subjects.iter().enumerate() {
            rows.entry(s.as_ref()).or_default().push(i);
        }
        let relevant: Vec<&Judgment> =
            judgments.iter().filter(|j| j.topic_id == topic_id && rows.contains_key(j.doc_id.as_str())).collect();
        let raters: Vec<String> =
            relevant.iter().map(|j| j.assessor_id.clone()).collect::<BTreeSet<_>>().into_iter().collect();
        let col: BTreeMap<&str, usize> = raters.iter().enumerate().map(|(i, r)| (r.as_str(), i)).collect();
        let mut cells = vec![vec![None; raters.len()]; subjects.len()];
        for j in relevant {
            let c = col[j.assessor_id.as_str()];
            for &r in &rows[j.doc_id.as_str()] {
                cells[r][c] = Some(j.label);
            }
        }
        JudgmentMatrix {
            topic_id,
            subjects: subjects.iter().map(|s| s.as_ref().to_string()).collect(),
            raters,
            cells,
        }
    }

    pub fn n_subjects(&self) -> usize {
        self.subjects.len()
    }

    pub fn n_raters(&self) -> usize {
        self.raters.len()
    }

    pub fn is_complete(&self) -> bool {
        self.cells.iter().all(|row| row.iter().all(Option::is_some))
    }

    /// `[relevant, not_relevant]` counts per subject; missing cells are skipped.
    pub fn category_counts(&self) -> Vec<[usize; 2]> {
        self.cells
            .iter()
            .map(|row| {
                let rel = row.iter().filter(|c| **c == Some(Relevance::Relevant)).count();
                let non = row.iter().filter(|c| **c == Some(Relevance::NotRelevant)).count();
                [rel, non]
            })
            .collect()
    }

    /// Non-missing cells in each rater column.
    pub fn judgment_counts(&self) -> Vec<usize> {
        (0..self.raters.len()).map(|c| self.cells.iter().filter(|row| row[c].is_some()).count()).collect()
    }

    /// Keeps only the listed rater columns (by index, in the given order).
    pub fn select_raters(&self, keep: &[usize]) -> JudgmentMatrix {
        JudgmentMatrix {
            topic_id: self.topic_id,
            subjects: self.subjects.clone(),
            raters: keep.iter().map(|&c| self.raters[c].clone()).collect(),
            cells: self.cells.iter().map(|row| keep.iter().map(|&c| row[c]).collect()).collect(),
        }
    }

    /// Documents a given rater judged relevant.
    pub fn relevant_docs_of(&self, rater: usize) -> BTreeSet<&str> {
        self.subjects
            .iter()
            .zip(&self.cells)
            .filter(|(_, row)| row[rater] == Some(Relevance::Relevant))
            .map(|(s, _)| s.as_str())
            .collect()
    }

    fn require_complete(&self) -> Result<(), EvalError> {
        if self.is_complete() {
            Ok(())
        } else {
            Err(EvalError::IncompleteMatrix)
        }
    }
}

/// Builds the largest complete matrix by dropping raters with the fewest
/// judgments first (ties: lowest assessor id first) until every remaining
/// rater judged every subject.
pub fn complete_submatrix<S: AsRef<str>>(
    judgments: &[Judgment],
    topic_id: u32,
    subjects: &[S],
) -> Result<JudgmentMatrix, EvalError> {
    let full = JudgmentMatrix::from_judgments(topic_id, subjects, judgments);
    let counts = full.judgment_counts();
    let mut drop_order: Vec<usize> = (0..full.n_raters()).collect();
    drop_order.sort_by(|&a, &b| counts[a].cmp(&counts[b]).then_with(|| full.raters[a].cmp(&full.raters[b])));
    let mut kept: BTreeSet<usize> = drop_order.iter().copied().collect();
    for &r in &drop_order {
        if kept.iter().all(|&c| counts[c] == full.n_subjects()) {
            break;
        }
        kept.remove(&r);
    }
    let kept: Vec<usize> = kept.into_iter().collect();
    if kept.len() < 2 {
        return Err(EvalError::InsufficientRaters { topic: topic_id, complete: kept.len() });
    }
    Ok(full.select_raters(&kept))
}

/// Fleiss' kappa from per-subject category counts, each row summing to `raters`.
/// `None` when expected agreement is 1 (every rating in one category).
pub fn fleiss_kappa_from_counts<R: AsRef<[usize]>>(counts: &[R], raters: usize) -> Option<f64> {
    let subjects = counts.len();
    let k = counts.first().map_or(0, |r| r.as_ref().len());
    let pairs: usize = counts.iter().flat_map(|r| r.as_ref().iter()).map(|&c| c * c.saturating_sub(1)).sum();
    let p_bar = pairs as f64 / (subjects * raters * (raters - 1)) as f64;
    let total = (subjects * raters) as f64;
    let p_e: f64 = (0..k)
        .map(|j| {
            let p_j = counts.iter().map(|r| r.as_ref()[j]).sum::<usize>() as f64 / total;
            p_j * p_j
        })
        .sum();
    if p_e >= 1.0 {
        return None;
    }
    Some((p_bar - p_e) / (1.0 - p_e))
}

/// Fleiss' kappa of a complete matrix. `Ok(None)` signals an undefined value
/// (all ratings fell into one category).
pub fn fleiss_kappa(matrix: &JudgmentMatrix) -> Result<Option<f64>, EvalError> {
    matrix.require_complete()?;
    if matrix.n_raters() < 2 {
        return Err(EvalError::TooFewRaters(matrix.n_raters()));
    }
    if matrix.n_subjects() < 2 {
        return Err(EvalError::TooFewSubjects(matrix.n_subjects()));
    }
    Ok(fleiss_kappa_from_counts(&matrix.category_counts(), matrix.n_raters()))
}

/// Landis & Koch agreement bands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KappaBand {
    Poor,
    Slight,
    Fair,
    Moderate,
    Substantial,
    AlmostPerfect,
}

impl fmt::Display for KappaBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KappaBand::Poor => "poor",
            KappaBand::Slight => "slight",
            KappaBand::Fair => "fair",
            KappaBand::Moderate => "moderate",
            KappaBand::Substantial => "substantial",
            KappaBand::AlmostPerfect => "almost perfect",
        })
    }
}

pub fn interpret_kappa(kappa: f64) -> KappaBand {
    match kappa {
        k if k < 0.0 => KappaBand::Poor,
        k if k < 0.2 => KappaBand::Slight,
        k if k < 0.4 => KappaBand::Fair,
        k if k < 0.6 => KappaBand::Moderate,
        k if k < 0.8 => KappaBand::Substantial,
        _ => KappaBand::AlmostPerfect,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Overlap {
    pub value: f64,
    /// Both sets were empty; `value` is 1.0 by convention.
    pub vacuous: bool,
}

/// |A ∩ B| / |A ∪ B|.
pub fn pairwise_overlap<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> Overlap {
    let union = a.union(b).count();
    if union == 0 {
        return Overlap { value: 1.0, vacuous: true };
    }
    Overlap { value: a.intersection(b).count() as f64 / union as f64, vacuous: false }
}

/// Mean of [`pairwise_overlap`] over every pair of raters' relevant sets.
pub fn mean_pairwise_overlap(matrix: &JudgmentMatrix) -> Result<f64, EvalError> {
    matrix.require_complete()?;
    let n = matrix.n_raters();
    if n < 2 {
        return Err(EvalError::TooFewRaters(n));
    }
    let sets: Vec<BTreeSet<&str>> = (0..n).map(|r| matrix.relevant_docs_of(r)).collect();
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for i in 0..n {
        for j in i + 1..n {
            sum += pairwise_overlap(&sets[i], &sets[j]).value;
            pairs += 1;
        }
    }
    Ok(sum / pairs as f64)
}

/// Intersection of all raters' relevant sets over their union.
pub fn group_overlap(matrix: &JudgmentMatrix) -> Result<Overlap, EvalError> {
    matrix.require_complete()?;
    let sets: Vec<BTreeSet<&str>> = (0..matrix.n_raters()).map(|r| matrix.relevant_docs_of(r)).collect();
    let Some((first, rest)) = sets.split_first() else {
        return Err(EvalError::TooFewRaters(0));
    };
    let union: BTreeSet<&str> = sets.iter().flatten().copied().collect();
    let inter: BTreeSet<&str> = first.iter().filter(|d| rest.iter().all(|s| s.contains(*d))).copied().collect();
    if union.is_empty() {
        return Ok(Overlap { value: 1.0, vacuous: true });
    }
    Ok(Overlap { value: inter.len() as f64 / union.len() as f64, vacuous: false })
}

/// Number of subjects whose majority label holds at least share `t` of the raters.
pub fn thresholded_agreed_count(matrix: &JudgmentMatrix, t: f64) -> Result<usize, EvalError> {
    matrix.require_complete()?;
    if !(t > 0.0 && t <= 1.0) {
        return Err(EvalError::InvalidThreshold(t));
    }
    let n = matrix.n_raters();
    if n == 0 {
        return Err(EvalError::TooFewRaters(0));
    }
    Ok(matrix
        .category_counts()
        .iter()
        .filter(|[rel, non]| (*rel.max(non) as f64) / (n as f64) >= t)
        .count())
}

/// Fraction of subjects on which at least share `t` of the raters agree.
/// At `t = 1` only unanimous subjects count.
pub fn thresholded_mean_overlap(matrix: &JudgmentMatrix, t: f64) -> Result<f64, EvalError> {
    let agreed = thresholded_agreed_count(matrix, t)?;
    if matrix.n_subjects() == 0 {
        return Err(EvalError::TooFewSubjects(0));
    }
    Ok(agreed as f64 / matrix.n_subjects() as f64)
}
