mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use irbench::evalkit::{
    build_pool, complete_submatrix, fleiss_kappa, group_overlap, mean_pairwise_overlap, read_judgments, service_counts,
    thresholded_mean_overlap, upsert_judgments, write_judgments, Judgment, Relevance, SubjectMode,
};
use irbench::run::{RankedList, ServiceLabel};

fn permuted(labels: &[Vec<bool>], rows: &[usize], cols: &[usize]) -> Vec<Vec<bool>> {
    rows.iter().map(|&r| cols.iter().map(|&c| labels[r][c]).collect()).collect()
}

fn labels_with_perms() -> impl Strategy<Value = (Vec<Vec<bool>>, Vec<usize>, Vec<usize>)> {
    common::labels_strategy(20, 15).prop_flat_map(|l| {
        let (s, r) = (l.len(), l[0].len());
        (Just(l), Just((0..s).collect::<Vec<_>>()).prop_shuffle(), Just((0..r).collect::<Vec<_>>()).prop_shuffle())
    })
}

fn runs_strategy() -> impl Strategy<Value = (Vec<RankedList>, usize)> {
    (1usize..=12, prop::collection::vec(prop::collection::vec(0u32..60, 0..25), 1..=4)).prop_map(|(depth, lists)| {
        let runs = lists
            .into_iter()
            .zip(ServiceLabel::ALL)
            .map(|(docs, s)| {
                let mut seen = BTreeSet::new();
                let uniq: Vec<(String, f64)> =
                    docs.into_iter().filter(|d| seen.insert(*d)).map(|d| (format!("d{d}"), 1.0)).collect();
                RankedList::from_scored(s, 4, uniq)
            })
            .collect();
        (runs, depth)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn kappa_matches_direct_evaluation((labels, rows, cols) in labels_with_perms()) {
        let got = fleiss_kappa(&common::matrix(&labels)).unwrap();
        let want = common::kappa_direct(&labels);
        match (got, want) {
            (Some(g), Some(w)) => prop_assert!((g - w).abs() <= 1e-12, "{} vs {}", g, w),
            (g, w) => prop_assert_eq!(g, w),
        }
        let shuffled = fleiss_kappa(&common::matrix(&permuted(&labels, &rows, &cols))).unwrap();
        prop_assert_eq!(shuffled, got);
    }

    #[test]
    fn kappa_is_bounded_above(labels in common::labels_strategy(20, 15)) {
        if let Some(k) = fleiss_kappa(&common::matrix(&labels)).unwrap() {
            prop_assert!(k <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn overlap_shrinks_as_threshold_grows(labels in common::labels_strategy(30, 12)) {
        let m = common::matrix(&labels);
        let mut last = f64::INFINITY;
        for t in [0.1, 0.3, 0.5, 0.6, 0.8, 0.9, 1.0] {
            let v = thresholded_mean_overlap(&m, t).unwrap();
            prop_assert!((0.0..=1.0).contains(&v));
            prop_assert!(v <= last);
            last = v;
        }
        prop_assert!(thresholded_mean_overlap(&m, 0.5).unwrap() == 1.0);
    }

    #[test]
    fn two_raters_agree_identically_at_high_thresholds(labels in common::labels_strategy(40, 2)) {
        let m = common::matrix(&labels);
        prop_assert_eq!(thresholded_mean_overlap(&m, 0.8).unwrap(), thresholded_mean_overlap(&m, 1.0).unwrap());
    }

    #[test]
    fn jaccard_overlaps_are_fractions(labels in common::labels_strategy(20, 8)) {
        let m = common::matrix(&labels);
        let mean = mean_pairwise_overlap(&m).unwrap();
        let group = group_overlap(&m).unwrap();
        prop_assert!((0.0..=1.0).contains(&mean));
        prop_assert!((0.0..=1.0).contains(&group.value));
    }

    #[test]
    fn pools_are_bounded_and_seeded((runs, depth) in runs_strategy(), seed in any::<u64>()) {
        let pool = build_pool(&runs, depth, seed).unwrap();
        let tops: BTreeSet<&str> = runs.iter().flat_map(|r| r.doc_ids().take(depth)).collect();
        prop_assert_eq!(pool.len(), tops.len());
        prop_assert!(pool.len() <= runs.len() * depth);
        if runs.iter().all(|r| r.len() >= depth) {
            prop_assert!(pool.len() >= depth);
        }
        prop_assert_eq!(pool.doc_ids().collect::<BTreeSet<_>>(), tops);
        prop_assert_eq!(build_pool(&runs, depth, seed).unwrap(), pool.clone());
        let slots: usize = runs.iter().map(|r| r.len().min(depth)).sum();
        prop_assert_eq!(pool.subjects(SubjectMode::ServiceSlots).len(), slots);
        prop_assert_eq!(pool.subjects(SubjectMode::Documents).len(), pool.len());
    }

    #[test]
    fn precision_counts_are_consistent((runs, depth) in runs_strategy(), seed in any::<u64>(), raters in 1usize..5) {
        let pool = build_pool(&runs, depth, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut judgments = Vec::new();
        for r in 0..raters {
            for d in pool.doc_ids() {
                judgments.push(Judgment::new(&format!("r{r}"), 4, d, Relevance::from_bool(rng.gen_bool(0.5))));
            }
        }
        for (s, c) in service_counts(&judgments, &pool) {
            prop_assert_eq!(c.total() as usize, pool.docs_for(s).len() * raters);
            if let Some(p) = c.precision() {
                prop_assert!((0.0..=1.0).contains(&p));
            }
        }
    }

    #[test]
    fn completed_matrices_are_complete(labels in common::labels_strategy(12, 6), holes in prop::collection::vec((0usize..12, 0usize..6), 0..4)) {
        let subjects: Vec<String> = (0..labels.len()).map(|i| format!("s{i:03}")).collect();
        let mut judgments = Vec::new();
        for (i, row) in labels.iter().enumerate() {
            for (r, &rel) in row.iter().enumerate() {
                if !holes.contains(&(i, r)) {
                    judgments.push(Judgment::new(&format!("r{r:03}"), 1, &subjects[i], Relevance::from_bool(rel)));
                }
            }
        }
        match complete_submatrix(&judgments, 1, &subjects) {
            Ok(m) => {
                prop_assert!(m.is_complete());
                prop_assert!(m.n_raters() >= 2);
                let damaged: BTreeSet<usize> = holes.iter().filter(|(i, r)| *i < labels.len() && *r < labels[0].len()).map(|(_, r)| *r).collect();
                prop_assert_eq!(m.n_raters(), labels[0].len() - damaged.len());
            }
            Err(e) => prop_assert!(e.to_string().contains("insufficient raters")),
        }
    }

    #[test]
    fn judgment_file_round_trip(entries in prop::collection::vec(("[a-z]{1,4}", 1u32..300, "[A-Z]{1,3}-[0-9]{1,4}", any::<bool>(), 0u64..2_000_000_000), 0..40)) {
        let judgments: Vec<Judgment> = entries
            .into_iter()
            .map(|(a, t, d, rel, ts)| Judgment { timestamp: ts, ..Judgment::new(&a, t, &d, Relevance::from_bool(rel)) })
            .collect();
        let deduped = upsert_judgments(judgments.clone());
        let mut buf = Vec::new();
        write_judgments(&deduped, &mut buf).unwrap();
        prop_assert_eq!(read_judgments(buf.as_slice()).unwrap(), deduped.clone());
        let keys: BTreeSet<(String, u32, String)> = judgments.iter().map(|j| (j.assessor_id.clone(), j.topic_id, j.doc_id.clone())).collect();
        prop_assert_eq!(deduped.len(), keys.len());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn random_labels_give_near_zero_kappa(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let labels: Vec<Vec<bool>> = (0..500).map(|_| (0..10).map(|_| rng.gen_bool(0.5)).collect()).collect();
        let k = fleiss_kappa(&common::matrix(&labels)).unwrap().unwrap();
        prop_assert!(k.abs() < 0.1, "kappa {}", k);
    }
}

#[test]
fn perfect_agreement_with_both_categories_is_one() {
    for (subjects, raters) in [(2, 2), (10, 3), (40, 15)] {
        let labels: Vec<Vec<bool>> = (0..subjects).map(|i| vec![i % 2 == 0; raters]).collect();
        assert_eq!(fleiss_kappa(&common::matrix(&labels)).unwrap(), Some(1.0));
    }
    let unanimous = vec![vec![true; 4]; 6];
    assert_eq!(fleiss_kappa(&common::matrix(&unanimous)).unwrap(), None);
}
