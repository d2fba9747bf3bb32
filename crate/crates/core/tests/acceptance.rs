//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use irbench::corpus::{Corpus, DocumentRecord};
use irbench::evalkit::{
    build_pool, fleiss_kappa, interpret_kappa, precision, thresholded_mean_overlap, Judgment, KappaBand, Pool, Relevance,
    TopicFilter,
};
use irbench::index::build_index;
use irbench::study_fixture::{self, JudgmentRow};
use irbench::pipeline::{run_pipeline, JudgmentSource, PipelineOutput, PipelineSettings};
use irbench::query::{expand_query, parse_query, QueryAst};
use irbench::recommender::train_model;
use irbench::report::ReportBundle;
use irbench::rerank::{author_centrality_rerank, betweenness, bradfordize, CoauthorGraph};
use irbench::run::{RankedList, ServiceLabel};
use irbench::synthetic::{generate, AssessorScript, SyntheticOptions};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_time(start: Instant, limit: Duration) -> Result<(), String> {
    let took = start.elapsed();
    check(took < limit, || format!("took {took:?}, limit {limit:?}"))
}

/// Turns one row of published counts into a pool and judgments whose
/// per-service tallies equal the row.
fn materialize(row: &JudgmentRow) -> (Pool, Vec<Judgment>) {
    let runs: Vec<RankedList> = ServiceLabel::ALL
        .iter()
        .map(|&s| RankedList::from_scored(s, row.topic_id, (0..10).map(|i| (format!("{s}-{i}"), 1.0))))
        .collect();
    let pool = build_pool(&runs, 10, u64::from(row.topic_id)).unwrap();
    let mut judgments = Vec::new();
    for (&s, c) in &row.counts {
        let labels = std::iter::repeat_n(Relevance::Relevant, c.relevant as usize)
            .chain(std::iter::repeat_n(Relevance::NotRelevant, c.not_relevant as usize));
        for (j, label) in labels.enumerate() {
            judgments.push(Judgment::new(&format!("a{}", j / 10), row.topic_id, &format!("{s}-{}", j % 10), label));
        }
    }
    (pool, judgments)
}

fn recomputed_metrics() -> Vec<irbench::evalkit::TopicMetrics> {
    let mut metrics = study_fixture::topic_metrics();
    for (m, row) in metrics.iter_mut().zip(study_fixture::judgment_table()) {
        let (pool, judgments) = materialize(&row);
        m.precision = ServiceLabel::ALL.iter().map(|&s| (s, precision(&judgments, s, &pool).unwrap())).collect();
    }
    metrics
}

fn precision_table_reproduction() -> Outcome {
    let start = Instant::now();
    let metrics = recomputed_metrics();
    let mut worst: f64 = 0.0;
    for (m, row) in metrics.iter().zip(study_fixture::judgment_table()) {
        for s in ServiceLabel::ALL {
            let diff = (m.precision[&s] - row.printed_precision[&s]).abs();
            worst = worst.max(diff);
            check(diff <= 0.005 + 1e-12, || format!("topic {} {s}: {:.4} vs printed {}", m.topic_id, m.precision[&s], row.printed_precision[&s]))?;
        }
    }
    let avg = irbench::evalkit::filtered_average_precision(&metrics, TopicFilter::All).unwrap();
    let printed = study_fixture::printed_averages().unfiltered;
    for s in ServiceLabel::ALL {
        check((avg[&s] - printed[&s]).abs() <= 0.01, || format!("average {s}: {:.4} vs {}", avg[&s], printed[&s]))?;
    }
    within_time(start, Duration::from_secs(1))?;
    Ok(format!(
        "40 cells, max deviation {worst:.4}; averages AUTH {:.3} BRAD {:.3} SOLR {:.3} STR {:.3}",
        avg[&ServiceLabel::Auth], avg[&ServiceLabel::Brad], avg[&ServiceLabel::Solr], avg[&ServiceLabel::Str]
    ))
}

fn filtered_averages() -> Outcome {
    let titles = irbench::corpus::bundled_topics().into_iter().map(|t| (t.topic_id, t.title)).collect();
    let report = ReportBundle::build(recomputed_metrics(), titles, 0.40, 0.35, None).unwrap();
    let all: BTreeSet<u32> = report.topics.iter().map(|m| m.topic_id).collect();
    let excluded = |kept: &[u32]| all.iter().copied().filter(|t| !kept.contains(t)).collect::<Vec<_>>();
    check(excluded(&report.kappa_filtered.topics) == [84, 110, 153], || format!("kappa filter excluded {:?}", excluded(&report.kappa_filtered.topics)))?;
    check(excluded(&report.overlap_filtered.topics) == [83, 84, 153, 166, 173], || format!("overlap filter excluded {:?}", excluded(&report.overlap_filtered.topics)))?;
    let printed = study_fixture::printed_averages();
    let kappa = report.kappa_filtered.precision.as_ref().ok_or("kappa filter kept nothing")?;
    let overlap = report.overlap_filtered.precision.as_ref().ok_or("overlap filter kept nothing")?;
    for s in ServiceLabel::ALL {
        check((kappa[&s] - printed.kappa_filtered[&s]).abs() <= 0.01, || format!("kappa-filtered {s}: {:.4} vs {}", kappa[&s], printed.kappa_filtered[&s]))?;
        let tol = if s == ServiceLabel::Auth { 0.02 } else { 0.01 };
        check((overlap[&s] - printed.overlap_filtered[&s]).abs() <= tol, || format!("overlap-filtered {s}: {:.4} vs {}", overlap[&s], printed.overlap_filtered[&s]))?;
    }
    let fmt = |p: &BTreeMap<ServiceLabel, f64>| ServiceLabel::ALL.iter().map(|s| format!("{s} {:.3}", p[s])).collect::<Vec<_>>().join(" ");
    Ok(format!("kappa>=0.40: {}; overlap>=0.35: {}", fmt(kappa), fmt(overlap)))
}

fn kappa_banding() -> Outcome {
    let rows = study_fixture::agreement_table();
    let mut fair = Vec::new();
    let mut moderate = Vec::new();
    for r in &rows {
        match interpret_kappa(r.kappa) {
            KappaBand::Fair => fair.push(r.topic_id),
            KappaBand::Moderate => moderate.push(r.topic_id),
            other => return Err(format!("topic {} banded {other}", r.topic_id)),
        }
    }
    check(fair == [84, 110, 153], || format!("fair {fair:?}"))?;
    check(moderate == [83, 88, 93, 96, 105, 166, 173], || format!("moderate {moderate:?}"))?;
    let mean = rows.iter().map(|r| r.kappa).sum::<f64>() / rows.len() as f64;
    check((mean - study_fixture::agreement_averages().0).abs() < 0.005, || format!("mean kappa {mean}"))?;
    Ok(format!("fair {fair:?}, moderate {moderate:?}, mean {mean:.3}"))
}

fn kappa_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x004b_4150_5041);
    let trials = 500;
    let mut worst: f64 = 0.0;
    let mut undefined = 0;
    for _ in 0..trials {
        let (subjects, raters) = (rng.gen_range(2..=20), rng.gen_range(2..=15));
        let p = rng.gen_range(0.05..0.95);
        let labels: Vec<Vec<bool>> = (0..subjects).map(|_| (0..raters).map(|_| rng.gen_bool(p)).collect()).collect();
        let got = fleiss_kappa(&common::matrix(&labels)).map_err(|e| e.to_string())?;
        match (got, common::kappa_direct(&labels)) {
            (Some(g), Some(w)) => {
                worst = worst.max((g - w).abs());
                check((g - w).abs() <= 1e-12, || format!("{g} vs {w} on {subjects}x{raters}"))?;
            }
            (None, None) => undefined += 1,
            (g, w) => return Err(format!("definedness differs: {g:?} vs {w:?}")),
        }
        let mut rows: Vec<usize> = (0..subjects).collect();
        let mut cols: Vec<usize> = (0..raters).collect();
        rows.shuffle(&mut rng);
        cols.shuffle(&mut rng);
        let shuffled: Vec<Vec<bool>> = rows.iter().map(|&r| cols.iter().map(|&c| labels[r][c]).collect()).collect();
        let again = fleiss_kappa(&common::matrix(&shuffled)).map_err(|e| e.to_string())?;
        check(again == got, || format!("permutation changed kappa: {got:?} -> {again:?}"))?;
    }
    for (subjects, raters) in [(2, 2), (7, 5), (20, 15)] {
        let labels: Vec<Vec<bool>> = (0..subjects).map(|i| vec![i % 2 == 0; raters]).collect();
        let k = fleiss_kappa(&common::matrix(&labels)).map_err(|e| e.to_string())?;
        check(k == Some(1.0), || format!("perfect agreement gave {k:?}"))?;
    }
    within_time(start, Duration::from_secs(5))?;
    Ok(format!("{trials} matrices, max |diff| {worst:.1e}, {undefined} undefined, permutation-invariant"))
}

fn overlap_arithmetic() -> Outcome {
    // 400 subjects, four raters; 140 unanimous, the rest split 3:1 or 2:2
    let labels: Vec<Vec<bool>> = (0..400)
        .map(|i| match i {
            0..=69 => vec![true; 4],
            70..=139 => vec![false; 4],
            _ if i % 2 == 0 => vec![true, true, true, false],
            _ => vec![true, false, true, false],
        })
        .collect();
    let v = thresholded_mean_overlap(&common::matrix(&labels), 1.0).map_err(|e| e.to_string())?;
    check(v == 0.35, || format!("140/400 gave {v}"))?;
    let column: f64 = study_fixture::agreement_table().iter().map(|r| r.overlap_10).sum::<f64>() / 10.0;
    check((column - 0.35).abs() < 1e-9, || format!("published unanimous column averages {column}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(96);
    for _ in 0..300 {
        let n = rng.gen_range(1..=40);
        let labels: Vec<Vec<bool>> = (0..n.max(2)).map(|_| vec![rng.gen_bool(0.5), rng.gen_bool(0.5)]).collect();
        let m = common::matrix(&labels);
        let (a, b) = (thresholded_mean_overlap(&m, 0.8).unwrap(), thresholded_mean_overlap(&m, 1.0).unwrap());
        check(a == b, || format!("n=2 matrix: t=0.8 gives {a}, t=1.0 gives {b}"))?;
    }
    Ok("140 of 400 -> 0.35 exactly; 300 two-rater matrices equal at t=0.8 and t=1.0".into())
}

fn betweenness_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let graph = |n: usize, edges: &[(usize, usize)]| {
        let mut lists: Vec<Vec<String>> = (0..n).map(|i| vec![common::author(i)]).collect();
        lists.extend(edges.iter().map(|&(a, b)| vec![common::author(a), common::author(b)]));
        CoauthorGraph::from_author_lists(lists)
    };
    let trials = 400;
    for _ in 0..trials {
        let n = rng.gen_range(1..=7);
        let density = rng.gen_range(0.1..0.9);
        let edges: Vec<(usize, usize)> =
            (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).filter(|_| rng.gen_bool(density)).collect();
        let got = betweenness(&graph(n, &edges));
        for (i, want) in common::brute_betweenness(n, &edges).iter().enumerate() {
            let g = got.get(&common::author(i)).unwrap();
            check((g - want).abs() < 1e-9, || format!("graph {edges:?} node {i}: {g} vs {want}"))?;
        }
    }
    for n in 2..=7 {
        let path: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
        let s = betweenness(&graph(n, &path));
        for i in 0..n {
            let want = (i * (n - 1 - i)) as f64;
            check(s.get(&common::author(i)) == Some(want), || format!("path {n} node {i}"))?;
        }
        let star: Vec<(usize, usize)> = (1..n).map(|i| (0, i)).collect();
        let hub = betweenness(&graph(n, &star)).get(&common::author(0)).unwrap();
        check(hub == ((n - 1) * (n - 2) / 2) as f64, || format!("star {n}: hub {hub}"))?;
    }
    within_time(start, Duration::from_secs(10))?;
    Ok(format!("{trials} random graphs plus paths and stars agree with enumeration"))
}

fn random_list(rng: &mut ChaCha8Rng, id: usize) -> (Corpus, RankedList) {
    let n = rng.gen_range(0..40);
    let journals = rng.gen_range(1..6);
    let authors = rng.gen_range(1..12);
    let docs: Vec<DocumentRecord> = (0..n)
        .map(|i| {
            let mut names: Vec<String> = (0..rng.gen_range(0..4)).map(|_| common::author(rng.gen_range(0..authors))).collect();
            names.sort();
            names.dedup();
            DocumentRecord {
                doc_id: format!("L{id}-{i}"),
                title: String::new(),
                abstract_text: String::new(),
                keywords: vec![],
                authors: names,
                issn: rng.gen_bool(0.85).then(|| format!("0000-{:04}", rng.gen_range(0..journals))),
                journal: None,
                year: 2000,
            }
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let list = common::ranked(&docs, &order);
    (Corpus::from_records(docs).unwrap(), list)
}

fn reranker_contracts() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    for id in 0..1000 {
        let (corpus, base) = random_list(&mut rng, id);
        let issn = |d: &str| corpus.get(d).unwrap().issn.clone();
        let sorted = |l: &RankedList| {
            let mut v: Vec<String> = l.doc_ids().map(String::from).collect();
            v.sort();
            v
        };
        let brad = bradfordize(&base, &corpus);
        let mut expected: Vec<String> = base.doc_ids().filter(|d| issn(d).is_some()).map(String::from).collect();
        expected.sort();
        check(sorted(&brad) == expected, || format!("list {id}: bradfordize is not a permutation of the ISSN-bearing input"))?;
        let mut count: BTreeMap<String, usize> = BTreeMap::new();
        for d in base.doc_ids() {
            if let Some(j) = issn(d) {
                *count.entry(j).or_default() += 1;
            }
        }
        for w in brad.entries.windows(2) {
            let (a, b) = (issn(&w[0].doc_id).unwrap(), issn(&w[1].doc_id).unwrap());
            check(count[&a] >= count[&b], || format!("list {id}: journal of size {} after size {}", count[&b], count[&a]))?;
        }
        let auth = author_centrality_rerank(&base, &corpus);
        check(sorted(&auth) == sorted(&base), || format!("list {id}: author re-rank is not a permutation"))?;
        check(auth.entries.windows(2).all(|w| w[0].score >= w[1].score), || format!("list {id}: author scores not descending"))?;
    }
    Ok("1000 lists: both re-rankers permute their inputs, Bradford order monotone".into())
}

fn expansion_superset() -> Outcome {
    let mut grown = 0usize;
    let mut queries = 0usize;
    for seed in 0..100u64 {
        let c = generate(SyntheticOptions { docs_per_topic: 6, background_docs: 10, seed });
        let index = build_index(&c.records);
        let model = train_model(&c.records).map_err(|e| e.to_string())?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut qs: Vec<QueryAst> = c.queries.values().map(|q| parse_query(q).unwrap()).collect();
        let title_words: Vec<String> = c.records.iter().flat_map(|r| irbench::text::tokenize(&r.title)).collect();
        qs.push(QueryAst::term(&title_words[rng.gen_range(0..title_words.len())]));
        for q in qs {
            let before: BTreeSet<String> = index.search(&q, usize::MAX).doc_ids().map(String::from).collect();
            let terms = model.recommend_terms(&q, 4);
            let after: BTreeSet<String> = index.search(&expand_query(&q, &terms), usize::MAX).doc_ids().map(String::from).collect();
            check(before.is_subset(&after), || format!("corpus {seed}: expansion lost documents"))?;
            grown += usize::from(after.len() > before.len());
            queries += 1;
        }
    }
    Ok(format!("100 corpora, {queries} queries, result set grew for {grown}"))
}

fn synthetic_run(seed: u64) -> PipelineOutput {
    let c = generate(SyntheticOptions { seed, ..Default::default() });
    let corpus = Corpus::from_records(c.records).unwrap();
    let settings = PipelineSettings { seed, ..Default::default() };
    let source = JudgmentSource::Scripted { script: AssessorScript::study_distribution(seed), truth: c.truth };
    run_pipeline(&corpus, &c.topics, &c.queries, &settings, source).unwrap()
}

/// Majority-relevant sets recomputed from the raw judgments, using only the
/// assessors who judged every pooled document.
fn oracle_intersections(out: &PipelineOutput) -> BTreeMap<(ServiceLabel, ServiceLabel), usize> {
    let mut totals = BTreeMap::new();
    for pool in &out.pools {
        let docs: BTreeSet<&str> = pool.doc_ids().collect();
        let mut by_rater: BTreeMap<&str, BTreeMap<&str, bool>> = BTreeMap::new();
        for j in out.judgments.iter().filter(|j| j.topic_id == pool.topic_id) {
            by_rater.entry(j.assessor_id.as_str()).or_default().insert(j.doc_id.as_str(), j.label.is_relevant());
        }
        let complete: Vec<&BTreeMap<&str, bool>> = by_rater.values().filter(|m| docs.iter().all(|d| m.contains_key(d))).collect();
        let relevant = |d: &str| {
            let yes = complete.iter().filter(|m| m[d]).count();
            2 * yes > complete.len()
        };
        let sets: BTreeMap<ServiceLabel, BTreeSet<&str>> = pool
            .service_docs
            .iter()
            .map(|(s, ds)| (*s, ds.iter().map(String::as_str).filter(|d| relevant(d)).collect()))
            .collect();
        for (i, a) in ServiceLabel::ALL.iter().enumerate() {
            for b in &ServiceLabel::ALL[i + 1..] {
                let n = match (sets.get(a), sets.get(b)) {
                    (Some(x), Some(y)) => x.intersection(y).count(),
                    _ => 0,
                };
                *totals.entry((*a, *b)).or_default() += n;
            }
        }
    }
    totals
}

fn end_to_end() -> Outcome {
    let start = Instant::now();
    let a = synthetic_run(2010);
    let b = synthetic_run(2010);
    within_time(start, Duration::from_secs(10))?;
    check(a.report.render_text() == b.report.render_text(), || "text report differs between runs".into())?;
    check(a.report.to_json() == b.report.to_json(), || "JSON report differs between runs".into())?;
    check(a.pools == b.pools, || "pool order differs between runs".into())?;
    let depth = 10;
    for p in &a.pools {
        check((depth..=4 * depth).contains(&p.len()), || format!("topic {}: pool of {}", p.topic_id, p.len()))?;
    }
    check(a.report.topics.len() == 10, || format!("{} topics evaluated", a.report.topics.len()))?;
    let ix = a.report.intersections.as_ref().ok_or("report lacks the intersection block")?;
    check(a.report.render_text().contains("Intersections"), || "rendered report lacks the intersection block".into())?;
    let oracle = oracle_intersections(&a);
    for p in &ix.pairs {
        check(oracle[&(p.a, p.b)] == p.count, || format!("{}-{}: {} vs oracle {}", p.a, p.b, p.count, oracle[&(p.a, p.b)]))?;
    }
    let total: usize = oracle.values().sum();
    check(ix.total == total, || format!("total {} vs oracle {total}", ix.total))?;
    let sizes: Vec<usize> = a.pools.iter().map(Pool::len).collect();
    Ok(format!(
        "2 identical runs in {:?}; pool sizes {}..={}; intersections total {} of {} relevant",
        start.elapsed(),
        sizes.iter().min().unwrap(),
        sizes.iter().max().unwrap(),
        ix.total,
        ix.relevant_docs
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("precision table reproduction", precision_table_reproduction),
        ("filtered precision averages", filtered_averages),
        ("kappa banding", kappa_banding),
        ("fleiss kappa oracle", kappa_oracle),
        ("overlap arithmetic", overlap_arithmetic),
        ("betweenness oracle", betweenness_oracle),
        ("re-ranker contracts", reranker_contracts),
        ("expansion superset", expansion_superset),
        ("end-to-end pipeline", end_to_end),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match std::panic::catch_unwind(run) {
            Ok(Ok(detail)) => println!("PASS  {name}: {detail}"),
            Ok(Err(why)) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
            Err(_) => {
                failed += 1;
                println!("FAIL  {name}: panicked");
            }
        }
    }
    println!("{} of {} acceptance criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
