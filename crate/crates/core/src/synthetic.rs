//! Deterministic synthetic campaign: a small social-science corpus over the
//! ten bundled topics, hand-written queries, per-topic ground truth and
//! scripted assessors that judge through a [`Campaign`].

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{bundled_topics, DocumentRecord, Topic};
use crate::service::{Campaign, ServiceError};

struct TopicSpec {
    id: u32,
    query: &'static str,
    /// Tokens the query needs; inserted into most topic documents.
    anchors: &'static [&'static str],
    vocab: &'static [&'static str],
    controlled: &'static [&'static str],
}

const SPECS: &[TopicSpec] = &[
    TopicSpec {
        id: 83,
        query: "media AND war*",
        anchors: &["media", "war"],
        vocab: &["press", "journalism", "reporting", "conflict", "coverage", "propaganda", "wars", "television"],
        controlled: &["war reporting", "mass media", "journalism", "propaganda", "armed conflict"],
    },
    TopicSpec {
        id: 84,
        query: "comput* AND school*",
        anchors: &["computer", "school"],
        vocab: &["internet", "schools", "education", "technology", "learning", "pupils", "computers", "teaching"],
        controlled: &["new media", "computer-assisted instruction", "school", "Internet", "media education"],
    },
    TopicSpec {
        id: 88,
        query: "sport* AND nazi*",
        anchors: &["sport", "nazi"],
        vocab: &["sports", "national", "socialism", "reich", "athletes", "olympics", "physical", "regime"],
        controlled: &["sport", "National Socialism", "Third Reich", "sports policy"],
    },
    TopicSpec {
        id: 93,
        query: "burnout*",
        anchors: &["burnout"],
        vocab: &["stress", "exhaustion", "teachers", "nurses", "strain", "emotional", "workload", "coping"],
        controlled: &["burnout", "occupational stress", "mental health", "exhaustion"],
    },
    TopicSpec {
        id: 96,
        query: "vocational AND cost*",
        anchors: &["vocational", "costs"],
        vocab: &["training", "apprenticeship", "firms", "benefits", "trainees", "investment", "companies", "cost"],
        controlled: &["vocational education", "training costs", "dual system", "apprenticeship"],
    },
    TopicSpec {
        id: 105,
        query: "graduat* AND labour",
        anchors: &["graduates", "labour"],
        vocab: &["university", "market", "employment", "job", "career", "entry", "occupational", "degree"],
        controlled: &["university graduates", "labor market", "occupational career", "employment"],
    },
    TopicSpec {
        id: 110,
        query: "suicid* AND (youth OR young)",
        anchors: &["suicide", "youth"],
        vocab: &["suicidal", "young", "adolescents", "teenagers", "depression", "risk", "attempts", "prevention"],
        controlled: &["suicide", "adolescent", "depression", "young adults"],
    },
    TopicSpec {
        id: 153,
        query: "childless* AND german*",
        anchors: &["childlessness", "germany"],
        vocab: &["childless", "fertility", "german", "women", "family", "birth", "couples", "demographic"],
        controlled: &["childlessness", "fertility", "family planning", "Federal Republic of Germany"],
    },
    TopicSpec {
        id: 166,
        query: "povert* AND german*",
        anchors: &["poverty", "germany"],
        vocab: &["poor", "german", "homelessness", "income", "welfare", "deprivation", "households", "benefits"],
        controlled: &["poverty", "Federal Republic of Germany", "social assistance", "immiseration", "homelessness"],
    },
    TopicSpec {
        id: 173,
        query: "violen* AND youth*",
        anchors: &["violence", "youth"],
        vocab: &["violent", "youths", "adolescents", "aggression", "school", "peers", "delinquency", "gangs"],
        controlled: &["violence", "adolescent", "aggressiveness", "juvenile delinquency"],
    },
];

const GENERIC_WORDS: &[&str] = &[
    "study", "analysis", "results", "social", "data", "survey", "effects", "development", "society", "research",
    "policy", "change", "role", "perspective", "groups", "empirical", "question", "approach", "findings", "context",
    "structure", "theory", "comparison", "impact", "conditions", "evidence", "problems", "public", "recent", "case",
];

const GENERIC_CONTROLLED: &[&str] = &["empirical research", "survey", "social change", "sociology", "methodology"];

const SURNAMES: &[&str] = &[
    "Meyer", "Schulz", "Becker", "Hoffmann", "Koch", "Richter", "Klein", "Wolf", "Neumann", "Schwarz", "Zimmermann",
    "Braun", "Hofmann", "Hartmann", "Lange", "Schmitt", "Werner", "Krause", "Lehmann", "Maier", "Walter", "Peters",
    "Kaiser", "Fuchs", "Scholz", "Vogel", "Keller", "Frank", "Berger", "Winkler", "Roth", "Beck", "Lorenz", "Baumann",
    "Franke", "Albrecht", "Schuster", "Simon", "Ludwig", "Böhm", "Winter", "Kraus", "Martin", "Schumacher", "Krämer",
    "Vogt", "Stein", "Jäger", "Otto", "Sommer", "Groß", "Seidel", "Heinrich", "Brandt", "Haas", "Schreiber", "Graf",
    "Dietrich", "Ziegler", "Kuhn",
];

/// Corpus, queries and ground truth of a synthetic campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticCampaign {
    pub topics: Vec<Topic>,
    pub records: Vec<DocumentRecord>,
    pub queries: BTreeMap<u32, String>,
    /// Relevant documents per topic.
    pub truth: BTreeMap<u32, BTreeSet<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticOptions {
    pub docs_per_topic: usize,
    pub background_docs: usize,
    pub seed: u64,
}

impl Default for SyntheticOptions {
    fn default() -> Self {
        SyntheticOptions { docs_per_topic: 40, background_docs: 100, seed: 2010 }
    }
}

fn community(topic_index: usize) -> Vec<String> {
    (0..12)
        .map(|i| {
            let surname = SURNAMES[(topic_index * 6 + i) % SURNAMES.len()];
            let initial = (b'A' + ((topic_index * 5 + i * 3) % 26) as u8) as char;
            format!("{surname}, {initial}.")
        })
        .collect()
}

fn issn(topic_slot: usize, journal: usize) -> String {
    format!("{:04}-{:04}", 1000 + topic_slot * 37, 100 + journal * 11)
}

fn capitalize(word: &str) -> String {
    let mut c = word.chars();
    c.next().map_or_else(String::new, |f| f.to_uppercase().chain(c).collect())
}

fn pick<'a>(rng: &mut ChaCha8Rng, words: &[&'a str]) -> &'a str {
    words[rng.gen_range(0..words.len())]
}

struct DocPlan<'a> {
    spec: Option<&'a TopicSpec>,
    relevant: bool,
}

fn make_doc(rng: &mut ChaCha8Rng, id: String, plan: &DocPlan<'_>, topic_slot: usize) -> DocumentRecord {
    let mut title_words: Vec<&str> = Vec::new();
    let mut abstract_words: Vec<&str> = Vec::new();
    let mut keywords: Vec<String> = Vec::new();
    let mut authors: Vec<String> = Vec::new();
    let (issn_value, journal);
    match plan.spec {
        Some(spec) => {
            let anchor_p = if plan.relevant { 0.9 } else { 0.75 };
            let topical_share = if plan.relevant { 0.45 } else { 0.2 };
            for &a in spec.anchors {
                if rng.gen_bool(anchor_p) {
                    if rng.gen_bool(0.5) {
                        title_words.push(a);
                    } else {
                        abstract_words.push(a);
                    }
                }
            }
            for _ in 0..rng.gen_range(1..=2) {
                title_words.push(pick(rng, spec.vocab));
            }
            title_words.push(pick(rng, GENERIC_WORDS));
            for _ in 0..rng.gen_range(18..=32) {
                abstract_words.push(if rng.gen_bool(topical_share) { pick(rng, spec.vocab) } else { pick(rng, GENERIC_WORDS) });
            }
            let n_controlled = if plan.relevant { 3 } else { 1 };
            let mut controlled: Vec<&str> = spec.controlled.to_vec();
            controlled.shuffle(rng);
            keywords.extend(controlled.iter().take(n_controlled).map(|s| s.to_string()));
            if !plan.relevant || rng.gen_bool(0.3) {
                keywords.push(pick(rng, GENERIC_CONTROLLED).to_string());
            }
            let people = community(topic_slot);
            let hub_p = if plan.relevant { 0.6 } else { 0.15 };
            if rng.gen_bool(hub_p) {
                authors.push(people[rng.gen_range(0..2)].clone());
            }
            for _ in 0..rng.gen_range(1..=2) {
                authors.push(people[rng.gen_range(2..people.len())].clone());
            }
            let core_p = if plan.relevant { 0.7 } else { 0.3 };
            if rng.gen_bool(0.08) {
                (issn_value, journal) = (None, None);
            } else if rng.gen_bool(core_p) {
                // Zipf-like spread over the topic's three core journals
                let j = match rng.gen_range(0..7) {
                    0..=3 => 0,
                    4..=5 => 1,
                    _ => 2,
                };
                (issn_value, journal) = (Some(issn(topic_slot, j)), Some(format!("Journal of {} Studies {}", capitalize(spec.vocab[0]), j + 1)));
            } else {
                let j = rng.gen_range(0..15);
                (issn_value, journal) = (Some(issn(10, j)), Some(format!("Social Science Review {}", j + 1)));
            }
        }
        None => {
            for _ in 0..3 {
                title_words.push(pick(rng, GENERIC_WORDS));
            }
            for _ in 0..rng.gen_range(18..=32) {
                abstract_words.push(pick(rng, GENERIC_WORDS));
            }
            if rng.gen_bool(0.3) {
                let stray = &SPECS[rng.gen_range(0..SPECS.len())];
                abstract_words.push(pick(rng, stray.vocab));
                abstract_words.push(stray.anchors[0]);
            }
            keywords.push(pick(rng, GENERIC_CONTROLLED).to_string());
            for _ in 0..rng.gen_range(1..=3) {
                let s = SURNAMES[rng.gen_range(0..SURNAMES.len())];
                let name = format!("{s}, {}.", (b'A' + rng.gen_range(0..26u8)) as char);
                if !authors.contains(&name) {
                    authors.push(name);
                }
            }
            let j = rng.gen_range(0..15);
            (issn_value, journal) = if rng.gen_bool(0.1) { (None, None) } else { (Some(issn(10, j)), Some(format!("Social Science Review {}", j + 1))) };
        }
    }
    let mut seen = BTreeSet::new();
    authors.retain(|a| seen.insert(a.clone()));
    title_words.shuffle(rng);
    let title = capitalize(&title_words.join(" "));
    let abstract_text = format!("{}.", capitalize(&abstract_words.join(" ")));
    DocumentRecord {
        doc_id: id,
        title,
        abstract_text,
        keywords,
        authors,
        issn: issn_value,
        journal,
        year: rng.gen_range(1990..=2009),
    }
}

/// Generates the synthetic campaign. Output depends only on `opts`.
pub fn generate(opts: SyntheticOptions) -> SyntheticCampaign {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut plans: Vec<(Option<usize>, bool)> = Vec::new();
    for slot in 0..SPECS.len() {
        for _ in 0..opts.docs_per_topic {
            plans.push((Some(slot), rng.gen_bool(0.6)));
        }
    }
    plans.extend((0..opts.background_docs).map(|_| (None, false)));
    plans.shuffle(&mut rng);

    let mut records = Vec::with_capacity(plans.len());
    let mut truth: BTreeMap<u32, BTreeSet<String>> = SPECS.iter().map(|s| (s.id, BTreeSet::new())).collect();
    for (i, (slot, relevant)) in plans.into_iter().enumerate() {
        let id = format!("SYN-{:05}", i + 1);
        let spec = slot.map(|s| &SPECS[s]);
        if let (Some(spec), true) = (spec, relevant) {
            truth.get_mut(&spec.id).expect("topic").insert(id.clone());
        }
        records.push(make_doc(&mut rng, id, &DocPlan { spec, relevant }, slot.unwrap_or(0)));
    }
    SyntheticCampaign {
        topics: bundled_topics(),
        records,
        queries: SPECS.iter().map(|s| (s.id, s.query.to_string())).collect(),
        truth,
    }
}

/// How the scripted assessors behave.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssessorScript {
    pub sessions_per_topic: BTreeMap<u32, usize>,
    /// Per-assessor error rate is drawn uniformly from this range.
    pub error_range: (f64, f64),
    /// With at least five sessions on a topic, the last one leaves a document
    /// unjudged.
    pub leave_incomplete: bool,
    pub seed: u64,
}

impl AssessorScript {
    /// Session counts as in the published study.
    pub fn study_distribution(seed: u64) -> Self {
        AssessorScript {
            sessions_per_topic: crate::study_fixture::sessions_per_topic(),
            error_range: (0.02, 0.2),
            leave_incomplete: true,
            seed,
        }
    }
}

/// Judges every pooled topic through `campaign`: one session per scripted
/// assessor, labels follow `truth` with per-assessor error.
pub fn run_scripted_sessions(
    campaign: &Campaign,
    truth: &BTreeMap<u32, BTreeSet<String>>,
    script: &AssessorScript,
) -> Result<(), ServiceError> {
    let empty = BTreeSet::new();
    for (&topic, &sessions) in &script.sessions_per_topic {
        if campaign.pool(topic).is_none() {
            continue;
        }
        let relevant = truth.get(&topic).unwrap_or(&empty);
        let mut rng = ChaCha8Rng::seed_from_u64(script.seed ^ (u64::from(topic) << 32));
        for k in 0..sessions {
            let error = rng.gen_range(script.error_range.0..=script.error_range.1);
            let session = campaign.create_session(&format!("t{topic}-a{:02}", k + 1), topic)?;
            let cards = campaign.get_documents(&session.session_id)?.documents;
            let skip_last = script.leave_incomplete && sessions >= 5 && k + 1 == sessions;
            let judged = if skip_last { cards.len().saturating_sub(1) } else { cards.len() };
            for card in &cards[..judged] {
                let correct = relevant.contains(&card.doc_id);
                let label = if rng.gen_bool(error) { !correct } else { correct };
                campaign.submit_judgment(&session.session_id, &card.doc_id, label)?;
            }
        }
    }
    Ok(())
}
