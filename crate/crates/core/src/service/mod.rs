//! Assessment campaign backend.
//!
//! A [`Campaign`] serves the topics, hands each assessor the pooled documents
//! of one topic in the pool's presentation order and records binary
//! judgments. Nothing it returns says which service retrieved a document.
//!
//! An on-disk campaign is a directory:
//!
//! ```text
//! topics.json      topic definitions
//! corpus.jsonl     records of the pooled documents
//! pools.json       one pool per topic
//! sessions.log     appended on session creation
//! judgments.log    appended on every judgment (judgment file format)
//! ```
//!
//! Judgments are flushed to disk before they are acknowledged; on reopen the
//! logs are replayed with last-write-wins per `(assessor, topic, doc)`.

mod http;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::RwLock;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{self, Corpus, CorpusError, DocumentRecord, Topic};
use crate::evalkit::{read_judgments, upsert_judgments, write_judgments, Judgment, Pool, Relevance};

pub use http::{router, serve};

pub const TOPICS_FILE: &str = "topics.json";
pub const CORPUS_FILE: &str = "corpus.jsonl";
pub const POOLS_FILE: &str = "pools.json";
pub const SESSIONS_LOG: &str = "sessions.log";
pub const JUDGMENTS_LOG: &str = "judgments.log";

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("unknown topic {0}")]
    UnknownTopic(u32),
    #[error("unknown session {0:?}")]
    UnknownSession(String),
    #[error("assessor {assessor:?} already has session {session_id:?} for topic {topic}")]
    DuplicateSession { assessor: String, topic: u32, session_id: String },
    #[error("document {doc:?} is not in the pool of session {session:?}")]
    DocNotInPool { session: String, doc: String },
    #[error("invalid request: {0}")]
    Invalid(String),
    #[error("campaign data: {0}")]
    Data(String),
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
}

impl From<CorpusError> for ServiceError {
    fn from(e: CorpusError) -> Self {
        ServiceError::Data(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicSummary {
    pub id: u32,
    pub title: String,
    pub description: String,
    pub assessor_count: usize,
    pub pool_size: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssessmentSession {
    pub session_id: String,
    pub assessor_id: String,
    pub topic_id: u32,
    /// Pooled documents in presentation order.
    pub documents: Vec<String>,
    pub created: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Progress {
    pub judged: usize,
    pub total: usize,
    pub complete: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionInfo {
    pub session_id: String,
    pub assessor_id: String,
    pub topic_id: u32,
    pub progress: Progress,
}

/// What an assessor sees of one document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentCard {
    pub doc_id: String,
    pub authors: Vec<String>,
    pub year: i32,
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    pub keywords: Vec<String>,
    /// `Some(true)` relevant, `Some(false)` not relevant, `None` unjudged.
    pub relevant: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionDocuments {
    pub session_id: String,
    pub topic: Topic,
    pub progress: Progress,
    pub documents: Vec<DocumentCard>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgmentAck {
    pub doc_id: String,
    pub relevant: bool,
    pub progress: Progress,
}

type Clock = Box<dyn Fn() -> u64 + Send + Sync>;

fn system_clock() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

#[derive(Default)]
struct State {
    sessions: Vec<AssessmentSession>,
    session_ids: HashMap<String, usize>,
    by_assessor_topic: HashMap<(String, u32), usize>,
    judgments: Vec<Judgment>,
    judgment_slot: HashMap<(String, u32, String), usize>,
    judged_per_session: Vec<BTreeSet<String>>,
}

impl State {
    fn add_session(&mut self, session: AssessmentSession) {
        let i = self.sessions.len();
        self.session_ids.insert(session.session_id.clone(), i);
        self.by_assessor_topic.insert((session.assessor_id.clone(), session.topic_id), i);
        self.sessions.push(session);
        self.judged_per_session.push(BTreeSet::new());
    }

    fn upsert(&mut self, j: Judgment) {
        if let Some(&s) = self.by_assessor_topic.get(&(j.assessor_id.clone(), j.topic_id)) {
            self.judged_per_session[s].insert(j.doc_id.clone());
        }
        let key = (j.assessor_id.clone(), j.topic_id, j.doc_id.clone());
        match self.judgment_slot.get(&key) {
            Some(&i) => self.judgments[i] = j,
            None => {
                self.judgment_slot.insert(key, self.judgments.len());
                self.judgments.push(j);
            }
        }
    }

    fn progress(&self, session: usize) -> Progress {
        let judged = self.judged_per_session[session].len();
        let total = self.sessions[session].documents.len();
        Progress { judged, total, complete: judged == total }
    }

    fn session_index(&self, id: &str) -> Result<usize, ServiceError> {
        self.session_ids.get(id).copied().ok_or_else(|| ServiceError::UnknownSession(id.to_string()))
    }
}

struct Logs {
    sessions: File,
    judgments: File,
}

pub struct Campaign {
    topics: Vec<Topic>,
    corpus: Corpus,
    pools: BTreeMap<u32, Pool>,
    dir: Option<PathBuf>,
    clock: Clock,
    // Writes hold the lock across the log append so file order equals state order.
    state: RwLock<(State, Option<Logs>)>,
}

fn valid_assessor_id(id: &str) -> bool {
    !id.is_empty() && !id.chars().any(char::is_whitespace)
}

impl Campaign {
    /// A campaign that keeps everything in memory.
    pub fn in_memory(topics: Vec<Topic>, corpus: Corpus, pools: Vec<Pool>) -> Result<Self, ServiceError> {
        Self::assemble(topics, corpus, pools, None)
    }

    fn assemble(topics: Vec<Topic>, corpus: Corpus, pools: Vec<Pool>, dir: Option<PathBuf>) -> Result<Self, ServiceError> {
        let mut by_topic = BTreeMap::new();
        for pool in pools {
            if !topics.iter().any(|t| t.topic_id == pool.topic_id) {
                return Err(ServiceError::Data(format!("pool for unknown topic {}", pool.topic_id)));
            }
            if let Some(missing) = pool.doc_ids().find(|d| corpus.get(d).is_none()) {
                return Err(ServiceError::Data(format!("pooled document {missing:?} missing from corpus")));
            }
            let topic = pool.topic_id;
            if by_topic.insert(topic, pool).is_some() {
                return Err(ServiceError::Data(format!("two pools for topic {topic}")));
            }
        }
        Ok(Campaign {
            topics,
            corpus,
            pools: by_topic,
            dir,
            clock: Box::new(system_clock),
            state: RwLock::new((State::default(), None)),
        })
    }

    /// Replaces the wall clock used for timestamps.
    pub fn with_clock(mut self, clock: impl Fn() -> u64 + Send + Sync + 'static) -> Self {
        self.clock = Box::new(clock);
        self
    }

    /// Writes the static campaign files into `dir` (created if needed). Only
    /// the pooled documents of `corpus` are stored.
    pub fn create_dir(dir: impl AsRef<Path>, topics: &[Topic], corpus: &Corpus, pools: &[Pool]) -> Result<(), ServiceError> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        fs::write(dir.join(TOPICS_FILE), serde_json::to_string_pretty(topics).map_err(|e| ServiceError::Data(e.to_string()))?)?;
        let pooled: BTreeSet<&str> = pools.iter().flat_map(|p| p.doc_ids()).collect();
        let records: Vec<DocumentRecord> =
            corpus.records().iter().filter(|r| pooled.contains(r.doc_id.as_str())).cloned().collect();
        let mut out = io::BufWriter::new(File::create(dir.join(CORPUS_FILE))?);
        corpus::write_records(&records, &mut out)?;
        out.flush()?;
        fs::write(dir.join(POOLS_FILE), serde_json::to_string_pretty(pools).map_err(|e| ServiceError::Data(e.to_string()))?)?;
        Ok(())
    }

    /// Opens a campaign directory and replays its logs.
    pub fn open(dir: impl AsRef<Path>) -> Result<Self, ServiceError> {
        let dir = dir.as_ref().to_path_buf();
        let topics = corpus::load_topics(dir.join(TOPICS_FILE))?;
        let corpus = corpus::load_corpus(dir.join(CORPUS_FILE))?;
        let pools: Vec<Pool> = serde_json::from_str(&fs::read_to_string(dir.join(POOLS_FILE))?)
            .map_err(|e| ServiceError::Data(format!("{POOLS_FILE}: {e}")))?;
        let campaign = Self::assemble(topics, corpus, pools, Some(dir.clone()))?;
        {
            let mut guard = campaign.state.write().unwrap();
            let state = &mut guard.0;
            let sessions_path = dir.join(SESSIONS_LOG);
            if sessions_path.exists() {
                for (i, line) in BufReader::new(File::open(&sessions_path)?).lines().enumerate() {
                    let line = line?;
                    if line.trim().is_empty() {
                        continue;
                    }
                    let f: Vec<&str> = line.split('\t').collect();
                    let bad = || ServiceError::Data(format!("{SESSIONS_LOG} line {}: malformed", i + 1));
                    if f.len() != 4 {
                        return Err(bad());
                    }
                    let topic_id: u32 = f[2].parse().map_err(|_| bad())?;
                    let pool = campaign.pools.get(&topic_id).ok_or_else(bad)?;
                    state.add_session(AssessmentSession {
                        session_id: f[0].to_string(),
                        assessor_id: f[1].to_string(),
                        topic_id,
                        documents: pool.doc_ids().map(String::from).collect(),
                        created: f[3].parse().map_err(|_| bad())?,
                    });
                }
            }
            let judgments_path = dir.join(JUDGMENTS_LOG);
            if judgments_path.exists() {
                let logged = read_judgments(BufReader::new(File::open(&judgments_path)?))
                    .map_err(|e| ServiceError::Data(format!("{JUDGMENTS_LOG}: {e}")))?;
                for j in logged {
                    state.upsert(j);
                }
            }
            let append = |name: &str| OpenOptions::new().create(true).append(true).open(dir.join(name));
            guard.1 = Some(Logs { sessions: append(SESSIONS_LOG)?, judgments: append(JUDGMENTS_LOG)? });
        }
        Ok(campaign)
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn topics(&self) -> &[Topic] {
        &self.topics
    }

    pub fn pool(&self, topic: u32) -> Option<&Pool> {
        self.pools.get(&topic)
    }

    pub fn list_topics(&self) -> Vec<TopicSummary> {
        let guard = self.state.read().unwrap();
        let mut counts: HashMap<u32, usize> = HashMap::new();
        for s in &guard.0.sessions {
            *counts.entry(s.topic_id).or_default() += 1;
        }
        self.topics
            .iter()
            .map(|t| TopicSummary {
                id: t.topic_id,
                title: t.title.clone(),
                description: t.description.clone(),
                assessor_count: counts.get(&t.topic_id).copied().unwrap_or(0),
                pool_size: self.pools.get(&t.topic_id).map_or(0, Pool::len),
            })
            .collect()
    }

    pub fn create_session(&self, assessor_id: &str, topic_id: u32) -> Result<SessionInfo, ServiceError> {
        if !valid_assessor_id(assessor_id) {
            return Err(ServiceError::Invalid("assessor_id must be non-empty and contain no whitespace".into()));
        }
        if !self.topics.iter().any(|t| t.topic_id == topic_id) {
            return Err(ServiceError::UnknownTopic(topic_id));
        }
        let pool = self.pools.get(&topic_id).ok_or(ServiceError::UnknownTopic(topic_id))?;
        let mut guard = self.state.write().unwrap();
        let (state, logs) = &mut *guard;
        if let Some(&i) = state.by_assessor_topic.get(&(assessor_id.to_string(), topic_id)) {
            return Err(ServiceError::DuplicateSession {
                assessor: assessor_id.to_string(),
                topic: topic_id,
                session_id: state.sessions[i].session_id.clone(),
            });
        }
        let session = AssessmentSession {
            session_id: format!("S{:05}", state.sessions.len() + 1),
            assessor_id: assessor_id.to_string(),
            topic_id,
            documents: pool.doc_ids().map(String::from).collect(),
            created: (self.clock)(),
        };
        if let Some(logs) = logs {
            writeln!(logs.sessions, "{}\t{}\t{}\t{}", session.session_id, session.assessor_id, topic_id, session.created)?;
            logs.sessions.sync_data()?;
        }
        state.add_session(session);
        let i = state.sessions.len() - 1;
        Ok(SessionInfo {
            session_id: state.sessions[i].session_id.clone(),
            assessor_id: assessor_id.to_string(),
            topic_id,
            progress: state.progress(i),
        })
    }

    pub fn session(&self, session_id: &str) -> Result<AssessmentSession, ServiceError> {
        let guard = self.state.read().unwrap();
        let i = guard.0.session_index(session_id)?;
        Ok(guard.0.sessions[i].clone())
    }

    pub fn get_documents(&self, session_id: &str) -> Result<SessionDocuments, ServiceError> {
        let guard = self.state.read().unwrap();
        let state = &guard.0;
        let i = state.session_index(session_id)?;
        let session = &state.sessions[i];
        let topic = self.topics.iter().find(|t| t.topic_id == session.topic_id).cloned().ok_or(ServiceError::UnknownTopic(session.topic_id))?;
        let documents = session
            .documents
            .iter()
            .map(|d| {
                let r = self.corpus.get(d).ok_or_else(|| ServiceError::Data(format!("document {d:?} missing")))?;
                let key = (session.assessor_id.clone(), session.topic_id, d.clone());
                let relevant = state.judgment_slot.get(&key).map(|&j| state.judgments[j].label.is_relevant());
                Ok(DocumentCard {
                    doc_id: r.doc_id.clone(),
                    authors: r.authors.clone(),
                    year: r.year,
                    title: r.title.clone(),
                    abstract_text: r.abstract_text.clone(),
                    keywords: r.keywords.clone(),
                    relevant,
                })
            })
            .collect::<Result<Vec<_>, ServiceError>>()?;
        Ok(SessionDocuments { session_id: session.session_id.clone(), topic, progress: state.progress(i), documents })
    }

    /// Records (or overwrites) a judgment. Returns after it is on disk.
    pub fn submit_judgment(&self, session_id: &str, doc_id: &str, relevant: bool) -> Result<JudgmentAck, ServiceError> {
        let mut guard = self.state.write().unwrap();
        let (state, logs) = &mut *guard;
        let i = state.session_index(session_id)?;
        let session = &state.sessions[i];
        if !session.documents.iter().any(|d| d == doc_id) {
            return Err(ServiceError::DocNotInPool { session: session_id.to_string(), doc: doc_id.to_string() });
        }
        let judgment = Judgment {
            assessor_id: session.assessor_id.clone(),
            topic_id: session.topic_id,
            doc_id: doc_id.to_string(),
            label: Relevance::from_bool(relevant),
            timestamp: (self.clock)(),
        };
        if let Some(logs) = logs {
            write_judgments(std::slice::from_ref(&judgment), &mut logs.judgments)?;
            logs.judgments.sync_data()?;
        }
        state.upsert(judgment);
        Ok(JudgmentAck { doc_id: doc_id.to_string(), relevant, progress: state.progress(i) })
    }

    /// Every current judgment, one per `(assessor, topic, doc)`, including
    /// those of unfinished sessions.
    pub fn export_judgments(&self) -> Vec<Judgment> {
        let guard = self.state.read().unwrap();
        upsert_judgments(guard.0.judgments.iter().cloned())
    }

    pub fn export_text(&self) -> String {
        let mut buf = Vec::new();
        write_judgments(&self.export_judgments(), &mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("judgment file is UTF-8")
    }
}
