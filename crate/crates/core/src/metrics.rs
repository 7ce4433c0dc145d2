//! trec_eval-compatible retrieval metrics.
//!
//! Conventions follow trec_eval: documents are ranked by score descending
//! with ties broken by doc id descending (bytewise), unjudged documents are
//! non-relevant, AP divides by the total number of relevant documents, and
//! nDCG uses linear gains with a `1 / log2(rank + 1)` discount.
//!
//! The per-topic functions return `None` when the topic has no relevant
//! documents. Such topics are left out of means.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::trec_io::{DocId, PairMap, Relevance, Run, ScoredDoc, TopicId};

/// Sorts by score descending, then doc id descending.
pub fn canonical_sort(docs: &mut [ScoredDoc]) {
    // scores are finite, so partial_cmp is total here and treats -0.0 == 0.0
    docs.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap_or(Ordering::Equal)
            .then_with(|| b.doc.cmp(&a.doc))
    });
}

/// Canonical ranking of unordered `(doc, score)` entries.
pub fn canonical_order(entries: &[(DocId, f64)]) -> Vec<DocId> {
    let mut docs: Vec<ScoredDoc> = entries
        .iter()
        .map(|(doc, score)| ScoredDoc {
            doc: doc.clone(),
            score: *score,
        })
        .collect();
    canonical_sort(&mut docs);
    docs.into_iter().map(|d| d.doc).collect()
}

fn gain_of<G: Relevance>(judgments: &BTreeMap<DocId, G>, doc: &str) -> u32 {
    judgments.get(doc).map_or(0, |g| g.gain())
}

fn num_relevant<G: Relevance>(judgments: &BTreeMap<DocId, G>) -> usize {
    judgments.values().filter(|g| g.is_relevant()).count()
}

/// AP@k: `(1/R) * sum of precision@i over relevant ranks i <= k`.
pub fn average_precision<D, G>(ranked: &[D], judgments: &BTreeMap<DocId, G>, k: usize) -> Option<f64>
where
    D: AsRef<str>,
    G: Relevance,
{
    let r = num_relevant(judgments);
    if r == 0 {
        return None;
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, doc) in ranked.iter().take(k).enumerate() {
        if gain_of(judgments, doc.as_ref()) > 0 {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    Some(sum / r as f64)
}

/// RR@k: reciprocal of the first relevant rank within the top k, else 0.
pub fn reciprocal_rank<D, G>(ranked: &[D], judgments: &BTreeMap<DocId, G>, k: usize) -> Option<f64>
where
    D: AsRef<str>,
    G: Relevance,
{
    if num_relevant(judgments) == 0 {
        return None;
    }
    let first = ranked.iter().take(k).position(|d| gain_of(judgments, d.as_ref()) > 0);
    Some(first.map_or(0.0, |i| 1.0 / (i + 1) as f64))
}

/// P@k. The denominator is always k, as in trec_eval.
pub fn precision<D, G>(ranked: &[D], judgments: &BTreeMap<DocId, G>, k: usize) -> Option<f64>
where
    D: AsRef<str>,
    G: Relevance,
{
    if num_relevant(judgments) == 0 {
        return None;
    }
    let hits = ranked
        .iter()
        .take(k)
        .filter(|d| gain_of(judgments, d.as_ref()) > 0)
        .count();
    Some(hits as f64 / k as f64)
}

pub fn recall<D, G>(ranked: &[D], judgments: &BTreeMap<DocId, G>, k: usize) -> Option<f64>
where
    D: AsRef<str>,
    G: Relevance,
{
    let r = num_relevant(judgments);
    if r == 0 {
        return None;
    }
    let hits = ranked
        .iter()
        .take(k)
        .filter(|d| gain_of(judgments, d.as_ref()) > 0)
        .count();
    Some(hits as f64 / r as f64)
}

fn discount(rank0: usize) -> f64 {
    1.0 / ((rank0 + 2) as f64).log2()
}

/// nDCG@k with linear gains. The ideal ranking orders all judged gains
/// descending.
pub fn ndcg<D, G>(ranked: &[D], judgments: &BTreeMap<DocId, G>, k: usize) -> Option<f64>
where
    D: AsRef<str>,
    G: Relevance,
{
    let mut ideal: Vec<u32> = judgments.values().map(|g| g.gain()).filter(|&g| g > 0).collect();
    if ideal.is_empty() {
        return None;
    }
    ideal.sort_unstable_by(|a, b| b.cmp(a));
    let idcg: f64 = ideal
        .iter()
        .take(k)
        .enumerate()
        .map(|(i, &g)| g as f64 * discount(i))
        .sum();
    let dcg: f64 = ranked
        .iter()
        .take(k)
        .enumerate()
        .map(|(i, d)| gain_of(judgments, d.as_ref()) as f64 * discount(i))
        .sum();
    Some(dcg / idcg)
}

/// Fraction of the top `min(k, len)` documents that appear in the judged
/// pool, whatever their grade. `None` for an empty ranking.
pub fn judged_at_k<D, V>(ranked: &[D], pool: &BTreeMap<DocId, V>, k: usize) -> Option<f64>
where
    D: AsRef<str>,
{
    let depth = k.min(ranked.len());
    if depth == 0 {
        return None;
    }
    let judged = ranked[..depth].iter().filter(|d| pool.contains_key(d.as_ref())).count();
    Some(judged as f64 / depth as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Map,
    Mrr,
    Precision,
    Recall,
    Ndcg,
    Judged,
}

impl MetricKind {
    fn name(self) -> &'static str {
        match self {
            MetricKind::Map => "map",
            MetricKind::Mrr => "mrr",
            MetricKind::Precision => "p",
            MetricKind::Recall => "recall",
            MetricKind::Ndcg => "ndcg",
            MetricKind::Judged => "judged",
        }
    }
}

/// A metric at a cutoff depth, written `map@100`, `mrr@10`, `ndcg@10`,
/// `p@K`, `recall@K` or `judged@10` (case-insensitive).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct MetricSpec {
    kind: MetricKind,
    depth: usize,
}

impl MetricSpec {
    pub const MAP_100: MetricSpec = MetricSpec {
        kind: MetricKind::Map,
        depth: 100,
    };
    pub const MRR_10: MetricSpec = MetricSpec {
        kind: MetricKind::Mrr,
        depth: 10,
    };

    pub fn new(kind: MetricKind, depth: usize) -> Result<Self, Error> {
        if depth == 0 {
            return Err(Error::InvalidMetric(format!("{}@0", kind.name())));
        }
        Ok(Self { kind, depth })
    }

    pub fn kind(&self) -> MetricKind {
        self.kind
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Value for one topic, or `None` if the topic is not evaluable.
    pub fn score_topic<D, G>(&self, ranked: &[D], judgments: &BTreeMap<DocId, G>) -> Option<f64>
    where
        D: AsRef<str>,
        G: Relevance,
    {
        let k = self.depth;
        match self.kind {
            MetricKind::Map => average_precision(ranked, judgments, k),
            MetricKind::Mrr => reciprocal_rank(ranked, judgments, k),
            MetricKind::Precision => precision(ranked, judgments, k),
            MetricKind::Recall => recall(ranked, judgments, k),
            MetricKind::Ndcg => ndcg(ranked, judgments, k),
            MetricKind::Judged => judged_at_k(ranked, judgments, k),
        }
    }
}

impl fmt::Display for MetricSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.kind.name(), self.depth)
    }
}

impl FromStr for MetricSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let invalid = || Error::InvalidMetric(s.to_string());
        let lower = s.trim().to_ascii_lowercase();
        let (name, depth) = lower.split_once('@').ok_or_else(invalid)?;
        let kind = match name {
            "map" => MetricKind::Map,
            "mrr" => MetricKind::Mrr,
            "p" | "precision" => MetricKind::Precision,
            "recall" => MetricKind::Recall,
            "ndcg" => MetricKind::Ndcg,
            "judged" | "judge" => MetricKind::Judged,
            _ => return Err(invalid()),
        };
        let depth: usize = depth.parse().map_err(|_| invalid())?;
        MetricSpec::new(kind, depth).map_err(|_| invalid())
    }
}

impl TryFrom<String> for MetricSpec {
    type Error = Error;
    fn try_from(s: String) -> Result<Self, Error> {
        s.parse()
    }
}

impl From<MetricSpec> for String {
    fn from(m: MetricSpec) -> String {
        m.to_string()
    }
}

/// Per-topic and mean values of one metric for one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunEvaluation {
    pub metric: MetricSpec,
    pub per_topic: BTreeMap<TopicId, f64>,
    /// Mean over evaluable topics; 0 when there are none.
    pub mean: f64,
    pub evaluable_topics: usize,
}

impl RunEvaluation {
    /// True when no topic was evaluable and `mean` is a placeholder 0.
    pub fn no_evaluable_topics(&self) -> bool {
        self.evaluable_topics == 0
    }
}

/// Scores a run against qrels.
///
/// For relevance metrics every topic with at least one relevant document in
/// the qrels is evaluated; a topic the run did not retrieve for scores 0.
/// Topics without relevant documents are skipped. For `judged@K` every topic
/// the run retrieved for is evaluated against the qrels' judged pool.
pub fn evaluate_run<G: Relevance>(run: &Run, qrels: &PairMap<G>, metric: MetricSpec) -> RunEvaluation {
    let empty = BTreeMap::new();
    let topics: BTreeSet<&TopicId> = match metric.kind {
        MetricKind::Judged => run.topics().map(|(t, _)| t).collect(),
        _ => run.topics().map(|(t, _)| t).chain(qrels.topic_ids()).collect(),
    };

    let mut per_topic = BTreeMap::new();
    for topic in topics {
        let ranked: Vec<&str> = run
            .topic(topic.as_str())
            .unwrap_or_default()
            .iter()
            .map(|d| d.doc.as_str())
            .collect();
        let judgments = qrels.topic(topic.as_str()).unwrap_or(&empty);
        if let Some(v) = metric.score_topic(&ranked, judgments) {
            per_topic.insert(topic.clone(), v);
        }
    }

    let evaluable_topics = per_topic.len();
    let mean = if evaluable_topics == 0 {
        0.0
    } else {
        per_topic.values().sum::<f64>() / evaluable_topics as f64
    };
    RunEvaluation {
        metric,
        per_topic,
        mean,
        evaluable_topics,
    }
}
