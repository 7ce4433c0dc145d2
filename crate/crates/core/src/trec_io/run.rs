use std::collections::{BTreeMap, HashSet};
use std::io::{BufRead, Write};

use super::{content_lines, fields, parse_id, DocId, TopicId};
use crate::error::{Error, Result};
use crate::metrics::canonical_sort;

/// Systems keyed by id (typically the run file's stem).
pub type RunSet = BTreeMap<String, Run>;

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredDoc {
    pub doc: DocId,
    pub score: f64,
}

/// One system's ranked output. Each topic's list is held in canonical order
/// (score descending, doc id descending), independent of input order.
#[derive(Debug, Clone, PartialEq)]
pub struct Run {
    tag: String,
    topics: BTreeMap<TopicId, Vec<ScoredDoc>>,
}

impl Run {
    /// Builds a run from unordered `(topic, doc, score)` entries.
    pub fn from_entries(
        tag: impl Into<String>,
        entries: impl IntoIterator<Item = (TopicId, DocId, f64)>,
    ) -> Result<Self> {
        let mut builder = RunBuilder::default();
        for (i, (topic, doc, score)) in entries.into_iter().enumerate() {
            builder.push(i + 1, topic, doc, score)?;
        }
        Ok(builder.finish(tag.into()))
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    /// The ranked list for a topic.
    pub fn topic(&self, topic: &str) -> Option<&[ScoredDoc]> {
        self.topics.get(topic).map(Vec::as_slice)
    }

    pub fn topics(&self) -> impl Iterator<Item = (&TopicId, &[ScoredDoc])> {
        self.topics.iter().map(|(t, docs)| (t, docs.as_slice()))
    }

    pub fn topic_count(&self) -> usize {
        self.topics.len()
    }

    pub fn is_empty(&self) -> bool {
        self.topics.values().all(Vec::is_empty)
    }
}

#[derive(Default)]
struct RunBuilder {
    topics: BTreeMap<TopicId, Vec<ScoredDoc>>,
    seen: HashSet<(TopicId, DocId)>,
}

impl RunBuilder {
    fn push(&mut self, lineno: usize, topic: TopicId, doc: DocId, score: f64) -> Result<()> {
        if !score.is_finite() {
            return Err(Error::MalformedLine {
                line: lineno,
                reason: format!("score {score} is not finite"),
            });
        }
        if !self.seen.insert((topic.clone(), doc.clone())) {
            return Err(Error::DuplicateDoc {
                line: lineno,
                topic: topic.to_string(),
                doc: doc.to_string(),
            });
        }
        self.topics.entry(topic).or_default().push(ScoredDoc { doc, score });
        Ok(())
    }

    fn finish(mut self, tag: String) -> Run {
        for docs in self.topics.values_mut() {
            canonical_sort(docs);
        }
        Run {
            tag,
            topics: self.topics,
        }
    }
}

/// Parses a TREC run (`topic Q0 doc rank score tag`). The rank column is
/// ignored; documents are re-sorted by score. Every line must carry the same
/// tag.
pub fn parse_run<R: BufRead>(reader: R) -> Result<Run> {
    let mut builder = RunBuilder::default();
    let mut tag: Option<String> = None;
    for line in content_lines(reader) {
        let (lineno, line) = line?;
        let parts = fields(&line, lineno, 6)?;
        let topic: TopicId = parse_id(parts[0], lineno)?;
        let doc: DocId = parse_id(parts[2], lineno)?;
        let score: f64 = parts[4].parse().map_err(|_| Error::MalformedLine {
            line: lineno,
            reason: format!("score {:?} is not a number", parts[4]),
        })?;
        match &tag {
            None => tag = Some(parts[5].to_string()),
            Some(t) if t != parts[5] => {
                return Err(Error::InconsistentTag {
                    line: lineno,
                    expected: t.clone(),
                    found: parts[5].to_string(),
                })
            }
            Some(_) => {}
        }
        builder.push(lineno, topic, doc, score)?;
    }
    Ok(builder.finish(tag.unwrap_or_default()))
}

/// Writes the run in canonical order with ranks renumbered from 1.
pub fn write_run<W: Write>(run: &Run, mut out: W) -> std::io::Result<()> {
    let tag = if run.tag.is_empty() { "run" } else { &run.tag };
    for (topic, docs) in &run.topics {
        for (i, d) in docs.iter().enumerate() {
            writeln!(out, "{topic} Q0 {} {} {} {tag}", d.doc, i + 1, d.score)?;
        }
    }
    Ok(())
}
