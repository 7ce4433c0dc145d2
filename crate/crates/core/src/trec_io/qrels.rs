use std::io::{BufRead, Write};

use super::{content_lines, fields, parse_id, DocId, PairMap, TopicId};
use crate::error::{Error, Result};

/// Human or judge relevance grades. TREC-DL uses 0..=3, but any
/// non-negative integer loads.
pub type GradedQrels = PairMap<u32>;

/// Binary relevance labels (`true` = relevant).
pub type BinaryQrels = PairMap<bool>;

/// TREC-DL passage convention: grades 2 and 3 count as relevant.
pub const DEFAULT_CUTOFF: u32 = 2;

/// A judgment value usable by the metrics: a gain, where any positive gain
/// means relevant.
pub trait Relevance: Copy + Send + Sync {
    fn gain(self) -> u32;

    fn is_relevant(self) -> bool {
        self.gain() > 0
    }
}

impl Relevance for u32 {
    fn gain(self) -> u32 {
        self
    }
}

impl Relevance for bool {
    fn gain(self) -> u32 {
        u32::from(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DuplicatePolicy {
    /// Conflicting grades for the same pair are an error.
    #[default]
    Error,
    /// The last line for a pair wins.
    LastWins,
}

/// Parses TREC qrels (`topic iteration doc grade`). The iteration field is
/// ignored. Repeated identical lines are accepted.
pub fn parse_qrels<R: BufRead>(reader: R, policy: DuplicatePolicy) -> Result<GradedQrels> {
    let mut qrels = GradedQrels::new();
    for line in content_lines(reader) {
        let (lineno, line) = line?;
        let parts = fields(&line, lineno, 4)?;
        let topic: TopicId = parse_id(parts[0], lineno)?;
        let doc: DocId = parse_id(parts[2], lineno)?;
        let grade: u32 = parts[3].parse().map_err(|_| Error::MalformedLine {
            line: lineno,
            reason: format!("grade {:?} is not a non-negative integer", parts[3]),
        })?;
        if let Some(prev) = qrels.insert(topic.clone(), doc.clone(), grade) {
            if prev != grade && policy == DuplicatePolicy::Error {
                return Err(Error::DuplicatePair {
                    line: lineno,
                    topic: topic.to_string(),
                    doc: doc.to_string(),
                    first: prev.to_string(),
                    second: grade.to_string(),
                });
            }
        }
    }
    Ok(qrels)
}

/// Reads a qrels file as binary labels: `grade >= cutoff` is relevant.
/// With `cutoff = 1` this inverts [`write_qrels`] on binary input.
pub fn parse_binary_qrels<R: BufRead>(reader: R, cutoff: u32, policy: DuplicatePolicy) -> Result<BinaryQrels> {
    Ok(binarize(&parse_qrels(reader, policy)?, cutoff))
}

/// `label = grade >= cutoff`, keeping the key set exactly.
pub fn binarize(qrels: &GradedQrels, cutoff: u32) -> BinaryQrels {
    qrels.map_values(|&g| g >= cutoff)
}

/// Writes `topic 0 doc grade` lines sorted by topic then doc, LF-terminated.
pub fn write_qrels<G: Relevance, W: Write>(qrels: &PairMap<G>, mut out: W) -> std::io::Result<()> {
    for (topic, doc, g) in qrels.iter() {
        writeln!(out, "{topic} 0 {doc} {}", g.gain())?;
    }
    Ok(())
}
