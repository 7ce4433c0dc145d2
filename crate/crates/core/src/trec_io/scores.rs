use std::io::{BufRead, Write};

use super::{content_lines, parse_id, validate_token, DocId, PairMap, TopicId};
use crate::error::{Error, Result};

/// Marks an absent column in the score table.
pub const PLACEHOLDER: &str = "-";

/// Raw scorer output for one (query, document) pair.
///
/// At least one of `score` and `token` is present. `prob`, when present, is
/// in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRecord {
    score: Option<f64>,
    token: Option<String>,
    prob: Option<f64>,
}

impl ScoreRecord {
    pub fn new(score: Option<f64>, token: Option<String>, prob: Option<f64>) -> Result<Self> {
        if score.is_none() && token.is_none() {
            return Err(Error::InvalidRecord("needs a score or a token".into()));
        }
        if let Some(s) = score {
            if !s.is_finite() {
                return Err(Error::InvalidRecord(format!("score {s} is not finite")));
            }
        }
        if let Some(t) = &token {
            validate_token(t).map_err(|e| Error::InvalidRecord(e.to_string()))?;
        }
        if let Some(p) = prob {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidRecord(format!("probability {p} outside [0, 1]")));
            }
        }
        Ok(Self { score, token, prob })
    }

    pub fn scored(score: f64) -> Result<Self> {
        Self::new(Some(score), None, None)
    }

    pub fn score(&self) -> Option<f64> {
        self.score
    }

    pub fn token(&self) -> Option<&str> {
        self.token.as_deref()
    }

    pub fn prob(&self) -> Option<f64> {
        self.prob
    }
}

pub type ScoreTable = PairMap<ScoreRecord>;

fn optional(raw: &str) -> Option<&str> {
    (raw != PLACEHOLDER).then_some(raw)
}

fn parse_real(raw: &str, what: &str, lineno: usize) -> Result<f64> {
    raw.parse::<f64>()
        .ok()
        .filter(|v| !v.is_nan())
        .ok_or_else(|| Error::MalformedLine {
            line: lineno,
            reason: format!("{what} {raw:?} is not a number"),
        })
}

/// Parses the score-table TSV: `topic  doc  score  token  prob`, no header,
/// with `-` for an absent column.
pub fn parse_scores<R: BufRead>(reader: R) -> Result<ScoreTable> {
    let mut table = ScoreTable::new();
    for line in content_lines(reader) {
        let (lineno, line) = line?;
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 5 {
            return Err(Error::MalformedLine {
                line: lineno,
                reason: format!("expected 5 tab-separated columns, found {}", cols.len()),
            });
        }
        let topic: TopicId = parse_id(cols[0], lineno)?;
        let doc: DocId = parse_id(cols[1], lineno)?;

        let score = match optional(cols[2]) {
            Some(raw) => {
                let v = parse_real(raw, "score", lineno)?;
                if !v.is_finite() {
                    return Err(Error::MalformedLine {
                        line: lineno,
                        reason: format!("score {raw:?} is not finite"),
                    });
                }
                Some(v)
            }
            None => None,
        };
        let token = match optional(cols[3]) {
            Some(raw) => {
                validate_token(raw).map_err(|e| Error::MalformedLine {
                    line: lineno,
                    reason: e.to_string(),
                })?;
                Some(raw.to_string())
            }
            None => None,
        };
        let prob = match optional(cols[4]) {
            Some(raw) => {
                let p = parse_real(raw, "prob", lineno)?;
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::ProbOutOfRange { line: lineno, prob: p });
                }
                Some(p)
            }
            None => None,
        };
        if score.is_none() && token.is_none() {
            return Err(Error::MissingSignal { line: lineno });
        }

        let record = ScoreRecord { score, token, prob };
        if let Some(prev) = table.insert(topic.clone(), doc.clone(), record.clone()) {
            return Err(Error::DuplicatePair {
                line: lineno,
                topic: topic.to_string(),
                doc: doc.to_string(),
                first: format!("{prev:?}"),
                second: format!("{record:?}"),
            });
        }
    }
    Ok(table)
}

/// Writes the table in `(topic, doc)` order. Reals use the shortest
/// representation that parses back to the same value.
pub fn write_scores<W: Write>(table: &ScoreTable, mut out: W) -> std::io::Result<()> {
    for (topic, doc, r) in table.iter() {
        let score = r.score.map_or_else(|| PLACEHOLDER.to_string(), |s| s.to_string());
        let token = r.token.as_deref().unwrap_or(PLACEHOLDER);
        let prob = r.prob.map_or_else(|| PLACEHOLDER.to_string(), |p| p.to_string());
        writeln!(out, "{topic}\t{doc}\t{score}\t{token}\t{prob}")?;
    }
    Ok(())
}
