//! On-disk formats: TREC qrels, TREC runs, and the score-table TSV.
//!
//! Every parser reads a [`BufRead`](std::io::BufRead), tolerates blank lines
//! and CRLF endings, and reports errors with the 1-based line number.
//! Structures are immutable once built and can be shared across threads.

mod pairs;
mod qrels;
mod run;
mod scores;

use std::borrow::Borrow;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use pairs::PairMap;
pub use qrels::{
    binarize, parse_binary_qrels, parse_qrels, write_qrels, BinaryQrels, DuplicatePolicy, GradedQrels, Relevance,
    DEFAULT_CUTOFF,
};
pub use run::{parse_run, write_run, Run, RunSet, ScoredDoc};
pub use scores::{parse_scores, write_scores, ScoreRecord, ScoreTable, PLACEHOLDER};

fn validate_token(value: &str) -> Result<()> {
    if value.is_empty() || value.chars().any(char::is_whitespace) {
        return Err(Error::InvalidId(value.to_string()));
    }
    Ok(())
}

macro_rules! token_id {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(try_from = "String", into = "String")]
        pub struct $name(String);

        impl $name {
            pub fn new(value: impl Into<String>) -> Result<Self> {
                let value = value.into();
                validate_token(&value)?;
                Ok(Self(value))
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl TryFrom<String> for $name {
            type Error = Error;
            fn try_from(value: String) -> Result<Self> {
                Self::new(value)
            }
        }

        impl TryFrom<&str> for $name {
            type Error = Error;
            fn try_from(value: &str) -> Result<Self> {
                Self::new(value)
            }
        }

        impl From<$name> for String {
            fn from(id: $name) -> String {
                id.0
            }
        }

        impl Borrow<str> for $name {
            fn borrow(&self) -> &str {
                &self.0
            }
        }

        impl AsRef<str> for $name {
            fn as_ref(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }
    };
}

token_id!(
    /// Query identifier. Non-empty, no whitespace.
    TopicId
);
token_id!(
    /// Document identifier. Non-empty, no whitespace. Ordering is bytewise,
    /// which is what trec_eval's `strcmp` tie-break uses.
    DocId
);

/// Splits a line on whitespace and checks the field count.
fn fields(line: &str, lineno: usize, expected: usize) -> Result<Vec<&str>> {
    let parts: Vec<&str> = line.split_whitespace().collect();
    if parts.len() != expected {
        return Err(Error::MalformedLine {
            line: lineno,
            reason: format!("expected {expected} fields, found {}", parts.len()),
        });
    }
    Ok(parts)
}

fn parse_id<T>(raw: &str, lineno: usize) -> Result<T>
where
    T: TryFrom<String, Error = Error>,
{
    T::try_from(raw.to_string()).map_err(|e| Error::MalformedLine {
        line: lineno,
        reason: e.to_string(),
    })
}

/// Reads lines, yielding `(lineno, line)` for the non-blank ones with any
/// trailing `\r` removed.
fn content_lines<R: std::io::BufRead>(reader: R) -> impl Iterator<Item = Result<(usize, String)>> {
    reader.lines().enumerate().filter_map(|(i, line)| match line {
        Err(e) => Some(Err(Error::MalformedLine {
            line: i + 1,
            reason: e.to_string(),
        })),
        Ok(mut l) => {
            if l.ends_with('\r') {
                l.pop();
            }
            if l.trim().is_empty() {
                None
            } else {
                Some(Ok((i + 1, l)))
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_reject_whitespace_and_empty() {
        assert!(TopicId::new("q1").is_ok());
        assert!(TopicId::new("").is_err());
        assert!(DocId::new("d 1").is_err());
        assert!(DocId::new("d\t1").is_err());
    }

    #[test]
    fn doc_ids_order_bytewise() {
        let mut ids = [
            DocId::new("dB").unwrap(),
            DocId::new("da").unwrap(),
            DocId::new("dA").unwrap(),
        ];
        ids.sort();
        let got: Vec<&str> = ids.iter().map(DocId::as_str).collect();
        assert_eq!(got, ["dA", "dB", "da"]);
    }

    #[test]
    fn ids_deserialize_with_validation() {
        let ok: TopicId = serde_json::from_str("\"19\"").unwrap();
        assert_eq!(ok.as_str(), "19");
        assert!(serde_json::from_str::<TopicId>("\"a b\"").is_err());
    }
}
