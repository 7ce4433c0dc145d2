use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use super::{DocId, TopicId};

/// Values keyed by `(topic, doc)`, grouped by topic.
///
/// Iteration is ordered by topic, then document, so anything derived from a
/// `PairMap` is deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct PairMap<V> {
    topics: BTreeMap<TopicId, BTreeMap<DocId, V>>,
}

impl<V> Default for PairMap<V> {
    fn default() -> Self {
        Self {
            topics: BTreeMap::new(),
        }
    }
}

impl<V> PairMap<V> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts a value, returning the previous one for the pair if any.
    pub fn insert(&mut self, topic: TopicId, doc: DocId, value: V) -> Option<V> {
        match self.topics.entry(topic).or_default().entry(doc) {
            Entry::Occupied(mut e) => Some(std::mem::replace(e.get_mut(), value)),
            Entry::Vacant(e) => {
                e.insert(value);
                None
            }
        }
    }

    pub fn get(&self, topic: &str, doc: &str) -> Option<&V> {
        self.topics.get(topic)?.get(doc)
    }

    pub fn contains(&self, topic: &str, doc: &str) -> bool {
        self.get(topic, doc).is_some()
    }

    /// All judgments for one topic.
    pub fn topic(&self, topic: &str) -> Option<&BTreeMap<DocId, V>> {
        self.topics.get(topic)
    }

    pub fn topics(&self) -> impl Iterator<Item = (&TopicId, &BTreeMap<DocId, V>)> {
        self.topics.iter()
    }

    pub fn topic_ids(&self) -> impl Iterator<Item = &TopicId> {
        self.topics.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&TopicId, &DocId, &V)> {
        self.topics
            .iter()
            .flat_map(|(t, docs)| docs.iter().map(move |(d, v)| (t, d, v)))
    }

    pub fn len(&self) -> usize {
        self.topics.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.topics.values().all(BTreeMap::is_empty)
    }

    /// Applies `f` to every value, preserving the key set exactly.
    pub fn map_values<U>(&self, mut f: impl FnMut(&V) -> U) -> PairMap<U> {
        PairMap {
            topics: self
                .topics
                .iter()
                .map(|(t, docs)| (t.clone(), docs.iter().map(|(d, v)| (d.clone(), f(v))).collect()))
                .collect(),
        }
    }

    /// Like [`map_values`](Self::map_values) but fallible; `f` also sees the key.
    pub fn try_map<U, E>(&self, mut f: impl FnMut(&TopicId, &DocId, &V) -> Result<U, E>) -> Result<PairMap<U>, E> {
        let mut topics = BTreeMap::new();
        for (t, docs) in &self.topics {
            let mut out = BTreeMap::new();
            for (d, v) in docs {
                out.insert(d.clone(), f(t, d, v)?);
            }
            topics.insert(t.clone(), out);
        }
        Ok(PairMap { topics })
    }
}

impl<V> FromIterator<(TopicId, DocId, V)> for PairMap<V> {
    fn from_iter<I: IntoIterator<Item = (TopicId, DocId, V)>>(iter: I) -> Self {
        let mut map = PairMap::new();
        for (t, d, v) in iter {
            map.insert(t, d, v);
        }
        map
    }
}
