//! Scorer output to binary judgments.
//!
//! Two strategies: read the scorer's generated token through a
//! [`TokenMap`] ([`judge_direct`]), or label a pair relevant when its score
//! reaches a threshold ([`judge_threshold`]). Thresholds are chosen by a grid
//! [`sweep`] on one dataset and carried to another by a [`TransferPlan`].

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agreement::{
    evaluate_runs, kendall_tau, ConfusionTable, DegeneratePolicy, MissingPolicy, OrderingPair, TauVariant,
};
use crate::error::{Error, Result};
use crate::metrics::MetricSpec;
use crate::trec_io::{BinaryQrels, RunSet, ScoreTable};

/// Generated token to binary label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<String, u8>", into = "BTreeMap<String, u8>")]
pub struct TokenMap(BTreeMap<String, bool>);

impl TokenMap {
    pub fn new(entries: BTreeMap<String, bool>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidTokenMap("no tokens".into()));
        }
        Ok(Self(entries))
    }

    pub fn label(&self, token: &str) -> Option<bool> {
        self.0.get(token).copied()
    }
}

impl Default for TokenMap {
    /// `"true"` is relevant, `"false"` is not.
    fn default() -> Self {
        Self(BTreeMap::from([
            ("false".to_string(), false),
            ("true".to_string(), true),
        ]))
    }
}

impl TryFrom<BTreeMap<String, u8>> for TokenMap {
    type Error = Error;
    fn try_from(raw: BTreeMap<String, u8>) -> Result<Self> {
        let entries = raw
            .into_iter()
            .map(|(token, label)| match label {
                0 => Ok((token, false)),
                1 => Ok((token, true)),
                other => Err(Error::InvalidTokenMap(format!(
                    "label {other} for {token:?} is not 0 or 1"
                ))),
            })
            .collect::<Result<_>>()?;
        Self::new(entries)
    }
}

impl From<TokenMap> for BTreeMap<String, u8> {
    fn from(map: TokenMap) -> Self {
        map.0.into_iter().map(|(t, l)| (t, u8::from(l))).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Threshold(f64);

impl Threshold {
    pub fn new(theta: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::NonFiniteThreshold(theta));
        }
        Ok(Self(theta))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Threshold {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Threshold> for f64 {
    fn from(t: Threshold) -> f64 {
        t.0
    }
}

/// Label = generated token looked up in `map`. Scores and probabilities are
/// ignored.
pub fn judge_direct(scores: &ScoreTable, map: &TokenMap) -> Result<BinaryQrels> {
    scores.try_map(|topic, doc, record| {
        let token = record.token().ok_or_else(|| Error::MissingToken {
            topic: topic.to_string(),
            doc: doc.to_string(),
        })?;
        map.label(token).ok_or_else(|| Error::UnknownToken {
            topic: topic.to_string(),
            doc: doc.to_string(),
            token: token.to_string(),
        })
    })
}

/// Label = `score >= theta`.
pub fn judge_threshold(scores: &ScoreTable, theta: Threshold) -> Result<BinaryQrels> {
    scores.try_map(|topic, doc, record| {
        let score = record.score().ok_or_else(|| Error::MissingScore {
            topic: topic.to_string(),
            doc: doc.to_string(),
        })?;
        Ok(score >= theta.0)
    })
}

/// Strictly increasing, non-empty list of candidate thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdGrid(Vec<f64>);

impl ThresholdGrid {
    pub fn new(candidates: Vec<f64>) -> Result<Self> {
        if candidates.is_empty() {
            return Err(Error::EmptyGrid);
        }
        if let Some(v) = candidates.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!("{v} is not finite")));
        }
        if candidates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGrid("candidates must be strictly increasing".into()));
        }
        Ok(Self(candidates))
    }

    /// 0.00, 0.01, ..., 1.00 for probability-valued scores.
    pub fn probability() -> Self {
        Self((0..=100).map(|i| i as f64 / 100.0).collect())
    }

    /// -8.0, -7.9, ..., 8.0 for unbounded scores.
    pub fn unbounded() -> Self {
        Self((-80..=80).map(|i| i as f64 / 10.0).collect())
    }

    /// Evenly spaced points from `start` to `stop` inclusive. Points are
    /// rounded to the decimal precision of the inputs so that e.g. `0.3`
    /// lands on the double nearest 0.3 rather than `0.1 * 3`.
    pub fn range(start: &str, stop: &str, step: &str) -> Result<Self> {
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::InvalidGrid(format!("{s:?} is not a number")))
        };
        let (a, b, h) = (parse(start)?, parse(stop)?, parse(step)?);
        if h <= 0.0 || b < a {
            return Err(Error::InvalidGrid(format!("bad range {start}:{stop}:{step}")));
        }
        let decimals = [start, stop, step]
            .iter()
            .map(|s| s.trim().split_once('.').map_or(0, |(_, frac)| frac.len()))
            .max()
            .unwrap_or(0)
            .min(12) as i32;
        let scale = 10f64.powi(decimals);
        let count = ((b - a) / h + 1e-9).floor() as usize + 1;
        if count > 1_000_000 {
            return Err(Error::InvalidGrid(format!("{count} points is too many")));
        }
        let points = (0..count)
            .map(|i| ((a + i as f64 * h) * scale).round() / scale)
            .collect();
        Self::new(points)
    }

    pub fn points(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromStr for ThresholdGrid {
    type Err = Error;

    /// `probability`, `unbounded`, `start:stop:step`, or a comma list.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "probability" | "prob" => return Ok(Self::probability()),
            "unbounded" => return Ok(Self::unbounded()),
            "" => return Err(Error::EmptyGrid),
            _ => {}
        }
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() == 3 {
            return Self::range(parts[0], parts[1], parts[2]);
        }
        let points = s
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidGrid(format!("{p:?} is not a number")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(points)
    }
}

/// What a sweep maximizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum SweepObjective {
    /// Cohen's kappa against gold labels.
    Kappa,
    /// Kendall's tau between system orderings under gold and predicted qrels.
    Tau(MetricSpec),
}

impl fmt::Display for SweepObjective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepObjective::Kappa => f.write_str("kappa"),
            SweepObjective::Tau(m) => write!(f, "tau:{m}"),
        }
    }
}

impl FromStr for SweepObjective {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        if lower == "kappa" {
            return Ok(SweepObjective::Kappa);
        }
        match lower.split_once(':') {
            Some(("tau", metric)) => Ok(SweepObjective::Tau(metric.parse()?)),
            _ => Err(Error::InvalidMetric(s.to_string())),
        }
    }
}

impl TryFrom<String> for SweepObjective {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<SweepObjective> for String {
    fn from(o: SweepObjective) -> String {
        o.to_string()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SweepOptions {
    pub missing: MissingPolicy,
    pub degenerate: DegeneratePolicy,
    pub tau_variant: TauVariant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub theta: f64,
    /// `None` where the objective is undefined (tau with a constant ordering).
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub objective: SweepObjective,
    pub curve: Vec<SweepPoint>,
    pub selected: Threshold,
}

impl SweepResult {
    pub fn best_value(&self) -> Option<f64> {
        self.curve
            .iter()
            .find(|p| p.theta == self.selected.value())
            .and_then(|p| p.value)
    }
}

/// Smallest theta attaining the maximum defined value.
fn select(curve: &[SweepPoint]) -> Option<f64> {
    let mut best: Option<(f64, f64)> = None;
    for p in curve {
        if let Some(v) = p.value {
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((p.theta, v));
            }
        }
    }
    best.map(|(theta, _)| theta)
}

/// Evaluates `judge_threshold` at every grid point against `gold` and picks
/// the best threshold.
///
/// With [`SweepObjective::Kappa`] a degenerate confusion table at any grid
/// point fails the sweep (unless the options coerce it). With
/// [`SweepObjective::Tau`] a grid point where either ordering is constant is
/// recorded as undefined and skipped during selection.
pub fn sweep(
    scores: &ScoreTable,
    gold: &BinaryQrels,
    grid: &ThresholdGrid,
    objective: SweepObjective,
    runs: Option<&RunSet>,
    options: SweepOptions,
) -> Result<SweepResult> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }

    // Gold pairs paired with their scores; None = missing, counted as 0.
    let mut labelled = Vec::with_capacity(gold.len());
    for (topic, doc, &g) in gold.iter() {
        let score = match scores.get(topic.as_str(), doc.as_str()) {
            Some(record) => Some(record.score().ok_or_else(|| Error::MissingScore {
                topic: topic.to_string(),
                doc: doc.to_string(),
            })?),
            None if options.missing == MissingPolicy::AsZero => None,
            None => {
                return Err(Error::MissingPrediction {
                    topic: topic.to_string(),
                    doc: doc.to_string(),
                })
            }
        };
        labelled.push((score, g));
    }

    let values: Vec<Option<f64>> = match objective {
        SweepObjective::Kappa => grid
            .points()
            .par_iter()
            .map(|&theta| {
                let mut table = ConfusionTable::default();
                for &(score, g) in &labelled {
                    table.record(score.is_some_and(|s| s >= theta), g);
                }
                table.kappa(options.degenerate).map(Some)
            })
            .collect::<Result<_>>()?,
        SweepObjective::Tau(metric) => {
            let runs = runs.ok_or_else(|| Error::MissingRuns(objective.to_string()))?;
            if runs.len() < 2 {
                return Err(Error::TooFewSystems(runs.len()));
            }
            let reference: Vec<f64> = evaluate_runs(runs, gold, metric)
                .into_iter()
                .map(|(_, e)| e.mean)
                .collect();
            let systems: Vec<String> = runs.keys().cloned().collect();
            grid.points()
                .par_iter()
                .map(|&theta| {
                    let predicted = judge_threshold(scores, Threshold(theta))?;
                    let candidate = evaluate_runs(runs, &predicted, metric)
                        .into_iter()
                        .map(|(_, e)| e.mean)
                        .collect();
                    let pair = OrderingPair::new(systems.clone(), reference.clone(), candidate)?;
                    match kendall_tau(&pair, options.tau_variant) {
                        Ok(tau) => Ok(Some(tau)),
                        Err(Error::AllTied) => Ok(None),
                        Err(e) => Err(e),
                    }
                })
                .collect::<Result<_>>()?
        }
    };

    let curve: Vec<SweepPoint> = grid
        .points()
        .iter()
        .zip(values)
        .map(|(&theta, value)| SweepPoint { theta, value })
        .collect();
    let selected = select(&curve).ok_or(Error::DegenerateObjective)?;
    Ok(SweepResult {
        objective,
        curve,
        selected: Threshold(selected),
    })
}

/// Which dataset's selected threshold each target dataset uses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TransferPlan {
    pub assignments: BTreeMap<String, String>,
}

impl TransferPlan {
    pub const TRECDL_PRESET: &'static str = "trecdl-paper";

    /// TREC-DL: 19 and 20 swap, 21 and 22 swap, 23 borrows from 22.
    pub fn trecdl() -> Self {
        let pairs = [("20", "19"), ("19", "20"), ("22", "21"), ("21", "22"), ("23", "22")];
        Self {
            assignments: pairs.iter().map(|(t, s)| (t.to_string(), s.to_string())).collect(),
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        (name == Self::TRECDL_PRESET).then(Self::trecdl)
    }
}

impl Default for TransferPlan {
    fn default() -> Self {
        Self::trecdl()
    }
}

/// Gives every target the threshold selected on its source.
pub fn apply_transfer(
    plan: &TransferPlan,
    per_source: &BTreeMap<String, SweepResult>,
) -> Result<BTreeMap<String, Threshold>> {
    plan.assignments
        .iter()
        .map(|(target, source)| {
            let result = per_source.get(source).ok_or_else(|| Error::MissingSource {
                target: target.clone(),
                source_id: source.clone(),
            })?;
            Ok((target.clone(), result.selected))
        })
        .collect()
}
