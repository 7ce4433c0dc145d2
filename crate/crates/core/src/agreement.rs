//! Judge quality: Cohen's kappa against human labels and Kendall's tau
//! between system orderings.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrics::{evaluate_run, MetricSpec, RunEvaluation};
use crate::trec_io::{BinaryQrels, RunSet};

/// Prediction-vs-gold counts, positive = relevant.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ConfusionTable {
    pub true_pos: u64,
    pub false_pos: u64,
    pub false_neg: u64,
    pub true_neg: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum MissingPolicy {
    /// A gold pair without a prediction is an error.
    #[default]
    Error,
    /// A gold pair without a prediction counts as predicted non-relevant.
    AsZero,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum DegeneratePolicy {
    /// Expected agreement of 1 is an error.
    #[default]
    Error,
    /// Expected agreement of 1 yields 1.0 if observed agreement is 1, else 0.0.
    One,
}

impl ConfusionTable {
    pub fn total(&self) -> u64 {
        self.true_pos + self.false_pos + self.false_neg + self.true_neg
    }

    pub fn record(&mut self, predicted: bool, gold: bool) {
        match (predicted, gold) {
            (true, true) => self.true_pos += 1,
            (true, false) => self.false_pos += 1,
            (false, true) => self.false_neg += 1,
            (false, false) => self.true_neg += 1,
        }
    }

    /// Cohen's kappa: `(po - pe) / (1 - pe)`.
    pub fn kappa(&self, policy: DegeneratePolicy) -> Result<f64> {
        let n = self.total();
        if n == 0 {
            return Err(Error::EmptyConfusion);
        }
        let (tp, fp, fn_, tn) = (
            self.true_pos as u128,
            self.false_pos as u128,
            self.false_neg as u128,
            self.true_neg as u128,
        );
        let chance = (tp + fn_) * (tp + fp) + (fp + tn) * (fn_ + tn);
        let n2 = (n as u128) * (n as u128);
        // exact integer test for pe == 1
        if chance == n2 {
            return match policy {
                DegeneratePolicy::Error => Err(Error::DegenerateMarginals),
                DegeneratePolicy::One if tp + tn == n as u128 => Ok(1.0),
                DegeneratePolicy::One => Ok(0.0),
            };
        }
        let nf = n as f64;
        let po = (tp + tn) as f64 / nf;
        let pe = chance as f64 / (nf * nf);
        Ok((po - pe) / (1.0 - pe))
    }
}

/// Tallies predictions over the gold key set.
pub fn confusion(pred: &BinaryQrels, gold: &BinaryQrels, policy: MissingPolicy) -> Result<ConfusionTable> {
    let mut table = ConfusionTable::default();
    for (topic, doc, &g) in gold.iter() {
        let p = match (pred.get(topic.as_str(), doc.as_str()), policy) {
            (Some(&p), _) => p,
            (None, MissingPolicy::AsZero) => false,
            (None, MissingPolicy::Error) => {
                return Err(Error::MissingPrediction {
                    topic: topic.to_string(),
                    doc: doc.to_string(),
                })
            }
        };
        table.record(p, g);
    }
    Ok(table)
}

/// Cohen's kappa of predicted labels against gold labels.
pub fn cohen_kappa(table: &ConfusionTable, policy: DegeneratePolicy) -> Result<f64> {
    table.kappa(policy)
}

/// Metric values for the same systems under two sets of judgments.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderingPair {
    systems: Vec<String>,
    values_a: Vec<f64>,
    values_b: Vec<f64>,
}

impl OrderingPair {
    pub fn new(systems: Vec<String>, values_a: Vec<f64>, values_b: Vec<f64>) -> Result<Self> {
        if values_a.len() != values_b.len() {
            return Err(Error::LengthMismatch(values_a.len(), values_b.len()));
        }
        if systems.len() != values_a.len() {
            return Err(Error::LengthMismatch(systems.len(), values_a.len()));
        }
        if values_a.len() < 2 {
            return Err(Error::TooFewSystems(values_a.len()));
        }
        if let Some(v) = values_a.iter().chain(&values_b).find(|v| !v.is_finite()) {
            return Err(Error::InvalidRecord(format!("ordering value {v} is not finite")));
        }
        Ok(Self {
            systems,
            values_a,
            values_b,
        })
    }

    /// Pair with anonymous systems, for when only the values matter.
    pub fn from_values(values_a: Vec<f64>, values_b: Vec<f64>) -> Result<Self> {
        let systems = (0..values_a.len()).map(|i| i.to_string()).collect();
        Self::new(systems, values_a, values_b)
    }

    pub fn systems(&self) -> &[String] {
        &self.systems
    }

    pub fn values_a(&self) -> &[f64] {
        &self.values_a
    }

    pub fn values_b(&self) -> &[f64] {
        &self.values_b
    }

    pub fn len(&self) -> usize {
        self.values_a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values_a.is_empty()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub enum TauVariant {
    /// `(C - D) / (n(n-1)/2)`, ties ignored.
    A,
    /// Tie-corrected denominator.
    #[default]
    B,
}

/// Concordance counts from Knight's O(n log n) method.
struct PairCounts {
    total: u64,
    tied_a: u64,
    tied_b: u64,
    /// concordant minus discordant
    net: i64,
}

fn cmp_finite(a: f64, b: f64) -> Ordering {
    a.partial_cmp(&b).unwrap_or(Ordering::Equal)
}

fn tied_pairs(sorted: &[f64]) -> u64 {
    let mut ties = 0u64;
    let mut run = 1u64;
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            ties += run * (run - 1) / 2;
            run = 1;
        }
    }
    ties + run * (run - 1) / 2
}

/// Merge sort on `b`, returning the number of strict inversions.
fn sort_counting_swaps(values: &mut Vec<f64>) -> u64 {
    let n = values.len();
    let mut buf = vec![0.0; n];
    let mut swaps = 0u64;
    let mut width = 1;
    while width < n {
        let mut start = 0;
        while start < n {
            let mid = (start + width).min(n);
            let end = (start + 2 * width).min(n);
            let (mut i, mut j, mut k) = (start, mid, start);
            while i < mid && j < end {
                if values[j] < values[i] {
                    buf[k] = values[j];
                    swaps += (mid - i) as u64;
                    j += 1;
                } else {
                    buf[k] = values[i];
                    i += 1;
                }
                k += 1;
            }
            buf[k..k + (mid - i)].copy_from_slice(&values[i..mid]);
            k += mid - i;
            buf[k..k + (end - j)].copy_from_slice(&values[j..end]);
            start = end;
        }
        std::mem::swap(values, &mut buf);
        width *= 2;
    }
    swaps
}

fn pair_counts(a: &[f64], b: &[f64]) -> PairCounts {
    let n = a.len() as u64;
    // +0.0 folds -0.0 into 0.0 so equality and ordering agree
    let mut pairs: Vec<(f64, f64)> = a.iter().zip(b).map(|(&x, &y)| (x + 0.0, y + 0.0)).collect();
    pairs.sort_by(|p, q| cmp_finite(p.0, q.0).then(cmp_finite(p.1, q.1)));

    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let tied_a = tied_pairs(&xs);

    let mut tied_both = 0u64;
    let mut run = 1u64;
    for w in pairs.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            tied_both += run * (run - 1) / 2;
            run = 1;
        }
    }
    tied_both += run * (run - 1) / 2;

    let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let swaps = sort_counting_swaps(&mut ys);
    let tied_b = tied_pairs(&ys);

    let total = n * (n - 1) / 2;
    let net = total as i64 - tied_a as i64 - tied_b as i64 + tied_both as i64 - 2 * swaps as i64;
    PairCounts {
        total,
        tied_a,
        tied_b,
        net,
    }
}

/// Kendall's tau between the two value lists of `pair`.
pub fn kendall_tau(pair: &OrderingPair, variant: TauVariant) -> Result<f64> {
    let c = pair_counts(&pair.values_a, &pair.values_b);
    match variant {
        TauVariant::A => Ok(c.net as f64 / c.total as f64),
        TauVariant::B => {
            let da = c.total - c.tied_a;
            let db = c.total - c.tied_b;
            if da == 0 || db == 0 {
                return Err(Error::AllTied);
            }
            let tau = c.net as f64 / ((da as f64) * (db as f64)).sqrt();
            Ok(tau.clamp(-1.0, 1.0))
        }
    }
}

/// Kendall's tau-b.
pub fn kendall_tau_b(pair: &OrderingPair) -> Result<f64> {
    kendall_tau(pair, TauVariant::B)
}

/// Systems sorted by mean descending; equal means fall back to id order.
pub fn system_ordering(evals: &[(String, RunEvaluation)]) -> Result<Vec<(String, f64)>> {
    if let Some((_, first)) = evals.first() {
        if let Some((_, other)) = evals.iter().find(|(_, e)| e.metric != first.metric) {
            return Err(Error::MetricMismatch(
                first.metric.to_string(),
                other.metric.to_string(),
            ));
        }
    }
    let mut order: Vec<(String, f64)> = evals.iter().map(|(id, e)| (id.clone(), e.mean)).collect();
    order.sort_by(|a, b| cmp_finite(b.1, a.1).then_with(|| a.0.cmp(&b.0)));
    Ok(order)
}

/// Tau between system orderings induced by reference and candidate qrels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankCorrelation {
    pub metric: MetricSpec,
    pub tau: f64,
    pub n_systems: usize,
    pub reference: Vec<(String, f64)>,
    pub candidate: Vec<(String, f64)>,
}

/// Means of every run under `qrels`, in run-set order.
pub fn evaluate_runs(runs: &RunSet, qrels: &BinaryQrels, metric: MetricSpec) -> Vec<(String, RunEvaluation)> {
    runs.par_iter()
        .map(|(id, run)| (id.clone(), evaluate_run(run, qrels, metric)))
        .collect()
}

/// Evaluates every run under both qrels and correlates the two orderings.
pub fn rank_correlation(
    runs: &RunSet,
    reference: &BinaryQrels,
    candidate: &BinaryQrels,
    metric: MetricSpec,
    variant: TauVariant,
) -> Result<RankCorrelation> {
    let ref_evals = evaluate_runs(runs, reference, metric);
    let cand_evals = evaluate_runs(runs, candidate, metric);
    let pair = OrderingPair::new(
        ref_evals.iter().map(|(id, _)| id.clone()).collect(),
        ref_evals.iter().map(|(_, e)| e.mean).collect(),
        cand_evals.iter().map(|(_, e)| e.mean).collect(),
    )?;
    Ok(RankCorrelation {
        metric,
        tau: kendall_tau(&pair, variant)?,
        n_systems: pair.len(),
        reference: system_ordering(&ref_evals)?,
        candidate: system_ordering(&cand_evals)?,
    })
}
