//! Evaluation bias of judges over a curated system set.
//!
//! Every system run is scored under every judge's qrels and under the human
//! qrels ([`cross_evaluate`]). From the resulting matrix we derive how far
//! each judge moves its own system up the ranking, per-family value shifts,
//! and how much a baseline gets over- or under-estimated.
//!
//! The self-preference statistics (rank delta, value delta) are
//! operationalizations, not standard measures.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{evaluate_run, MetricSpec};
use crate::trec_io::{BinaryQrels, RunSet};

/// Row id reserved for the human qrels.
pub const HUMAN: &str = "human";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemInfo {
    pub family: String,
    #[serde(default)]
    pub display_name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgeInfo {
    /// The system built on this judge's scorer, if it is in the set.
    #[serde(default)]
    pub own_system: Option<String>,
    pub family: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemCatalog {
    pub systems: BTreeMap<String, SystemInfo>,
    pub judges: BTreeMap<String, JudgeInfo>,
}

impl SystemCatalog {
    pub fn validate(&self) -> Result<()> {
        if self.judges.contains_key(HUMAN) {
            return Err(Error::InvalidCatalog(format!("judge id {HUMAN:?} is reserved")));
        }
        for (id, s) in &self.systems {
            if s.family.trim().is_empty() {
                return Err(Error::InvalidCatalog(format!("system {id:?} has an empty family")));
            }
        }
        for (id, j) in &self.judges {
            if j.family.trim().is_empty() {
                return Err(Error::InvalidCatalog(format!("judge {id:?} has an empty family")));
            }
            if let Some(own) = &j.own_system {
                if !self.systems.contains_key(own) {
                    return Err(Error::InvalidCatalog(format!(
                        "judge {id:?} names unknown system {own:?}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let catalog: Self = serde_json::from_str(text).map_err(|e| Error::InvalidCatalog(e.to_string()))?;
        catalog.validate()?;
        Ok(catalog)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cell {
    pub value: f64,
    pub evaluable_topics: usize,
}

impl Cell {
    /// True when no topic had a relevant document under this row's qrels.
    pub fn no_evaluable_topics(&self) -> bool {
        self.evaluable_topics == 0
    }
}

/// Mean metric value for every (qrels source, system) pair. Row
/// [`HUMAN`] holds the human qrels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BiasMatrix {
    pub metric: MetricSpec,
    pub rows: BTreeMap<String, BTreeMap<String, Cell>>,
}

impl BiasMatrix {
    pub fn row_values(&self, row: &str) -> Option<BTreeMap<String, f64>> {
        self.rows
            .get(row)
            .map(|cells| cells.iter().map(|(s, c)| (s.clone(), c.value)).collect())
    }

    pub fn value(&self, row: &str, system: &str) -> Option<f64> {
        self.rows.get(row)?.get(system).map(|c| c.value)
    }

    /// Judge row ids, excluding [`HUMAN`].
    pub fn judges(&self) -> impl Iterator<Item = &String> {
        self.rows.keys().filter(|k| k.as_str() != HUMAN)
    }

    pub fn systems(&self) -> impl Iterator<Item = &String> {
        self.rows.get(HUMAN).into_iter().flat_map(|r| r.keys())
    }
}

/// Scores every run under the human qrels and every judge's qrels.
pub fn cross_evaluate(
    runs: &RunSet,
    judge_qrels: &BTreeMap<String, BinaryQrels>,
    human_qrels: &BinaryQrels,
    metric: MetricSpec,
) -> Result<BiasMatrix> {
    if runs.is_empty() {
        return Err(Error::NoRuns);
    }
    if human_qrels.is_empty() {
        return Err(Error::EmptyQrels(HUMAN.into()));
    }
    if judge_qrels.contains_key(HUMAN) {
        return Err(Error::InvalidCatalog(format!("judge id {HUMAN:?} is reserved")));
    }
    if let Some((id, _)) = judge_qrels.iter().find(|(_, q)| q.is_empty()) {
        return Err(Error::EmptyQrels(id.clone()));
    }

    let sources: Vec<(&str, &BinaryQrels)> = std::iter::once((HUMAN, human_qrels))
        .chain(judge_qrels.iter().map(|(id, q)| (id.as_str(), q)))
        .collect();
    let cells: Vec<(String, String, Cell)> = sources
        .par_iter()
        .flat_map(|&(row, qrels)| {
            runs.par_iter().map(move |(system, run)| {
                let e = evaluate_run(run, qrels, metric);
                (
                    row.to_string(),
                    system.clone(),
                    Cell {
                        value: e.mean,
                        evaluable_topics: e.evaluable_topics,
                    },
                )
            })
        })
        .collect();

    let mut rows: BTreeMap<String, BTreeMap<String, Cell>> = BTreeMap::new();
    for (row, system, cell) in cells {
        rows.entry(row).or_default().insert(system, cell);
    }
    Ok(BiasMatrix { metric, rows })
}

/// Rank 1 = largest value; exact ties share the mean of the ranks they span.
pub fn rank_systems(row: &BTreeMap<String, f64>) -> BTreeMap<String, f64> {
    let mut sorted: Vec<(&String, f64)> = row.iter().map(|(s, &v)| (s, v)).collect();
    sorted.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));
    let mut ranks = BTreeMap::new();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j].1 == sorted[i].1 {
            j += 1;
        }
        // positions i..j hold ranks i+1..=j
        let rank = (i + 1 + j) as f64 / 2.0;
        for (s, _) in &sorted[i..j] {
            ranks.insert((*s).clone(), rank);
        }
        i = j;
    }
    ranks
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfPreference {
    pub judge: String,
    pub own_system: String,
    pub rank_under_judge: f64,
    pub rank_under_human: f64,
    /// `rank_under_human - rank_under_judge`; positive = the judge ranks its
    /// own system higher than humans do.
    pub rank_delta: f64,
    pub value_under_judge: f64,
    pub value_under_human: f64,
    pub value_delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyDelta {
    pub judge_family: String,
    pub system_family: String,
    /// Mean of `value(judge, system) - value(human, system)` over the group.
    pub mean_value_delta: f64,
    /// Mean of `rank(human, system) - rank(judge, system)` over the group.
    pub mean_rank_delta: f64,
    pub cells: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaselineDelta {
    pub judge: String,
    pub judge_value: f64,
    pub human_value: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BiasReport {
    pub metric: MetricSpec,
    pub self_preference: Vec<SelfPreference>,
    pub family: Vec<FamilyDelta>,
    pub baseline: Option<String>,
    pub baseline_deltas: Vec<BaselineDelta>,
}

fn human_row(matrix: &BiasMatrix) -> Result<BTreeMap<String, f64>> {
    matrix
        .row_values(HUMAN)
        .ok_or_else(|| Error::UnknownJudge(HUMAN.into()))
}

/// Own-system rank shifts and family-level value shifts for every judge.
pub fn self_preference(
    matrix: &BiasMatrix,
    catalog: &SystemCatalog,
) -> Result<(Vec<SelfPreference>, Vec<FamilyDelta>)> {
    let human = human_row(matrix)?;
    let human_ranks = rank_systems(&human);

    let mut prefs = Vec::new();
    let mut groups: BTreeMap<(String, String), (f64, f64, usize)> = BTreeMap::new();
    for judge in matrix.judges() {
        let info = catalog
            .judges
            .get(judge)
            .ok_or_else(|| Error::UnknownJudge(judge.clone()))?;
        let row = matrix.row_values(judge).unwrap_or_default();
        let ranks = rank_systems(&row);

        if let Some(own) = &info.own_system {
            let (Some(&rj), Some(&rh)) = (ranks.get(own), human_ranks.get(own)) else {
                return Err(Error::UnknownSystem(own.clone()));
            };
            let (vj, vh) = (row[own], human[own]);
            prefs.push(SelfPreference {
                judge: judge.clone(),
                own_system: own.clone(),
                rank_under_judge: rj,
                rank_under_human: rh,
                rank_delta: rh - rj,
                value_under_judge: vj,
                value_under_human: vh,
                value_delta: vj - vh,
            });
        }

        for (system, &value) in &row {
            let sys = catalog
                .systems
                .get(system)
                .ok_or_else(|| Error::UnknownSystem(system.clone()))?;
            let entry = groups.entry((info.family.clone(), sys.family.clone())).or_default();
            entry.0 += value - human[system];
            entry.1 += human_ranks[system] - ranks[system];
            entry.2 += 1;
        }
    }

    let family = groups
        .into_iter()
        .map(|((judge_family, system_family), (dv, dr, n))| FamilyDelta {
            judge_family,
            system_family,
            mean_value_delta: dv / n as f64,
            mean_rank_delta: dr / n as f64,
            cells: n,
        })
        .collect();
    Ok((prefs, family))
}

/// `value(judge, baseline) - value(human, baseline)` per judge.
pub fn baseline_overestimation(matrix: &BiasMatrix, baseline: &str) -> Result<Vec<BaselineDelta>> {
    let human_value = matrix
        .value(HUMAN, baseline)
        .ok_or_else(|| Error::UnknownSystem(baseline.to_string()))?;
    matrix
        .judges()
        .map(|judge| {
            let judge_value = matrix
                .value(judge, baseline)
                .ok_or_else(|| Error::UnknownSystem(baseline.to_string()))?;
            Ok(BaselineDelta {
                judge: judge.clone(),
                judge_value,
                human_value,
                delta: judge_value - human_value,
            })
        })
        .collect()
}

pub fn bias_report(matrix: &BiasMatrix, catalog: &SystemCatalog, baseline: Option<&str>) -> Result<BiasReport> {
    let (self_preference, family) = self_preference(matrix, catalog)?;
    let baseline_deltas = match baseline {
        Some(b) => baseline_overestimation(matrix, b)?,
        None => Vec::new(),
    };
    Ok(BiasReport {
        metric: matrix.metric,
        self_preference,
        family,
        baseline: baseline.map(str::to_string),
        baseline_deltas,
    })
}

/// Fixed 4-decimal rendering with negative zero folded to zero.
pub fn fmt4(v: f64) -> String {
    let s = format!("{v:.4}");
    if s == "-0.0000" {
        "0.0000".into()
    } else {
        s
    }
}

impl fmt::Display for BiasReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "Self-preference ({}; rank delta = human rank - judge rank)",
            self.metric
        )?;
        writeln!(
            f,
            "{:<20} {:<20} {:>8} {:>8} {:>8} {:>10}",
            "judge", "own system", "r_judge", "r_human", "r_delta", "v_delta"
        )?;
        for p in &self.self_preference {
            writeln!(
                f,
                "{:<20} {:<20} {:>8} {:>8} {:>8} {:>10}",
                p.judge,
                p.own_system,
                fmt_rank(p.rank_under_judge),
                fmt_rank(p.rank_under_human),
                fmt_rank(p.rank_delta),
                fmt4(p.value_delta)
            )?;
        }
        writeln!(f)?;
        writeln!(f, "Family value deltas (judge - human)")?;
        writeln!(
            f,
            "{:<16} {:<16} {:>10} {:>10} {:>6}",
            "judge family", "system family", "v_delta", "r_delta", "cells"
        )?;
        for d in &self.family {
            writeln!(
                f,
                "{:<16} {:<16} {:>10} {:>10} {:>6}",
                d.judge_family,
                d.system_family,
                fmt4(d.mean_value_delta),
                fmt4(d.mean_rank_delta),
                d.cells
            )?;
        }
        if let Some(b) = &self.baseline {
            writeln!(f)?;
            writeln!(f, "Baseline {b} (judge - human)")?;
            writeln!(f, "{:<20} {:>10} {:>10} {:>10}", "judge", "judge", "human", "delta")?;
            for d in &self.baseline_deltas {
                writeln!(
                    f,
                    "{:<20} {:>10} {:>10} {:>10}",
                    d.judge,
                    fmt4(d.judge_value),
                    fmt4(d.human_value),
                    fmt4(d.delta)
                )?;
            }
        }
        Ok(())
    }
}

fn fmt_rank(r: f64) -> String {
    if r.fract() == 0.0 {
        format!("{r:.0}")
    } else {
        format!("{r:.1}")
    }
}

/// One point of a judge-vs-human scatter plot.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScatterRow {
    pub judge: String,
    pub system: String,
    pub family: String,
    pub human_value: f64,
    pub judge_value: f64,
    pub human_rank: f64,
    pub judge_rank: f64,
}

/// One row per (judge, system), ordered by judge then system.
pub fn scatter_data(matrix: &BiasMatrix, catalog: &SystemCatalog) -> Result<Vec<ScatterRow>> {
    let human = human_row(matrix)?;
    let human_ranks = rank_systems(&human);
    let mut rows = Vec::new();
    for judge in matrix.judges() {
        let values = matrix.row_values(judge).unwrap_or_default();
        let ranks = rank_systems(&values);
        for (system, &judge_value) in &values {
            let family = catalog
                .systems
                .get(system)
                .ok_or_else(|| Error::UnknownSystem(system.clone()))?
                .family
                .clone();
            rows.push(ScatterRow {
                judge: judge.clone(),
                system: system.clone(),
                family,
                human_value: human[system],
                judge_value,
                human_rank: human_ranks[system],
                judge_rank: ranks[system],
            });
        }
    }
    Ok(rows)
}

/// CSV with header `judge,system,family,human_value,judge_value,human_rank,judge_rank`.
pub fn write_scatter_csv<W: std::io::Write>(rows: &[ScatterRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record([
        "judge",
        "system",
        "family",
        "human_value",
        "judge_value",
        "human_rank",
        "judge_rank",
    ])
    .map_err(io)?;
    for r in rows {
        w.write_record([
            r.judge.clone(),
            r.system.clone(),
            r.family.clone(),
            fmt4(r.human_value),
            fmt4(r.judge_value),
            fmt_rank(r.human_rank),
            fmt_rank(r.judge_rank),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}
