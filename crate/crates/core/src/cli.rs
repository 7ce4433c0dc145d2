//! Command-line front end.
//!
//! Every verb reads its inputs fully, computes, and only then writes its
//! outputs (each through a temp file renamed into place), so a failed command
//! leaves nothing behind. Exit codes: 0 success, 1 domain error, 2 usage
//! error.
//!
//! `--config file.json` supplies flags as a JSON object (`{"theta": 0.5,
//! "missing-as-zero": true}`); flags given on the command line win.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context};
use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

use crate::adapt::{
    apply_transfer, judge_direct, judge_threshold, sweep, SweepObjective, SweepOptions, SweepResult, Threshold,
    ThresholdGrid, TokenMap, TransferPlan,
};
use crate::agreement::{confusion, rank_correlation, DegeneratePolicy, MissingPolicy, TauVariant};
use crate::bias::{bias_report, cross_evaluate, fmt4, scatter_data, write_scatter_csv, SystemCatalog};
use crate::metrics::{evaluate_run, MetricSpec, RunEvaluation};
use crate::trec_io::{
    binarize, parse_qrels, parse_run, parse_scores, write_qrels, write_run, write_scores, BinaryQrels, DuplicatePolicy,
    GradedQrels, Run, RunSet, ScoreTable, DEFAULT_CUTOFF,
};

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "JUDGEKIT_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "judgekit",
    version,
    about = "Relevance judges from pointwise scorers: judge, sweep, evaluate, agree, correlate, and measure bias",
    args_override_self = true
)]
pub struct Cli {
    /// JSON file supplying any of the verb's flags
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Turn a score table into binary qrels
    Judge(JudgeArgs),
    /// Sweep thresholds against gold qrels and select the best one
    Sweep(SweepArgs),
    /// Carry selected thresholds across datasets
    Transfer(TransferArgs),
    /// Evaluate a run against qrels (trec_eval conventions)
    Eval(EvalArgs),
    /// Cohen's kappa between predicted and gold qrels
    Agree(AgreeArgs),
    /// Kendall's tau between system orderings under gold and predicted qrels
    Rankcorr(RankcorrArgs),
    /// Cross-evaluate systems under every judge and report bias
    Bias(BiasArgs),
    /// Binarize qrels or canonicalize runs and score tables
    Convert(ConvertArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Strategy {
    Direct,
    Threshold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Degenerate {
    Error,
    One,
}

impl From<Degenerate> for DegeneratePolicy {
    fn from(d: Degenerate) -> Self {
        match d {
            Degenerate::Error => DegeneratePolicy::Error,
            Degenerate::One => DegeneratePolicy::One,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Tau {
    A,
    B,
}

impl From<Tau> for TauVariant {
    fn from(t: Tau) -> Self {
        match t {
            Tau::A => TauVariant::A,
            Tau::B => TauVariant::B,
        }
    }
}

/// Comma-separated metric names.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricList(pub Vec<MetricSpec>);

impl FromStr for MetricList {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split(',').map(str::parse).collect::<Result<_, _>>().map(MetricList)
    }
}

#[derive(Debug, Args)]
pub struct DuplicateArgs {
    /// Let the last line win when a qrels pair repeats with a different grade
    #[arg(long)]
    pub last_wins: bool,
}

impl DuplicateArgs {
    fn policy(&self) -> DuplicatePolicy {
        if self.last_wins {
            DuplicatePolicy::LastWins
        } else {
            DuplicatePolicy::Error
        }
    }
}

#[derive(Debug, Args)]
pub struct JudgeArgs {
    #[arg(long, value_name = "FILE")]
    pub scores: PathBuf,
    #[arg(long, value_enum)]
    pub strategy: Strategy,
    /// JSON object mapping tokens to 0/1 (default: true=1, false=0)
    #[arg(long, value_name = "FILE")]
    pub token_map: Option<PathBuf>,
    /// Fixed threshold for the threshold strategy
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    /// Thresholds produced by `transfer`; pick the entry for --dataset
    #[arg(long, value_name = "FILE", requires = "dataset", conflicts_with = "theta")]
    pub transfer: Option<PathBuf>,
    #[arg(long)]
    pub dataset: Option<String>,
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_name = "FILE")]
    pub scores: PathBuf,
    /// Gold qrels
    #[arg(long, value_name = "FILE")]
    pub gold: PathBuf,
    /// Grades at or above this are relevant in the gold file
    #[arg(long, default_value_t = 1)]
    pub gold_cutoff: u32,
    /// `probability`, `unbounded`, `start:stop:step`, or a comma list
    #[arg(long, default_value = "probability", allow_hyphen_values = true)]
    pub grid: ThresholdGrid,
    /// `kappa` or `tau:<metric>`, e.g. tau:map@100
    #[arg(long, default_value = "kappa")]
    pub objective: SweepObjective,
    /// Directory of `<system>.run` files (tau objectives only)
    #[arg(long, value_name = "DIR")]
    pub runs: Option<PathBuf>,
    #[arg(long)]
    pub missing_as_zero: bool,
    #[arg(long, value_enum, default_value = "error")]
    pub degenerate: Degenerate,
    #[arg(long, value_enum, default_value = "b")]
    pub tau: Tau,
    /// Sweep result (JSON)
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// Also write the curve as TSV
    #[arg(long, value_name = "FILE")]
    pub curve: Option<PathBuf>,
    #[command(flatten)]
    pub dup: DuplicateArgs,
}

#[derive(Debug, Args)]
pub struct TransferArgs {
    /// Directory of `<dataset>.sweep.json` files written by `sweep`
    #[arg(long, value_name = "DIR")]
    pub sweeps: PathBuf,
    /// Preset name (`trecdl-paper`) or a JSON file {target: source}
    #[arg(long, default_value = TransferPlan::TRECDL_PRESET)]
    pub plan: String,
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long, value_name = "FILE")]
    pub run: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub qrels: PathBuf,
    /// Comma-separated metrics: map@100, mrr@10, ndcg@10, p@K, recall@K, judged@10
    #[arg(long, default_value = "map@100")]
    pub metric: MetricList,
    /// Binarize qrels at this grade first (default: use grades as given)
    #[arg(long)]
    pub cutoff: Option<u32>,
    /// Print per-topic values before the mean
    #[arg(long)]
    pub per_topic: bool,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub dup: DuplicateArgs,
}

#[derive(Debug, Args)]
pub struct AgreeArgs {
    #[arg(long, value_name = "FILE")]
    pub pred: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub gold: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub gold_cutoff: u32,
    #[arg(long, default_value_t = 1)]
    pub pred_cutoff: u32,
    #[arg(long)]
    pub missing_as_zero: bool,
    #[arg(long, value_enum, default_value = "error")]
    pub degenerate: Degenerate,
    /// Judge label in the report (default: pred file stem)
    #[arg(long)]
    pub judge: Option<String>,
    /// Dataset label in the report (default: gold file stem)
    #[arg(long)]
    pub dataset: Option<String>,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub dup: DuplicateArgs,
}

#[derive(Debug, Args)]
pub struct RankcorrArgs {
    /// Directory of `<system>.run` files
    #[arg(long, value_name = "DIR")]
    pub runs: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub gold: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub pred: PathBuf,
    #[arg(long, default_value = "map@100,mrr@10")]
    pub metric: MetricList,
    #[arg(long, default_value_t = 1)]
    pub gold_cutoff: u32,
    #[arg(long, default_value_t = 1)]
    pub pred_cutoff: u32,
    #[arg(long, value_enum, default_value = "b")]
    pub tau: Tau,
    #[arg(long)]
    pub judge: Option<String>,
    #[arg(long)]
    pub dataset: Option<String>,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub dup: DuplicateArgs,
}

#[derive(Debug, Args)]
pub struct BiasArgs {
    /// JSON catalog with `systems` and `judges`
    #[arg(long, value_name = "FILE")]
    pub catalog: PathBuf,
    /// Directory of `<system>.run` files
    #[arg(long, value_name = "DIR")]
    pub runs: PathBuf,
    /// Directory of `<judge>.qrels` files (binary)
    #[arg(long, value_name = "DIR")]
    pub judges: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub human: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub human_cutoff: u32,
    #[arg(long, default_value = "map@100")]
    pub metric: MetricSpec,
    /// System id whose over/under-estimation is reported
    #[arg(long)]
    pub baseline: Option<String>,
    /// Output directory for scatter.csv and bias_report.json
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    #[command(flatten)]
    pub dup: DuplicateArgs,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("input").required(true).args(["qrels", "run", "scores"])))]
pub struct ConvertArgs {
    /// Graded qrels to binarize
    #[arg(long, value_name = "FILE")]
    pub qrels: Option<PathBuf>,
    /// Run to rewrite in canonical order
    #[arg(long, value_name = "FILE")]
    pub run: Option<PathBuf>,
    /// Score table to rewrite in canonical order
    #[arg(long, value_name = "FILE")]
    pub scores: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_CUTOFF)]
    pub cutoff: u32,
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    #[command(flatten)]
    pub dup: DuplicateArgs,
}

fn usage_error(kind: ErrorKind, msg: impl std::fmt::Display) -> clap::Error {
    Cli::command().error(kind, msg)
}

/// Expands `--config FILE` into flags inserted right after the verb, so that
/// flags given on the command line override them.
fn expand_config(argv: Vec<OsString>) -> Result<Vec<OsString>, clap::Error> {
    let mut config: Option<PathBuf> = None;
    let mut rest = Vec::with_capacity(argv.len());
    let mut iter = argv.into_iter();
    let program = iter.next().unwrap_or_else(|| "judgekit".into());
    while let Some(arg) = iter.next() {
        let s = arg.to_string_lossy();
        if s == "--config" {
            let path = iter
                .next()
                .ok_or_else(|| usage_error(ErrorKind::InvalidValue, "--config needs a file"))?;
            config = Some(path.into());
        } else if let Some(path) = s.strip_prefix("--config=") {
            config = Some(path.into());
        } else {
            rest.push(arg);
        }
    }

    let Some(path) = config else {
        return Ok(std::iter::once(program).chain(rest).collect());
    };
    let text = fs::read_to_string(&path)
        .map_err(|e| usage_error(ErrorKind::Io, format!("reading config {}: {e}", path.display())))?;
    let json: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| usage_error(ErrorKind::InvalidValue, format!("config {}: {e}", path.display())))?;
    let obj = json
        .as_object()
        .ok_or_else(|| usage_error(ErrorKind::InvalidValue, "config must be a JSON object"))?;

    let mut injected: Vec<OsString> = Vec::new();
    for (key, value) in obj {
        let flag = format!("--{}", key.replace('_', "-"));
        let mut push = |v: &serde_json::Value| -> Result<(), clap::Error> {
            match v {
                serde_json::Value::Bool(true) => injected.push(flag.clone().into()),
                serde_json::Value::Bool(false) | serde_json::Value::Null => {}
                serde_json::Value::String(s) => injected.push(format!("{flag}={s}").into()),
                serde_json::Value::Number(n) => injected.push(format!("{flag}={n}").into()),
                _ => {
                    return Err(usage_error(
                        ErrorKind::InvalidValue,
                        format!("config value for {key:?} must be a string, number or boolean"),
                    ))
                }
            }
            Ok(())
        };
        match value {
            serde_json::Value::Array(items) => items.iter().try_for_each(&mut push)?,
            v => push(v)?,
        }
    }

    // The verb is the first token that is not a flag.
    let verb_at = rest.iter().position(|a| !a.to_string_lossy().starts_with('-'));
    let mut out = vec![program];
    match verb_at {
        Some(i) => {
            out.extend(rest[..=i].iter().cloned());
            out.extend(injected);
            out.extend(rest[i + 1..].iter().cloned());
        }
        None => out.extend(rest),
    }
    Ok(out)
}

/// Parses and validates a command line (including `argv[0]`).
pub fn parse_args<I, T>(argv: I) -> Result<Cli, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv = expand_config(argv.into_iter().map(Into::into).collect())?;
    let cli = Cli::try_parse_from(argv)?;
    match &cli.command {
        Command::Judge(a) if a.strategy == Strategy::Threshold && a.theta.is_none() && a.transfer.is_none() => {
            return Err(usage_error(
                ErrorKind::MissingRequiredArgument,
                "--strategy threshold needs --theta or --transfer",
            ));
        }
        Command::Sweep(a) => match (a.objective, &a.runs) {
            (SweepObjective::Tau(_), None) => {
                return Err(usage_error(
                    ErrorKind::MissingRequiredArgument,
                    "tau objectives need --runs",
                ));
            }
            (SweepObjective::Kappa, Some(_)) => {
                return Err(usage_error(
                    ErrorKind::ArgumentConflict,
                    "--runs only applies to tau objectives",
                ));
            }
            _ => {}
        },
        _ => {}
    }
    Ok(cli)
}

fn open(path: &Path) -> anyhow::Result<BufReader<fs::File>> {
    let f = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(BufReader::new(f))
}

fn read_graded(path: &Path, dup: DuplicatePolicy) -> anyhow::Result<GradedQrels> {
    parse_qrels(open(path)?, dup).with_context(|| format!("{}", path.display()))
}

fn read_binary(path: &Path, cutoff: u32, dup: DuplicatePolicy) -> anyhow::Result<BinaryQrels> {
    Ok(binarize(&read_graded(path, dup)?, cutoff))
}

fn read_run(path: &Path) -> anyhow::Result<Run> {
    parse_run(open(path)?).with_context(|| format!("{}", path.display()))
}

fn read_scores(path: &Path) -> anyhow::Result<ScoreTable> {
    parse_scores(open(path)?).with_context(|| format!("{}", path.display()))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("{}", path.display()))
}

/// Files in `dir` whose names end with `suffix`, keyed by the remaining
/// prefix, in name order.
fn files_with_suffix(dir: &Path, suffix: &str) -> anyhow::Result<BTreeMap<String, PathBuf>> {
    let mut found = BTreeMap::new();
    let entries = fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))?;
    for entry in entries {
        let path = entry?.path();
        if !path.is_file() {
            continue;
        }
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
            continue;
        };
        if let Some(id) = name.strip_suffix(suffix) {
            if !id.is_empty() {
                found.insert(id.to_string(), path.clone());
            }
        }
    }
    if found.is_empty() {
        bail!("no *{suffix} files in {}", dir.display());
    }
    Ok(found)
}

fn read_run_dir(dir: &Path) -> anyhow::Result<RunSet> {
    files_with_suffix(dir, ".run")?
        .into_iter()
        .map(|(id, path)| Ok((id, read_run(&path)?)))
        .collect()
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map_or_else(|| "-".into(), |s| s.to_string_lossy().into_owned())
}

/// Writes `bytes` to a temp file beside `path`, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp =
        tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating temp file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn emit(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> anyhow::Result<()> {
    match out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => Ok(stdout.write_all(text.as_bytes())?),
    }
}

fn configure_threads() {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return;
    };
    match raw.trim().parse::<usize>() {
        // the global pool can only be set once per process; later calls are no-ops
        Ok(n) if n >= 1 => {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        _ => eprintln!("warning: ignoring {THREADS_ENV}={raw:?}"),
    }
}

/// Runs a parsed command, writing any report text to `stdout`.
pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> anyhow::Result<()> {
    configure_threads();
    match &cli.command {
        Command::Judge(a) => judge_cmd(a, stdout),
        Command::Sweep(a) => sweep_cmd(a, stdout),
        Command::Transfer(a) => transfer_cmd(a, stdout),
        Command::Eval(a) => eval_cmd(a, stdout),
        Command::Agree(a) => agree_cmd(a, stdout),
        Command::Rankcorr(a) => rankcorr_cmd(a, stdout),
        Command::Bias(a) => bias_cmd(a, stdout),
        Command::Convert(a) => convert_cmd(a),
    }
}

fn judge_cmd(a: &JudgeArgs, stdout: &mut dyn Write) -> anyhow::Result<()> {
    let scores = read_scores(&a.scores)?;
    let qrels = match a.strategy {
        Strategy::Direct => {
            let map = match &a.token_map {
                Some(p) => read_json::<TokenMap>(p)?,
                None => TokenMap::default(),
            };
            judge_direct(&scores, &map)?
        }
        Strategy::Threshold => {
            let theta = match (a.theta, &a.transfer, &a.dataset) {
                (Some(t), _, _) => Threshold::new(t)?,
                (None, Some(path), Some(dataset)) => {
                    let table: BTreeMap<String, Threshold> = read_json(path)?;
                    *table
                        .get(dataset)
                        .ok_or_else(|| anyhow!("{} has no threshold for dataset {dataset:?}", path.display()))?
                }
                _ => bail!("--strategy threshold needs --theta or --transfer with --dataset"),
            };
            judge_threshold(&scores, theta)?
        }
    };
    let mut buf = Vec::new();
    write_qrels(&qrels, &mut buf)?;
    write_atomic(&a.out, &buf)?;
    let relevant = qrels.iter().filter(|(_, _, &l)| l).count();
    writeln!(stdout, "judged\t{}\trelevant\t{relevant}", qrels.len())?;
    Ok(())
}

fn sweep_cmd(a: &SweepArgs, stdout: &mut dyn Write) -> anyhow::Result<()> {
    let scores = read_scores(&a.scores)?;
    let gold = read_binary(&a.gold, a.gold_cutoff, a.dup.policy())?;
    let runs = a.runs.as_deref().map(read_run_dir).transpose()?;
    let options = SweepOptions {
        missing: if a.missing_as_zero {
            MissingPolicy::AsZero
        } else {
            MissingPolicy::Error
        },
        degenerate: a.degenerate.into(),
        tau_variant: a.tau.into(),
    };
    let result = sweep(&scores, &gold, &a.grid, a.objective, runs.as_ref(), options)?;

    let mut json = serde_json::to_string_pretty(&result)?;
    json.push('\n');
    let curve = curve_tsv(&result);
    write_atomic(&a.out, json.as_bytes())?;
    if let Some(p) = &a.curve {
        write_atomic(p, curve.as_bytes())?;
    }
    let best = result.best_value().map_or_else(|| "-".into(), fmt4);
    writeln!(
        stdout,
        "objective\t{}\nselected\t{}\tvalue\t{best}",
        result.objective,
        result.selected.value()
    )?;
    Ok(())
}

fn curve_tsv(result: &SweepResult) -> String {
    let mut s = String::from("theta\tvalue\n");
    for p in &result.curve {
        let v = p.value.map_or_else(|| "-".into(), fmt4);
        s.push_str(&format!("{}\t{v}\n", p.theta));
    }
    s
}

fn transfer_cmd(a: &TransferArgs, stdout: &mut dyn Write) -> anyhow::Result<()> {
    let plan = match TransferPlan::preset(&a.plan) {
        Some(p) => p,
        None => read_json(Path::new(&a.plan))
            .with_context(|| format!("plan {:?} is neither a preset nor a readable file", a.plan))?,
    };
    let files = files_with_suffix(&a.sweeps, ".sweep.json")?;
    let mut per_source = BTreeMap::new();
    for source in plan.assignments.values() {
        if let Some(path) = files.get(source) {
            per_source.insert(source.clone(), read_json::<SweepResult>(path)?);
        }
    }
    let thresholds = apply_transfer(&plan, &per_source)?;
    let mut json = serde_json::to_string_pretty(&thresholds)?;
    json.push('\n');
    write_atomic(&a.out, json.as_bytes())?;
    for (target, theta) in &thresholds {
        writeln!(stdout, "{target}\t<-\t{}\t{}", plan.assignments[target], theta.value())?;
    }
    Ok(())
}

fn eval_lines(e: &RunEvaluation, per_topic: bool, out: &mut String) {
    if per_topic {
        for (topic, v) in &e.per_topic {
            out.push_str(&format!("{}\t{topic}\t{}\n", e.metric, fmt4(*v)));
        }
    }
    out.push_str(&format!("{}\tall\t{}\n", e.metric, fmt4(e.mean)));
}

fn eval_cmd(a: &EvalArgs, stdout: &mut dyn Write) -> anyhow::Result<()> {
    let run = read_run(&a.run)?;
    if run.is_empty() {
        bail!("{} has no entries", a.run.display());
    }
    let graded = read_graded(&a.qrels, a.dup.policy())?;
    let mut text = String::new();
    for &metric in &a.metric.0 {
        let e = match a.cutoff {
            Some(c) => evaluate_run(&run, &binarize(&graded, c), metric),
            None => evaluate_run(&run, &graded, metric),
        };
        if e.no_evaluable_topics() {
            eprintln!("warning: {metric}: no evaluable topics, reporting 0");
        }
        eval_lines(&e, a.per_topic, &mut text);
    }
    emit(a.out.as_deref(), &text, stdout)
}

fn agree_cmd(a: &AgreeArgs, stdout: &mut dyn Write) -> anyhow::Result<()> {
    let pred = read_binary(&a.pred, a.pred_cutoff, a.dup.policy())?;
    let gold = read_binary(&a.gold, a.gold_cutoff, a.dup.policy())?;
    let policy = if a.missing_as_zero {
        MissingPolicy::AsZero
    } else {
        MissingPolicy::Error
    };
    let table = confusion(&pred, &gold, policy)?;
    let kappa = table.kappa(a.degenerate.into())?;
    let judge = a.judge.clone().unwrap_or_else(|| stem(&a.pred));
    let dataset = a.dataset.clone().unwrap_or_else(|| stem(&a.gold));
    let text = format!(
        "judge\tdataset\tkappa\tn\ttp\tfp\tfn\ttn\n{judge}\t{dataset}\t{}\t{}\t{}\t{}\t{}\t{}\n",
        fmt4(kappa),
        table.total(),
        table.true_pos,
        table.false_pos,
        table.false_neg,
        table.true_neg
    );
    emit(a.out.as_deref(), &text, stdout)
}

fn rankcorr_cmd(a: &RankcorrArgs, stdout: &mut dyn Write) -> anyhow::Result<()> {
    let runs = read_run_dir(&a.runs)?;
    let gold = read_binary(&a.gold, a.gold_cutoff, a.dup.policy())?;
    let pred = read_binary(&a.pred, a.pred_cutoff, a.dup.policy())?;
    let judge = a.judge.clone().unwrap_or_else(|| stem(&a.pred));
    let dataset = a.dataset.clone().unwrap_or_else(|| stem(&a.gold));
    let mut text = String::from("judge\tdataset\tmetric\ttau\tn_systems\n");
    for &metric in &a.metric.0 {
        let rc = rank_correlation(&runs, &gold, &pred, metric, a.tau.into())?;
        text.push_str(&format!(
            "{judge}\t{dataset}\t{metric}\t{}\t{}\n",
            fmt4(rc.tau),
            rc.n_systems
        ));
    }
    emit(a.out.as_deref(), &text, stdout)
}

fn bias_cmd(a: &BiasArgs, stdout: &mut dyn Write) -> anyhow::Result<()> {
    let catalog = SystemCatalog::from_json(
        &fs::read_to_string(&a.catalog).with_context(|| format!("reading {}", a.catalog.display()))?,
    )
    .with_context(|| format!("{}", a.catalog.display()))?;
    let runs = read_run_dir(&a.runs)?;
    let judges = files_with_suffix(&a.judges, ".qrels")?
        .into_iter()
        .map(|(id, path)| Ok((id, read_binary(&path, 1, a.dup.policy())?)))
        .collect::<anyhow::Result<BTreeMap<_, _>>>()?;
    let human = read_binary(&a.human, a.human_cutoff, a.dup.policy())?;

    for id in runs.keys() {
        if !catalog.systems.contains_key(id) {
            bail!("run {id:?} is not in the catalog's systems");
        }
    }
    let matrix = cross_evaluate(&runs, &judges, &human, a.metric)?;
    let report = bias_report(&matrix, &catalog, a.baseline.as_deref())?;
    let scatter = scatter_data(&matrix, &catalog)?;

    let mut csv = Vec::new();
    write_scatter_csv(&scatter, &mut csv)?;
    let mut json = serde_json::to_string_pretty(&serde_json::json!({
        "matrix": matrix,
        "report": report,
    }))?;
    json.push('\n');

    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    write_atomic(&a.out.join("scatter.csv"), &csv)?;
    write_atomic(&a.out.join("bias_report.json"), json.as_bytes())?;
    write!(stdout, "{report}")?;
    Ok(())
}

fn convert_cmd(a: &ConvertArgs) -> anyhow::Result<()> {
    let mut buf = Vec::new();
    if let Some(p) = &a.qrels {
        write_qrels(&binarize(&read_graded(p, a.dup.policy())?, a.cutoff), &mut buf)?;
    } else if let Some(p) = &a.run {
        write_run(&read_run(p)?, &mut buf)?;
    } else if let Some(p) = &a.scores {
        write_scores(&read_scores(p)?, &mut buf)?;
    }
    write_atomic(&a.out, &buf)
}

/// Parses, executes, prints errors, and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let cli = match parse_args(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match execute(&cli, &mut lock) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}
