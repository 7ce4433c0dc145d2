mod common;

use std::collections::BTreeMap;

use judgekit::metrics::{evaluate_run, MetricKind, MetricSpec};
use judgekit::trec_io::{DocId, GradedQrels, PairMap, Run};
use proptest::prelude::*;

use common::*;

fn metrics(depth: usize) -> Vec<MetricSpec> {
    [
        MetricKind::Map,
        MetricKind::Mrr,
        MetricKind::Precision,
        MetricKind::Recall,
        MetricKind::Ndcg,
    ]
    .into_iter()
    .map(|k| MetricSpec::new(k, depth).unwrap())
    .collect()
}

fn qrels_from(grades: &[u32]) -> GradedQrels {
    let mut q = PairMap::new();
    for (i, &g) in grades.iter().enumerate() {
        q.insert(topic("t"), doc(&format!("d{i:03}")), g);
    }
    q
}

/// Run over docs `order` with strictly decreasing scores.
fn run_from(order: &[usize], score: impl Fn(usize) -> f64) -> Run {
    Run::from_entries(
        "p",
        order
            .iter()
            .enumerate()
            .map(|(pos, &i)| (topic("t"), doc(&format!("d{i:03}")), score(pos))),
    )
    .unwrap()
}

fn grades_and_order() -> impl Strategy<Value = (Vec<u32>, Vec<usize>)> {
    prop::collection::vec(0u32..=3, 1..30)
        .prop_filter("needs a relevant doc", |g| g.iter().any(|&x| x >= 1))
        .prop_flat_map(|grades| {
            let n = grades.len();
            (Just(grades), Just((0..n).collect::<Vec<_>>()).prop_shuffle())
        })
}

proptest! {
    #[test]
    fn values_depend_only_on_rank_order((grades, order) in grades_and_order(), scale in 0.1f64..50.0, shift in -100.0f64..100.0) {
        let qrels = qrels_from(&grades);
        let a = run_from(&order, |pos| -(pos as f64));
        let b = run_from(&order, |pos| shift + scale * (1000.0 - pos as f64).powi(3));
        for m in metrics(10) {
            prop_assert_eq!(evaluate_run(&a, &qrels, m).mean, evaluate_run(&b, &qrels, m).mean);
        }
    }

    #[test]
    fn values_lie_in_unit_interval((grades, order) in grades_and_order(), depth in 1usize..40) {
        let qrels = qrels_from(&grades);
        let run = run_from(&order, |pos| -(pos as f64));
        for m in metrics(depth) {
            let v = evaluate_run(&run, &qrels, m).mean;
            prop_assert!((0.0..=1.0 + 1e-12).contains(&v), "{} = {}", m, v);
        }
    }

    #[test]
    fn promoting_a_relevant_doc_never_hurts((grades, order) in grades_and_order(), pick in any::<prop::sample::Index>()) {
        let qrels = qrels_from(&grades);
        // swap a relevant doc with the non-relevant doc just above it, if any
        let candidates: Vec<usize> = (1..order.len())
            .filter(|&p| grades[order[p]] >= 1 && grades[order[p - 1]] == 0)
            .collect();
        if candidates.is_empty() {
            return Ok(());
        }
        let pos = candidates[pick.index(candidates.len())];
        let mut promoted = order.clone();
        promoted.swap(pos - 1, pos);
        let before = run_from(&order, |p| -(p as f64));
        let after = run_from(&promoted, |p| -(p as f64));
        for m in metrics(10) {
            let (x, y) = (evaluate_run(&before, &qrels, m).mean, evaluate_run(&after, &qrels, m).mean);
            prop_assert!(y >= x - 1e-12, "{}: {} -> {}", m, x, y);
        }
    }

    #[test]
    fn docs_below_depth_do_not_matter((grades, order) in grades_and_order(), extra in 1usize..20, depth in 1usize..15) {
        let qrels = qrels_from(&grades);
        let head: Vec<usize> = order.iter().copied().take(depth).collect();
        let mut appended = head.clone();
        appended.extend(grades.len()..grades.len() + extra);
        appended.extend(order.iter().copied().skip(depth));
        let short = run_from(&head, |p| -(p as f64));
        let long = run_from(&appended, |p| -(p as f64));
        for m in metrics(depth) {
            prop_assert_eq!(evaluate_run(&short, &qrels, m).mean, evaluate_run(&long, &qrels, m).mean);
        }
    }

    #[test]
    fn binary_and_graded_agree_except_ndcg((grades, order) in grades_and_order()) {
        let graded = qrels_from(&grades);
        let binary = judgekit::trec_io::binarize(&graded, 1);
        let run = run_from(&order, |p| -(p as f64));
        for m in metrics(10).into_iter().filter(|m| m.kind() != MetricKind::Ndcg) {
            prop_assert_eq!(evaluate_run(&run, &graded, m).mean, evaluate_run(&run, &binary, m).mean);
        }
    }
}

#[test]
fn unretrieved_relevant_docs_score_zero_reciprocal_rank() {
    let qrels = qrels_from(&[0, 0, 1]);
    let run = run_from(&[0, 1], |p| -(p as f64));
    let e = evaluate_run(&run, &qrels, MetricSpec::MRR_10);
    assert_eq!(e.per_topic.get("t"), Some(&0.0));
    let judgments: BTreeMap<DocId, u32> = qrels.topic("t").unwrap().clone();
    assert_eq!(judgments.len(), 3);
}
