#!/usr/bin/env python3
"""Generate the trec_eval parity fixture.

Writes a seeded qrels/run pair plus the reference per-topic values computed
by trec_eval (through the pytrec_eval bindings). The Rust test suite reads the
frozen outputs; re-run this only to regenerate the fixture.

    pip install pytrec_eval-terrier
    python3 scripts/gen_trec_eval_fixture.py crates/core/tests/fixtures
"""
import random
import sys
from pathlib import Path

import pytrec_eval

SEED = 20190
N_TOPICS = 50
MEASURES = {"map_cut.100", "recip_rank", "ndcg_cut.10", "P.10", "recall.100"}


def trec_order(docs):
    # trec_eval: score descending, docno descending (strcmp)
    return sorted(docs.items(), key=lambda kv: (kv[1], kv[0].encode()), reverse=True)


def main(out_dir):
    rng = random.Random(SEED)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    qrels, run = {}, {}
    for t in range(N_TOPICS):
        topic = f"t{t:03d}"
        n_docs = rng.randint(5, 100)
        pool = [f"D{rng.randint(0, 999):04d}" for _ in range(n_docs * 2)]
        pool = list(dict.fromkeys(pool))
        judged = pool[: max(3, int(len(pool) * 0.7))]
        grades = {d: rng.choice([0, 0, 0, 1, 1, 2, 3]) for d in judged}
        if not any(g > 0 for g in grades.values()):
            grades[judged[0]] = rng.randint(1, 3)
        qrels[topic] = grades
        retrieved = rng.sample(pool, min(n_docs, len(pool)))
        # one decimal keeps plenty of score ties in play
        run[topic] = {d: round(rng.uniform(-5.0, 5.0), 1) for d in retrieved}

    with open(out / "parity.qrels", "w") as f:
        for topic in sorted(qrels):
            for doc in sorted(qrels[topic]):
                f.write(f"{topic} 0 {doc} {qrels[topic][doc]}\n")

    # shuffled line order and bogus ranks: parsers must sort by score
    lines = []
    for topic, docs in run.items():
        for doc, score in docs.items():
            lines.append((topic, doc, score))
    rng.shuffle(lines)
    with open(out / "parity.run", "w") as f:
        for i, (topic, doc, score) in enumerate(lines):
            f.write(f"{topic} Q0 {doc} {i + 1} {score} parity\n")

    ev = pytrec_eval.RelevanceEvaluator(qrels, MEASURES)
    res = ev.evaluate(run)

    top10 = {t: dict(trec_order(docs)[:10]) for t, docs in run.items()}
    rr10 = pytrec_eval.RelevanceEvaluator(qrels, {"recip_rank"}).evaluate(top10)

    names = [
        ("map@100", "map_cut_100", res),
        ("mrr@10", "recip_rank", rr10),
        ("ndcg@10", "ndcg_cut_10", res),
        ("p@10", "P_10", res),
        ("recall@100", "recall_100", res),
    ]
    with open(out / "parity.expected.tsv", "w") as f:
        for metric, key, table in names:
            vals = []
            for topic in sorted(table):
                v = table[topic][key]
                vals.append(v)
                f.write(f"{metric}\t{topic}\t{v:.10f}\n")
            f.write(f"{metric}\tall\t{sum(vals) / len(vals):.10f}\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "crates/core/tests/fixtures")
