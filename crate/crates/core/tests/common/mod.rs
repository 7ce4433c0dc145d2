//! Oracles and fixture builders shared by the integration tests. Every
//! oracle here is written straight from the definition, without touching the
//! library's implementation.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use judgekit::trec_io::{DocId, TopicId};

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn doc(s: &str) -> DocId {
    DocId::new(s).unwrap()
}

pub fn topic(s: &str) -> TopicId {
    TopicId::new(s).unwrap()
}

/// `metric -> topic -> value`, with the mean stored under topic `all`.
pub fn read_expected(path: &Path) -> BTreeMap<String, BTreeMap<String, f64>> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut out: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
    for line in text.lines().filter(|l| !l.is_empty()) {
        let cols: Vec<&str> = line.split('\t').collect();
        assert_eq!(cols.len(), 3, "bad expected line {line:?}");
        out.entry(cols[0].to_string())
            .or_default()
            .insert(cols[1].to_string(), cols[2].parse().unwrap());
    }
    out
}

// Ranking metrics, 1-based positions, grades >= 1 relevant.

pub fn oracle_ap(grades_in_order: &[u32], total_relevant: usize, k: usize) -> f64 {
    let mut hits = 0.0;
    let mut sum = 0.0;
    for (pos, &g) in grades_in_order.iter().take(k).enumerate() {
        if g >= 1 {
            hits += 1.0;
            sum += hits / (pos + 1) as f64;
        }
    }
    sum / total_relevant as f64
}

pub fn oracle_rr(grades_in_order: &[u32], k: usize) -> f64 {
    grades_in_order
        .iter()
        .take(k)
        .position(|&g| g >= 1)
        .map_or(0.0, |p| 1.0 / (p + 1) as f64)
}

pub fn oracle_dcg(grades: &[u32], k: usize) -> f64 {
    grades
        .iter()
        .take(k)
        .enumerate()
        .map(|(pos, &g)| g as f64 / ((pos + 2) as f64).log2())
        .sum()
}

pub fn oracle_ndcg(grades_in_order: &[u32], all_judged: &[u32], k: usize) -> f64 {
    let mut ideal = all_judged.to_vec();
    ideal.sort_unstable_by(|a, b| b.cmp(a));
    oracle_dcg(grades_in_order, k) / oracle_dcg(&ideal, k)
}

// Agreement statistics.

/// Kappa from expanded label vectors, counting agreement pair by pair.
pub fn oracle_kappa(tp: u64, fp: u64, fn_: u64, tn: u64) -> f64 {
    let mut pred = Vec::new();
    let mut gold = Vec::new();
    for (p, g, count) in [(1u8, 1u8, tp), (1, 0, fp), (0, 1, fn_), (0, 0, tn)] {
        for _ in 0..count {
            pred.push(p);
            gold.push(g);
        }
    }
    let n = pred.len() as f64;
    let agree = pred.iter().zip(&gold).filter(|(p, g)| p == g).count() as f64;
    let p_pred1 = pred.iter().filter(|&&p| p == 1).count() as f64 / n;
    let p_gold1 = gold.iter().filter(|&&g| g == 1).count() as f64 / n;
    let po = agree / n;
    let pe = p_pred1 * p_gold1 + (1.0 - p_pred1) * (1.0 - p_gold1);
    (po - pe) / (1.0 - pe)
}

/// Tau-b by enumerating every pair. `None` if either list is constant.
pub fn oracle_tau_b(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len();
    let (mut conc, mut disc, mut tie_a, mut tie_b) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            let da = a[i] - a[j];
            let db = b[i] - b[j];
            if da == 0.0 {
                tie_a += 1;
            }
            if db == 0.0 {
                tie_b += 1;
            }
            if da * db > 0.0 {
                conc += 1;
            } else if da * db < 0.0 {
                disc += 1;
            }
        }
    }
    let total = (n * (n - 1) / 2) as i64;
    if tie_a == total || tie_b == total {
        return None;
    }
    Some((conc - disc) as f64 / (((total - tie_a) * (total - tie_b)) as f64).sqrt())
}

pub fn permutations<T: Clone>(items: &[T]) -> Vec<Vec<T>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head.clone());
            out.push(tail);
        }
    }
    out
}

/// Every weak ordering of `n` items, as rank vectors using ranks `0..k`.
pub fn weak_orderings(n: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    let mut v = vec![0u8; n];
    loop {
        let max = *v.iter().max().unwrap() as usize;
        if (0..=max).all(|r| v.contains(&(r as u8))) {
            out.push(v.clone());
        }
        // odometer over {0..n-1}^n
        let mut i = 0;
        loop {
            if i == n {
                return out;
            }
            v[i] += 1;
            if (v[i] as usize) < n {
                break;
            }
            v[i] = 0;
            i += 1;
        }
    }
}

/// Non-increasing value vectors realizing every tie pattern of `n` sorted
/// items (one per composition of `n`).
pub fn sorted_tie_patterns(n: usize) -> Vec<Vec<f64>> {
    (0u32..1 << (n - 1))
        .map(|cuts| {
            let mut v = Vec::with_capacity(n);
            let mut level = n as f64;
            v.push(level);
            for i in 0..n - 1 {
                if cuts >> i & 1 == 1 {
                    level -= 1.0;
                }
                v.push(level);
            }
            v
        })
        .collect()
}

/// Writes a small end-to-end workspace: runs, graded human qrels, judge
/// qrels, a score table, a catalog and sweep results. Returns its root.
pub struct Workspace {
    pub dir: tempfile::TempDir,
}

impl Workspace {
    pub fn path(&self, rel: &str) -> PathBuf {
        self.dir.path().join(rel)
    }
}

pub const SYSTEMS: [&str; 3] = ["sysx", "sysy", "sysz"];
pub const TOPICS: [&str; 5] = ["101", "102", "103", "104", "105"];

fn system_doc(system: &str, topic: &str, rank: usize) -> String {
    format!("{topic}-{}{rank:02}", &system[3..])
}

/// Run lines for `system`: ten docs per topic, all distinct across systems.
pub fn run_text(system: &str) -> String {
    let mut s = String::new();
    for t in TOPICS {
        for r in 1..=10 {
            let score = 20.0 - r as f64;
            s.push_str(&format!("{t} Q0 {} {r} {score} {system}\n", system_doc(system, t, r)));
        }
    }
    s
}

/// Human qrels: sysy finds the most relevant docs, sysx the fewest, and no
/// two systems tie on MAP or MRR.
pub fn human_qrels_text() -> String {
    let mut s = String::new();
    for t in TOPICS {
        for system in SYSTEMS {
            let relevant = match system {
                "sysx" => 3..=3,
                "sysy" => 1..=6,
                _ => 2..=4,
            };
            for r in 1..=10 {
                let grade = if relevant.contains(&r) { 1 + (r % 3) as u32 } else { 0 };
                s.push_str(&format!("{t} 0 {} {grade}\n", system_doc(system, t, r)));
            }
        }
    }
    s
}

/// Judge qrels marking exactly `favored`'s top-10 docs relevant.
pub fn partisan_qrels_text(favored: &str) -> String {
    let mut s = String::new();
    for t in TOPICS {
        for system in SYSTEMS {
            for r in 1..=10 {
                let label = u32::from(system == favored);
                s.push_str(&format!("{t} 0 {} {label}\n", system_doc(system, t, r)));
            }
        }
    }
    s
}

/// Binary form of [`human_qrels_text`] at cutoff 1.
pub fn human_binary_text() -> String {
    human_qrels_text()
        .lines()
        .map(|l| {
            let mut cols: Vec<&str> = l.split(' ').collect();
            let g: u32 = cols[3].parse().unwrap();
            let b = if g >= 1 { "1" } else { "0" };
            cols[3] = b;
            format!("{}\n", cols.join(" "))
        })
        .collect()
}

pub const CATALOG_JSON: &str = r#"{
  "systems": {
    "sysx": {"family": "xfam", "display_name": "System X"},
    "sysy": {"family": "yfam"},
    "sysz": {"family": "bm25"}
  },
  "judges": {
    "partisan": {"own_system": "sysx", "family": "xfam"},
    "clone": {"own_system": "sysy", "family": "yfam"}
  }
}
"#;

/// Generative-style score table over the human pool. Probabilities come
/// from a fixed hash so the table is noisy but deterministic.
pub fn score_table_text() -> String {
    let mut s = String::new();
    for (i, line) in human_qrels_text().lines().enumerate() {
        let cols: Vec<&str> = line.split(' ').collect();
        let g: u32 = cols[3].parse().unwrap();
        let noise = ((i * 7919) % 97) as f64 / 97.0;
        let mut p = if g >= 1 { 0.45 + 0.5 * noise } else { 0.5 * noise };
        p = (p * 1000.0).round() / 1000.0;
        if p == 0.5 {
            p = 0.501;
        }
        let token = if p >= 0.5 { "true" } else { "false" };
        s.push_str(&format!("{}\t{}\t{p}\t{token}\t{p}\n", cols[0], cols[2]));
    }
    s
}

pub fn workspace() -> Workspace {
    let dir = tempfile::tempdir().unwrap();
    let w = Workspace { dir };
    let mk = |p: &str| std::fs::create_dir_all(w.path(p)).unwrap();
    mk("runs");
    mk("judges");
    mk("sweeps");
    mk("out");
    for s in SYSTEMS {
        std::fs::write(w.path(&format!("runs/{s}.run")), run_text(s)).unwrap();
    }
    std::fs::write(w.path("human.qrels"), human_qrels_text()).unwrap();
    std::fs::write(w.path("human.bin.qrels"), human_binary_text()).unwrap();
    std::fs::write(w.path("judges/partisan.qrels"), partisan_qrels_text("sysx")).unwrap();
    std::fs::write(w.path("judges/clone.qrels"), human_binary_text()).unwrap();
    std::fs::write(w.path("catalog.json"), CATALOG_JSON).unwrap();
    std::fs::write(w.path("scores.tsv"), score_table_text()).unwrap();
    w
}
