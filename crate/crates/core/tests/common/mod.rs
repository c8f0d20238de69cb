//! Synthetic inputs and a brute-force fitness oracle shared by the
//! integration tests and the acceptance suite.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

use queryevo::experiment::ExperimentConfig;

pub const STOPWORDS: [&str; 5] = ["the", "of", "and", "in", "for"];

/// Shape of a generated experiment.
#[derive(Debug, Clone)]
pub struct Shape {
    pub docs: usize,
    pub pattern: usize,
    pub queries: usize,
    pub terms: usize,
    pub max_results: usize,
    pub generations: usize,
    pub seed: u64,
    /// Extra `key = value` lines appended to the config.
    pub extra: String,
}

impl Default for Shape {
    fn default() -> Self {
        Self {
            docs: 40,
            pattern: 8,
            queries: 3,
            terms: 2,
            max_results: 5,
            generations: 3,
            seed: 1,
            extra: String::new(),
        }
    }
}

pub struct Doc {
    pub title: String,
    pub snippet: String,
}

pub struct Fixture {
    pub dir: TempDir,
    pub config_path: PathBuf,
    pub config: ExperimentConfig,
    pub docs: BTreeMap<String, Doc>,
    pub pattern: Vec<String>,
}

fn words(rng: &mut ChaCha8Rng, n: usize, pattern: &[String], synonyms: &[String]) -> String {
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let roll: f64 = rng.gen();
        let w = if roll < 0.35 {
            pattern[rng.gen_range(0..pattern.len())].clone()
        } else if roll < 0.45 {
            synonyms[rng.gen_range(0..synonyms.len())].clone()
        } else if roll < 0.55 {
            STOPWORDS[rng.gen_range(0..STOPWORDS.len())].to_string()
        } else {
            format!("filler{}", rng.gen_range(0..60))
        };
        out.push(w);
    }
    out.join(" ")
}

/// Writes a pattern, corpus, stopword list and config into a temp dir.
pub fn fixture(shape: &Shape) -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(shape.seed ^ 0x5eed);
    let pattern: Vec<String> = (0..shape.pattern).map(|i| format!("topic{i}")).collect();
    let synonyms: Vec<String> = (0..shape.pattern).map(|i| format!("alias{i}")).collect();

    let mut pattern_text = String::new();
    for (t, s) in pattern.iter().zip(&synonyms) {
        writeln!(pattern_text, "{t}\t{s},{s}x").unwrap();
    }
    let mut docs = BTreeMap::new();
    let mut corpus_text = String::new();
    for i in 0..shape.docs {
        let id = format!("doc{i:04}");
        let n_title = rng.gen_range(2..6);
        let n_snippet = rng.gen_range(6..18);
        let doc = Doc {
            title: words(&mut rng, n_title, &pattern, &synonyms),
            snippet: words(&mut rng, n_snippet, &pattern, &synonyms),
        };
        writeln!(corpus_text, "{id}\t{}\t{}", doc.title, doc.snippet).unwrap();
        docs.insert(id, doc);
    }
    let config_text = format!(
        "pattern_file = pattern.tsv\n\
         corpus_file = corpus.tsv\n\
         stopwords_file = stopwords.txt\n\
         queries_per_population = {}\n\
         terms_per_query = {}\n\
         max_results = {}\n\
         generations = {}\n\
         seed = {}\n\
         {}\n",
        shape.queries, shape.terms, shape.max_results, shape.generations, shape.seed, shape.extra
    );
    let write = |name: &str, text: &str| fs::write(dir.path().join(name), text).unwrap();
    write("pattern.tsv", &pattern_text);
    write("corpus.tsv", &corpus_text);
    write("stopwords.txt", &STOPWORDS.join("\n"));
    write("run.cfg", &config_text);
    let config_path = dir.path().join("run.cfg");
    let config = ExperimentConfig::load(&config_path).unwrap();
    Fixture {
        dir,
        config_path,
        config,
        docs,
        pattern,
    }
}

/// One recomputed log row.
#[derive(Debug, Clone)]
pub struct OracleRow {
    pub query_no: usize,
    pub doc_id: String,
    pub g_raw: f64,
    pub g: f64,
    pub p_raw: f64,
    pub p: f64,
    pub s_raw: f64,
    pub s: f64,
}

pub struct OracleOutcome {
    pub rows: Vec<OracleRow>,
    pub query_fitness: Vec<f64>,
    pub population_fitness: f64,
}

fn terms(text: &str) -> Vec<String> {
    let stop: HashSet<&str> = STOPWORDS.into_iter().collect();
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty() && !stop.contains(w))
        .map(String::from)
        .collect()
}

fn minmax(values: &[f64]) -> (f64, f64) {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

fn scale(v: f64, (lo, hi): (f64, f64)) -> f64 {
    if hi == lo {
        0.5
    } else {
        (v - lo) / (hi - lo)
    }
}

/// Recomputes every criterion and fitness value of one population from its
/// ranked result lists, with equal weights and the raw semantic column.
pub fn oracle(
    docs: &BTreeMap<String, Doc>,
    pattern: &[String],
    results: &[Vec<String>],
) -> OracleOutcome {
    let distinct: BTreeSet<&String> = results.iter().flatten().collect();
    let r = distinct.len() as f64;
    let bags: HashMap<&String, Vec<String>> = distinct
        .iter()
        .map(|id| {
            let d = &docs[*id];
            (*id, terms(&format!("{} {}", d.title, d.snippet)))
        })
        .collect();
    let idf = |term: &str| {
        let n = bags
            .values()
            .filter(|b| b.iter().any(|t| t == term))
            .count();
        if n == 0 {
            (r + 1.0).ln()
        } else {
            ((r + 1.0) / n as f64).ln()
        }
    };
    let pattern_vec: HashMap<&str, f64> = pattern
        .iter()
        .map(|t| (t.as_str(), idf(t) / pattern.len() as f64))
        .collect();

    let cosine = |id: &String| {
        let mut tf: HashMap<&str, f64> = HashMap::new();
        for t in &bags[id] {
            *tf.entry(t.as_str()).or_default() += 1.0;
        }
        let doc_vec: HashMap<&str, f64> = tf.iter().map(|(t, n)| (*t, n * idf(t))).collect();
        let dot: f64 = doc_vec
            .iter()
            .map(|(t, w)| w * pattern_vec.get(t).copied().unwrap_or(0.0))
            .sum();
        let na = doc_vec.values().map(|w| w * w).sum::<f64>().sqrt();
        let nb = pattern_vec.values().map(|w| w * w).sum::<f64>().sqrt();
        if na == 0.0 || nb == 0.0 {
            0.0
        } else {
            (dot / (na * nb)).max(0.0)
        }
    };

    let mut rows = Vec::new();
    for (q, list) in results.iter().enumerate() {
        for id in list {
            let mut g_raw = 0.0;
            let mut p_raw = 0.0;
            for other in results {
                if let Some(i) = other.iter().position(|x| x == id) {
                    g_raw += (i + 1) as f64;
                    p_raw += 1.0;
                }
            }
            rows.push(OracleRow {
                query_no: q,
                doc_id: id.clone(),
                g_raw,
                g: 0.0,
                p_raw,
                p: 0.0,
                s_raw: cosine(id),
                s: 0.0,
            });
        }
    }
    let g_range = minmax(&rows.iter().map(|r| r.g_raw).collect::<Vec<_>>());
    let p_range = minmax(&rows.iter().map(|r| r.p_raw).collect::<Vec<_>>());
    let s_range = minmax(&rows.iter().map(|r| r.s_raw).collect::<Vec<_>>());
    for row in &mut rows {
        row.g = 1.0 - scale(row.g_raw, g_range);
        if g_range.0 == g_range.1 {
            row.g = 0.5;
        }
        row.p = scale(row.p_raw, p_range);
        row.s = scale(row.s_raw, s_range);
    }

    let query_fitness: Vec<f64> = (0..results.len())
        .map(|q| {
            let own: Vec<f64> = rows
                .iter()
                .filter(|r| r.query_no == q)
                .map(|r| (r.g + r.p + r.s_raw) / 3.0)
                .collect();
            if own.is_empty() {
                0.0
            } else {
                own.iter().sum::<f64>() / own.len() as f64
            }
        })
        .collect();
    let population_fitness = query_fitness.iter().sum::<f64>() / query_fitness.len() as f64;
    OracleOutcome {
        rows,
        query_fitness,
        population_fitness,
    }
}

/// Top `n` of the pool by descending fitness; ties keep pool order.
pub fn expected_survivors(pool: &[Vec<String>], fitness: &[f64], n: usize) -> Vec<Vec<String>> {
    let mut order: Vec<usize> = (0..pool.len()).collect();
    order.sort_by(|&a, &b| fitness[b].partial_cmp(&fitness[a]).unwrap());
    order.into_iter().take(n).map(|i| pool[i].clone()).collect()
}
