//! The three result criteria and their additive aggregation.
//!
//! For a document `r` retrieved by a population of `N` queries:
//!
//! * rank: `g_raw` is the sum of `r`'s positions over the lists that
//!   contain it, normalized as `1 − (g_raw − g_min)/(g_max − g_min)`;
//! * universality: `p_raw` counts the lists that contain `r`, normalized as
//!   `(p_raw − p_min)/(p_max − p_min)`;
//! * semantic similarity: the cosine between tf-idf vectors of `r`'s text
//!   and of the search pattern.
//!
//! Min and max come from all results of the population, so a population is
//! evaluated in two phases: raw values first, normalization after.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::search::{RankedResult, SearchBackend};
use crate::text::{ResultScope, TermVector, Tokenizer};
use crate::weights::WeightVector;

/// Value of a normalized criterion whose raw values do not vary.
pub const DEGENERATE: f64 = 0.5;

/// One row of the experiment log: a document retrieved by one query of one
/// population.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRecord {
    pub population_no: u64,
    pub query_no: u64,
    pub doc_id: String,
    pub g_raw: f64,
    pub g: f64,
    pub p_raw: f64,
    pub p: f64,
    pub s_raw: f64,
    pub s: f64,
}

impl ResultRecord {
    /// The value that enters the additive criterion for `s`.
    pub fn fitness(&self, w: &WeightVector) -> f64 {
        result_fitness(self.g, self.p, self.s_raw, w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationContext {
    pub g_min: f64,
    pub g_max: f64,
    pub p_min: f64,
    pub p_max: f64,
}

impl NormalizationContext {
    /// Bounds over `(g_raw, p_raw)` pairs; `None` for an empty input.
    pub fn from_raw(values: impl IntoIterator<Item = (f64, f64)>) -> Option<Self> {
        let mut it = values.into_iter();
        let (g0, p0) = it.next()?;
        let init = Self {
            g_min: g0,
            g_max: g0,
            p_min: p0,
            p_max: p0,
        };
        Some(it.fold(init, |c, (g, p)| Self {
            g_min: c.g_min.min(g),
            g_max: c.g_max.max(g),
            p_min: c.p_min.min(p),
            p_max: c.p_max.max(p),
        }))
    }
}

fn min_max(value: f64, min: f64, max: f64) -> Result<f64> {
    if !(min <= value && value <= max) {
        return Err(Error::OutOfRange { value, min, max });
    }
    if max == min {
        return Ok(DEGENERATE);
    }
    Ok((value - min) / (max - min))
}

pub fn normalize_rank(g_raw: f64, ctx: &NormalizationContext) -> Result<f64> {
    let t = min_max(g_raw, ctx.g_min, ctx.g_max)?;
    Ok(if ctx.g_min == ctx.g_max { t } else { 1.0 - t })
}

pub fn normalize_universality(p_raw: f64, ctx: &NormalizationContext) -> Result<f64> {
    min_max(p_raw, ctx.p_min, ctx.p_max)
}

/// Min-max scaling of a free-standing column (the logged `s`).
pub fn normalize_column(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    values
        .iter()
        .map(|&v| {
            if hi == lo {
                DEGENERATE
            } else {
                (v - lo) / (hi - lo)
            }
        })
        .collect()
}

fn positions<'a>(
    doc_id: &'a str,
    lists: &'a [Vec<RankedResult>],
) -> impl Iterator<Item = usize> + 'a {
    lists
        .iter()
        .filter_map(move |l| l.iter().find(|r| r.doc_id == doc_id).map(|r| r.position))
}

/// Sum of the document's positions over the population's result lists.
pub fn rank_raw(doc_id: &str, lists: &[Vec<RankedResult>]) -> Result<f64> {
    let found: Vec<usize> = positions(doc_id, lists).collect();
    if found.is_empty() {
        return Err(Error::NotInPopulation(doc_id.to_string()));
    }
    Ok(found.iter().sum::<usize>() as f64)
}

/// Number of the population's result lists containing the document.
pub fn universality_raw(doc_id: &str, lists: &[Vec<RankedResult>]) -> Result<f64> {
    match positions(doc_id, lists).count() {
        0 => Err(Error::NotInPopulation(doc_id.to_string())),
        n => Ok(n as f64),
    }
}

/// Cosine of two sparse vectors; zero when either has zero norm.
pub fn semantic_similarity(a: &TermVector, b: &TermVector) -> f64 {
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (a.dot(b) / (na * nb)).clamp(-1.0, 1.0)
}

pub fn result_fitness(g: f64, p: f64, s: f64, w: &WeightVector) -> f64 {
    w.g() * g + w.p() * p + w.s() * s
}

/// Mean result fitness over one query's records.
pub fn query_fitness(records: &[ResultRecord], w: &WeightVector) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::NoResults);
    }
    Ok(records.iter().map(|r| r.fitness(w)).sum::<f64>() / records.len() as f64)
}

pub fn population_fitness(per_query: &[f64]) -> Result<f64> {
    if per_query.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    Ok(per_query.iter().sum::<f64>() / per_query.len() as f64)
}

/// Per-query fitness for `n_queries` queries; a query without records scores
/// zero.
pub fn fitness_by_query(records: &[ResultRecord], n_queries: usize, w: &WeightVector) -> Vec<f64> {
    let mut groups: BTreeMap<u64, Vec<ResultRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(r.query_no).or_default().push(r.clone());
    }
    (0..n_queries as u64)
        .map(|q| {
            groups
                .get(&q)
                .map_or(0.0, |rs| query_fitness(rs, w).unwrap_or(0.0))
        })
        .collect()
}

/// Builds the log records of one population from its result lists.
///
/// Query numbers are list indices. The semantic criterion weighs terms over
/// the distinct documents retrieved by the whole population.
pub fn evaluate_population(
    population_no: u64,
    lists: &[Vec<RankedResult>],
    backend: &dyn SearchBackend,
    tokenizer: &Tokenizer,
    pattern_terms: &[&str],
) -> Result<Vec<ResultRecord>> {
    let mut docs = BTreeMap::new();
    for hit in lists.iter().flatten() {
        if !docs.contains_key(hit.doc_id.as_str()) {
            let doc = backend
                .document(&hit.doc_id)
                .ok_or_else(|| Error::Backend(format!("unknown document {:?}", hit.doc_id)))?;
            docs.insert(hit.doc_id.as_str(), doc);
        }
    }
    if docs.is_empty() {
        return Ok(Vec::new());
    }
    let scope = ResultScope::new(tokenizer, docs.values().copied());
    let pattern_vec = scope.pattern_vector(pattern_terms)?;

    let mut per_doc: BTreeMap<&str, (f64, f64, f64)> = BTreeMap::new();
    for &id in docs.keys() {
        let s = semantic_similarity(&scope.result_vector(id)?, &pattern_vec).max(0.0);
        per_doc.insert(id, (rank_raw(id, lists)?, universality_raw(id, lists)?, s));
    }

    let mut rows: Vec<(u64, &str, f64, f64, f64)> = Vec::new();
    for (q, list) in lists.iter().enumerate() {
        for hit in list {
            let (g_raw, p_raw, s_raw) = per_doc[hit.doc_id.as_str()];
            rows.push((q as u64, hit.doc_id.as_str(), g_raw, p_raw, s_raw));
        }
    }
    let ctx = NormalizationContext::from_raw(rows.iter().map(|r| (r.2, r.3)))
        .expect("non-empty population results");
    let s_norm = normalize_column(&rows.iter().map(|r| r.4).collect::<Vec<_>>());

    rows.iter()
        .zip(s_norm)
        .map(|(&(query_no, id, g_raw, p_raw, s_raw), s)| {
            Ok(ResultRecord {
                population_no,
                query_no,
                doc_id: id.to_string(),
                g_raw,
                g: normalize_rank(g_raw, &ctx)?,
                p_raw,
                p: normalize_universality(p_raw, &ctx)?,
                s_raw,
                s,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::CorpusSearcher;
    use crate::text::{Corpus, Document};
    use proptest::prelude::*;

    fn hit(id: &str, position: usize) -> RankedResult {
        RankedResult {
            doc_id: id.into(),
            position,
        }
    }

    fn five_lists() -> Vec<Vec<RankedResult>> {
        vec![
            vec![hit("a", 1), hit("y", 2), hit("x", 3)],
            vec![hit("a", 1), hit("b", 2)],
            vec![
                hit("a", 1),
                hit("z", 2),
                hit("w", 3),
                hit("v", 4),
                hit("x", 5),
            ],
            vec![hit("a", 1)],
            vec![hit("a", 1), hit("y", 2), hit("u", 3)],
        ]
    }

    #[test]
    fn rank_and_universality() {
        let lists = five_lists();
        assert_eq!(rank_raw("x", &lists).unwrap(), 8.0);
        assert_eq!(rank_raw("b", &lists).unwrap(), 2.0);
        assert_eq!(rank_raw("a", &lists).unwrap(), 5.0);
        assert_eq!(universality_raw("a", &lists).unwrap(), 5.0);
        assert_eq!(universality_raw("b", &lists).unwrap(), 1.0);
        assert_eq!(universality_raw("x", &lists).unwrap(), 2.0);
        assert!(matches!(
            rank_raw("nope", &lists),
            Err(Error::NotInPopulation(_))
        ));
        assert!(universality_raw("nope", &lists).is_err());
    }

    #[test]
    fn rank_single_hit() {
        let lists = vec![vec![hit("a", 1)], vec![hit("b", 1)]];
        assert_eq!(rank_raw("a", &lists).unwrap(), 1.0);
    }

    #[test]
    fn universality_three_of_five() {
        let lists = vec![
            vec![hit("d", 2)],
            vec![],
            vec![hit("d", 1)],
            vec![hit("e", 1)],
            vec![hit("e", 1), hit("d", 2)],
        ];
        assert_eq!(universality_raw("d", &lists).unwrap(), 3.0);
    }

    fn ctx(g: (f64, f64), p: (f64, f64)) -> NormalizationContext {
        NormalizationContext {
            g_min: g.0,
            g_max: g.1,
            p_min: p.0,
            p_max: p.1,
        }
    }

    #[test]
    fn normalization_examples() {
        let c = ctx((10.0, 50.0), (1.0, 5.0));
        assert_eq!(normalize_rank(10.0, &c).unwrap(), 1.0);
        assert_eq!(normalize_rank(50.0, &c).unwrap(), 0.0);
        assert_eq!(normalize_rank(30.0, &c).unwrap(), 0.5);
        assert_eq!(normalize_universality(5.0, &c).unwrap(), 1.0);
        assert_eq!(normalize_universality(1.0, &c).unwrap(), 0.0);
        assert_eq!(normalize_universality(3.0, &c).unwrap(), 0.5);
        assert!(normalize_rank(51.0, &c).is_err());
        assert!(normalize_universality(0.5, &c).is_err());
    }

    #[test]
    fn degenerate_normalization() {
        let c = ctx((7.0, 7.0), (2.0, 2.0));
        assert_eq!(normalize_rank(7.0, &c).unwrap(), 0.5);
        assert_eq!(normalize_universality(2.0, &c).unwrap(), 0.5);
        assert_eq!(normalize_column(&[0.3, 0.3]), vec![0.5, 0.5]);
    }

    #[test]
    fn cosine_examples() {
        let v: TermVector = [("a", 1.0), ("b", 2.0)].into_iter().collect();
        assert!((semantic_similarity(&v, &v) - 1.0).abs() < 1e-15);
        let w: TermVector = [("c", 1.0)].into_iter().collect();
        assert_eq!(semantic_similarity(&v, &w), 0.0);
        let x: TermVector = [("a", 1.0), ("b", 1.0)].into_iter().collect();
        let y: TermVector = [("a", 1.0), ("c", 1.0)].into_iter().collect();
        assert!((semantic_similarity(&x, &y) - 0.5).abs() < 1e-15);
        assert_eq!(semantic_similarity(&TermVector::new(), &x), 0.0);
    }

    #[test]
    fn additive_criterion() {
        let eq = WeightVector::equal();
        assert!((result_fitness(0.6, 0.6, 0.6, &eq) - 0.6).abs() < 1e-15);
        let g_only = WeightVector::new(1.0, 0.0, 0.0).unwrap();
        assert_eq!(result_fitness(0.9, 0.1, 0.2, &g_only), 0.9);
        // Rounded relative-spread weights: 0.12642 + 0.467 + 0.10038.
        let spread = WeightVector::new(0.294, 0.467, 0.239).unwrap();
        assert!((result_fitness(0.43, 1.00, 0.42, &spread) - 0.6938).abs() < 1e-12);
        let (g, p, s) = (0.2, 0.7, 0.9);
        assert!((result_fitness(g, p, s, &eq) - (g + p + s) / 3.0).abs() < 1e-15);
    }

    fn rec(q: u64, g: f64, p: f64, s: f64) -> ResultRecord {
        ResultRecord {
            population_no: 0,
            query_no: q,
            doc_id: "d".into(),
            g_raw: 0.0,
            g,
            p_raw: 0.0,
            p,
            s_raw: s,
            s,
        }
    }

    #[test]
    fn query_and_population_means() {
        let w = WeightVector::equal();
        let rs = [
            rec(0, 0.2, 0.2, 0.2),
            rec(0, 0.4, 0.4, 0.4),
            rec(0, 0.6, 0.6, 0.6),
        ];
        assert!((query_fitness(&rs, &w).unwrap() - 0.4).abs() < 1e-15);
        assert!((query_fitness(&rs[..1], &w).unwrap() - 0.2).abs() < 1e-15);
        assert!(matches!(query_fitness(&[], &w), Err(Error::NoResults)));
        assert_eq!(population_fitness(&[0.4, 0.6]).unwrap(), 0.5);
        assert_eq!(population_fitness(&[0.3]).unwrap(), 0.3);
        assert!(population_fitness(&[]).is_err());
    }

    #[test]
    fn fitness_by_query_fills_missing_with_zero() {
        let w = WeightVector::equal();
        let rs = [rec(0, 0.3, 0.3, 0.3), rec(2, 0.9, 0.9, 0.9)];
        let f = fitness_by_query(&rs, 3, &w);
        assert!((f[0] - 0.3).abs() < 1e-15 && f[1] == 0.0 && (f[2] - 0.9).abs() < 1e-15);
    }

    #[test]
    fn population_evaluation_endpoints() {
        let docs = vec![
            Document::new("d1", "evolution process control", ""),
            Document::new("d2", "evolution of queries", ""),
            Document::new("d3", "process mining", ""),
            Document::new("d4", "unrelated text", ""),
        ];
        let t = Tokenizer::new().with_stopwords(["of"]);
        let searcher = CorpusSearcher::new(Corpus::build(docs, &t).unwrap()).unwrap();
        let queries: [&[&str]; 3] = [&["evolution", "control"], &["process"], &["queries"]];
        let lists: Vec<Vec<RankedResult>> = queries
            .iter()
            .map(|q| searcher.search(q, 20).unwrap())
            .collect();
        let records = evaluate_population(
            3,
            &lists,
            &searcher,
            &t,
            &["evolution", "process", "control", "queries"],
        )
        .unwrap();
        let total: usize = lists.iter().map(Vec::len).sum();
        assert_eq!(records.len(), total);
        let gs: Vec<f64> = records.iter().map(|r| r.g).collect();
        let ps: Vec<f64> = records.iter().map(|r| r.p).collect();
        for v in gs.iter().chain(&ps) {
            assert!((0.0..=1.0).contains(v));
        }
        assert!(gs.contains(&0.0) && gs.contains(&1.0), "{records:#?}");
        assert!(ps.contains(&0.0) && ps.contains(&1.0));
        assert!(records.iter().all(|r| r.population_no == 3));
        assert!(records.iter().all(|r| (0.0..=1.0).contains(&r.s_raw)));
    }

    proptest! {
        #[test]
        fn cosine_properties(
            a in proptest::collection::btree_map("[a-e]", 0.01f64..5.0, 0..5),
            b in proptest::collection::btree_map("[a-e]", 0.01f64..5.0, 0..5),
            alpha in 0.01f64..100.0,
        ) {
            let va: TermVector = a.iter().map(|(k, v)| (k.clone(), *v)).collect();
            let vb: TermVector = b.iter().map(|(k, v)| (k.clone(), *v)).collect();
            let scaled: TermVector = a.iter().map(|(k, v)| (k.clone(), v * alpha)).collect();
            let s = semantic_similarity(&va, &vb);
            prop_assert!((0.0..=1.0).contains(&s));
            prop_assert!((s - semantic_similarity(&vb, &va)).abs() < 1e-12);
            prop_assert!((s - semantic_similarity(&scaled, &vb)).abs() < 1e-12);
        }

        #[test]
        fn additive_bounds_and_monotone(
            g in 0.0f64..1.0, p in 0.0f64..1.0, s in 0.0f64..1.0, bump in 0.0f64..1.0,
            raw in proptest::array::uniform3(0.0f64..1.0),
        ) {
            let total: f64 = raw.iter().sum::<f64>() + 1e-9;
            let w = WeightVector::new(
                raw[0] / total,
                raw[1] / total,
                1.0 - raw[0] / total - raw[1] / total,
            );
            prop_assume!(w.is_ok());
            let w = w.unwrap();
            let f = result_fitness(g, p, s, &w);
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&f));
            prop_assert!(result_fitness((g + bump).min(1.0), p, s, &w) >= f);
            prop_assert!(result_fitness(g, (p + bump).min(1.0), s, &w) >= f);
            prop_assert!(result_fitness(g, p, (s + bump).min(1.0), &w) >= f);
        }
    }
}
