//! Query execution against a document source.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::genetics::QueryGenome;
use crate::text::{Corpus, Document};

/// One entry of a ranked result list. Positions start at 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedResult {
    pub doc_id: String,
    pub position: usize,
}

/// A document source that ranks documents for a list of keywords.
///
/// Implementations must be deterministic: the same terms and limit always
/// produce the same list.
pub trait SearchBackend: Sync {
    fn search(&self, terms: &[&str], max_results: usize) -> Result<Vec<RankedResult>>;

    /// Title and snippet of a document this backend may return.
    fn document(&self, doc_id: &str) -> Option<&Document>;
}

/// Runs the literal terms of a genome. Synonyms and gene weights do not take
/// part in matching.
pub fn execute(
    query: &QueryGenome,
    backend: &dyn SearchBackend,
    max_results: usize,
) -> Result<Vec<RankedResult>> {
    backend.search(&query.terms(), max_results)
}

/// Built-in searcher: scores each document by the sum over query terms of
/// `tf · idf`, idf taken over the whole corpus.
#[derive(Debug, Clone)]
pub struct CorpusSearcher {
    corpus: Corpus,
}

impl CorpusSearcher {
    pub fn new(corpus: Corpus) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::Backend("empty corpus".into()));
        }
        Ok(Self { corpus })
    }

    pub fn corpus(&self) -> &Corpus {
        &self.corpus
    }

    fn score(&self, index: usize, terms: &[(&str, f64)]) -> f64 {
        let tokens = self.corpus.tokens_at(index);
        terms
            .iter()
            .map(|&(term, idf)| {
                let tf = tokens.iter().filter(|t| *t == term).count();
                tf as f64 * idf
            })
            .sum()
    }
}

impl SearchBackend for CorpusSearcher {
    fn search(&self, terms: &[&str], max_results: usize) -> Result<Vec<RankedResult>> {
        if max_results == 0 {
            return Err(Error::Backend("max_results must be at least 1".into()));
        }
        let mut seen = HashSet::new();
        let weighted: Vec<(&str, f64)> = terms
            .iter()
            .copied()
            .filter(|t| seen.insert(*t))
            .map(|t| (t, self.corpus.idf(t)))
            .collect();

        let mut scored: Vec<(f64, &str)> = self
            .corpus
            .documents()
            .iter()
            .enumerate()
            .filter_map(|(i, d)| {
                let s = self.score(i, &weighted);
                (s > 0.0).then_some((s, d.id.as_str()))
            })
            .collect();
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1)));
        scored.truncate(max_results);

        Ok(scored
            .into_iter()
            .enumerate()
            .map(|(i, (_, id))| RankedResult {
                doc_id: id.to_string(),
                position: i + 1,
            })
            .collect())
    }

    fn document(&self, doc_id: &str) -> Option<&Document> {
        self.corpus.get(doc_id)
    }
}
