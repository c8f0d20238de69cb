//! Documents, tokenization and the TF-IDF primitives behind the semantic
//! criterion.
//!
//! Two idf scopes exist. [`Corpus`] indexes the whole collection and is what
//! the built-in searcher ranks against. [`ResultScope`] indexes only the
//! documents a population of queries actually retrieved; the semantic
//! criterion weighs result and pattern terms over that set, with
//! `idf = ln((R + 1) / R_n)`.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// A retrievable unit: identifier plus the title and snippet a search engine
/// would show for it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub title: String,
    pub snippet: String,
}

impl Document {
    pub fn new(
        id: impl Into<String>,
        title: impl Into<String>,
        snippet: impl Into<String>,
    ) -> Self {
        Self {
            id: id.into(),
            title: title.into(),
            snippet: snippet.into(),
        }
    }

    /// Title and snippet joined by a single space.
    pub fn text(&self) -> String {
        format!("{} {}", self.title, self.snippet)
    }
}

/// Lowercasing tokenizer with a stopword filter and an optional
/// term-to-lemma table.
#[derive(Debug, Clone, Default)]
pub struct Tokenizer {
    stopwords: HashSet<String>,
    lemmas: HashMap<String, String>,
}

impl Tokenizer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_stopwords<I, S>(mut self, words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        self.stopwords
            .extend(words.into_iter().map(|w| w.as_ref().to_lowercase()));
        self
    }

    /// Maps surface forms onto a normal form after lowercasing.
    pub fn with_lemmas<I, K, V>(mut self, table: I) -> Self
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        self.lemmas.extend(
            table
                .into_iter()
                .map(|(k, v)| (k.as_ref().to_lowercase(), v.as_ref().to_lowercase())),
        );
        self
    }

    pub fn tokenize(&self, text: &str) -> Vec<String> {
        text.split(|c: char| !c.is_alphanumeric())
            .filter(|piece| !piece.is_empty())
            .filter_map(|piece| {
                let lower = piece.to_lowercase();
                if self.stopwords.contains(&lower) {
                    return None;
                }
                let term = self.lemmas.get(&lower).cloned().unwrap_or(lower);
                (!self.stopwords.contains(&term)).then_some(term)
            })
            .collect()
    }
}

/// Tokenizes with only a stopword filter.
pub fn tokenize(text: &str, stopwords: &HashSet<String>) -> Vec<String> {
    Tokenizer::new().with_stopwords(stopwords).tokenize(text)
}

/// `ln((r + 1) / containing)`; a term found in no document gets `ln(r + 1)`.
pub fn idf(containing: usize, r: usize) -> f64 {
    let numerator = (r + 1) as f64;
    if containing == 0 {
        numerator.ln()
    } else {
        (numerator / containing as f64).ln()
    }
}

/// Sparse term weights. Zero weights are never stored.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TermVector {
    weights: BTreeMap<String, f64>,
}

impl TermVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts or replaces a weight; a zero weight removes the entry.
    ///
    /// Panics on a non-finite weight.
    pub fn set(&mut self, term: impl Into<String>, weight: f64) {
        assert!(weight.is_finite(), "term weight must be finite");
        let term = term.into();
        if weight == 0.0 {
            self.weights.remove(&term);
        } else {
            self.weights.insert(term, weight);
        }
    }

    pub fn get(&self, term: &str) -> Option<f64> {
        self.weights.get(term).copied()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.weights.iter().map(|(t, w)| (t.as_str(), *w))
    }

    pub fn norm(&self) -> f64 {
        self.weights.values().map(|w| w * w).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &TermVector) -> f64 {
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        small
            .iter()
            .filter_map(|(t, w)| large.get(t).map(|v| w * v))
            .sum()
    }
}

impl<S: Into<String>> FromIterator<(S, f64)> for TermVector {
    fn from_iter<I: IntoIterator<Item = (S, f64)>>(iter: I) -> Self {
        let mut v = TermVector::new();
        for (t, w) in iter {
            v.set(t, w);
        }
        v
    }
}

/// Document-frequency table over a set of tokenized texts.
fn document_frequencies<'a>(
    token_lists: impl Iterator<Item = &'a Vec<String>>,
) -> BTreeMap<String, usize> {
    let mut df = BTreeMap::new();
    for tokens in token_lists {
        let distinct: BTreeSet<&String> = tokens.iter().collect();
        for term in distinct {
            *df.entry(term.clone()).or_insert(0) += 1;
        }
    }
    df
}

fn term_frequencies(tokens: &[String]) -> BTreeMap<&str, usize> {
    let mut tf = BTreeMap::new();
    for t in tokens {
        *tf.entry(t.as_str()).or_insert(0) += 1;
    }
    tf
}

/// An immutable document collection with its tokenized texts and
/// document-frequency index.
#[derive(Debug, Clone)]
pub struct Corpus {
    documents: Vec<Document>,
    tokens: Vec<Vec<String>>,
    by_id: HashMap<String, usize>,
    df: BTreeMap<String, usize>,
}

impl Corpus {
    pub fn build(documents: Vec<Document>, tokenizer: &Tokenizer) -> Result<Self> {
        let mut by_id = HashMap::with_capacity(documents.len());
        for (i, doc) in documents.iter().enumerate() {
            if doc.title.trim().is_empty() && doc.snippet.trim().is_empty() {
                return Err(Error::EmptyDocument(doc.id.clone()));
            }
            if by_id.insert(doc.id.clone(), i).is_some() {
                return Err(Error::DuplicateDocument(doc.id.clone()));
            }
        }
        let tokens: Vec<Vec<String>> = documents
            .iter()
            .map(|d| tokenizer.tokenize(&d.text()))
            .collect();
        let df = document_frequencies(tokens.iter());
        Ok(Self {
            documents,
            tokens,
            by_id,
            df,
        })
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn get(&self, id: &str) -> Option<&Document> {
        self.by_id.get(id).map(|&i| &self.documents[i])
    }

    pub(crate) fn tokens_at(&self, index: usize) -> &[String] {
        &self.tokens[index]
    }

    /// Number of documents containing `term`.
    pub fn document_frequency(&self, term: &str) -> usize {
        self.df.get(term).copied().unwrap_or(0)
    }

    pub fn document_frequencies(&self) -> &BTreeMap<String, usize> {
        &self.df
    }

    pub fn idf(&self, term: &str) -> f64 {
        idf(self.document_frequency(term), self.len())
    }
}

/// The documents retrieved by one population's queries: the `R` of the
/// semantic criterion's idf.
#[derive(Debug, Clone)]
pub struct ResultScope {
    tokens: BTreeMap<String, Vec<String>>,
    df: BTreeMap<String, usize>,
}

impl ResultScope {
    /// Duplicate documents (same id) are counted once.
    pub fn new<'a>(
        tokenizer: &Tokenizer,
        documents: impl IntoIterator<Item = &'a Document>,
    ) -> Self {
        let tokens: BTreeMap<String, Vec<String>> = documents
            .into_iter()
            .map(|d| (d.id.clone(), tokenizer.tokenize(&d.text())))
            .collect();
        let df = document_frequencies(tokens.values());
        Self { tokens, df }
    }

    /// `R`, the number of distinct result documents.
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn contains(&self, doc_id: &str) -> bool {
        self.tokens.contains_key(doc_id)
    }

    /// Number of result texts containing `term`.
    pub fn containing(&self, term: &str) -> usize {
        self.df.get(term).copied().unwrap_or(0)
    }

    pub fn idf(&self, term: &str) -> f64 {
        idf(self.containing(term), self.len())
    }

    /// tf·idf over the result's title and snippet.
    pub fn result_vector(&self, doc_id: &str) -> Result<TermVector> {
        let tokens = self
            .tokens
            .get(doc_id)
            .ok_or_else(|| Error::NotInResults(doc_id.to_string()))?;
        Ok(term_frequencies(tokens)
            .into_iter()
            .map(|(term, tf)| (term, tf as f64 * self.idf(term)))
            .collect())
    }

    /// `(1/|K|)·idf` for every pattern term.
    pub fn pattern_vector<S: AsRef<str>>(&self, pattern: &[S]) -> Result<TermVector> {
        if pattern.is_empty() {
            return Err(Error::EmptyPattern);
        }
        let share = 1.0 / pattern.len() as f64;
        Ok(pattern
            .iter()
            .map(|t| (t.as_ref(), share * self.idf(t.as_ref())))
            .collect())
    }
}

/// Reads `id<TAB>title<TAB>snippet` lines. Blank lines and lines starting
/// with `#` are skipped; a missing snippet column is read as empty.
pub fn load_documents(path: &Path) -> Result<Vec<Document>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut docs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.splitn(3, '\t');
        let id = cols.next().unwrap_or("").trim();
        let title = cols.next();
        let snippet = cols.next().unwrap_or("");
        match (id, title) {
            ("", _) | (_, None) => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: i + 1,
                    message: "expected id<TAB>title<TAB>snippet".into(),
                })
            }
            (id, Some(title)) => docs.push(Document::new(id, title, snippet)),
        }
    }
    Ok(docs)
}

pub fn load_corpus(path: &Path, tokenizer: &Tokenizer) -> Result<Corpus> {
    Corpus::build(load_documents(path)?, tokenizer)
}

/// One stopword per line; blank lines ignored.
pub fn load_stopwords(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_lowercase)
        .collect())
}
