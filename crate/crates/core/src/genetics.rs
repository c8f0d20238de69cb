//! Query genomes and the genetic operators that evolve them.
//!
//! A genome is a fixed-length list of genes, each a keyword drawn from the
//! search pattern together with a weight and its synonym set. Every operator
//! preserves the genome length and keeps the keywords of one genome
//! distinct.

use std::collections::{BTreeSet, HashSet};
use std::fs;
use std::path::Path;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gene {
    pub term: String,
    pub weight: f64,
    pub synonyms: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryGenome {
    genes: Vec<Gene>,
}

impl QueryGenome {
    /// Fails if two genes share a term.
    pub fn new(genes: Vec<Gene>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(genes.len());
        for g in &genes {
            if !seen.insert(g.term.as_str()) {
                return Err(Error::RepeatedTerm(g.term.clone()));
            }
        }
        Ok(Self { genes })
    }

    /// Builds a genome of synonym-free genes with uniform weights.
    pub fn from_terms<S: AsRef<str>>(terms: &[S]) -> Result<Self> {
        let weight = 1.0 / terms.len().max(1) as f64;
        Self::new(
            terms
                .iter()
                .map(|t| Gene {
                    term: t.as_ref().to_string(),
                    weight,
                    synonyms: BTreeSet::new(),
                })
                .collect(),
        )
    }

    pub fn genes(&self) -> &[Gene] {
        &self.genes
    }

    pub fn len(&self) -> usize {
        self.genes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.genes.is_empty()
    }

    pub fn terms(&self) -> Vec<&str> {
        self.genes.iter().map(|g| g.term.as_str()).collect()
    }

    pub fn term_set(&self) -> BTreeSet<&str> {
        self.genes.iter().map(|g| g.term.as_str()).collect()
    }

    fn has_term(&self, term: &str) -> bool {
        self.genes.iter().any(|g| g.term == term)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub members: Vec<QueryGenome>,
    pub generation_no: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternEntry {
    pub term: String,
    pub synonyms: BTreeSet<String>,
}

/// The subject-domain term set `K` that genomes draw their genes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchPattern {
    entries: Vec<PatternEntry>,
}

impl SearchPattern {
    /// Terms are lowercased; a term listed among its own synonyms is dropped
    /// from them.
    pub fn new(entries: Vec<PatternEntry>) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut out = Vec::with_capacity(entries.len());
        for e in entries {
            let term = e.term.trim().to_lowercase();
            if term.is_empty() {
                return Err(Error::Config("empty pattern term".into()));
            }
            if !seen.insert(term.clone()) {
                return Err(Error::DuplicatePatternTerm(term));
            }
            let synonyms = e
                .synonyms
                .iter()
                .map(|s| s.trim().to_lowercase())
                .filter(|s| !s.is_empty() && *s != term)
                .collect();
            out.push(PatternEntry { term, synonyms });
        }
        Ok(Self { entries: out })
    }

    /// Reads `term<TAB>syn1,syn2,...` lines; `#` starts a comment line.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut entries = Vec::new();
        let mut seen = HashSet::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (term, syns) = line.split_once('\t').unwrap_or((line, ""));
            let parse_err = |message: String| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message,
            };
            if term.trim().is_empty() {
                return Err(parse_err("missing pattern term".into()));
            }
            if !seen.insert(term.trim().to_lowercase()) {
                return Err(parse_err(format!(
                    "duplicate pattern term {:?}",
                    term.trim()
                )));
            }
            entries.push(PatternEntry {
                term: term.to_string(),
                synonyms: syns.split(',').map(str::to_string).collect(),
            });
        }
        Self::new(entries)
    }

    pub fn entries(&self) -> &[PatternEntry] {
        &self.entries
    }

    pub fn terms(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.term.as_str()).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Samples `n` genomes of `m` distinct pattern terms each.
pub fn init_population<R: Rng + ?Sized>(
    pattern: &SearchPattern,
    n: usize,
    m: usize,
    rng: &mut R,
) -> Result<Population> {
    if n < 2 || 2 * n >= pattern.len() {
        return Err(Error::PopulationConstraint {
            n,
            pattern: pattern.len(),
        });
    }
    if m == 0 || m > pattern.len() {
        return Err(Error::SizeMismatch(format!(
            "{m} terms per query requested from a pattern of {}",
            pattern.len()
        )));
    }
    let weight = 1.0 / m as f64;
    let members = (0..n)
        .map(|_| {
            let genes = index::sample(rng, pattern.len(), m)
                .into_iter()
                .map(|i| {
                    let e = &pattern.entries[i];
                    Gene {
                        term: e.term.clone(),
                        weight,
                        synonyms: e.synonyms.clone(),
                    }
                })
                .collect();
            QueryGenome { genes }
        })
        .collect();
    Ok(Population {
        members,
        generation_no: 0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CrossoverPoints {
    One,
    Two,
    Random,
}

/// One- or two-point crossover with random cut positions.
///
/// Two-point crossover on genomes shorter than three genes degrades to
/// one-point, as there is only one interior cut.
pub fn crossover<R: Rng + ?Sized>(
    a: &QueryGenome,
    b: &QueryGenome,
    points: CrossoverPoints,
    rng: &mut R,
) -> Result<(QueryGenome, QueryGenome)> {
    check_pair(a, b)?;
    let m = a.len();
    if m < 2 {
        return Err(Error::SizeMismatch(format!(
            "crossover needs at least 2 genes, got {m}"
        )));
    }
    let two = match points {
        CrossoverPoints::One => false,
        CrossoverPoints::Two => true,
        CrossoverPoints::Random => rng.gen_bool(0.5),
    };
    let cuts = if two && m >= 3 {
        let mut c = index::sample(rng, m - 1, 2).into_vec();
        c.sort_unstable();
        vec![c[0] + 1, c[1] + 1]
    } else {
        vec![rng.gen_range(1..m)]
    };
    crossover_at(a, b, &cuts, rng)
}

/// Crossover at explicit cut positions (one or two, each in `1..m`).
///
/// Genes between the cuts (or after the single cut) are exchanged. An
/// incoming gene whose term the offspring already holds is replaced by a
/// uniformly drawn gene of the donor parent that the offspring lacks.
pub fn crossover_at<R: Rng + ?Sized>(
    a: &QueryGenome,
    b: &QueryGenome,
    cuts: &[usize],
    rng: &mut R,
) -> Result<(QueryGenome, QueryGenome)> {
    check_pair(a, b)?;
    let m = a.len();
    let (lo, hi) = match *cuts {
        [c] if (1..m).contains(&c) => (c, m),
        [c1, c2] if 1 <= c1 && c1 < c2 && c2 < m => (c1, c2),
        _ => {
            return Err(Error::SizeMismatch(format!(
                "invalid cut points {cuts:?} for genomes of length {m}"
            )))
        }
    };
    let first = exchange(a, b, lo, hi, rng);
    let second = exchange(b, a, lo, hi, rng);
    Ok((first, second))
}

/// `keep` outside `lo..hi`, `donor` inside, then duplicate repair.
fn exchange<R: Rng + ?Sized>(
    keep: &QueryGenome,
    donor: &QueryGenome,
    lo: usize,
    hi: usize,
    rng: &mut R,
) -> QueryGenome {
    let mut genes: Vec<Gene> = keep.genes.clone();
    genes[lo..hi].clone_from_slice(&donor.genes[lo..hi]);

    let retained: HashSet<&str> = keep.genes[..lo]
        .iter()
        .chain(&keep.genes[hi..])
        .map(|g| g.term.as_str())
        .collect();
    let duplicates: Vec<usize> = (lo..hi)
        .filter(|&i| retained.contains(genes[i].term.as_str()))
        .collect();

    for slot in duplicates {
        let candidates: Vec<&Gene> = donor
            .genes
            .iter()
            .filter(|g| !genes.iter().any(|h| h.term == g.term))
            .collect();
        // Donor genes outside the exchanged segment always cover the
        // duplicates when both parents hold distinct terms.
        let pick = candidates[rng.gen_range(0..candidates.len())].clone();
        genes[slot] = pick;
    }
    QueryGenome { genes }
}

fn check_pair(a: &QueryGenome, b: &QueryGenome) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::SizeMismatch(format!(
            "genome lengths {} and {} differ",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

/// With probability `p_m`, swaps one random gene's term for one of its
/// synonyms. The displaced term joins the synonym set. Synonyms already used
/// as a term elsewhere in the genome are not eligible.
pub fn mutate<R: Rng + ?Sized>(genome: &QueryGenome, p_m: f64, rng: &mut R) -> QueryGenome {
    let mut out = genome.clone();
    if genome.is_empty() || !rng.gen_bool(p_m.clamp(0.0, 1.0)) {
        return out;
    }
    let slot = rng.gen_range(0..genome.len());
    let eligible: Vec<&String> = genome.genes[slot]
        .synonyms
        .iter()
        .filter(|s| !genome.has_term(s))
        .collect();
    if eligible.is_empty() {
        return out;
    }
    let replacement = eligible[rng.gen_range(0..eligible.len())].clone();
    let gene = &mut out.genes[slot];
    gene.synonyms.remove(&replacement);
    let old = std::mem::replace(&mut gene.term, replacement);
    gene.synonyms.insert(old);
    out
}

/// `m` minus the number of shared terms.
pub fn genotype_distance(a: &QueryGenome, b: &QueryGenome) -> Result<usize> {
    check_pair(a, b)?;
    let shared = a.term_set().intersection(&b.term_set()).count();
    Ok(a.len() - shared)
}

/// Greedy outbreeding over genotype distance.
pub fn select_outbred_pairs(pop: &Population) -> Result<Vec<(usize, usize)>> {
    let members = &pop.members;
    if let Some(first) = members.first() {
        for g in members {
            check_pair(first, g)?;
        }
    }
    Ok(greedy_pairs(members.len(), |i, j| {
        genotype_distance(&members[i], &members[j]).expect("lengths checked")
    }))
}

/// The lowest-index unpaired item mates with the unpaired item farthest from
/// it (ties to the lower index), until fewer than two remain.
pub fn greedy_pairs(n: usize, distance: impl Fn(usize, usize) -> usize) -> Vec<(usize, usize)> {
    let mut paired = vec![false; n];
    let mut pairs = Vec::with_capacity(n / 2);
    for i in 0..n {
        if paired[i] {
            continue;
        }
        let mut best: Option<(usize, usize)> = None;
        for (j, _) in paired.iter().enumerate().skip(i + 1).filter(|(_, &p)| !p) {
            let d = distance(i, j);
            if best.is_none_or(|(_, bd)| d > bd) {
                best = Some((j, d));
            }
        }
        match best {
            Some((j, _)) => {
                paired[i] = true;
                paired[j] = true;
                pairs.push((i, j));
            }
            None => break,
        }
    }
    pairs
}

/// Keeps the `n` fittest genomes of parents followed by offspring.
///
/// `fitness` is aligned with that combined pool. Ties keep pool order, so
/// parents win over offspring and lower indices over higher ones.
pub fn elitist_select(
    parents: &Population,
    offspring: &[QueryGenome],
    fitness: &[f64],
    n: usize,
) -> Result<Population> {
    let pool: Vec<&QueryGenome> = parents.members.iter().chain(offspring).collect();
    if pool.len() < n {
        return Err(Error::PoolTooSmall {
            pool: pool.len(),
            n,
        });
    }
    if fitness.len() != pool.len() {
        return Err(Error::SizeMismatch(format!(
            "{} fitness values for a pool of {}",
            fitness.len(),
            pool.len()
        )));
    }
    let mut order: Vec<usize> = (0..pool.len()).collect();
    order.sort_by(|&i, &j| fitness[j].total_cmp(&fitness[i]));
    Ok(Population {
        members: order[..n].iter().map(|&i| pool[i].clone()).collect(),
        generation_no: parents.generation_no + 1,
    })
}

/// True when the last `window + 1` population fitness values all lie within
/// `epsilon` of each other.
pub fn is_stable(history: &[f64], epsilon: f64, window: usize) -> bool {
    if window == 0 || history.len() < window + 1 {
        return false;
    }
    let tail = &history[history.len() - window - 1..];
    let hi = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = tail.iter().copied().fold(f64::INFINITY, f64::min);
    hi - lo <= epsilon
}
