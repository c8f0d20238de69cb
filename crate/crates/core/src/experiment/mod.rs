//! Full evolutionary runs and analysis of their logs.
//!
//! Each generation runs every query of the population, logs one record per
//! (query, result), and then breeds the next population: outbred pairs are
//! crossed over, offspring are mutated, and the fittest genomes of parents
//! plus offspring survive. Survivor fitness is measured with parents and
//! offspring evaluated together as one population.

pub mod config;
pub mod curves;
pub mod log;

use std::time::{SystemTime, UNIX_EPOCH};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fitness::{evaluate_population, fitness_by_query, population_fitness, ResultRecord};
use crate::genetics::{
    crossover, elitist_select, init_population, is_stable, mutate, select_outbred_pairs,
    Population, QueryGenome, SearchPattern,
};
use crate::search::{execute, CorpusSearcher, RankedResult, SearchBackend};
use crate::text::{load_corpus, load_stopwords, Tokenizer};
use crate::weights::{collect_samples, weights_for_samples, DataRange, WeightVector};

pub use config::ExperimentConfig;
pub use curves::{compute_curves, write_curves, CurveMode, CurvePoint, Curves};
pub use log::{read_log, write_log, GenerationAudit, ResultLog, RunMetadata};

/// Everything a run needs besides its configuration.
pub struct Experiment<'a> {
    pub config: ExperimentConfig,
    pub pattern: SearchPattern,
    pub backend: &'a dyn SearchBackend,
    pub tokenizer: Tokenizer,
}

/// Loads the tokenizer, pattern and corpus named by `cfg`.
pub fn load_inputs(cfg: &ExperimentConfig) -> Result<(Tokenizer, SearchPattern, CorpusSearcher)> {
    let mut tokenizer = Tokenizer::new();
    if let Some(path) = &cfg.stopwords_file {
        tokenizer = tokenizer.with_stopwords(load_stopwords(path)?);
    }
    let pattern = SearchPattern::load(&cfg.pattern_file)?;
    let corpus = load_corpus(&cfg.corpus_file, &tokenizer)?;
    let searcher = CorpusSearcher::new(corpus)?;
    Ok((tokenizer, pattern, searcher))
}

/// Loads the inputs named by `cfg` and runs the built-in searcher over them.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ResultLog> {
    let (tokenizer, pattern, searcher) = load_inputs(cfg)?;
    Experiment {
        config: cfg.clone(),
        pattern,
        backend: &searcher,
        tokenizer,
    }
    .run()
}

/// Keeps at most `cap` results across all lists, dropping the worst
/// positions first (later queries first among equal positions).
fn cap_results(lists: &mut [Vec<RankedResult>], cap: usize) {
    let total: usize = lists.iter().map(Vec::len).sum();
    let mut excess = total.saturating_sub(cap);
    while excess > 0 {
        let worst = lists
            .iter()
            .enumerate()
            .filter_map(|(q, l)| l.last().map(|r| (r.position, q)))
            .max()
            .map(|(_, q)| q)
            .expect("non-empty lists while over cap");
        lists[worst].pop();
        excess -= 1;
    }
}

fn terms_of(genome: &QueryGenome) -> Vec<String> {
    genome.terms().into_iter().map(str::to_string).collect()
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

struct Evaluation {
    lists: Vec<Vec<RankedResult>>,
    records: Vec<ResultRecord>,
    query_fitness: Vec<f64>,
}

impl Experiment<'_> {
    fn search_all(&self, genomes: &[QueryGenome]) -> Result<Vec<Vec<RankedResult>>> {
        let backend = self.backend;
        let max = self.config.max_results;
        genomes
            .par_iter()
            .map(|g| execute(g, backend, max))
            .collect()
    }

    fn selection_weights(
        &self,
        records: &[ResultRecord],
        population_no: u64,
    ) -> Result<WeightVector> {
        if records.is_empty() {
            return Ok(WeightVector::equal());
        }
        let samples = collect_samples(
            records,
            DataRange::PerPopulation { population_no },
            self.config.s_column,
        )?;
        match weights_for_samples(&samples, self.config.selection_weights, &self.config.radius) {
            Ok((w, _)) => Ok(w),
            Err(Error::NonPositiveMaximum) => Ok(WeightVector::equal()),
            Err(e) => Err(e),
        }
    }

    fn evaluate(
        &self,
        population_no: u64,
        mut lists: Vec<Vec<RankedResult>>,
        cap: Option<usize>,
    ) -> Result<Evaluation> {
        if let Some(cap) = cap {
            cap_results(&mut lists, cap);
        }
        let pattern_terms = self.pattern.terms();
        let records = evaluate_population(
            population_no,
            &lists,
            self.backend,
            &self.tokenizer,
            &pattern_terms,
        )?;
        let w = self.selection_weights(&records, population_no)?;
        let query_fitness = fitness_by_query(&records, lists.len(), &w);
        Ok(Evaluation {
            lists,
            records,
            query_fitness,
        })
    }

    pub fn run(&self) -> Result<ResultLog> {
        let cfg = &self.config;
        cfg.validate()?;
        if self.pattern.len() < cfg.terms_per_query {
            return Err(Error::Config(format!(
                "pattern has {} terms, fewer than terms_per_query = {}",
                self.pattern.len(),
                cfg.terms_per_query
            )));
        }
        let started_unix = unix_now();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut population = init_population(
            &self.pattern,
            cfg.queries_per_population,
            cfg.terms_per_query,
            &mut rng,
        )?;

        let mut records = Vec::new();
        let mut audits = Vec::new();
        let mut history = Vec::new();
        let mut remaining = cfg.total_results_cap;

        for _ in 0..cfg.generations {
            let population_no = population.generation_no;
            let cap = match (cfg.population_results_cap, remaining) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            };
            let lists = self.search_all(&population.members)?;
            let eval = self.evaluate(population_no, lists.clone(), cap)?;
            let w_bar = population_fitness(&eval.query_fitness)?;
            history.push(w_bar);

            if let Some(r) = remaining.as_mut() {
                *r -= eval.records.len();
            }
            audits.push(GenerationAudit {
                population_no,
                queries: population.members.iter().map(terms_of).collect(),
                results: eval
                    .lists
                    .iter()
                    .map(|l| l.iter().map(|r| r.doc_id.clone()).collect())
                    .collect(),
                query_fitness: eval.query_fitness.clone(),
                population_fitness: w_bar,
                offspring: Vec::new(),
                pool_fitness: Vec::new(),
            });
            records.extend(eval.records);

            let last = audits.len() == cfg.generations;
            let exhausted = remaining == Some(0);
            let stable = cfg.stop_enabled && is_stable(&history, cfg.stop_epsilon, cfg.stop_window);
            if last || exhausted || stable {
                break;
            }
            let (next, offspring, pool_fitness) = self.breed(&population, lists, &mut rng)?;
            let audit = audits.last_mut().expect("audit pushed above");
            audit.offspring = offspring.iter().map(terms_of).collect();
            audit.pool_fitness = pool_fitness;
            population = next;
        }

        Ok(ResultLog {
            records,
            meta: Some(RunMetadata {
                config: cfg.clone(),
                seed: cfg.seed,
                started_unix,
                finished_unix: unix_now(),
                generations: audits,
            }),
        })
    }

    /// Returns the next population, the offspring and the pool fitness.
    fn breed(
        &self,
        parents: &Population,
        parent_lists: Vec<Vec<RankedResult>>,
        rng: &mut ChaCha8Rng,
    ) -> Result<(Population, Vec<QueryGenome>, Vec<f64>)> {
        let cfg = &self.config;
        let mut offspring = Vec::new();
        for (i, j) in select_outbred_pairs(parents)? {
            let (a, b) = crossover(
                &parents.members[i],
                &parents.members[j],
                cfg.crossover_points,
                rng,
            )?;
            offspring.push(mutate(&a, cfg.mutation_probability, rng));
            offspring.push(mutate(&b, cfg.mutation_probability, rng));
        }

        // Result caps limit what is logged; the pool is judged on full lists.
        let mut pool_lists = parent_lists;
        pool_lists.extend(self.search_all(&offspring)?);
        let pool = self.evaluate(parents.generation_no, pool_lists, None)?;
        let next = elitist_select(
            parents,
            &offspring,
            &pool.query_fitness,
            parents.members.len(),
        )?;
        Ok((next, offspring, pool.query_fitness))
    }
}
