use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genetics::CrossoverPoints;
use crate::weights::{RadiusConfig, RadiusVariant, SColumn, WeightMethod};

use super::curves::CurveMode;

/// Parameters of one evolutionary run.
///
/// The file form is flat `key = value` lines with `#` comments. Relative
/// paths are resolved against the directory of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub pattern_file: PathBuf,
    pub corpus_file: PathBuf,
    pub stopwords_file: Option<PathBuf>,
    pub queries_per_population: usize,
    pub terms_per_query: usize,
    pub max_results: usize,
    pub mutation_probability: f64,
    pub generations: usize,
    pub seed: u64,
    pub stop_enabled: bool,
    pub stop_epsilon: f64,
    pub stop_window: usize,
    pub crossover_points: CrossoverPoints,
    pub radius: RadiusConfig,
    pub s_column: SColumn,
    pub selection_weights: WeightMethod,
    /// Cap on the results of one population (all its queries together).
    pub population_results_cap: Option<usize>,
    /// Cap on the results logged over the whole run.
    pub total_results_cap: Option<usize>,
    pub curve_mode: CurveMode,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            pattern_file: PathBuf::new(),
            corpus_file: PathBuf::new(),
            stopwords_file: None,
            queries_per_population: 5,
            terms_per_query: 8,
            max_results: 20,
            mutation_probability: 0.1,
            generations: 200,
            seed: 0,
            stop_enabled: false,
            stop_epsilon: 1e-6,
            stop_window: 10,
            crossover_points: CrossoverPoints::Random,
            radius: RadiusConfig::default(),
            s_column: SColumn::Raw,
            selection_weights: WeightMethod::Equal,
            population_results_cap: None,
            total_results_cap: None,
            curve_mode: CurveMode::PerPopulation,
        }
    }
}

fn value<T: FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| Error::Config(format!("invalid value {raw:?} for {key}")))
}

fn boolean(key: &str, raw: &str) -> Result<bool> {
    match raw {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::Config(format!("invalid boolean {raw:?} for {key}"))),
    }
}

fn optional_cap(key: &str, raw: &str) -> Result<Option<usize>> {
    match raw {
        "" | "none" => Ok(None),
        n => value(key, n).map(Some),
    }
}

impl FromStr for CrossoverPoints {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" => Ok(CrossoverPoints::One),
            "2" => Ok(CrossoverPoints::Two),
            "random" => Ok(CrossoverPoints::Random),
            other => Err(Error::Config(format!(
                "invalid crossover_points {other:?}; expected 1, 2 or random"
            ))),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new(""));
        Self::parse(&text, base).map_err(|e| match e {
            Error::Config(message) => Error::Config(format!("{}: {message}", path.display())),
            other => other,
        })
    }

    /// Parses the `key = value` form; relative paths are joined onto `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut cfg = Self::default();
        let mut xi = cfg.radius.xi;
        let mut variant = cfg.radius.variant;
        let mut has_pattern = false;
        let mut has_corpus = false;

        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, raw) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
            let path = || base.join(raw);
            match key {
                "pattern_file" => {
                    cfg.pattern_file = path();
                    has_pattern = true;
                }
                "corpus_file" => {
                    cfg.corpus_file = path();
                    has_corpus = true;
                }
                "stopwords_file" => cfg.stopwords_file = (!raw.is_empty()).then(path),
                "queries_per_population" => cfg.queries_per_population = value(key, raw)?,
                "terms_per_query" => cfg.terms_per_query = value(key, raw)?,
                "max_results" => cfg.max_results = value(key, raw)?,
                "mutation_probability" => cfg.mutation_probability = value(key, raw)?,
                "generations" => cfg.generations = value(key, raw)?,
                "seed" => cfg.seed = value(key, raw)?,
                "stop_enabled" => cfg.stop_enabled = boolean(key, raw)?,
                "stop_epsilon" => cfg.stop_epsilon = value(key, raw)?,
                "stop_window" => cfg.stop_window = value(key, raw)?,
                "crossover_points" => cfg.crossover_points = raw.parse()?,
                "xi_g" => xi[0] = value(key, raw)?,
                "xi_p" => xi[1] = value(key, raw)?,
                "xi_s" => xi[2] = value(key, raw)?,
                "radius_variant" => variant = raw.parse::<RadiusVariant>()?,
                "s_column" => cfg.s_column = raw.parse()?,
                "selection_weights" => cfg.selection_weights = raw.parse()?,
                "population_results_cap" => cfg.population_results_cap = optional_cap(key, raw)?,
                "total_results_cap" => cfg.total_results_cap = optional_cap(key, raw)?,
                "curve_mode" => cfg.curve_mode = raw.parse()?,
                other => {
                    return Err(Error::Config(format!(
                        "line {}: unknown key {other:?}",
                        i + 1
                    )))
                }
            }
        }
        if !has_pattern || !has_corpus {
            return Err(Error::Config(
                "pattern_file and corpus_file are required".into(),
            ));
        }
        cfg.radius = RadiusConfig::new(xi, variant)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_string()));
        if self.queries_per_population < 2 {
            return fail("queries_per_population must be at least 2");
        }
        if self.terms_per_query < 1 {
            return fail("terms_per_query must be at least 1");
        }
        if self.max_results < 1 {
            return fail("max_results must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.mutation_probability) {
            return fail("mutation_probability must lie in [0, 1]");
        }
        if self.generations < 1 {
            return fail("generations must be at least 1");
        }
        if self.stop_epsilon.is_nan() || self.stop_epsilon < 0.0 || self.stop_window < 1 {
            return fail("stop_epsilon must be >= 0 and stop_window >= 1");
        }
        if self.population_results_cap == Some(0) || self.total_results_cap == Some(0) {
            return fail("result caps must be positive");
        }
        Ok(())
    }
}
