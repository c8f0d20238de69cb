use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use queryevo::experiment::{self, log, CurveMode, ExperimentConfig};
use queryevo::search::{CorpusSearcher, SearchBackend};
use queryevo::text::{load_corpus, load_stopwords, Tokenizer};
use queryevo::weights::{
    weights_for_range, DataRange, RadiusConfig, RadiusVariant, SColumn, WeightMethod, WeightReport,
};
use queryevo::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;

#[derive(Parser)]
#[command(
    name = "queryevo",
    version,
    about = "Evolve keyword search queries and analyze their fitness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the genetic algorithm; writes log.csv, curves.csv, weights.csv and run.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed in the config file.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "run-output")]
        out: PathBuf,
        /// Overrides the curve mode in the config file.
        #[arg(long)]
        mode: Option<CurveMode>,
    },
    /// Compute one weight triple from a log.
    Weights {
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        method: WeightMethod,
        /// all, population:<p> or query:<p>:<q>
        #[arg(long, default_value = "all")]
        range: DataRange,
        #[command(flatten)]
        analysis: AnalysisArgs,
    },
    /// Compute W_equ, W_dis and W_rad per population from a log.
    Curves {
        #[arg(long)]
        log: PathBuf,
        #[arg(long, default_value = "per-population")]
        mode: CurveMode,
        /// Write to a file instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        analysis: AnalysisArgs,
    },
    /// Run one query against a corpus file.
    Search {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        stopwords: Option<PathBuf>,
        #[arg(long, default_value_t = 20)]
        max_results: usize,
        #[arg(required = true)]
        terms: Vec<String>,
    },
}

#[derive(Args)]
struct AnalysisArgs {
    #[arg(long, default_value = "direct")]
    variant: RadiusVariant,
    /// Radius thresholds for g, p and s, comma-separated.
    #[arg(long, default_value = "0.33,0.33,0.34", value_parser = parse_xi)]
    xi: [f64; 3],
    #[arg(long, default_value = "raw")]
    s_column: SColumn,
}

impl AnalysisArgs {
    fn radius(&self) -> Result<RadiusConfig, Error> {
        RadiusConfig::new(self.xi, self.variant)
    }
}

fn parse_xi(raw: &str) -> Result<[f64; 3], String> {
    let values = raw
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| format!("not a number: {v:?}"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    values
        .try_into()
        .map_err(|v: Vec<f64>| format!("expected three values, got {}", v.len()))
}

fn warn_all(warnings: &[String]) {
    const SHOWN: usize = 4;
    for w in warnings.iter().take(SHOWN) {
        eprintln!("warning: {w}");
    }
    if warnings.len() > SHOWN {
        eprintln!("warning: ... {} more warnings", warnings.len() - SHOWN);
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Error> {
    fs::write(path, bytes).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn stdout_err(e: io::Error) -> Error {
    Error::Io {
        path: "<stdout>".into(),
        source: e,
    }
}

fn run(config: &Path, seed: Option<u64>, out: &Path, mode: Option<CurveMode>) -> Result<(), Error> {
    let mut cfg = ExperimentConfig::load(config)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if let Some(mode) = mode {
        cfg.curve_mode = mode;
    }
    let result = experiment::run_experiment(&cfg)?;
    fs::create_dir_all(out).map_err(|e| Error::Io {
        path: out.to_path_buf(),
        source: e,
    })?;

    log::write_log(&result, &out.join("log.csv"))?;
    if let Some(meta) = &result.meta {
        log::write_metadata(meta, &out.join("run.json"))?;
    }

    let curves =
        experiment::compute_curves(&result.records, &cfg.radius, cfg.curve_mode, cfg.s_column)?;
    warn_all(&curves.warnings);
    let mut buf = Vec::new();
    experiment::write_curves(&curves.points, &mut buf).map_err(stdout_err)?;
    write_file(&out.join("curves.csv"), &buf)?;

    let mut report = format!("{}\n", WeightReport::HEADER);
    for method in [
        WeightMethod::Equal,
        WeightMethod::Spread,
        WeightMethod::Radius,
    ] {
        match weights_for_range(
            &result.records,
            DataRange::AllPopulations,
            method,
            &cfg.radius,
            cfg.s_column,
        ) {
            Ok(r) => {
                warn_all(&r.warnings);
                report.push_str(&r.csv_row());
                report.push('\n');
            }
            Err(e) => eprintln!("warning: {method} weights unavailable: {e}"),
        }
    }
    write_file(&out.join("weights.csv"), report.as_bytes())?;

    let populations = result.meta.as_ref().map_or(0, |m| m.generations.len());
    eprintln!(
        "{} populations, {} records written to {}",
        populations,
        result.records.len(),
        out.display()
    );
    Ok(())
}

fn weights(
    log_path: &Path,
    method: WeightMethod,
    range: DataRange,
    a: &AnalysisArgs,
) -> Result<(), Error> {
    let result = log::read_log(log_path)?;
    let report = weights_for_range(&result.records, range, method, &a.radius()?, a.s_column)?;
    warn_all(&report.warnings);
    let mut out = io::stdout().lock();
    writeln!(out, "{}", WeightReport::HEADER).map_err(stdout_err)?;
    writeln!(out, "{}", report.csv_row()).map_err(stdout_err)
}

fn curves(
    log_path: &Path,
    mode: CurveMode,
    out: Option<&Path>,
    a: &AnalysisArgs,
) -> Result<(), Error> {
    let result = log::read_log(log_path)?;
    let curves = experiment::compute_curves(&result.records, &a.radius()?, mode, a.s_column)?;
    warn_all(&curves.warnings);
    match out {
        Some(path) => {
            let mut buf = Vec::new();
            experiment::write_curves(&curves.points, &mut buf).map_err(stdout_err)?;
            write_file(path, &buf)
        }
        None => experiment::write_curves(&curves.points, io::stdout().lock()).map_err(stdout_err),
    }
}

fn search(
    corpus: &Path,
    stopwords: Option<&Path>,
    max_results: usize,
    terms: &[String],
) -> Result<(), Error> {
    let mut tokenizer = Tokenizer::new();
    if let Some(path) = stopwords {
        tokenizer = tokenizer.with_stopwords(load_stopwords(path)?);
    }
    let searcher = CorpusSearcher::new(load_corpus(corpus, &tokenizer)?)?;
    let terms: Vec<String> = terms.iter().flat_map(|t| tokenizer.tokenize(t)).collect();
    let refs: Vec<&str> = terms.iter().map(String::as_str).collect();
    let mut out = io::stdout().lock();
    for hit in searcher.search(&refs, max_results)? {
        let title = searcher
            .document(&hit.doc_id)
            .map_or("", |d| d.title.as_str());
        writeln!(out, "{}\t{}\t{}", hit.position, hit.doc_id, title).map_err(stdout_err)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Run {
            config,
            seed,
            out,
            mode,
        } => run(config, *seed, out, *mode),
        Command::Weights {
            log,
            method,
            range,
            analysis,
        } => weights(log, *method, *range, analysis),
        Command::Curves {
            log,
            mode,
            out,
            analysis,
        } => curves(log, *mode, out.as_deref(), analysis),
        Command::Search {
            corpus,
            stopwords,
            max_results,
            terms,
        } => search(corpus, stopwords.as_deref(), *max_results, terms),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_DATA)
        }
    }
}
