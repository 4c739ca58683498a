use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use stock2vec::corpus::Order;
use stock2vec::pipeline::run::{write_fixture_bundle, Runner};
use stock2vec::pipeline::{PipelineError, RunConfig};

/// Company embeddings from the daily rank order of stock price changes.
///
/// Settings come from the JSON file given with --config; the global flags
/// override it. Every command writes resolved_config.json into the output
/// directory. Exit status: 0 success, 2 bad input or configuration,
/// 3 computation failure.
#[derive(Debug, Parser)]
#[command(name = "stock2vec", version)]
struct Cli {
    /// JSON run configuration; relative paths inside it are resolved against its directory.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Seed for every random stream (training, splits, forests, permutations).
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// SGNS worker threads; only 1 gives reproducible embeddings.
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,
    /// Sentence order: biggest gainer first (desc) or biggest loser first (asc).
    #[arg(long, global = true, value_name = "ORDER", value_parser = ["desc", "asc"])]
    order: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse prices and company metadata into the daily change panel (panel.csv).
    Ingest,
    /// Rank each day's changes into a ticker sentence (corpus.txt).
    BuildCorpus,
    /// Build the corpus and train the embedding (embedding.txt, embedding.meta.json).
    Train {
        /// Embedding dimension, overriding the config.
        #[arg(long, value_name = "D")]
        dimension: Option<usize>,
    },
    /// Train one embedding per sweep dimension, score four sector classifiers,
    /// and print the selected dimension.
    Sweep,
    /// Explained-variance curve of a high-dimensional embedding and the sector
    /// projection of the trained embedding.
    Pca,
    /// Baseline and embedding-augmented OLS for each configured target.
    Regress,
    /// Write report/manifest.json over every report file.
    Report,
    /// ingest, train, sweep, pca, regress and report in sequence.
    All,
    /// Regenerate the synthetic fixture bundle into DIR.
    #[command(hide = true)]
    MakeFixtures {
        /// Destination directory.
        dir: PathBuf,
    },
}

enum Failure {
    Input(String),
    Compute(String),
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        if e.is_input_error() {
            Failure::Input(e.to_string())
        } else {
            Failure::Compute(e.to_string())
        }
    }
}

fn resolve_config(cli: &Cli) -> Result<RunConfig, PipelineError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => {
            let mut c = RunConfig::default();
            c.resolve_paths(&std::env::current_dir().map_err(|e| PipelineError::io(".", e))?);
            c
        }
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    if let Some(o) = &cli.order {
        cfg.order = o.parse::<Order>().map_err(PipelineError::InvalidConfig)?;
    }
    Ok(cfg)
}

fn log(msg: impl AsRef<str>) {
    eprintln!("stock2vec: {}", msg.as_ref());
}

fn ingest(r: &Runner) -> Result<(), PipelineError> {
    let s = r.ingest()?;
    println!(
        "tickers={} days={} rows_read={} dropped_rows={} duplicate_rows={} outliers={}",
        s.tickers, s.days, s.rows_read, s.dropped_rows, s.duplicate_rows, s.outliers
    );
    log(format!("wrote {}", r.panel_path().display()));
    Ok(())
}

fn train(r: &Runner, dimension: Option<usize>) -> Result<(), PipelineError> {
    let e = r.train(dimension)?;
    log(format!("trained {} x {} embedding -> {}", e.len(), e.dim(), r.embedding_path().display()));
    Ok(())
}

fn sweep(r: &Runner) -> Result<(), PipelineError> {
    let s = r.sweep()?;
    for (d, m) in s.dims.iter().zip(s.mean_accuracy()) {
        log(format!("dim {d}: mean accuracy {m:.4}"));
    }
    println!("selected_dimension={}", s.selected);
    Ok(())
}

fn pca(r: &Runner) -> Result<(), PipelineError> {
    let c = r.pca()?;
    if let Some(v) = c.at(4) {
        log(format!("{}-dim embedding: first 4 components explain {v:.4}", c.high_dim));
    }
    Ok(())
}

fn regress(r: &Runner) -> Result<(), PipelineError> {
    for x in r.regress()? {
        log(format!(
            "{}: r2 {:.4} -> {:.4} ({} rows joined, {} dropped)",
            x.target, x.baseline.r2, x.augmented.r2, x.joined_rows, x.dropped_rows
        ));
    }
    Ok(())
}

fn report(r: &Runner) -> Result<(), PipelineError> {
    let m = r.report()?;
    log(format!("manifest lists {} files", m.files.len()));
    Ok(())
}

fn make_fixtures(dir: &Path) -> Result<(), PipelineError> {
    for f in write_fixture_bundle(dir)? {
        log(format!("wrote {}", f.display()));
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Failure> {
    if let Command::MakeFixtures { dir } = &cli.command {
        return Ok(make_fixtures(dir)?);
    }
    let runner = Runner::new(resolve_config(cli)?)?;
    runner.write_resolved_config()?;
    match &cli.command {
        Command::Ingest => ingest(&runner)?,
        Command::BuildCorpus => {
            let (_, s) = runner.build_corpus()?;
            println!(
                "sentences={} vocabulary={} min_length={} max_length={} mean_length={:.2}",
                s.sentences, s.vocabulary, s.min_length, s.max_length, s.mean_length
            );
        }
        Command::Train { dimension } => train(&runner, *dimension)?,
        Command::Sweep => sweep(&runner)?,
        Command::Pca => pca(&runner)?,
        Command::Regress => regress(&runner)?,
        Command::Report => report(&runner)?,
        Command::All => {
            ingest(&runner)?;
            train(&runner, None)?;
            sweep(&runner)?;
            pca(&runner)?;
            regress(&runner)?;
            report(&runner)?;
        }
        Command::MakeFixtures { .. } => unreachable!("handled above"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(m)) => {
            log(format!("error: {m}"));
            ExitCode::from(2)
        }
        Err(Failure::Compute(m)) => {
            log(format!("error: {m}"));
            ExitCode::from(3)
        }
    }
}
