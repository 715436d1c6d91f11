//! Command-line front end: `ingest`, `build`, `query`, `serve`.
//!
//! Results go to stdout, diagnostics to stderr. Any error exits nonzero.
//! `build` writes a JSON run manifest next to the artifact recording every
//! resolved option and where it came from (flag, env, or default).

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::parser::ValueSource;
use clap::{ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use serde::Serialize;

use crate::artifact::{load_corpus, save_corpus, Artifact};
use crate::community::LouvainConfig;
use crate::corpus::{ingest, input_fingerprint};
use crate::embedding::{TargetMode, TrainConfig};
use crate::pipeline::{build_artifact, BuildConfig};
use crate::sentiment::load_lexicon;
use crate::service::{serve, Catalog};
use crate::simgraph::recommend;
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "talkgraph", version, about = "Transcript-based talk recommender")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Join metadata and transcript CSVs into a corpus file.
    Ingest(IngestArgs),
    /// Run every analysis stage and write the serving artifact.
    Build(BuildArgs),
    /// Print recommendations for a talk title.
    Query(QueryArgs),
    /// Serve the HTTP API over an artifact.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Talk metadata CSV (title, main_speaker, tags, views, url).
    #[arg(long = "main")]
    pub main: PathBuf,
    /// Transcript CSV (transcript, url).
    #[arg(long)]
    pub transcripts: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_band(raw: &str) -> std::result::Result<(f64, f64), String> {
    let (lo, hi) = raw
        .split_once(',')
        .ok_or_else(|| format!("expected <low>,<high>, got {raw:?}"))?;
    let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| format!("{s:?}: {e}"));
    crate::sentiment::validate_band((parse(lo)?, parse(hi)?)).map_err(|e| e.to_string())
}

fn parse_fraction(raw: &str) -> std::result::Result<f64, String> {
    let f: f64 = raw.parse().map_err(|e| format!("{e}"))?;
    if f > 0.0 && f <= 1.0 {
        Ok(f)
    } else {
        Err(format!("{f} is not in (0, 1]"))
    }
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    /// Corpus file written by `ingest`.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Tab-separated happiness lexicon (labMT layout).
    #[arg(long)]
    pub lexicon: PathBuf,
    /// Neutral band excluded from the lexicon, as `<low>,<high>`.
    #[arg(long, default_value = "4,6", value_parser = parse_band)]
    pub band: (f64, f64),
    #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u32).range(1..))]
    pub dim: u32,
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(1..))]
    pub window: u32,
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u32).range(1..))]
    pub epochs: u32,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..))]
    pub negatives: u32,
    /// Initial learning rate.
    #[arg(long, default_value_t = 0.025)]
    pub lr: f64,
    #[arg(long, default_value_t = 0.0001)]
    pub final_lr: f64,
    #[arg(long, default_value_t = 5)]
    pub min_count: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub sample: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Training threads. Only 1 is reproducible.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub workers: u32,
    /// Use windowed target sampling instead of every token position.
    #[arg(long)]
    pub windowed_targets: bool,
    #[arg(long, default_value_t = 0.01, value_parser = parse_fraction)]
    pub edge_fraction: f64,
    /// Default recommendation count served by the API.
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(1..))]
    pub top_n: u32,
    #[arg(long, default_value_t = 30, value_parser = clap::value_parser!(u32).range(1..))]
    pub cloud_size: u32,
    /// Louvain resolution.
    #[arg(long, default_value_t = 1.0)]
    pub resolution: f64,
    #[arg(long)]
    pub out: PathBuf,
}

impl BuildArgs {
    pub fn config(&self) -> BuildConfig {
        BuildConfig {
            train: TrainConfig {
                dim: self.dim as usize,
                window: self.window as usize,
                epochs: self.epochs as usize,
                negatives: self.negatives as usize,
                initial_lr: self.lr,
                final_lr: self.final_lr,
                min_count: self.min_count,
                subsample_threshold: self.sample,
                seed: self.seed,
                workers: self.workers as usize,
                target_mode: if self.windowed_targets {
                    TargetMode::SampledWindow
                } else {
                    TargetMode::AllPositions
                },
            },
            band: self.band,
            cloud_size: self.cloud_size as usize,
            edge_fraction: self.edge_fraction,
            top_n: self.top_n as usize,
            louvain: LouvainConfig {
                resolution: self.resolution,
                seed: None,
            },
        }
    }
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    #[arg(long, env = "TALKGRAPH_ARTIFACT")]
    pub artifact: PathBuf,
    /// Exact title, or a substring matching exactly one title.
    #[arg(long)]
    pub title: String,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(1..))]
    pub n: u32,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "TALKGRAPH_ARTIFACT")]
    pub artifact: PathBuf,
    /// 0 picks a free port and prints it.
    #[arg(long, env = "TALKGRAPH_PORT", default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: IpAddr,
    /// Directory of UI files served at `/`.
    #[arg(long)]
    pub static_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ResolvedValue {
    pub value: String,
    pub source: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub values: BTreeMap<String, ResolvedValue>,
    pub inputs: BTreeMap<String, String>,
    pub timings: Vec<(String, f64)>,
    pub output: String,
}

fn resolved_values(matches: &ArgMatches) -> BTreeMap<String, ResolvedValue> {
    let mut out = BTreeMap::new();
    for id in matches.ids() {
        let id = id.as_str();
        let Some(source) = matches.value_source(id) else { continue };
        let source = match source {
            ValueSource::CommandLine => "flag",
            ValueSource::EnvVariable => "env",
            _ => "default",
        };
        let value = matches
            .get_raw(id)
            .map(|vals| vals.map(|v| v.to_string_lossy().into_owned()).collect::<Vec<_>>().join(","))
            .unwrap_or_else(|| "true".to_string());
        out.insert(id.to_string(), ResolvedValue { value, source });
    }
    out
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest");
    PathBuf::from(name)
}

fn write_manifest(manifest: &RunManifest, out: &Path) -> Result<()> {
    let path = manifest_path(out);
    let json = serde_json::to_vec_pretty(manifest).expect("manifest serializes");
    std::fs::write(&path, json).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn run_ingest(args: &IngestArgs, matches: &ArgMatches) -> Result<()> {
    let start = Instant::now();
    let main = read(&args.main)?;
    let transcripts = read(&args.transcripts)?;
    let (corpus, report) = ingest(&main, &transcripts)?;
    save_corpus(&corpus, &args.out)?;
    eprintln!(
        "dropped {} metadata rows without transcripts, {} transcripts without metadata, {} duplicate transcript urls",
        report.metas_without_transcript, report.transcripts_without_meta, report.duplicate_transcript_urls
    );
    let manifest = RunManifest {
        subcommand: "ingest".into(),
        values: resolved_values(matches),
        inputs: BTreeMap::from([
            (args.main.display().to_string(), input_fingerprint(&[&main])),
            (args.transcripts.display().to_string(), input_fingerprint(&[&transcripts])),
        ]),
        timings: vec![("ingest".into(), start.elapsed().as_secs_f64())],
        output: args.out.display().to_string(),
    };
    write_manifest(&manifest, &args.out)?;
    println!("talks: {}", corpus.len());
    println!("mean tokens: {:.1}", corpus.mean_tokens());
    println!("fingerprint: {}", corpus.source_fingerprint());
    Ok(())
}

fn run_build(args: &BuildArgs, matches: &ArgMatches) -> Result<()> {
    let config = args.config();
    let lexicon_bytes = read(&args.lexicon)?;
    let lexicon_text = String::from_utf8_lossy(&lexicon_bytes);
    let lexicon = load_lexicon(&lexicon_text, Some(config.band))?;
    let corpus = load_corpus(&args.input)?;
    let (artifact, timings) = build_artifact(&corpus, &lexicon, &config)?;
    let save_start = Instant::now();
    artifact.save(&args.out)?;
    let mut timings = timings.0;
    timings.push(("save".into(), save_start.elapsed().as_secs_f64()));
    for (stage, secs) in &timings {
        eprintln!("stage {stage}: {secs:.3}s");
    }
    let manifest = RunManifest {
        subcommand: "build".into(),
        values: resolved_values(matches),
        inputs: BTreeMap::from([
            (args.input.display().to_string(), corpus.source_fingerprint().to_string()),
            (args.lexicon.display().to_string(), input_fingerprint(&[&lexicon_bytes])),
        ]),
        timings,
        output: args.out.display().to_string(),
    };
    write_manifest(&manifest, &args.out)?;
    println!(
        "talks: {}  links: {}  communities: {}  modularity: {:.4}",
        artifact.len(),
        artifact.graph.edges.len(),
        artifact.communities.community_count(),
        artifact.communities.modularity
    );
    Ok(())
}

/// Exact title match wins; otherwise a case-insensitive substring must
/// match exactly one title.
pub fn find_title(artifact: &Artifact, query: &str) -> Result<usize> {
    let exact: Vec<usize> = artifact.talks.iter().filter(|t| t.title == query).map(|t| t.id).collect();
    if exact.len() == 1 {
        return Ok(exact[0]);
    }
    let needle = query.to_lowercase();
    let partial: Vec<usize> = if exact.is_empty() {
        artifact
            .talks
            .iter()
            .filter(|t| t.title.to_lowercase().contains(&needle))
            .map(|t| t.id)
            .collect()
    } else {
        exact
    };
    match partial.as_slice() {
        [] => Err(Error::Usage(format!("no talk title matches {query:?}"))),
        [id] => Ok(*id),
        many => {
            let titles: Vec<String> = many.iter().map(|&i| format!("  {}", artifact.talks[i].title)).collect();
            Err(Error::Usage(format!(
                "{query:?} matches {} titles:\n{}",
                many.len(),
                titles.join("\n")
            )))
        }
    }
}

fn run_query(args: &QueryArgs) -> Result<()> {
    let artifact = Artifact::load(&args.artifact)?;
    let id = find_title(&artifact, &args.title)?;
    let recs = recommend(&artifact.doc_vectors, id, args.n as usize)?;
    let mut out = std::io::stdout().lock();
    for (rank, r) in recs.items.iter().enumerate() {
        let _ = writeln!(out, "{}. {} — {:.4}", rank + 1, artifact.talks[r.id].title, r.similarity);
    }
    Ok(())
}

fn run_serve(args: &ServeArgs) -> Result<()> {
    let artifact = Artifact::load(&args.artifact)?;
    eprintln!("loaded {} talks from {}", artifact.len(), args.artifact.display());
    let catalog = Arc::new(Catalog::new(artifact));
    let addr = SocketAddr::new(args.host, args.port);
    let runtime = tokio::runtime::Runtime::new().map_err(|source| Error::Io {
        path: "tokio runtime".into(),
        source,
    })?;
    runtime
        .block_on(serve(catalog, addr, args.static_dir.clone(), |bound| {
            println!("listening on http://{bound}");
            let _ = std::io::stdout().flush();
        }))
        .map_err(|source| Error::Io {
            path: addr.to_string(),
            source,
        })
}

/// Parses `args` and runs one subcommand. Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match Cli::command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let sub = matches.subcommand().map(|(_, m)| m).expect("subcommand is required");
    let result = match &cli.command {
        Command::Ingest(a) => run_ingest(a, sub),
        Command::Build(a) => run_build(a, sub),
        Command::Query(a) => run_query(a),
        Command::Serve(a) => run_serve(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

pub fn main() -> ! {
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "warn".into()),
        )
        .init();
    std::process::exit(run(std::env::args_os()))
}
