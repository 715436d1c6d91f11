//! Serves the HTTP API over an artifact built from the bundled fixtures.
//!
//!     cargo run --release --example serve_api -- [port]
//!
//! Then try `curl localhost:PORT/api/talks/0` or `/api/search?q=brain`.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use talkgraph::corpus::ingest;
use talkgraph::embedding::TrainConfig;
use talkgraph::pipeline::{build_artifact, BuildConfig};
use talkgraph::sentiment::load_lexicon;
use talkgraph::service::{serve, Catalog};

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let port: u16 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(0);
    let fixtures = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let (corpus, _) = ingest(
        &std::fs::read(fixtures.join("ted_main.csv"))?,
        &std::fs::read(fixtures.join("transcripts.csv"))?,
    )?;
    let lexicon = load_lexicon(&std::fs::read_to_string(fixtures.join("labmt_small.tsv"))?, None)?;
    let config = BuildConfig {
        train: TrainConfig {
            dim: 50,
            min_count: 1,
            ..TrainConfig::default()
        },
        edge_fraction: 0.1,
        ..BuildConfig::default()
    };
    let (artifact, _) = build_artifact(&corpus, &lexicon, &config)?;
    let catalog = Arc::new(Catalog::new(artifact));
    let addr = SocketAddr::from(([127, 0, 0, 1], port));
    serve(catalog, addr, None, |bound| {
        println!("listening on http://{bound}  (ctrl-c to stop)");
        println!("  curl http://{bound}/api/info");
        println!("  curl http://{bound}/api/talks/0?n=3");
    })
    .await?;
    Ok(())
}
