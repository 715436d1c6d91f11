//! Runs every stage on the bundled fixtures and writes, reloads, and
//! summarizes a serving artifact.
//!
//!     cargo run --release --example build_artifact -- [out.tga]

use std::path::PathBuf;

use talkgraph::artifact::Artifact;
use talkgraph::corpus::ingest;
use talkgraph::embedding::TrainConfig;
use talkgraph::pipeline::{build_artifact, BuildConfig};
use talkgraph::sentiment::load_lexicon;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fixtures = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let out = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("talkgraph-example.tga"));

    let (corpus, _) = ingest(
        &std::fs::read(fixtures.join("ted_main.csv"))?,
        &std::fs::read(fixtures.join("transcripts.csv"))?,
    )?;
    let lexicon = load_lexicon(&std::fs::read_to_string(fixtures.join("labmt_small.tsv"))?, None)?;
    // a dozen talks have 66 pairs, so the default 1% budget would be empty
    let config = BuildConfig {
        train: TrainConfig {
            min_count: 1,
            ..TrainConfig::default()
        },
        edge_fraction: 0.1,
        ..BuildConfig::default()
    };
    let (artifact, timings) = build_artifact(&corpus, &lexicon, &config)?;
    for (stage, secs) in &timings.0 {
        println!("stage {stage:<12} {secs:.3}s");
    }
    artifact.save(&out)?;
    let loaded = Artifact::load(&out)?;
    assert_eq!(loaded, artifact);
    println!(
        "wrote {} ({} bytes): {} talks, {} links, {} communities, Q = {:.4}",
        out.display(),
        std::fs::metadata(&out)?.len(),
        loaded.len(),
        loaded.graph.edges.len(),
        loaded.communities.community_count(),
        loaded.communities.modularity
    );
    Ok(())
}
