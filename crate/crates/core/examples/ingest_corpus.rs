//! Joins a metadata CSV and a transcript CSV into a corpus.
//!
//!     cargo run --example ingest_corpus -- [ted_main.csv transcripts.csv]
//!
//! Without arguments the bundled test fixtures are used.

use std::path::PathBuf;

use talkgraph::corpus::ingest;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fixtures = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let args: Vec<PathBuf> = std::env::args_os().skip(1).map(PathBuf::from).collect();
    let (main, transcripts) = match args.as_slice() {
        [m, t] => (m.clone(), t.clone()),
        _ => (fixtures.join("ted_main.csv"), fixtures.join("transcripts.csv")),
    };
    let (corpus, report) = ingest(&std::fs::read(&main)?, &std::fs::read(&transcripts)?)?;

    println!("{} talks, {:.0} tokens on average", corpus.len(), corpus.mean_tokens());
    println!("fingerprint {}", corpus.source_fingerprint());
    println!("{report:?}");
    for talk in corpus.talks().iter().take(5) {
        let m = &talk.meta;
        println!("  #{} {:?} by {} ({} views, tags {:?})", m.id, m.title, m.speaker, m.views, m.tags);
        println!("      first tokens: {:?}", &talk.tokens[..talk.tokens.len().min(8)]);
    }
    Ok(())
}
