//! Top TF-IDF words per talk.
//!
//!     cargo run --example word_clouds -- [k]

use std::path::PathBuf;

use talkgraph::corpus::ingest;
use talkgraph::tfidf::{document_frequencies, wordclouds};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let k: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(8);
    let fixtures = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let (corpus, _) = ingest(
        &std::fs::read(fixtures.join("ted_main.csv"))?,
        &std::fs::read(fixtures.join("transcripts.csv"))?,
    )?;
    let dfs = document_frequencies(&corpus);
    println!("{} documents, {} distinct words", dfs.n_docs(), dfs.vocabulary_size());
    for cloud in wordclouds(&corpus, &dfs, k)? {
        let words: Vec<String> = cloud.entries.iter().map(|e| format!("{} {:.3}", e.word, e.weight)).collect();
        println!("{}\n    {}", corpus.talks()[cloud.talk_id].meta.title, words.join(", "));
    }
    Ok(())
}
