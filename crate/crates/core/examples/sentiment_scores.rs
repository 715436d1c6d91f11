//! Scores each talk against a happiness lexicon and min-max normalizes.
//!
//!     cargo run --example sentiment_scores -- [labMT.tsv]

use std::path::PathBuf;

use talkgraph::corpus::ingest;
use talkgraph::sentiment::{load_lexicon, normalize_scores, score_talk, DEFAULT_BAND};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fixtures = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let lexicon_path = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| fixtures.join("labmt_small.tsv"));
    let lexicon = load_lexicon(&std::fs::read_to_string(lexicon_path)?, Some(DEFAULT_BAND))?;
    println!("{} lexicon words outside the neutral band {DEFAULT_BAND:?}", lexicon.len());

    let (corpus, _) = ingest(
        &std::fs::read(fixtures.join("ted_main.csv"))?,
        &std::fs::read(fixtures.join("transcripts.csv"))?,
    )?;
    let scores: Vec<_> = corpus.talks().iter().map(|t| score_talk(&t.tokens, &lexicon)).collect();
    let normalized = normalize_scores(&scores)?;

    let mut rows: Vec<_> = corpus.talks().iter().zip(&scores).zip(&normalized).collect();
    rows.sort_by(|a, b| b.1.partial_cmp(a.1).unwrap());
    for ((talk, s), norm) in rows {
        println!(
            "{:>5} {:>5}  {:>3} of {:>3} tokens  {}",
            s.score.map_or("-".into(), |v| format!("{v:.2}")),
            norm.map_or("-".into(), |v| format!("{v:.2}")),
            s.matched_tokens,
            s.total_tokens,
            talk.meta.title
        );
    }
    Ok(())
}
