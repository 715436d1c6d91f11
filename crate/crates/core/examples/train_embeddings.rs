//! Trains document vectors on a synthetic corpus with three planted topics
//! and checks that nearest neighbors share a topic.
//!
//!     cargo run --release --example train_embeddings -- [seed]

use talkgraph::embedding::{train, TrainConfig};
use talkgraph::simgraph::recommend;
use talkgraph::synthetic::{topic_corpus, TopicSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed: u64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(1);
    let (corpus, labels) = topic_corpus(TopicSpec::default());
    let config = TrainConfig {
        seed,
        min_count: 1,
        ..TrainConfig::default()
    };
    let model = train(&corpus, &config)?;
    println!(
        "{} docs, vocab {}, dim {}",
        corpus.len(),
        model.vocab.len(),
        model.doc_vectors.dim()
    );
    for (epoch, loss) in model.epoch_losses.iter().enumerate() {
        println!("  epoch {:>2}  mean loss {loss:.4}", epoch + 1);
    }

    let mut majority = 0;
    for doc in 0..corpus.len() {
        let top = recommend(&model.doc_vectors, doc, 5)?;
        let same = top.items.iter().filter(|r| labels[r.id] == labels[doc]).count();
        if same >= 3 {
            majority += 1;
        }
    }
    println!("{majority}/{} docs have a same-topic majority among their 5 nearest", corpus.len());
    Ok(())
}
