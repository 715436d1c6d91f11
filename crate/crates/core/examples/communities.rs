//! Louvain communities on a planted two-clique graph, then on a similarity
//! graph of a synthetic corpus.
//!
//!     cargo run --release --example communities

use talkgraph::community::{louvain, louvain_traced, modularity, LouvainConfig};
use talkgraph::embedding::{train, TrainConfig};
use talkgraph::simgraph::build_graph;
use talkgraph::synthetic::{topic_corpus, TopicSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut edges = Vec::new();
    for base in [0, 4] {
        for a in 0..4 {
            for b in a + 1..4 {
                edges.push((base + a, base + b, 1.0));
            }
        }
    }
    edges.push((3, 4, 1.0));
    let run = louvain_traced(8, edges, LouvainConfig::default())?;
    println!("two cliques: labels {:?}", run.assignment.labels);
    println!("  Q per pass {:?}, {} levels", run.pass_modularity, run.levels);

    let (corpus, labels) = topic_corpus(TopicSpec::default());
    let config = TrainConfig {
        dim: 50,
        min_count: 1,
        ..TrainConfig::default()
    };
    let vectors = train(&corpus, &config)?.doc_vectors;
    let graph = build_graph(&vectors, 0.1)?;
    let found = louvain(&graph, LouvainConfig::default())?;
    println!(
        "synthetic corpus: {} communities, Q = {:.4} (planted topics score {:.4})",
        found.community_count(),
        found.modularity,
        modularity(&graph, &labels)?
    );
    for c in 0..found.community_count() {
        let mut topics = [0usize; 3];
        for (doc, &l) in found.labels.iter().enumerate() {
            if l == c {
                topics[labels[doc]] += 1;
            }
        }
        println!("  community {c}: docs per topic {topics:?}");
    }
    Ok(())
}
