//! Links the most similar pairs of a synthetic corpus and shows one talk's
//! recommendations and neighborhood.
//!
//!     cargo run --release --example similarity_graph -- [fraction]

use talkgraph::embedding::{train, TrainConfig};
use talkgraph::simgraph::{build_graph, edge_budget, neighbor_subgraph, recommend};
use talkgraph::synthetic::{topic_corpus, TopicSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fraction: f64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(0.05);
    let (corpus, labels) = topic_corpus(TopicSpec::default());
    let config = TrainConfig {
        dim: 50,
        min_count: 1,
        ..TrainConfig::default()
    };
    let vectors = train(&corpus, &config)?.doc_vectors;

    let n = vectors.len();
    let graph = build_graph(&vectors, fraction)?;
    println!(
        "{n} nodes, {} of {} pairs kept (budget {})",
        graph.edges.len(),
        n * (n - 1) / 2,
        edge_budget(n * (n - 1) / 2, fraction)
    );
    let within = graph.edges.iter().filter(|e| labels[e.a] == labels[e.b]).count();
    println!("{within} kept edges join same-topic documents");
    for e in graph.edges.iter().take(5) {
        println!("  {} -- {}  {:.4}", e.a, e.b, e.similarity);
    }

    let recs = recommend(&vectors, 0, 5)?;
    println!("recommendations for doc 0 (topic {}):", labels[0]);
    for r in &recs.items {
        println!("  doc {:>2} topic {}  {:.4}", r.id, labels[r.id], r.similarity);
    }
    let hood = neighbor_subgraph(&graph, &vectors, 0, 5)?;
    println!("neighborhood: nodes {:?}, {} edges", hood.nodes, hood.edges.len());
    Ok(())
}
