//! Content-based lecture recommender built from speech transcripts.
//!
//! The pipeline ingests talk metadata and transcripts, scores each talk's
//! happiness against a word lexicon, extracts TF-IDF word clouds, trains
//! paragraph-vector document embeddings, links the most similar talks into
//! a graph, groups that graph into communities, and serves the result over
//! a read-only HTTP API.
//!
//! Each stage is usable on its own; see the crate's `examples/` directory
//! for one runnable program per stage and `talkgraph --help` for the CLI.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod artifact;
pub mod cli;
pub mod community;
pub mod corpus;
pub mod embedding;
pub mod pipeline;
pub mod sentiment;
pub mod service;
pub mod simgraph;
pub mod synthetic;
pub mod tfidf;

use thiserror::Error;

/// Crate-level error returned by the pipeline, server, and CLI.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Corpus(#[from] corpus::CorpusError),
    #[error(transparent)]
    Sentiment(#[from] sentiment::SentimentError),
    #[error(transparent)]
    Tfidf(#[from] tfidf::TfidfError),
    #[error(transparent)]
    Embedding(#[from] embedding::EmbeddingError),
    #[error(transparent)]
    SimGraph(#[from] simgraph::SimGraphError),
    #[error(transparent)]
    Community(#[from] community::CommunityError),
    #[error(transparent)]
    Artifact(#[from] artifact::ArtifactError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
