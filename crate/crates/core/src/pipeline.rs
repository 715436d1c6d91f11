//! End-to-end build: sentiment, word clouds, embeddings, graph, communities.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::artifact::{Artifact, TalkSentiment, FORMAT_VERSION};
use crate::community::{louvain, LouvainConfig};
use crate::corpus::Corpus;
use crate::embedding::{train, TrainConfig};
use crate::sentiment::{normalize_scores, score_talk, Lexicon, DEFAULT_BAND};
use crate::simgraph::{build_graph, DEFAULT_EDGE_FRACTION, DEFAULT_TOP_N};
use crate::tfidf::{document_frequencies, wordclouds, DEFAULT_CLOUD_SIZE};
use crate::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildConfig {
    pub train: TrainConfig,
    pub band: (f64, f64),
    pub cloud_size: usize,
    pub edge_fraction: f64,
    pub top_n: usize,
    pub louvain: LouvainConfig,
}

impl Default for BuildConfig {
    fn default() -> Self {
        Self {
            train: TrainConfig::default(),
            band: DEFAULT_BAND,
            cloud_size: DEFAULT_CLOUD_SIZE,
            edge_fraction: DEFAULT_EDGE_FRACTION,
            top_n: DEFAULT_TOP_N,
            louvain: LouvainConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct StageTimings(pub Vec<(String, f64)>);

impl StageTimings {
    fn record<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        let elapsed = start.elapsed();
        tracing::info!(stage, seconds = elapsed.as_secs_f64(), "stage done");
        self.0.push((stage.to_string(), elapsed.as_secs_f64()));
        out
    }

    pub fn total(&self) -> Duration {
        Duration::from_secs_f64(self.0.iter().map(|(_, s)| s).sum())
    }
}

/// Runs every analysis stage over `corpus`. With `config.train.workers == 1`
/// the resulting artifact is a pure function of the inputs.
pub fn build_artifact(corpus: &Corpus, lexicon: &Lexicon, config: &BuildConfig) -> Result<(Artifact, StageTimings), Error> {
    config.train.validate()?;
    if config.cloud_size == 0 {
        return Err(Error::Usage("cloud size must be >= 1".into()));
    }
    if config.top_n == 0 {
        return Err(Error::Usage("top-n must be >= 1".into()));
    }
    let mut timings = StageTimings::default();

    let sentiment = timings.record("sentiment", || -> Result<_, Error> {
        let raw: Vec<_> = corpus.talks().iter().map(|t| score_talk(&t.tokens, lexicon)).collect();
        let normalized = normalize_scores(&raw)?;
        Ok(raw
            .into_iter()
            .zip(normalized)
            .map(|(raw, normalized)| TalkSentiment { raw, normalized })
            .collect::<Vec<_>>())
    })?;

    let clouds = timings.record("tfidf", || -> Result<_, Error> {
        let dfs = document_frequencies(corpus);
        Ok(wordclouds(corpus, &dfs, config.cloud_size)?
            .into_iter()
            .map(|c| c.entries)
            .collect::<Vec<_>>())
    })?;

    let model = timings.record("embedding", || train(corpus, &config.train))?;
    let graph = timings.record("graph", || build_graph(&model.doc_vectors, config.edge_fraction))?;
    let communities = timings.record("communities", || louvain(&graph, config.louvain))?;

    let artifact = Artifact {
        format_version: FORMAT_VERSION,
        fingerprint: corpus.source_fingerprint().to_string(),
        config: config.clone(),
        talks: corpus.talks().iter().map(|t| t.meta.clone()).collect(),
        sentiment,
        clouds,
        doc_vectors: model.doc_vectors,
        graph,
        communities,
    };
    Ok((artifact, timings))
}
