//! Synthetic corpora with planted topic structure, for demos and tests.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::Corpus;

#[derive(Debug, Clone, Copy)]
pub struct TopicSpec {
    pub clusters: usize,
    pub docs_per_cluster: usize,
    /// Distinct words per cluster; clusters never share words.
    pub words_per_cluster: usize,
    pub doc_len: usize,
    pub seed: u64,
}

impl Default for TopicSpec {
    fn default() -> Self {
        Self {
            clusters: 3,
            docs_per_cluster: 20,
            words_per_cluster: 40,
            doc_len: 120,
            seed: 7,
        }
    }
}

/// Word `w` of topic `t`, spelled with letters only so it survives
/// tokenization unchanged.
pub fn topic_word(topic: usize, word: usize) -> String {
    let letter = |i: usize| (b'a' + (i % 26) as u8) as char;
    format!("t{}{}w{}{}", letter(topic / 26), letter(topic), letter(word / 26), letter(word))
}

/// Documents are drawn from their cluster's vocabulary with Zipf-like
/// (1/rank) word frequencies. Returns the corpus and each document's
/// cluster; documents are interleaved across clusters.
pub fn topic_corpus(spec: TopicSpec) -> (Corpus, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let weights: Vec<f64> = (0..spec.words_per_cluster).map(|r| 1.0 / (r + 1) as f64).collect();
    let zipf = WeightedIndex::new(&weights).expect("positive weights");
    let total = spec.clusters * spec.docs_per_cluster;
    let mut docs = Vec::with_capacity(total);
    let mut labels = Vec::with_capacity(total);
    for i in 0..total {
        let cluster = i % spec.clusters;
        let text: Vec<String> = (0..spec.doc_len)
            .map(|_| topic_word(cluster, zipf.sample(&mut rng)))
            .collect();
        docs.push((format!("topic {cluster} document {i}"), text.join(" ")));
        labels.push(cluster);
    }
    (Corpus::from_texts(docs), labels)
}
