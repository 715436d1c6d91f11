//! TF-IDF weights and per-talk word clouds.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, Talk};

pub const DEFAULT_CLOUD_SIZE: usize = 30;

#[derive(Debug, Error, PartialEq)]
pub enum TfidfError {
    #[error("word {0:?} is not in the corpus vocabulary")]
    UnknownWord(String),
    #[error("invalid term count {count} for document length {doc_len}")]
    Count { count: usize, doc_len: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DocumentFrequencies {
    df: HashMap<String, usize>,
    n_docs: usize,
}

impl DocumentFrequencies {
    /// Counts, for each word, how many of `docs` contain it.
    pub fn from_token_lists<'a, I, S>(docs: I) -> Self
    where
        I: IntoIterator<Item = &'a [S]>,
        S: AsRef<str> + 'a,
    {
        let mut df: HashMap<String, usize> = HashMap::new();
        let mut n_docs = 0;
        for doc in docs {
            n_docs += 1;
            let distinct: HashSet<&str> = doc.iter().map(AsRef::as_ref).collect();
            for w in distinct {
                *df.entry(w.to_string()).or_default() += 1;
            }
        }
        Self { df, n_docs }
    }

    pub fn df(&self, word: &str) -> Option<usize> {
        self.df.get(word).copied()
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn vocabulary_size(&self) -> usize {
        self.df.len()
    }

    pub fn idf(&self, word: &str) -> Result<f64, TfidfError> {
        let df = self
            .df(word)
            .ok_or_else(|| TfidfError::UnknownWord(word.to_string()))?;
        Ok((self.n_docs as f64 / df as f64).ln())
    }
}

pub fn document_frequencies(corpus: &Corpus) -> DocumentFrequencies {
    DocumentFrequencies::from_token_lists(corpus.talks().iter().map(|t| t.tokens.as_slice()))
}

/// `(count / doc_len) * ln(n_docs / df(word))`.
pub fn tfidf_weight(
    count: usize,
    doc_len: usize,
    word: &str,
    dfs: &DocumentFrequencies,
) -> Result<f64, TfidfError> {
    if count == 0 || doc_len < count {
        return Err(TfidfError::Count { count, doc_len });
    }
    let tf = count as f64 / doc_len as f64;
    Ok(tf * dfs.idf(word)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CloudEntry {
    pub word: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordCloud {
    pub talk_id: usize,
    pub entries: Vec<CloudEntry>,
}

pub fn wordcloud(talk: &Talk, dfs: &DocumentFrequencies, k: usize) -> Result<WordCloud, TfidfError> {
    wordcloud_from_tokens(talk.meta.id, &talk.tokens, dfs, k)
}

/// Top-`k` words of one document by TF-IDF, ties broken by word. Zero
/// weights are never included.
pub fn wordcloud_from_tokens<S: AsRef<str>>(
    talk_id: usize,
    tokens: &[S],
    dfs: &DocumentFrequencies,
    k: usize,
) -> Result<WordCloud, TfidfError> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for t in tokens {
        *counts.entry(t.as_ref()).or_default() += 1;
    }
    let doc_len = tokens.len();
    let mut entries = Vec::with_capacity(counts.len());
    for (word, count) in counts {
        let weight = tfidf_weight(count, doc_len, word, dfs)?;
        if weight > 0.0 {
            entries.push(CloudEntry {
                word: word.to_string(),
                weight,
            });
        }
    }
    entries.sort_by(|a, b| b.weight.total_cmp(&a.weight).then_with(|| a.word.cmp(&b.word)));
    entries.truncate(k);
    Ok(WordCloud { talk_id, entries })
}

pub fn wordclouds(corpus: &Corpus, dfs: &DocumentFrequencies, k: usize) -> Result<Vec<WordCloud>, TfidfError> {
    use rayon::prelude::*;
    corpus
        .talks()
        .par_iter()
        .map(|t| wordcloud(t, dfs, k))
        .collect()
}
