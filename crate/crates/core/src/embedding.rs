//! Paragraph-vector (PV-DBOW) document embeddings.
//!
//! Each document owns a vector that is trained to predict the words it
//! contains. Prediction uses negative sampling: for every observed
//! (document, word) pair, `negatives` noise words are drawn from the
//! unigram distribution raised to the 3/4 power, and the logistic loss
//!
//! ```text
//! -ln σ(d·t) - Σ_n ln σ(-d·n)
//! ```
//!
//! is reduced by one SGD step on the document vector `d`, the target output
//! vector `t`, and each noise output vector `n`.
//!
//! Training is bit-reproducible with a fixed seed and `workers == 1`. With
//! more workers, documents are split into disjoint batches that share the
//! output vectors without locking, so results vary run to run.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU32, AtomicU64, Ordering};

use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Corpus;

#[derive(Debug, Error, PartialEq)]
pub enum EmbeddingError {
    #[error("invalid training config: {0}")]
    Config(String),
    #[error("vocabulary is empty after applying min_count = {0}")]
    EmptyVocab(usize),
    #[error("vocabulary does not match corpus: {0}")]
    VocabMismatch(String),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("vector length mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("zero vector for document {0}")]
    ZeroVector(usize),
}

/// How each surviving token position chooses its prediction target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TargetMode {
    /// The token at the position itself.
    #[default]
    AllPositions,
    /// A token drawn uniformly from a window of random radius in
    /// `1..=window` around the position.
    SampledWindow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub dim: usize,
    pub window: usize,
    pub epochs: usize,
    pub negatives: usize,
    pub initial_lr: f64,
    pub final_lr: f64,
    pub min_count: usize,
    pub subsample_threshold: f64,
    pub seed: u64,
    pub workers: usize,
    pub target_mode: TargetMode,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            dim: 200,
            window: 8,
            epochs: 20,
            negatives: 5,
            initial_lr: 0.025,
            final_lr: 0.0001,
            min_count: 5,
            subsample_threshold: 1e-3,
            seed: 1,
            workers: 1,
            target_mode: TargetMode::AllPositions,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), EmbeddingError> {
        let fail = |m: &str| Err(EmbeddingError::Config(m.to_string()));
        if self.dim == 0 {
            return fail("dim must be >= 1");
        }
        if self.window == 0 {
            return fail("window must be >= 1");
        }
        if self.epochs == 0 {
            return fail("epochs must be >= 1");
        }
        if self.negatives == 0 {
            return fail("negatives must be >= 1");
        }
        if self.workers == 0 {
            return fail("workers must be >= 1");
        }
        if !(self.final_lr > 0.0 && self.final_lr <= self.initial_lr && self.initial_lr.is_finite()) {
            return fail("learning rates must satisfy 0 < final_lr <= initial_lr");
        }
        if !(self.subsample_threshold >= 0.0) {
            return fail("subsample_threshold must be >= 0");
        }
        Ok(())
    }
}

/// Cumulative unigram^0.75 distribution over vocabulary indices.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseTable {
    probabilities: Vec<f64>,
    cumulative: Vec<f64>,
}

impl NoiseTable {
    pub fn from_counts(counts: impl IntoIterator<Item = u64>) -> Self {
        let powered: Vec<f64> = counts.into_iter().map(|c| (c as f64).powf(0.75)).collect();
        let total: f64 = powered.iter().sum();
        let probabilities: Vec<f64> = powered.iter().map(|p| p / total).collect();
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = probabilities
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        if let Some(last) = cumulative.last_mut() {
            *last = 1.0;
        }
        Self {
            probabilities,
            cumulative,
        }
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Maps a uniform draw in [0, 1) to a word index.
    pub fn sample_with(&self, u: f64) -> usize {
        self.cumulative
            .partition_point(|&c| c <= u)
            .min(self.cumulative.len() - 1)
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        self.sample_with(rng.random::<f64>())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vocab {
    words: Vec<(String, u64)>,
    index: HashMap<String, usize>,
    noise: NoiseTable,
}

impl Vocab {
    /// Keeps words seen at least `min_count` times, ordered by count
    /// descending then word ascending.
    pub fn from_counts(counts: HashMap<String, u64>, min_count: usize) -> Result<Self, EmbeddingError> {
        let mut words: Vec<(String, u64)> = counts
            .into_iter()
            .filter(|(_, c)| *c >= min_count as u64)
            .collect();
        if words.is_empty() {
            return Err(EmbeddingError::EmptyVocab(min_count));
        }
        words.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let index = words
            .iter()
            .enumerate()
            .map(|(i, (w, _))| (w.clone(), i))
            .collect();
        let noise = NoiseTable::from_counts(words.iter().map(|(_, c)| *c));
        Ok(Self { words, index, noise })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[(String, u64)] {
        &self.words
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn noise(&self) -> &NoiseTable {
        &self.noise
    }

    pub fn total_count(&self) -> u64 {
        self.words.iter().map(|(_, c)| c).sum()
    }
}

pub fn build_vocab(corpus: &Corpus, config: &TrainConfig) -> Result<Vocab, EmbeddingError> {
    let mut counts: HashMap<String, u64> = HashMap::new();
    for talk in corpus.talks() {
        for tok in &talk.tokens {
            *counts.entry(tok.clone()).or_default() += 1;
        }
    }
    Vocab::from_counts(counts, config.min_count)
}

/// Dense row-major matrix of document vectors, one row per talk id.
#[derive(Debug, Clone, PartialEq)]
pub struct DocVectors {
    dim: usize,
    data: Vec<f32>,
}

impl DocVectors {
    pub fn new(dim: usize, data: Vec<f32>) -> Self {
        assert!(dim > 0 && data.len().is_multiple_of(dim), "data length must be a multiple of dim");
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    pub fn squared_norms(&self) -> Vec<f64> {
        self.data.chunks_exact(self.dim).map(|r| dot(r, r)).collect()
    }

    /// Cosine similarity between two rows.
    pub fn cosine(&self, a: usize, b: usize) -> Result<f64, EmbeddingError> {
        let (ra, rb) = (self.row(a), self.row(b));
        let (na, nb) = (dot(ra, ra), dot(rb, rb));
        if na == 0.0 {
            return Err(EmbeddingError::ZeroVector(a));
        }
        if nb == 0.0 {
            return Err(EmbeddingError::ZeroVector(b));
        }
        Ok(cosine_from_parts(dot(ra, rb), na, nb))
    }
}

fn dot<T: Copy + Into<f64>>(a: &[T], b: &[T]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (*x).into() * (*y).into()).sum()
}

/// Never returns `-0.0`, so `total_cmp` ranks orthogonal pairs as ties.
pub(crate) fn cosine_from_parts(dot: f64, sq_norm_a: f64, sq_norm_b: f64) -> f64 {
    (dot / (sq_norm_a * sq_norm_b).sqrt()).clamp(-1.0, 1.0) + 0.0
}

/// `a·b / (‖a‖‖b‖)`, evaluated in double precision.
pub fn cosine<T: Copy + Into<f64>>(a: &[T], b: &[T]) -> Result<f64, EmbeddingError> {
    if a.len() != b.len() {
        return Err(EmbeddingError::Dimension {
            expected: a.len(),
            found: b.len(),
        });
    }
    let (na, nb) = (dot(a, a), dot(b, b));
    if na == 0.0 {
        return Err(EmbeddingError::ZeroVector(0));
    }
    if nb == 0.0 {
        return Err(EmbeddingError::ZeroVector(1));
    }
    Ok(cosine_from_parts(dot(a, b), na, nb))
}

fn sigmoid<T: Float>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus<T: Float>(z: T) -> T {
    z.max(T::zero()) + (-z.abs()).exp().ln_1p()
}

fn dot_t<T: Float>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc + *x * *y)
}

/// One output-vector term of the loss. Accumulates the document gradient
/// into `doc_grad`, steps `out` in place, and returns the term's loss.
fn output_update<T: Float>(doc: &[T], out: &mut [T], positive: bool, lr: T, doc_grad: &mut [T]) -> T {
    let x = dot_t(doc, out);
    let (loss, g) = if positive {
        (softplus(-x), sigmoid(x) - T::one())
    } else {
        (softplus(x), sigmoid(x))
    };
    for ((o, d), acc) in out.iter_mut().zip(doc).zip(doc_grad.iter_mut()) {
        *acc = *acc + g * *o;
        *o = *o - lr * g * *d;
    }
    loss
}

/// Loss and analytic gradients of the negative-sampling objective.
#[derive(Debug, Clone, PartialEq)]
pub struct NegSamplingGradient<T> {
    pub loss: T,
    pub doc: Vec<T>,
    pub target: Vec<T>,
    pub noise: Vec<Vec<T>>,
}

fn check_inputs<T: Float>(doc: &[T], target: &[T], noise: &[Vec<T>]) -> Result<(), EmbeddingError> {
    let dim = doc.len();
    for v in std::iter::once(target).chain(noise.iter().map(Vec::as_slice)) {
        if v.len() != dim {
            return Err(EmbeddingError::Dimension {
                expected: dim,
                found: v.len(),
            });
        }
    }
    let all_finite = doc
        .iter()
        .chain(target)
        .chain(noise.iter().flatten())
        .all(|x| x.is_finite());
    if !all_finite {
        return Err(EmbeddingError::NonFinite("negative-sampling input"));
    }
    Ok(())
}

pub fn neg_sampling_gradient<T: Float>(
    doc: &[T],
    target: &[T],
    noise: &[Vec<T>],
) -> Result<NegSamplingGradient<T>, EmbeddingError> {
    check_inputs(doc, target, noise)?;
    let scale = |v: &[T], s: T| v.iter().map(|x| *x * s).collect::<Vec<T>>();
    let mut doc_grad = vec![T::zero(); doc.len()];

    let x = dot_t(doc, target);
    let g = sigmoid(x) - T::one();
    let mut loss = softplus(-x);
    doc_grad.iter_mut().zip(target).for_each(|(a, t)| *a = *a + g * *t);
    let target_grad = scale(doc, g);

    let mut noise_grads = Vec::with_capacity(noise.len());
    for n in noise {
        let x = dot_t(doc, n);
        let g = sigmoid(x);
        loss = loss + softplus(x);
        doc_grad.iter_mut().zip(n).for_each(|(a, v)| *a = *a + g * *v);
        noise_grads.push(scale(doc, g));
    }
    Ok(NegSamplingGradient {
        loss,
        doc: doc_grad,
        target: target_grad,
        noise: noise_grads,
    })
}

/// One SGD step on the negative-sampling loss. All gradients are taken at
/// the pre-update point. Returns the pre-update loss.
pub fn neg_sampling_step<T: Float>(
    doc: &mut [T],
    target: &mut [T],
    noise: &mut [Vec<T>],
    lr: T,
) -> Result<T, EmbeddingError> {
    check_inputs(doc, target, noise)?;
    if !(lr > T::zero()) {
        return Err(EmbeddingError::Config("learning rate must be > 0".into()));
    }
    let mut doc_grad = vec![T::zero(); doc.len()];
    let mut loss = output_update(doc, target, true, lr, &mut doc_grad);
    for n in noise.iter_mut() {
        loss = loss + output_update(doc, n, false, lr, &mut doc_grad);
    }
    doc.iter_mut().zip(&doc_grad).for_each(|(d, g)| *d = *d - lr * *g);
    Ok(loss)
}

/// Output-vector matrix shared between training workers. Rows are copied
/// in and out with relaxed atomics, which gives lock-free (Hogwild-style)
/// sharing without data races.
struct SharedRows {
    dim: usize,
    cells: Vec<AtomicU32>,
}

impl SharedRows {
    fn new(dim: usize, values: Vec<f32>) -> Self {
        Self {
            dim,
            cells: values.into_iter().map(|v| AtomicU32::new(v.to_bits())).collect(),
        }
    }

    fn read(&self, row: usize, buf: &mut [f32]) {
        let cells = &self.cells[row * self.dim..(row + 1) * self.dim];
        for (b, c) in buf.iter_mut().zip(cells) {
            *b = f32::from_bits(c.load(Ordering::Relaxed));
        }
    }

    fn write(&self, row: usize, buf: &[f32]) {
        let cells = &self.cells[row * self.dim..(row + 1) * self.dim];
        for (b, c) in buf.iter().zip(cells) {
            c.store(b.to_bits(), Ordering::Relaxed);
        }
    }

    fn into_vec(self) -> Vec<f32> {
        self.cells.into_iter().map(|c| f32::from_bits(c.into_inner())).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    pub doc_vectors: DocVectors,
    /// `vocab.len() × dim` output vectors, row-major.
    pub word_out_vectors: Vec<f32>,
    pub vocab: Vocab,
    pub config: TrainConfig,
    /// Mean per-step loss for each epoch.
    pub epoch_losses: Vec<f64>,
}

impl EmbeddingModel {
    pub fn word_out_vector(&self, word: &str) -> Option<&[f32]> {
        let d = self.config.dim;
        self.vocab
            .index_of(word)
            .map(|i| &self.word_out_vectors[i * d..(i + 1) * d])
    }

    pub fn is_finite(&self) -> bool {
        self.doc_vectors.as_slice().iter().all(|x| x.is_finite())
            && self.word_out_vectors.iter().all(|x| x.is_finite())
    }
}

pub fn train(corpus: &Corpus, config: &TrainConfig) -> Result<EmbeddingModel, EmbeddingError> {
    config.validate()?;
    let vocab = build_vocab(corpus, config)?;
    train_with_vocab(corpus, vocab, config)
}

/// Keep-probability per vocabulary word under frequency subsampling.
fn keep_probabilities(vocab: &Vocab, threshold: f64) -> Vec<f64> {
    if threshold <= 0.0 {
        return vec![1.0; vocab.len()];
    }
    let threshold_count = threshold * vocab.total_count() as f64;
    vocab
        .words()
        .iter()
        .map(|(_, c)| {
            let c = *c as f64;
            (((c / threshold_count).sqrt() + 1.0) * threshold_count / c).min(1.0)
        })
        .collect()
}

struct Schedule {
    initial: f64,
    final_: f64,
    total: u64,
}

impl Schedule {
    fn lr(&self, done: u64) -> f32 {
        let progress = (done as f64 / self.total as f64).min(1.0);
        (self.initial - (self.initial - self.final_) * progress).max(self.final_) as f32
    }
}

struct Worker<'a> {
    vocab: &'a Vocab,
    keep: &'a [f64],
    config: &'a TrainConfig,
    outputs: &'a SharedRows,
    schedule: &'a Schedule,
    progress: &'a AtomicU64,
}

impl Worker<'_> {
    /// Trains one batch of documents for one epoch. Returns (loss sum, steps).
    fn run(&self, docs: &[Vec<u32>], doc_rows: &mut [f32], rng: &mut ChaCha8Rng) -> (f64, u64) {
        let dim = self.config.dim;
        let mut out = vec![0f32; dim];
        let mut doc_grad = vec![0f32; dim];
        let mut surviving = Vec::new();
        let mut loss_sum = 0.0;
        let mut steps = 0u64;
        for (tokens, doc) in docs.iter().zip(doc_rows.chunks_exact_mut(dim)) {
            let lr = self.schedule.lr(self.progress.fetch_add(tokens.len() as u64, Ordering::Relaxed));
            surviving.clear();
            surviving.extend(
                tokens
                    .iter()
                    .copied()
                    .filter(|&w| self.keep[w as usize] >= 1.0 || rng.random::<f64>() < self.keep[w as usize]),
            );
            for pos in 0..surviving.len() {
                let target = match self.config.target_mode {
                    TargetMode::AllPositions => surviving[pos],
                    TargetMode::SampledWindow => {
                        let radius = rng.random_range(1..=self.config.window);
                        let lo = pos.saturating_sub(radius);
                        let hi = (pos + radius).min(surviving.len() - 1);
                        surviving[rng.random_range(lo..=hi)]
                    }
                } as usize;
                doc_grad.iter_mut().for_each(|g| *g = 0.0);
                self.outputs.read(target, &mut out);
                let mut loss = output_update(doc, &mut out, true, lr, &mut doc_grad);
                self.outputs.write(target, &out);
                for _ in 0..self.config.negatives {
                    let noise = self.vocab.noise().sample(rng);
                    if noise == target {
                        continue;
                    }
                    self.outputs.read(noise, &mut out);
                    loss += output_update(doc, &mut out, false, lr, &mut doc_grad);
                    self.outputs.write(noise, &out);
                }
                doc.iter_mut().zip(&doc_grad).for_each(|(d, g)| *d -= lr * g);
                loss_sum += loss as f64;
                steps += 1;
            }
        }
        (loss_sum, steps)
    }
}

/// Trains against a prebuilt vocabulary, which must have been built from
/// this corpus.
pub fn train_with_vocab(
    corpus: &Corpus,
    vocab: Vocab,
    config: &TrainConfig,
) -> Result<EmbeddingModel, EmbeddingError> {
    config.validate()?;
    let mut seen = vec![0u64; vocab.len()];
    let docs: Vec<Vec<u32>> = corpus
        .talks()
        .iter()
        .map(|t| {
            t.tokens
                .iter()
                .filter_map(|w| vocab.index_of(w))
                .inspect(|&i| seen[i] += 1)
                .map(|i| i as u32)
                .collect()
        })
        .collect();
    if let Some(((word, expected), found)) = vocab
        .words()
        .iter()
        .zip(&seen)
        .find(|((_, c), s)| c != *s)
    {
        return Err(EmbeddingError::VocabMismatch(format!(
            "{word:?} counted {expected} times in vocabulary, {found} in corpus"
        )));
    }

    let dim = config.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let bound = 0.5 / dim as f32;
    let mut init = |n: usize| -> Vec<f32> { (0..n * dim).map(|_| rng.random_range(-bound..bound)).collect() };
    let mut doc_data = init(docs.len());
    let outputs = SharedRows::new(dim, init(vocab.len()));

    let keep = keep_probabilities(&vocab, config.subsample_threshold);
    let per_epoch: u64 = docs.iter().map(|d| d.len() as u64).sum();
    let schedule = Schedule {
        initial: config.initial_lr,
        final_: config.final_lr,
        total: (per_epoch * config.epochs as u64).max(1),
    };
    let progress = AtomicU64::new(0);
    let worker = Worker {
        vocab: &vocab,
        keep: &keep,
        config,
        outputs: &outputs,
        schedule: &schedule,
        progress: &progress,
    };

    let n_workers = config.workers.min(docs.len()).max(1);
    let mut worker_rngs: Vec<ChaCha8Rng> = (0..n_workers)
        .map(|w| {
            let mut r = ChaCha8Rng::seed_from_u64(config.seed);
            r.set_stream(w as u64 + 1);
            r
        })
        .collect();
    let batch = docs.len().div_ceil(n_workers);

    let mut epoch_losses = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        let (loss, steps) = if n_workers == 1 {
            worker.run(&docs, &mut doc_data, &mut worker_rngs[0])
        } else {
            std::thread::scope(|s| {
                let handles: Vec<_> = docs
                    .chunks(batch)
                    .zip(doc_data.chunks_mut(batch * dim))
                    .zip(worker_rngs.iter_mut())
                    .map(|((d, rows), r)| {
                        let worker = &worker;
                        s.spawn(move || worker.run(d, rows, r))
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("training worker panicked"))
                    .fold((0.0, 0), |a, b| (a.0 + b.0, a.1 + b.1))
            })
        };
        let mean = if steps > 0 { loss / steps as f64 } else { 0.0 };
        tracing::debug!(epoch, mean_loss = mean, steps, "epoch done");
        epoch_losses.push(mean);
    }

    let model = EmbeddingModel {
        doc_vectors: DocVectors::new(dim, doc_data),
        word_out_vectors: outputs.into_vec(),
        vocab,
        config: config.clone(),
        epoch_losses,
    };
    if !model.is_finite() {
        return Err(EmbeddingError::NonFinite("trained model"));
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(pairs: &[(&str, u64)]) -> HashMap<String, u64> {
        pairs.iter().map(|(w, c)| (w.to_string(), *c)).collect()
    }

    #[test]
    fn vocab_threshold_and_order() {
        let v = Vocab::from_counts(counts(&[("a", 10), ("b", 2)]), 5).unwrap();
        assert_eq!(v.words(), &[("a".to_string(), 10)]);
        let v = Vocab::from_counts(counts(&[("b", 10), ("a", 10)]), 1).unwrap();
        assert_eq!(v.words()[0].0, "a");
        assert_eq!(v.words()[1].0, "b");
        assert_eq!(
            Vocab::from_counts(counts(&[("a", 1)]), 5),
            Err(EmbeddingError::EmptyVocab(5))
        );
    }

    #[test]
    fn noise_distribution() {
        let v = Vocab::from_counts(counts(&[("a", 16), ("b", 1)]), 1).unwrap();
        let p = v.noise().probabilities();
        assert!((p[0] - 8.0 / 9.0).abs() < 1e-12);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert_eq!(v.noise().sample_with(0.0), 0);
        assert_eq!(v.noise().sample_with(0.95), 1);
        assert_eq!(v.noise().sample_with(0.999_999_999), 1);
    }

    #[test]
    fn zero_vectors_loss() {
        let mut d = vec![0.0f64; 4];
        let mut t = vec![0.0f64; 4];
        let mut n = vec![vec![0.0f64; 4]; 5];
        let loss = neg_sampling_step(&mut d, &mut t, &mut n, 0.1).unwrap();
        assert!((loss - 6.0 * 2f64.ln()).abs() < 1e-12);
        assert!((loss - 4.158883).abs() < 1e-6);
    }

    #[test]
    fn positive_term_derivative_at_zero() {
        // d·t = 0 with t = e0, so ∂loss/∂d_0 = σ(0) - 1
        let d = vec![0.0f64, 1.0];
        let t = vec![1.0f64, 0.0];
        let g = neg_sampling_gradient(&d, &t, &[]).unwrap();
        assert!((g.doc[0] - (-0.5)).abs() < 1e-15);
        assert_eq!(g.doc[1], 0.0);
    }

    #[test]
    fn tiny_lr_leaves_vectors_unchanged() {
        let d0 = vec![0.1f64, -0.2, 0.3];
        let t0 = vec![0.05f64, 0.4, -0.1];
        let n0 = vec![vec![-0.3f64, 0.2, 0.1]];
        let (mut d, mut t, mut n) = (d0.clone(), t0.clone(), n0.clone());
        neg_sampling_step(&mut d, &mut t, &mut n, 1e-300).unwrap();
        assert_eq!(d, d0);
        assert_eq!(t, t0);
        assert_eq!(n, n0);
    }

    #[test]
    fn step_matches_gradient() {
        let d0 = vec![0.1f64, -0.2, 0.3];
        let t0 = vec![0.05f64, 0.4, -0.1];
        let n0 = vec![vec![-0.3f64, 0.2, 0.1], vec![0.7, 0.0, -0.4]];
        let g = neg_sampling_gradient(&d0, &t0, &n0).unwrap();
        let (mut d, mut t, mut n) = (d0.clone(), t0.clone(), n0.clone());
        let lr = 0.05;
        let loss = neg_sampling_step(&mut d, &mut t, &mut n, lr).unwrap();
        assert!((loss - g.loss).abs() < 1e-15);
        for i in 0..3 {
            assert!((d[i] - (d0[i] - lr * g.doc[i])).abs() < 1e-15);
            assert!((t[i] - (t0[i] - lr * g.target[i])).abs() < 1e-15);
            assert!((n[1][i] - (n0[1][i] - lr * g.noise[1][i])).abs() < 1e-15);
        }
    }

    #[test]
    fn step_rejects_bad_input() {
        let mut d = vec![f64::NAN, 0.0];
        let mut t = vec![0.0, 0.0];
        assert_eq!(
            neg_sampling_step(&mut d, &mut t, &mut [], 0.1),
            Err(EmbeddingError::NonFinite("negative-sampling input"))
        );
        let mut d = vec![0.0, 0.0];
        let mut short = vec![vec![0.0]];
        assert!(matches!(
            neg_sampling_step(&mut d, &mut t, &mut short, 0.1),
            Err(EmbeddingError::Dimension { .. })
        ));
        assert!(neg_sampling_step(&mut d, &mut t, &mut [], 0.0).is_err());
    }

    #[test]
    fn cosine_examples() {
        let v = [0.3f64, -1.2, 2.5];
        assert_eq!(cosine(&v, &v).unwrap(), 1.0);
        assert_eq!(cosine(&[1.0f64, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        let c = cosine(&[1.0f64, 1.0], &[1.0, 0.0]).unwrap();
        assert!((c - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert_eq!(
            cosine(&[0.0f64, 0.0], &[1.0, 0.0]),
            Err(EmbeddingError::ZeroVector(0))
        );
    }

    #[test]
    fn doc_vector_rows_match_free_cosine() {
        let m = DocVectors::new(2, vec![1.0, 1.0, 1.0, 0.0, 0.0, 0.0]);
        assert_eq!(m.cosine(0, 1).unwrap(), cosine(m.row(0), m.row(1)).unwrap());
        assert_eq!(m.cosine(1, 2), Err(EmbeddingError::ZeroVector(2)));
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        let bad = [
            TrainConfig { epochs: 0, ..Default::default() },
            TrainConfig { dim: 0, ..Default::default() },
            TrainConfig { negatives: 0, ..Default::default() },
            TrainConfig { final_lr: 0.1, ..Default::default() },
            TrainConfig { final_lr: 0.0, ..Default::default() },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
    }

    #[test]
    fn subsampling_keeps_rare_words() {
        let v = Vocab::from_counts(counts(&[("the", 1000), ("rare", 1)]), 1).unwrap();
        let keep = keep_probabilities(&v, 1e-3);
        assert!(keep[0] < 0.2);
        assert_eq!(keep[1], 1.0);
        assert_eq!(keep_probabilities(&v, 0.0), vec![1.0, 1.0]);
    }

    #[test]
    fn vocab_mismatch_detected() {
        let a = Corpus::from_texts([("a", "x x y"), ("b", "y z")]);
        let b = Corpus::from_texts([("a", "x y"), ("b", "y z")]);
        let cfg = TrainConfig { min_count: 1, dim: 4, epochs: 1, ..Default::default() };
        let vocab = build_vocab(&a, &cfg).unwrap();
        assert!(matches!(
            train_with_vocab(&b, vocab, &cfg),
            Err(EmbeddingError::VocabMismatch(_))
        ));
    }
}
