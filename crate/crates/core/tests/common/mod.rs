//! Independent oracles and fixtures shared by the integration tests and the
//! acceptance runner. Nothing here calls into the code under test except to
//! build inputs.

#![allow(dead_code)]

use std::path::PathBuf;

use talkgraph::artifact::Artifact;
use talkgraph::corpus::{ingest, Corpus};
use talkgraph::embedding::{train, DocVectors, TrainConfig};
use talkgraph::pipeline::{build_artifact, BuildConfig};
use talkgraph::sentiment::{load_lexicon, Lexicon};
use talkgraph::synthetic::{topic_corpus, TopicSpec};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn fixture_corpus() -> Corpus {
    let main = std::fs::read(fixture_path("ted_main.csv")).unwrap();
    let transcripts = std::fs::read(fixture_path("transcripts.csv")).unwrap();
    ingest(&main, &transcripts).unwrap().0
}

pub fn fixture_lexicon() -> Lexicon {
    let text = std::fs::read_to_string(fixture_path("labmt_small.tsv")).unwrap();
    load_lexicon(&text, None).unwrap()
}

/// Small, fast build settings for fixture corpora.
pub fn small_build_config(seed: u64) -> BuildConfig {
    BuildConfig {
        train: TrainConfig {
            dim: 16,
            epochs: 10,
            min_count: 1,
            seed,
            ..TrainConfig::default()
        },
        ..BuildConfig::default()
    }
}

/// Artifact over the first five fixture talks, with 2 of the 10 pairs linked.
pub fn five_talk_artifact() -> Artifact {
    let full = fixture_corpus();
    let talks: Vec<_> = full.talks()[..5].to_vec();
    let corpus = Corpus::from_talks(talks);
    let mut config = small_build_config(3);
    config.edge_fraction = 0.2;
    build_artifact(&corpus, &fixture_lexicon(), &config).unwrap().0
}

// ---------------------------------------------------------------- TF-IDF

/// Brute-force TF-IDF: linear scans for counts and document frequency.
pub fn brute_tfidf(docs: &[Vec<String>], doc: usize, word: &str) -> f64 {
    let tokens = &docs[doc];
    let count = tokens.iter().filter(|t| *t == word).count();
    let df = docs.iter().filter(|d| d.iter().any(|t| t == word)).count();
    let tf = count as f64 / tokens.len() as f64;
    tf * (docs.len() as f64 / df as f64).ln()
}

/// Every (word, weight) with positive weight in one document, sorted by
/// weight descending then word ascending.
pub fn brute_cloud(docs: &[Vec<String>], doc: usize) -> Vec<(String, f64)> {
    let mut words: Vec<String> = docs[doc].clone();
    words.sort();
    words.dedup();
    let mut out: Vec<(String, f64)> = words
        .into_iter()
        .map(|w| {
            let weight = brute_tfidf(docs, doc, &w);
            (w, weight)
        })
        .filter(|(_, weight)| *weight > 0.0)
        .collect();
    out.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    out
}

pub fn five_doc_fixture() -> Vec<Vec<String>> {
    [
        "the brain builds meaning from images and the brain remembers",
        "the ocean is deep and the deep ocean is dark",
        "schools teach children and children learn in schools",
        "the brain and the ocean",
        "music moves the brain and music moves children",
    ]
    .iter()
    .map(|s| s.split_whitespace().map(str::to_string).collect())
    .collect()
}

// ------------------------------------------------------------- Gradients

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Negative-sampling loss written directly from its definition.
pub fn ns_loss(doc: &[f64], target: &[f64], noise: &[Vec<f64>]) -> f64 {
    let mut loss = -sigmoid(dot(doc, target)).ln();
    for n in noise {
        loss -= sigmoid(-dot(doc, n)).ln();
    }
    loss
}

pub struct GradInstance {
    pub doc: Vec<f64>,
    pub target: Vec<f64>,
    pub noise: Vec<Vec<f64>>,
}

/// Central-difference gradient of [`ns_loss`] for every parameter, in the
/// order doc, target, noise rows.
pub fn finite_difference(inst: &GradInstance, eps: f64) -> Vec<f64> {
    let mut params: Vec<f64> = inst
        .doc
        .iter()
        .chain(&inst.target)
        .chain(inst.noise.iter().flatten())
        .copied()
        .collect();
    let dim = inst.doc.len();
    let eval = |p: &[f64]| {
        let doc = &p[..dim];
        let target = &p[dim..2 * dim];
        let noise: Vec<Vec<f64>> = p[2 * dim..].chunks(dim).map(<[f64]>::to_vec).collect();
        ns_loss(doc, target, &noise)
    };
    (0..params.len())
        .map(|i| {
            let orig = params[i];
            params[i] = orig + eps;
            let up = eval(&params);
            params[i] = orig - eps;
            let down = eval(&params);
            params[i] = orig;
            (up - down) / (2.0 * eps)
        })
        .collect()
}

/// `‖a − b‖ / max(‖a‖, ‖b‖, tiny)` over whole gradient vectors.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    diff / na.max(nb).max(1e-12)
}

// ------------------------------------------------------------ Clustering

/// Fraction of documents whose top-5 cosine neighbors are mostly from the
/// same cluster. Brute force over all pairs.
pub fn cluster_majority_rate(vectors: &DocVectors, labels: &[usize]) -> f64 {
    let n = vectors.len();
    let norm = |i: usize| vectors.row(i).iter().map(|&x| f64::from(x).powi(2)).sum::<f64>().sqrt();
    let cos = |i: usize, j: usize| {
        let d: f64 = vectors.row(i).iter().zip(vectors.row(j)).map(|(&a, &b)| f64::from(a) * f64::from(b)).sum();
        d / (norm(i) * norm(j))
    };
    let mut good = 0;
    for i in 0..n {
        let mut others: Vec<(f64, usize)> = (0..n).filter(|&j| j != i).map(|j| (cos(i, j), j)).collect();
        others.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
        let same = others[..5].iter().filter(|&&(_, j)| labels[j] == labels[i]).count();
        if same >= 3 {
            good += 1;
        }
    }
    good as f64 / n as f64
}

/// Default-dimension training on the 3-cluster, 60-document corpus.
pub fn synthetic_run(seed: u64) -> f64 {
    let (corpus, labels) = topic_corpus(TopicSpec::default());
    let config = TrainConfig {
        seed,
        min_count: 1,
        ..TrainConfig::default()
    };
    let model = train(&corpus, &config).unwrap();
    cluster_majority_rate(&model.doc_vectors, &labels)
}

// ---------------------------------------------------------------- Graphs

/// Modularity straight from its pairwise definition:
/// `Q = 1/2m Σ_ij [A_ij − k_i k_j / 2m] δ(c_i, c_j)`.
pub fn pairwise_modularity(n: usize, edges: &[(usize, usize, f64)], labels: &[usize]) -> f64 {
    let mut adj = vec![vec![0.0; n]; n];
    for &(a, b, w) in edges {
        adj[a][b] += w;
        adj[b][a] += w;
    }
    let k: Vec<f64> = adj.iter().map(|row| row.iter().sum()).collect();
    let two_m: f64 = k.iter().sum();
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if labels[i] == labels[j] {
                q += adj[i][j] - k[i] * k[j] / two_m;
            }
        }
    }
    q / two_m
}

/// Best modularity over every set partition of `n` nodes (restricted
/// growth strings). Bell(8) = 4140 partitions.
pub fn exhaustive_best_modularity(n: usize, edges: &[(usize, usize, f64)]) -> f64 {
    fn rec(i: usize, max: usize, labels: &mut Vec<usize>, n: usize, edges: &[(usize, usize, f64)], best: &mut f64) {
        if i == n {
            *best = best.max(pairwise_modularity(n, edges, labels));
            return;
        }
        for c in 0..=max + 1 {
            labels[i] = c;
            rec(i + 1, max.max(c), labels, n, edges, best);
        }
    }
    let mut labels = vec![0; n];
    let mut best = f64::NEG_INFINITY;
    if n > 0 {
        rec(1, 0, &mut labels, n, edges, &mut best);
    }
    best
}

/// Two 4-cliques joined by one bridge edge.
pub fn two_cliques() -> Vec<(usize, usize, f64)> {
    let mut edges = Vec::new();
    for base in [0, 4] {
        for a in 0..4 {
            for b in a + 1..4 {
                edges.push((base + a, base + b, 1.0));
            }
        }
    }
    edges.push((3, 4, 1.0));
    edges
}

/// Full sort of every pair by (similarity desc, a asc, b asc) using
/// brute-force f64 cosines.
pub fn full_sort_pairs(rows: &[Vec<f32>]) -> Vec<(usize, usize, f64)> {
    let cos = |x: &[f32], y: &[f32]| {
        let d: f64 = x.iter().zip(y).map(|(&a, &b)| f64::from(a) * f64::from(b)).sum();
        let nx: f64 = x.iter().map(|&a| f64::from(a) * f64::from(a)).sum();
        let ny: f64 = y.iter().map(|&a| f64::from(a) * f64::from(a)).sum();
        (d / (nx * ny).sqrt()).clamp(-1.0, 1.0)
    };
    let mut pairs = Vec::new();
    for a in 0..rows.len() {
        for b in a + 1..rows.len() {
            pairs.push((a, b, cos(&rows[a], &rows[b])));
        }
    }
    pairs.sort_by(|x, y| y.2.partial_cmp(&x.2).unwrap().then(x.0.cmp(&y.0)).then(x.1.cmp(&y.1)));
    pairs
}

/// `floor(fraction · pairs)` computed with integer arithmetic for
/// fractions given as `num / den`.
pub fn budget_exact(n: usize, num: u128, den: u128) -> usize {
    let pairs = (n as u128) * (n as u128 - 1) / 2;
    (pairs * num / den) as usize
}

// ------------------------------------------------------------------- API

pub mod api {
    use axum::body::Body;
    use axum::http::{Request, StatusCode};
    use axum::Router;
    use http_body_util::BodyExt;
    use serde_json::Value;
    use talkgraph::service::schemas;
    use tower::ServiceExt;

    pub async fn get(router: &Router, uri: &str) -> (StatusCode, Value) {
        let response = router
            .clone()
            .oneshot(Request::get(uri).body(Body::empty()).unwrap())
            .await
            .unwrap();
        let status = response.status();
        let bytes = response.into_body().collect().await.unwrap().to_bytes();
        let body = serde_json::from_slice(&bytes).unwrap_or(Value::Null);
        (status, body)
    }

    /// Validates `value` against one published schema; errors are joined.
    pub fn validate(schema: &str, value: &Value) -> Result<(), String> {
        let schema: Value = serde_json::from_str(schema).map_err(|e| e.to_string())?;
        let validator = jsonschema::validator_for(&schema).map_err(|e| e.to_string())?;
        let errors: Vec<String> = validator
            .iter_errors(value)
            .map(|e| format!("{} at {}", e, e.instance_path))
            .collect();
        if errors.is_empty() {
            Ok(())
        } else {
            Err(errors.join("; "))
        }
    }

    /// The six endpoints with the schema each response must satisfy.
    pub fn endpoints() -> Vec<(&'static str, &'static str)> {
        vec![
            ("/api/info", schemas::INFO),
            ("/api/talks", schemas::TALK_LIST),
            ("/api/talks/0", schemas::TALK_DETAIL),
            ("/api/talks/0/neighbors", schemas::GRAPH_DOCUMENT),
            ("/api/graph", schemas::GRAPH_DOCUMENT),
            ("/api/search?q=brain", schemas::TALK_LIST),
        ]
    }

    /// Requests that must fail with the documented error body.
    pub fn error_cases() -> Vec<(&'static str, StatusCode)> {
        vec![
            ("/api/talks/-1", StatusCode::NOT_FOUND),
            ("/api/talks/99999", StatusCode::NOT_FOUND),
            ("/api/talks/abc", StatusCode::NOT_FOUND),
            ("/api/talks/99999/neighbors", StatusCode::NOT_FOUND),
            ("/api/talks/0?n=0", StatusCode::BAD_REQUEST),
            ("/api/talks/0?n=many", StatusCode::BAD_REQUEST),
            ("/api/talks/0/neighbors?n=-3", StatusCode::BAD_REQUEST),
            ("/api/nope", StatusCode::NOT_FOUND),
        ]
    }

    /// Runs every endpoint and error case, returning one message per failure.
    pub async fn golden_failures(router: &Router) -> Vec<String> {
        let mut failures = Vec::new();
        for (uri, schema) in endpoints() {
            let (status, body) = get(router, uri).await;
            if status != StatusCode::OK {
                failures.push(format!("{uri}: status {status}"));
            } else if let Err(e) = validate(schema, &body) {
                failures.push(format!("{uri}: {e}"));
            }
        }
        for (uri, expected) in error_cases() {
            let (status, body) = get(router, uri).await;
            if status != expected {
                failures.push(format!("{uri}: status {status}, expected {expected}"));
            }
            if let Err(e) = validate(schemas::ERROR, &body) {
                failures.push(format!("{uri}: {e}"));
            }
        }
        failures
    }
}

// ------------------------------------------------------------------- CLI

pub mod cli {
    use std::path::Path;
    use std::process::{Command, Output};

    pub fn talkgraph() -> Command {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_talkgraph"));
        cmd.env_remove("TALKGRAPH_ARTIFACT").env_remove("TALKGRAPH_PORT");
        cmd
    }

    pub fn run(args: &[&str]) -> Output {
        talkgraph().args(args).output().expect("binary runs")
    }

    pub fn stdout(o: &Output) -> String {
        String::from_utf8_lossy(&o.stdout).into_owned()
    }

    pub fn stderr(o: &Output) -> String {
        String::from_utf8_lossy(&o.stderr).into_owned()
    }

    /// Ingests the fixture CSVs into `dir/corpus.tgc`.
    pub fn ingest_fixture(dir: &Path) -> (Output, String) {
        let corpus = dir.join("corpus.tgc").display().to_string();
        let out = run(&[
            "ingest",
            "--main",
            &super::fixture_path("ted_main.csv").display().to_string(),
            "--transcripts",
            &super::fixture_path("transcripts.csv").display().to_string(),
            "--out",
            &corpus,
        ]);
        (out, corpus)
    }

    /// Default model settings except for a short run and a graph budget
    /// that is nonzero on a dozen talks.
    pub fn build_fixture(corpus: &str, out: &Path, seed: &str) -> Output {
        run(&[
            "build",
            "--in",
            corpus,
            "--lexicon",
            &super::fixture_path("labmt_small.tsv").display().to_string(),
            "--epochs",
            "3",
            "--min-count",
            "1",
            "--edge-fraction",
            "0.1",
            "--seed",
            seed,
            "--out",
            &out.display().to_string(),
        ])
    }
}
