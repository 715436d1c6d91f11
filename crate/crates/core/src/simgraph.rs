//! Cosine similarity graph over document vectors and per-talk
//! recommendation lists.

use std::cmp::Ordering;
use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::{cosine_from_parts, DocVectors};

pub const DEFAULT_EDGE_FRACTION: f64 = 0.01;
pub const DEFAULT_TOP_N: usize = 10;

#[derive(Debug, Error, PartialEq)]
pub enum SimGraphError {
    #[error("talk {0} not found")]
    NotFound(usize),
    #[error("document {0} has a zero vector")]
    ZeroVector(usize),
    #[error("need at least 2 documents, found {0}")]
    TooFew(usize),
    #[error("edge fraction {0} must be in (0, 1]")]
    Fraction(f64),
    #[error("fraction {fraction} of {pairs} pairs keeps no edges; use a larger fraction or corpus")]
    EmptyBudget { pairs: usize, fraction: f64 },
    #[error("recommendation count must be >= 1")]
    Count,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredPair {
    pub a: usize,
    pub b: usize,
    pub similarity: f64,
}

impl ScoredPair {
    pub fn new(x: usize, y: usize, similarity: f64) -> Self {
        let (a, b) = if x < y { (x, y) } else { (y, x) };
        Self { a, b, similarity }
    }
}

/// Similarity descending, then `(a, b)` ascending.
pub fn rank_order(x: &ScoredPair, y: &ScoredPair) -> Ordering {
    y.similarity
        .total_cmp(&x.similarity)
        .then(x.a.cmp(&y.a))
        .then(x.b.cmp(&y.b))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityGraph {
    pub n_nodes: usize,
    /// Kept edges in rank order.
    pub edges: Vec<ScoredPair>,
    pub edge_fraction: f64,
}

impl SimilarityGraph {
    pub fn degree(&self, node: usize) -> usize {
        self.edges.iter().filter(|e| e.a == node || e.b == node).count()
    }
}

fn checked_norms(vectors: &DocVectors) -> Result<Vec<f64>, SimGraphError> {
    let norms = vectors.squared_norms();
    match norms.iter().position(|&n| n == 0.0) {
        Some(i) => Err(SimGraphError::ZeroVector(i)),
        None => Ok(norms),
    }
}

fn row_dot(a: &[f32], b: &[f32]) -> f64 {
    a.iter().zip(b).map(|(x, y)| *x as f64 * *y as f64).sum()
}

/// All `N(N-1)/2` pairs `(a < b)` with their cosine similarity, in `(a, b)`
/// order. Rows are scored in parallel.
pub fn pairwise_similarities(vectors: &DocVectors) -> Result<Vec<ScoredPair>, SimGraphError> {
    let n = vectors.len();
    if n < 2 {
        return Err(SimGraphError::TooFew(n));
    }
    let norms = checked_norms(vectors)?;
    let rows: Vec<Vec<ScoredPair>> = (0..n)
        .into_par_iter()
        .map(|a| {
            let ra = vectors.row(a);
            (a + 1..n)
                .map(|b| ScoredPair {
                    a,
                    b,
                    similarity: cosine_from_parts(row_dot(ra, vectors.row(b)), norms[a], norms[b]),
                })
                .collect()
        })
        .collect();
    Ok(rows.into_iter().flatten().collect())
}

/// `floor(fraction * pairs)`, reading `fraction` as the decimal it was
/// written as so that e.g. `0.7 * 2850` yields 1995 rather than 1994.
pub fn edge_budget(pairs: usize, fraction: f64) -> usize {
    let exact = fraction * pairs as f64;
    let nearest = exact.round();
    if (exact - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest as usize
    } else {
        exact.floor() as usize
    }
}

pub fn top_fraction_edges(
    mut pairs: Vec<ScoredPair>,
    n_nodes: usize,
    fraction: f64,
) -> Result<SimilarityGraph, SimGraphError> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(SimGraphError::Fraction(fraction));
    }
    let m = edge_budget(pairs.len(), fraction);
    if m == 0 {
        return Err(SimGraphError::EmptyBudget {
            pairs: pairs.len(),
            fraction,
        });
    }
    if m < pairs.len() {
        pairs.select_nth_unstable_by(m - 1, rank_order);
        pairs.truncate(m);
    }
    pairs.sort_by(rank_order);
    Ok(SimilarityGraph {
        n_nodes,
        edges: pairs,
        edge_fraction: fraction,
    })
}

pub fn build_graph(vectors: &DocVectors, fraction: f64) -> Result<SimilarityGraph, SimGraphError> {
    top_fraction_edges(pairwise_similarities(vectors)?, vectors.len(), fraction)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub id: usize,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecommendationList {
    pub source: usize,
    pub items: Vec<Recommendation>,
}

/// The `n` talks most similar to `source`, most similar first.
pub fn recommend(vectors: &DocVectors, source: usize, n: usize) -> Result<RecommendationList, SimGraphError> {
    if source >= vectors.len() {
        return Err(SimGraphError::NotFound(source));
    }
    if n == 0 {
        return Err(SimGraphError::Count);
    }
    let norms = checked_norms(vectors)?;
    let src = vectors.row(source);
    let mut items: Vec<Recommendation> = (0..vectors.len())
        .filter(|&i| i != source)
        .map(|i| Recommendation {
            id: i,
            similarity: cosine_from_parts(row_dot(src, vectors.row(i)), norms[source], norms[i]),
        })
        .collect();
    items.sort_by(|x, y| y.similarity.total_cmp(&x.similarity).then(x.id.cmp(&y.id)));
    items.truncate(n);
    Ok(RecommendationList { source, items })
}

/// A talk, its top recommendations, and the edges among them.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborGraph {
    pub source: usize,
    /// Source first, then neighbors in recommendation order.
    pub nodes: Vec<usize>,
    pub edges: Vec<ScoredPair>,
}

/// Star edges from the source to each neighbor are always present, even
/// when below the global cut; other global edges among the nodes are kept.
pub fn neighbor_subgraph(
    graph: &SimilarityGraph,
    vectors: &DocVectors,
    source: usize,
    n: usize,
) -> Result<NeighborGraph, SimGraphError> {
    let recs = recommend(vectors, source, n)?;
    let mut nodes = vec![source];
    nodes.extend(recs.items.iter().map(|r| r.id));
    let members: HashSet<usize> = nodes.iter().copied().collect();

    let mut edges: Vec<ScoredPair> = recs
        .items
        .iter()
        .map(|r| ScoredPair::new(source, r.id, r.similarity))
        .collect();
    let star: HashSet<(usize, usize)> = edges.iter().map(|e| (e.a, e.b)).collect();
    edges.extend(
        graph
            .edges
            .iter()
            .filter(|e| members.contains(&e.a) && members.contains(&e.b))
            .filter(|e| !star.contains(&(e.a, e.b)))
            .copied(),
    );
    Ok(NeighborGraph { source, nodes, edges })
}
