//! Weighted modularity and Louvain community detection.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::simgraph::SimilarityGraph;

/// Minimum modularity improvement for a local move.
pub const MIN_GAIN: f64 = 1e-7;

#[derive(Debug, Error, PartialEq)]
pub enum CommunityError {
    #[error("graph has no edges")]
    NoEdges,
    #[error("total edge weight {0} is not positive")]
    NonPositiveWeight(f64),
    #[error("{labels} labels for {nodes} nodes")]
    LabelCount { labels: usize, nodes: usize },
    #[error("edge ({0}, {1}) references a node outside the graph")]
    NodeRange(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunityAssignment {
    /// Community id per node; ids are dense and ordered by smallest member.
    pub labels: Vec<usize>,
    pub modularity: f64,
}

impl CommunityAssignment {
    pub fn community_count(&self) -> usize {
        self.labels.iter().max().map_or(0, |m| m + 1)
    }
}

/// Undirected weighted graph with self-loops, as used between Louvain levels.
#[derive(Debug, Clone)]
struct WeightedGraph {
    adj: Vec<Vec<(usize, f64)>>,
    self_loops: Vec<f64>,
    degree: Vec<f64>,
    total: f64,
}

impl WeightedGraph {
    fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self, CommunityError> {
        let mut merged: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];
        let mut self_loops = vec![0.0; n];
        let mut any = false;
        for (a, b, w) in edges {
            if a >= n || b >= n {
                return Err(CommunityError::NodeRange(a, b));
            }
            any = true;
            if a == b {
                self_loops[a] += w;
            } else {
                *merged[a].entry(b).or_default() += w;
                *merged[b].entry(a).or_default() += w;
            }
        }
        if !any {
            return Err(CommunityError::NoEdges);
        }
        let adj: Vec<Vec<(usize, f64)>> = merged.into_iter().map(|m| m.into_iter().collect()).collect();
        let degree: Vec<f64> = adj
            .iter()
            .zip(&self_loops)
            .map(|(row, sl)| row.iter().map(|(_, w)| w).sum::<f64>() + 2.0 * sl)
            .collect();
        let total = degree.iter().sum::<f64>() / 2.0;
        if !(total > 0.0) {
            return Err(CommunityError::NonPositiveWeight(total));
        }
        Ok(Self {
            adj,
            self_loops,
            degree,
            total,
        })
    }

    fn len(&self) -> usize {
        self.adj.len()
    }

    fn modularity(&self, labels: &[usize], resolution: f64) -> f64 {
        let c = labels.iter().max().map_or(0, |m| m + 1);
        let mut inside = vec![0.0; c];
        let mut tot = vec![0.0; c];
        for i in 0..self.len() {
            tot[labels[i]] += self.degree[i];
            inside[labels[i]] += 2.0 * self.self_loops[i];
            for &(j, w) in &self.adj[i] {
                if labels[i] == labels[j] {
                    inside[labels[i]] += w;
                }
            }
        }
        let two_m = 2.0 * self.total;
        inside
            .iter()
            .zip(&tot)
            .map(|(i, t)| i / two_m - resolution * (t / two_m).powi(2))
            .sum()
    }

    /// Moves nodes between communities until no move gains more than
    /// [`MIN_GAIN`]. Returns the labels and whether anything moved.
    fn local_moves(&self, resolution: f64, order: &[usize], trace: &mut Vec<f64>) -> (Vec<usize>, bool) {
        let n = self.len();
        let m = self.total;
        let mut labels: Vec<usize> = (0..n).collect();
        let mut tot = self.degree.clone();
        let mut weight_to: Vec<f64> = vec![0.0; n];
        let mut touched: Vec<usize> = Vec::new();
        let mut is_touched = vec![false; n];
        let mut moved_any = false;
        loop {
            let mut moved = false;
            for &i in order {
                let own = labels[i];
                let k = self.degree[i];
                touched.clear();
                for &(j, w) in &self.adj[i] {
                    let c = labels[j];
                    if !is_touched[c] {
                        is_touched[c] = true;
                        touched.push(c);
                    }
                    weight_to[c] += w;
                }
                tot[own] -= k;
                let gain = |c: usize, w_in: f64| w_in - resolution * tot[c] * k / (2.0 * m);
                let own_gain = gain(own, weight_to[own]);
                let mut best = own;
                let mut best_gain = own_gain;
                touched.sort_unstable();
                for &c in &touched {
                    if c == own {
                        continue;
                    }
                    let g = gain(c, weight_to[c]);
                    if (g - own_gain) / m > MIN_GAIN && g > best_gain {
                        best = c;
                        best_gain = g;
                    }
                }
                tot[best] += k;
                if best != own {
                    labels[i] = best;
                    moved = true;
                }
                for &c in &touched {
                    weight_to[c] = 0.0;
                    is_touched[c] = false;
                }
                weight_to[own] = 0.0;
            }
            if !moved {
                break;
            }
            moved_any = true;
            trace.push(self.modularity(&relabel(&labels), resolution));
        }
        (labels, moved_any)
    }

    /// Collapses each community into a single node.
    fn aggregate(&self, labels: &[usize], communities: usize) -> Self {
        let mut edges = Vec::new();
        for i in 0..self.len() {
            if self.self_loops[i] != 0.0 {
                edges.push((labels[i], labels[i], self.self_loops[i]));
            }
            for &(j, w) in &self.adj[i] {
                if i < j {
                    edges.push((labels[i], labels[j], w));
                }
            }
        }
        Self::from_edges(communities, edges).expect("aggregate of a valid graph is valid")
    }
}

/// Renumbers labels densely in order of first appearance by node id.
fn relabel(labels: &[usize]) -> Vec<usize> {
    let mut map = BTreeMap::new();
    let mut next = 0;
    labels
        .iter()
        .map(|l| {
            *map.entry(*l).or_insert_with(|| {
                next += 1;
                next - 1
            })
        })
        .collect()
}

fn graph_edges(graph: &SimilarityGraph) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
    graph.edges.iter().map(|e| (e.a, e.b, e.similarity))
}

/// Newman modularity `Σ_c [Σ_in/(2m) − (Σ_tot/(2m))²]`, edge weights taken
/// from similarities.
pub fn modularity(graph: &SimilarityGraph, labels: &[usize]) -> Result<f64, CommunityError> {
    modularity_of_edges(graph.n_nodes, graph_edges(graph), labels, 1.0)
}

pub fn modularity_of_edges(
    n: usize,
    edges: impl IntoIterator<Item = (usize, usize, f64)>,
    labels: &[usize],
    resolution: f64,
) -> Result<f64, CommunityError> {
    if labels.len() != n {
        return Err(CommunityError::LabelCount {
            labels: labels.len(),
            nodes: n,
        });
    }
    let g = WeightedGraph::from_edges(n, edges)?;
    Ok(g.modularity(&relabel(labels), resolution))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LouvainConfig {
    pub resolution: f64,
    /// `None` visits nodes in ascending order; `Some` shuffles the visit
    /// order at each level.
    pub seed: Option<u64>,
}

impl Default for LouvainConfig {
    fn default() -> Self {
        Self {
            resolution: 1.0,
            seed: None,
        }
    }
}

/// Louvain result plus the modularity (at the configured resolution) after
/// every local-move pass.
#[derive(Debug, Clone)]
pub struct LouvainRun {
    pub assignment: CommunityAssignment,
    pub pass_modularity: Vec<f64>,
    pub levels: usize,
}

pub fn louvain(graph: &SimilarityGraph, config: LouvainConfig) -> Result<CommunityAssignment, CommunityError> {
    Ok(louvain_traced(graph.n_nodes, graph_edges(graph), config)?.assignment)
}

pub fn louvain_traced(
    n: usize,
    edges: impl IntoIterator<Item = (usize, usize, f64)>,
    config: LouvainConfig,
) -> Result<LouvainRun, CommunityError> {
    let edges: Vec<_> = edges.into_iter().collect();
    let base = WeightedGraph::from_edges(n, edges.iter().copied())?;
    let mut rng = config.seed.map(ChaCha8Rng::seed_from_u64);
    let mut membership: Vec<usize> = (0..n).collect();
    let mut level_graph = base.clone();
    let mut trace = Vec::new();
    let mut levels = 0;
    loop {
        let mut order: Vec<usize> = (0..level_graph.len()).collect();
        if let Some(rng) = rng.as_mut() {
            order.shuffle(rng);
        }
        // a level partition has the same modularity as the partition it
        // induces on the original graph, so traces compare across levels
        let mut level_trace = Vec::new();
        let (labels, moved) = level_graph.local_moves(config.resolution, &order, &mut level_trace);
        trace.extend(level_trace);
        if !moved {
            break;
        }
        levels += 1;
        let labels = relabel(&labels);
        let communities = labels.iter().max().map_or(0, |m| m + 1);
        for c in membership.iter_mut() {
            *c = labels[*c];
        }
        if communities == level_graph.len() {
            break;
        }
        level_graph = level_graph.aggregate(&labels, communities);
    }
    let labels = relabel(&membership);
    let modularity = base.modularity(&labels, 1.0);
    Ok(LouvainRun {
        assignment: CommunityAssignment { labels, modularity },
        pass_modularity: trace,
        levels,
    })
}
