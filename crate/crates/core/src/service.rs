//! Read-only HTTP API over a loaded [`Artifact`].
//!
//! | Endpoint                          | Response                         |
//! |-----------------------------------|----------------------------------|
//! | `GET /api/info`                   | artifact summary                 |
//! | `GET /api/talks`                  | node summaries sorted by title   |
//! | `GET /api/talks/{id}?n=`          | detail with cloud + recommendations |
//! | `GET /api/talks/{id}/neighbors?n=`| neighbor subgraph document       |
//! | `GET /api/graph`                  | full similarity graph document   |
//! | `GET /api/search?q=`              | title matches                    |
//!
//! Errors use the body `{"error": {"code", "message"}}`. JSON Schemas for
//! every response live in [`schemas`].

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::Serialize;
use tower_http::services::ServeDir;

use crate::artifact::Artifact;
use crate::corpus::TalkMeta;
use crate::simgraph::{neighbor_subgraph, recommend, ScoredPair, DEFAULT_TOP_N};
use crate::tfidf::CloudEntry;

/// Published JSON Schemas for the API payloads.
pub mod schemas {
    pub const INFO: &str = include_str!("../schemas/info.schema.json");
    pub const TALK_LIST: &str = include_str!("../schemas/talk_list.schema.json");
    pub const TALK_DETAIL: &str = include_str!("../schemas/talk_detail.schema.json");
    pub const GRAPH_DOCUMENT: &str = include_str!("../schemas/graph_document.schema.json");
    pub const ERROR: &str = include_str!("../schemas/error.schema.json");
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeSummary {
    pub id: usize,
    pub title: String,
    pub speaker: String,
    pub views: u64,
    pub sentiment_norm: Option<f64>,
    pub community: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Link {
    pub source: usize,
    pub target: usize,
    pub similarity: f64,
}

impl From<&ScoredPair> for Link {
    fn from(p: &ScoredPair) -> Self {
        Self {
            source: p.a,
            target: p.b,
            similarity: p.similarity,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphDocument {
    pub nodes: Vec<NodeSummary>,
    pub links: Vec<Link>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SentimentView {
    pub score: Option<f64>,
    pub normalized: Option<f64>,
    pub matched_tokens: usize,
    pub total_tokens: usize,
    pub coverage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecommendationView {
    pub id: usize,
    pub title: String,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TalkDetail {
    pub meta: TalkMeta,
    pub community: usize,
    pub sentiment: SentimentView,
    pub wordcloud: Vec<CloudEntry>,
    pub recommendations: Vec<RecommendationView>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Info {
    pub format_version: u32,
    pub fingerprint: String,
    pub talks: usize,
    pub links: usize,
    pub communities: usize,
    pub modularity: f64,
    pub dim: usize,
    pub edge_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct ErrorDetail {
    code: &'static str,
    message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct ErrorBody {
    error: ErrorDetail,
}

#[derive(Debug)]
pub enum ApiError {
    NotFound(String),
    BadRequest(String),
    Internal(String),
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, code, message) = match self {
            ApiError::NotFound(m) => (StatusCode::NOT_FOUND, "not_found", m),
            ApiError::BadRequest(m) => (StatusCode::BAD_REQUEST, "bad_request", m),
            ApiError::Internal(m) => (StatusCode::INTERNAL_SERVER_ERROR, "internal", m),
        };
        (
            status,
            Json(ErrorBody {
                error: ErrorDetail { code, message },
            }),
        )
            .into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

/// Immutable server state; all handlers are pure reads.
pub struct Catalog {
    artifact: Artifact,
    summaries: Vec<NodeSummary>,
    by_title: Vec<usize>,
}

impl Catalog {
    pub fn new(artifact: Artifact) -> Self {
        let summaries: Vec<NodeSummary> = artifact
            .talks
            .iter()
            .map(|t| NodeSummary {
                id: t.id,
                title: t.title.clone(),
                speaker: t.speaker.clone(),
                views: t.views,
                sentiment_norm: artifact.sentiment[t.id].normalized,
                community: artifact.communities.labels[t.id],
            })
            .collect();
        let mut by_title: Vec<usize> = (0..summaries.len()).collect();
        by_title.sort_by(|&a, &b| summaries[a].title.cmp(&summaries[b].title).then(a.cmp(&b)));
        Self {
            artifact,
            summaries,
            by_title,
        }
    }

    pub fn artifact(&self) -> &Artifact {
        &self.artifact
    }

    pub fn info(&self) -> Info {
        let a = &self.artifact;
        Info {
            format_version: a.format_version,
            fingerprint: a.fingerprint.clone(),
            talks: a.len(),
            links: a.graph.edges.len(),
            communities: a.communities.community_count(),
            modularity: a.communities.modularity,
            dim: a.doc_vectors.dim(),
            edge_fraction: a.graph.edge_fraction,
        }
    }

    pub fn talks(&self) -> Vec<NodeSummary> {
        self.by_title.iter().map(|&i| self.summaries[i].clone()).collect()
    }

    fn resolve(&self, raw_id: &str) -> Result<usize, ApiError> {
        let not_found = || ApiError::NotFound(format!("talk {raw_id} not found"));
        let id: i64 = raw_id.trim().parse().map_err(|_| not_found())?;
        usize::try_from(id)
            .ok()
            .filter(|&i| i < self.summaries.len())
            .ok_or_else(not_found)
    }

    pub fn detail(&self, raw_id: &str, n: usize) -> Result<TalkDetail, ApiError> {
        let id = self.resolve(raw_id)?;
        let a = &self.artifact;
        let recs = recommend(&a.doc_vectors, id, n).map_err(|e| ApiError::Internal(e.to_string()))?;
        let s = &a.sentiment[id];
        Ok(TalkDetail {
            meta: a.talks[id].clone(),
            community: a.communities.labels[id],
            sentiment: SentimentView {
                score: s.raw.score,
                normalized: s.normalized,
                matched_tokens: s.raw.matched_tokens,
                total_tokens: s.raw.total_tokens,
                coverage: s.raw.coverage,
            },
            wordcloud: a.clouds[id].clone(),
            recommendations: recs
                .items
                .iter()
                .map(|r| RecommendationView {
                    id: r.id,
                    title: a.talks[r.id].title.clone(),
                    similarity: r.similarity,
                })
                .collect(),
        })
    }

    pub fn neighbors(&self, raw_id: &str, n: usize) -> Result<GraphDocument, ApiError> {
        let id = self.resolve(raw_id)?;
        let a = &self.artifact;
        let sub = neighbor_subgraph(&a.graph, &a.doc_vectors, id, n).map_err(|e| ApiError::Internal(e.to_string()))?;
        Ok(GraphDocument {
            nodes: sub.nodes.iter().map(|&i| self.summaries[i].clone()).collect(),
            links: sub.edges.iter().map(Link::from).collect(),
        })
    }

    pub fn graph(&self) -> GraphDocument {
        GraphDocument {
            nodes: self.summaries.clone(),
            links: self.artifact.graph.edges.iter().map(Link::from).collect(),
        }
    }

    /// Case-insensitive title substring search, earliest match first.
    pub fn search(&self, query: &str) -> Vec<NodeSummary> {
        let needle = query.trim().to_lowercase();
        if needle.is_empty() {
            return Vec::new();
        }
        let mut hits: Vec<(usize, usize)> = self
            .by_title
            .iter()
            .filter_map(|&i| self.summaries[i].title.to_lowercase().find(&needle).map(|pos| (pos, i)))
            .collect();
        // by_title order already breaks ties on title
        hits.sort_by_key(|&(pos, _)| pos);
        hits.into_iter().map(|(_, i)| self.summaries[i].clone()).collect()
    }
}

fn count_param(params: &HashMap<String, String>, default: usize) -> Result<usize, ApiError> {
    match params.get("n").map(|s| s.trim()) {
        None | Some("") => Ok(default),
        Some(raw) => match raw.parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(ApiError::BadRequest(format!("n must be a positive integer, got {raw:?}"))),
        },
    }
}

type Shared = Arc<Catalog>;

async fn info(State(c): State<Shared>) -> Json<Info> {
    Json(c.info())
}

async fn talks(State(c): State<Shared>) -> Json<Vec<NodeSummary>> {
    Json(c.talks())
}

async fn talk_detail(
    State(c): State<Shared>,
    Path(id): Path<String>,
    Query(params): Query<HashMap<String, String>>,
) -> ApiResult<TalkDetail> {
    let n = count_param(&params, c.artifact.config.top_n)?;
    c.detail(&id, n).map(Json)
}

async fn talk_neighbors(
    State(c): State<Shared>,
    Path(id): Path<String>,
    Query(params): Query<HashMap<String, String>>,
) -> ApiResult<GraphDocument> {
    let n = count_param(&params, DEFAULT_TOP_N)?;
    c.neighbors(&id, n).map(Json)
}

async fn graph(State(c): State<Shared>) -> Json<GraphDocument> {
    Json(c.graph())
}

async fn search(State(c): State<Shared>, Query(params): Query<HashMap<String, String>>) -> Json<Vec<NodeSummary>> {
    Json(c.search(params.get("q").map(String::as_str).unwrap_or("")))
}

async fn api_not_found() -> ApiError {
    ApiError::NotFound("no such endpoint".into())
}

/// Builds the API router, optionally serving static UI files at `/`.
pub fn router(catalog: Arc<Catalog>, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/info", get(info))
        .route("/api/talks", get(talks))
        .route("/api/talks/{id}", get(talk_detail))
        .route("/api/talks/{id}/neighbors", get(talk_neighbors))
        .route("/api/graph", get(graph))
        .route("/api/search", get(search))
        .route("/api/{*rest}", get(api_not_found))
        .with_state(catalog);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

/// Binds `addr` and serves until the process is interrupted. `on_bound`
/// receives the actual address, which matters when the port is 0.
pub async fn serve(
    catalog: Arc<Catalog>,
    addr: SocketAddr,
    static_dir: Option<PathBuf>,
    on_bound: impl FnOnce(SocketAddr),
) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    on_bound(listener.local_addr()?);
    axum::serve(listener, router(catalog, static_dir))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
