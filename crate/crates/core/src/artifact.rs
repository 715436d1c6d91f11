//! Single-file persistence for the corpus and the built pipeline artifact.
//!
//! Both files share one container layout (all integers little-endian):
//!
//! ```text
//! magic      [u8; 8]
//! version    u32
//! n_talks    u32
//! dim        u32
//! n_edges    u32
//! n_sections u32
//! section*   name_len u16 | name | payload_len u64 | payload
//! checksum   [u8; 32]   SHA-256 of every preceding byte
//! ```
//!
//! Structured sections hold JSON; vector and graph sections are packed
//! binary with 32-bit float vectors. Encoding is canonical, so
//! load-then-save reproduces the input bytes.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{de::DeserializeOwned, Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::community::CommunityAssignment;
use crate::corpus::{Corpus, Talk, TalkMeta};
use crate::embedding::DocVectors;
use crate::pipeline::BuildConfig;
use crate::sentiment::SentimentScore;
use crate::simgraph::{ScoredPair, SimilarityGraph};
use crate::tfidf::CloudEntry;

pub const ARTIFACT_MAGIC: [u8; 8] = *b"TALKGRPH";
pub const CORPUS_MAGIC: [u8; 8] = *b"TALKCRPS";
pub const FORMAT_VERSION: u32 = 1;

const HEADER_LEN: usize = 8 + 4 * 5;
const CHECKSUM_LEN: usize = 32;

#[derive(Debug, Error)]
pub enum ArtifactError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("not a talkgraph {expected} file (bad magic)")]
    BadMagic { expected: &'static str },
    #[error("unsupported format version {found} (supported: {supported})")]
    UnsupportedVersion { found: u32, supported: u32 },
    #[error("file is truncated")]
    Truncated,
    #[error("checksum mismatch")]
    Checksum,
    #[error("missing section `{0}`")]
    MissingSection(String),
    #[error("malformed section `{section}`: {reason}")]
    Malformed { section: String, reason: String },
}

fn malformed(section: &str, reason: impl ToString) -> ArtifactError {
    ArtifactError::Malformed {
        section: section.to_string(),
        reason: reason.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Header {
    pub version: u32,
    pub n_talks: u32,
    pub dim: u32,
    pub n_edges: u32,
}

/// Generic sectioned container shared by both file kinds.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Container {
    pub header: Header,
    pub sections: Vec<(String, Vec<u8>)>,
}

impl Container {
    pub fn push(&mut self, name: &str, payload: Vec<u8>) {
        self.sections.push((name.to_string(), payload));
    }

    pub fn section(&self, name: &str) -> Result<&[u8], ArtifactError> {
        self.sections
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, p)| p.as_slice())
            .ok_or_else(|| ArtifactError::MissingSection(name.to_string()))
    }

    pub fn encode(&self, magic: [u8; 8]) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&magic);
        for v in [
            self.header.version,
            self.header.n_talks,
            self.header.dim,
            self.header.n_edges,
            self.sections.len() as u32,
        ] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for (name, payload) in &self.sections {
            out.extend_from_slice(&(name.len() as u16).to_le_bytes());
            out.extend_from_slice(name.as_bytes());
            out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
            out.extend_from_slice(payload);
        }
        let digest = Sha256::digest(&out);
        out.extend_from_slice(&digest);
        out
    }

    /// Checks run in order: magic, version, section framing, checksum.
    pub fn decode(bytes: &[u8], magic: [u8; 8], kind: &'static str) -> Result<Self, ArtifactError> {
        if bytes.len() < 8 || bytes[..8] != magic {
            return Err(ArtifactError::BadMagic { expected: kind });
        }
        if bytes.len() < 12 {
            return Err(ArtifactError::Truncated);
        }
        let mut cur = Cursor { bytes, pos: 8 };
        let version = cur.u32()?;
        if version != FORMAT_VERSION {
            return Err(ArtifactError::UnsupportedVersion {
                found: version,
                supported: FORMAT_VERSION,
            });
        }
        let header = Header {
            version,
            n_talks: cur.u32()?,
            dim: cur.u32()?,
            n_edges: cur.u32()?,
        };
        let n_sections = cur.u32()?;
        debug_assert_eq!(cur.pos, HEADER_LEN);
        let body_end = bytes.len().checked_sub(CHECKSUM_LEN).ok_or(ArtifactError::Truncated)?;
        let mut sections = Vec::new();
        for _ in 0..n_sections {
            let name_len = cur.u16()? as usize;
            let name = std::str::from_utf8(cur.take(name_len)?)
                .map_err(|_| malformed("<header>", "section name is not UTF-8"))?
                .to_string();
            let len = usize::try_from(cur.u64()?).map_err(|_| ArtifactError::Truncated)?;
            let payload = cur.take(len)?.to_vec();
            sections.push((name, payload));
        }
        if cur.pos > body_end {
            return Err(ArtifactError::Truncated);
        }
        if cur.pos < body_end {
            // trailing bytes or a checksum of the wrong length
            return Err(ArtifactError::Checksum);
        }
        if Sha256::digest(&bytes[..body_end]).as_slice() != &bytes[body_end..] {
            return Err(ArtifactError::Checksum);
        }
        Ok(Self { header, sections })
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], ArtifactError> {
        let end = self.pos.checked_add(n).ok_or(ArtifactError::Truncated)?;
        let out = self.bytes.get(self.pos..end).ok_or(ArtifactError::Truncated)?;
        self.pos = end;
        Ok(out)
    }

    fn u16(&mut self) -> Result<u16, ArtifactError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, ArtifactError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, ArtifactError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, ArtifactError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    serde_json::to_vec(value).expect("artifact values serialize")
}

fn from_json<T: DeserializeOwned>(c: &Container, section: &str) -> Result<T, ArtifactError> {
    serde_json::from_slice(c.section(section)?).map_err(|e| malformed(section, e))
}

fn read_file(path: &Path) -> Result<Vec<u8>, ArtifactError> {
    std::fs::read(path).map_err(|source| ArtifactError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), ArtifactError> {
    std::fs::write(path, bytes).map_err(|source| ArtifactError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TalkSentiment {
    #[serde(flatten)]
    pub raw: SentimentScore,
    pub normalized: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ArtifactMeta {
    fingerprint: String,
    config: BuildConfig,
}

/// Everything the server needs, produced by one `build` run.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub format_version: u32,
    pub fingerprint: String,
    pub config: BuildConfig,
    pub talks: Vec<TalkMeta>,
    pub sentiment: Vec<TalkSentiment>,
    pub clouds: Vec<Vec<CloudEntry>>,
    pub doc_vectors: DocVectors,
    pub graph: SimilarityGraph,
    pub communities: CommunityAssignment,
}

impl Artifact {
    pub fn len(&self) -> usize {
        self.talks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.talks.is_empty()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let n = self.talks.len();
        let mut c = Container {
            header: Header {
                version: self.format_version,
                n_talks: n as u32,
                dim: self.doc_vectors.dim() as u32,
                n_edges: self.graph.edges.len() as u32,
            },
            sections: Vec::new(),
        };
        c.push(
            "meta",
            to_json(&ArtifactMeta {
                fingerprint: self.fingerprint.clone(),
                config: self.config.clone(),
            }),
        );
        c.push("talks", to_json(&self.talks));
        c.push("sentiment", to_json(&self.sentiment));
        c.push("clouds", to_json(&self.clouds));

        let vectors = self
            .doc_vectors
            .as_slice()
            .iter()
            .flat_map(|v| v.to_le_bytes())
            .collect();
        c.push("vectors", vectors);

        let mut graph = Vec::with_capacity(8 + self.graph.edges.len() * 16);
        graph.extend_from_slice(&self.graph.edge_fraction.to_le_bytes());
        for e in &self.graph.edges {
            graph.extend_from_slice(&(e.a as u32).to_le_bytes());
            graph.extend_from_slice(&(e.b as u32).to_le_bytes());
            graph.extend_from_slice(&e.similarity.to_le_bytes());
        }
        c.push("graph", graph);

        let mut communities = Vec::with_capacity(8 + n * 4);
        communities.extend_from_slice(&self.communities.modularity.to_le_bytes());
        for l in &self.communities.labels {
            communities.extend_from_slice(&(*l as u32).to_le_bytes());
        }
        c.push("communities", communities);
        c.encode(ARTIFACT_MAGIC)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ArtifactError> {
        let c = Container::decode(bytes, ARTIFACT_MAGIC, "artifact")?;
        let n = c.header.n_talks as usize;
        let dim = c.header.dim as usize;

        let meta: ArtifactMeta = from_json(&c, "meta")?;
        let talks: Vec<TalkMeta> = from_json(&c, "talks")?;
        if talks.len() != n {
            return Err(malformed("talks", format!("{} talks, header says {n}", talks.len())));
        }
        if let Some((i, t)) = talks.iter().enumerate().find(|(i, t)| t.id != *i) {
            return Err(malformed("talks", format!("talk at position {i} has id {}", t.id)));
        }
        let sentiment: Vec<TalkSentiment> = from_json(&c, "sentiment")?;
        if sentiment.len() != n {
            return Err(malformed("sentiment", format!("{} entries for {n} talks", sentiment.len())));
        }
        let clouds: Vec<Vec<CloudEntry>> = from_json(&c, "clouds")?;
        if clouds.len() != n {
            return Err(malformed("clouds", format!("{} clouds for {n} talks", clouds.len())));
        }

        let raw = c.section("vectors")?;
        if dim == 0 || raw.len() != n * dim * 4 {
            return Err(malformed("vectors", format!("{} bytes for {n}x{dim} floats", raw.len())));
        }
        let data = raw
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
            .collect();
        let doc_vectors = DocVectors::new(dim, data);

        let raw = c.section("graph")?;
        let n_edges = c.header.n_edges as usize;
        if raw.len() != 8 + n_edges * 16 {
            return Err(malformed("graph", format!("{} bytes for {n_edges} edges", raw.len())));
        }
        let mut cur = Cursor { bytes: raw, pos: 0 };
        let edge_fraction = cur.f64()?;
        let mut edges = Vec::with_capacity(n_edges);
        for _ in 0..n_edges {
            let a = cur.u32()? as usize;
            let b = cur.u32()? as usize;
            let similarity = cur.f64()?;
            if a >= b || b >= n {
                return Err(malformed("graph", format!("invalid edge ({a}, {b})")));
            }
            if !(-1.0..=1.0).contains(&similarity) {
                return Err(malformed("graph", format!("similarity {similarity} out of range")));
            }
            edges.push(ScoredPair { a, b, similarity });
        }

        let raw = c.section("communities")?;
        if raw.len() != 8 + n * 4 {
            return Err(malformed("communities", format!("{} bytes for {n} labels", raw.len())));
        }
        let mut cur = Cursor { bytes: raw, pos: 0 };
        let modularity = cur.f64()?;
        let labels = (0..n).map(|_| cur.u32().map(|l| l as usize)).collect::<Result<Vec<_>, _>>()?;

        Ok(Self {
            format_version: c.header.version,
            fingerprint: meta.fingerprint,
            config: meta.config,
            talks,
            sentiment,
            clouds,
            doc_vectors,
            graph: SimilarityGraph {
                n_nodes: n,
                edges,
                edge_fraction,
            },
            communities: CommunityAssignment { labels, modularity },
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), ArtifactError> {
        write_file(path, &self.to_bytes())
    }

    pub fn load(path: &Path) -> Result<Self, ArtifactError> {
        Self::from_bytes(&read_file(path)?)
    }
}

#[derive(Serialize, Deserialize)]
struct StoredTalk {
    #[serde(flatten)]
    meta: TalkMeta,
    transcript: String,
}

pub fn corpus_to_bytes(corpus: &Corpus) -> Vec<u8> {
    let mut c = Container {
        header: Header {
            version: FORMAT_VERSION,
            n_talks: corpus.len() as u32,
            ..Header::default()
        },
        sections: Vec::new(),
    };
    let mut meta = BTreeMap::new();
    meta.insert("fingerprint", corpus.source_fingerprint());
    c.push("meta", to_json(&meta));
    let talks: Vec<StoredTalk> = corpus
        .talks()
        .iter()
        .map(|t| StoredTalk {
            meta: t.meta.clone(),
            transcript: t.transcript.clone(),
        })
        .collect();
    c.push("talks", to_json(&talks));
    c.encode(CORPUS_MAGIC)
}

/// Tokens are not stored; they are recomputed from the transcripts.
pub fn corpus_from_bytes(bytes: &[u8]) -> Result<Corpus, ArtifactError> {
    let c = Container::decode(bytes, CORPUS_MAGIC, "corpus")?;
    let meta: BTreeMap<String, String> = from_json(&c, "meta")?;
    let fingerprint = meta
        .get("fingerprint")
        .cloned()
        .ok_or_else(|| malformed("meta", "missing fingerprint"))?;
    let stored: Vec<StoredTalk> = from_json(&c, "talks")?;
    if stored.len() != c.header.n_talks as usize {
        return Err(malformed("talks", "talk count disagrees with header"));
    }
    if stored.iter().enumerate().any(|(i, t)| t.meta.id != i) {
        return Err(malformed("talks", "ids are not dense"));
    }
    let talks = stored.into_iter().map(|t| Talk::new(t.meta, t.transcript)).collect();
    Ok(Corpus::with_fingerprint(talks, fingerprint))
}

pub fn save_corpus(corpus: &Corpus, path: &Path) -> Result<(), ArtifactError> {
    write_file(path, &corpus_to_bytes(corpus))
}

pub fn load_corpus(path: &Path) -> Result<Corpus, ArtifactError> {
    corpus_from_bytes(&read_file(path)?)
}
