//! Talk metadata and transcript ingestion.
//!
//! Two CSV inputs in the Kaggle TED layout are parsed independently, inner
//! joined on `url`, and every transcript is tokenized once. The resulting
//! [`Corpus`] is immutable.

use std::collections::{HashMap, HashSet};
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("missing required column `{0}`")]
    MissingColumn(String),
    #[error("CSV parse error at row {row}: {message}")]
    Parse { row: usize, message: String },
    #[error("row {row}: `views` is not a non-negative integer: {value:?}")]
    Views { row: usize, value: String },
    #[error("row {row}: malformed tags literal: {value:?}")]
    Tags { row: usize, value: String },
    #[error("input contains no data rows")]
    EmptyInput,
    #[error("join produced no talks ({metas} metadata rows, {transcripts} transcripts)")]
    EmptyJoin { metas: usize, transcripts: usize },
}

/// Metadata for one talk. `id` is dense and assigned at join time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TalkMeta {
    pub id: usize,
    pub title: String,
    pub speaker: String,
    pub tags: Vec<String>,
    pub views: u64,
    pub url: String,
}

/// A metadata row before it has been joined and given an id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetaRecord {
    pub title: String,
    pub speaker: String,
    pub tags: Vec<String>,
    pub views: u64,
    pub url: String,
}

impl MetaRecord {
    fn with_id(self, id: usize) -> TalkMeta {
        TalkMeta {
            id,
            title: self.title,
            speaker: self.speaker,
            tags: self.tags,
            views: self.views,
            url: self.url,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Talk {
    pub meta: TalkMeta,
    pub transcript: String,
    pub tokens: Vec<String>,
}

impl Talk {
    pub fn new(meta: TalkMeta, transcript: String) -> Self {
        let tokens = tokenize(&transcript);
        Self {
            meta,
            transcript,
            tokens,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    talks: Vec<Talk>,
    fingerprint: String,
}

impl Corpus {
    /// Builds a corpus from already-identified talks. Ids must equal their
    /// position; the fingerprint is derived from the talks' content.
    pub fn from_talks(talks: Vec<Talk>) -> Self {
        assert!(
            talks.iter().enumerate().all(|(i, t)| t.meta.id == i),
            "talk ids must be dense and ordered"
        );
        let mut hasher = Sha256::new();
        for talk in &talks {
            hash_field(&mut hasher, talk.meta.title.as_bytes());
            hash_field(&mut hasher, talk.meta.url.as_bytes());
            hash_field(&mut hasher, talk.transcript.as_bytes());
        }
        let fingerprint = hex(&hasher.finalize());
        Self { talks, fingerprint }
    }

    /// Builds a corpus from `(title, transcript)` pairs with placeholder
    /// metadata. Handy for synthetic fixtures.
    pub fn from_texts<I, S, T>(docs: I) -> Self
    where
        I: IntoIterator<Item = (S, T)>,
        S: Into<String>,
        T: Into<String>,
    {
        let talks = docs
            .into_iter()
            .enumerate()
            .map(|(id, (title, text))| {
                let meta = TalkMeta {
                    id,
                    title: title.into(),
                    speaker: String::new(),
                    tags: Vec::new(),
                    views: 0,
                    url: format!("doc://{id}"),
                };
                Talk::new(meta, text.into())
            })
            .collect();
        Self::from_talks(talks)
    }

    pub(crate) fn with_fingerprint(talks: Vec<Talk>, fingerprint: String) -> Self {
        Self { talks, fingerprint }
    }

    pub fn talks(&self) -> &[Talk] {
        &self.talks
    }

    pub fn len(&self) -> usize {
        self.talks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.talks.is_empty()
    }

    pub fn get(&self, id: usize) -> Option<&Talk> {
        self.talks.get(id)
    }

    /// Content hash of the inputs the corpus was built from.
    pub fn source_fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn mean_tokens(&self) -> f64 {
        if self.talks.is_empty() {
            return 0.0;
        }
        let total: usize = self.talks.iter().map(|t| t.tokens.len()).sum();
        total as f64 / self.talks.len() as f64
    }
}

/// Counts reported by [`join_corpus`] and [`parse_transcripts`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct JoinReport {
    pub metas_without_transcript: usize,
    pub transcripts_without_meta: usize,
    pub duplicate_transcript_urls: usize,
}

#[derive(Debug, Clone, Default)]
pub struct Transcripts {
    pub by_url: HashMap<String, String>,
    /// Urls in first-seen order, so the join is independent of hash order.
    pub order: Vec<String>,
    pub duplicates: usize,
}

impl Transcripts {
    pub fn len(&self) -> usize {
        self.by_url.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_url.is_empty()
    }

    pub fn get(&self, url: &str) -> Option<&str> {
        self.by_url.get(url).map(String::as_str)
    }
}

fn reader(bytes: &[u8]) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(bytes)
}

fn column(headers: &csv::StringRecord, name: &str) -> Result<usize, CorpusError> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| CorpusError::MissingColumn(name.to_string()))
}

fn csv_error(row: usize, err: csv::Error) -> CorpusError {
    let row = err
        .position()
        .map(|p| p.record() as usize)
        .filter(|r| *r > 0)
        .unwrap_or(row);
    CorpusError::Parse {
        row,
        message: err.to_string(),
    }
}

pub fn parse_metadata(bytes: &[u8]) -> Result<Vec<MetaRecord>, CorpusError> {
    let mut rdr = reader(bytes);
    let headers = rdr.headers().map_err(|e| csv_error(0, e))?.clone();
    let title = column(&headers, "title")?;
    let speaker = column(&headers, "main_speaker")?;
    let tags = column(&headers, "tags")?;
    let views = column(&headers, "views")?;
    let url = column(&headers, "url")?;

    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| csv_error(row, e))?;
        let raw_views = rec[views].trim();
        let views = raw_views.parse::<u64>().map_err(|_| CorpusError::Views {
            row,
            value: raw_views.to_string(),
        })?;
        let tags = parse_tag_list(&rec[tags]).ok_or_else(|| CorpusError::Tags {
            row,
            value: rec[tags].to_string(),
        })?;
        out.push(MetaRecord {
            title: rec[title].trim().to_string(),
            speaker: rec[speaker].trim().to_string(),
            tags,
            views,
            url: rec[url].trim().to_string(),
        });
    }
    Ok(out)
}

/// Parses a bracketed list literal such as `['a', "b's"]` into lowercase
/// strings. Returns `None` on malformed input. A blank field is an empty list.
pub fn parse_tag_list(raw: &str) -> Option<Vec<String>> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Some(Vec::new());
    }
    let inner = raw.strip_prefix('[')?.strip_suffix(']')?;
    let mut tags = Vec::new();
    let mut chars = inner.chars().peekable();
    loop {
        while chars.peek().is_some_and(|c| c.is_whitespace()) {
            chars.next();
        }
        let Some(quote) = chars.next() else { break };
        if quote != '\'' && quote != '"' {
            return None;
        }
        let mut tag = String::new();
        loop {
            match chars.next()? {
                '\\' => tag.push(chars.next()?),
                c if c == quote => break,
                c => tag.push(c),
            }
        }
        tags.push(tag.trim().to_lowercase());
        while chars.peek().is_some_and(|c| c.is_whitespace()) {
            chars.next();
        }
        match chars.next() {
            None => break,
            Some(',') => continue,
            Some(_) => return None,
        }
    }
    Some(tags)
}

pub fn parse_transcripts(bytes: &[u8]) -> Result<Transcripts, CorpusError> {
    let mut rdr = reader(bytes);
    let headers = rdr.headers().map_err(|e| csv_error(0, e))?.clone();
    let text = column(&headers, "transcript")?;
    let url = column(&headers, "url")?;

    let mut out = Transcripts::default();
    let mut rows = 0;
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(i + 1, e))?;
        rows += 1;
        let key = rec[url].trim().to_string();
        if out.by_url.contains_key(&key) {
            out.duplicates += 1;
            continue;
        }
        out.order.push(key.clone());
        out.by_url.insert(key, rec[text].to_string());
    }
    if rows == 0 {
        return Err(CorpusError::EmptyInput);
    }
    if out.duplicates > 0 {
        tracing::warn!(duplicates = out.duplicates, "duplicate transcript urls ignored");
    }
    Ok(out)
}

/// Inner join on url. Ids follow metadata order; a repeated metadata url
/// keeps its first row.
pub fn join_corpus(
    metas: Vec<MetaRecord>,
    transcripts: &Transcripts,
) -> Result<(Corpus, JoinReport), CorpusError> {
    let n_metas = metas.len();
    let mut report = JoinReport {
        duplicate_transcript_urls: transcripts.duplicates,
        ..JoinReport::default()
    };
    let mut matched = HashSet::new();
    let mut talks = Vec::new();
    for meta in metas {
        if matched.contains(&meta.url) {
            report.metas_without_transcript += 1;
            continue;
        }
        match transcripts.get(&meta.url) {
            Some(text) if !text.trim().is_empty() => {
                matched.insert(meta.url.clone());
                let id = talks.len();
                talks.push(Talk::new(meta.with_id(id), text.to_string()));
            }
            _ => report.metas_without_transcript += 1,
        }
    }
    report.transcripts_without_meta = transcripts
        .order
        .iter()
        .filter(|u| !matched.contains(*u))
        .count();
    if talks.is_empty() {
        return Err(CorpusError::EmptyJoin {
            metas: n_metas,
            transcripts: transcripts.len(),
        });
    }
    Ok((Corpus::from_talks(talks), report))
}

/// Parses both CSV inputs and joins them. The fingerprint covers the raw
/// input bytes.
pub fn ingest(main_csv: &[u8], transcripts_csv: &[u8]) -> Result<(Corpus, JoinReport), CorpusError> {
    let metas = parse_metadata(main_csv)?;
    let transcripts = parse_transcripts(transcripts_csv)?;
    let (corpus, report) = join_corpus(metas, &transcripts)?;
    Ok((
        Corpus::with_fingerprint(corpus.talks, input_fingerprint(&[main_csv, transcripts_csv])),
        report,
    ))
}

pub fn input_fingerprint(inputs: &[&[u8]]) -> String {
    let mut hasher = Sha256::new();
    for bytes in inputs {
        hash_field(&mut hasher, bytes);
    }
    hex(&hasher.finalize())
}

fn hash_field(hasher: &mut Sha256, bytes: &[u8]) {
    hasher.update((bytes.len() as u64).to_le_bytes());
    hasher.update(bytes);
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn annotation_pattern() -> &'static Regex {
    static PATTERN: OnceLock<Regex> = OnceLock::new();
    PATTERN.get_or_init(|| Regex::new(r"\(\s*\p{L}+\s*\)").expect("valid regex"))
}

/// Splits a transcript into lowercase word tokens.
///
/// One-word parentheticals such as `(Laughter)` are removed first. Any
/// character that is not a letter, digit, or apostrophe separates tokens,
/// and apostrophes are trimmed from token ends.
pub fn tokenize(text: &str) -> Vec<String> {
    let cleaned = annotation_pattern().replace_all(text, " ");
    let lowered = cleaned.to_lowercase();
    lowered
        .split(|c: char| !(c.is_alphanumeric() || c == '\''))
        .map(|t| t.trim_matches('\''))
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}
