//! Happiness scoring against a labMT-style word lexicon.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_BAND: (f64, f64) = (4.0, 6.0);

#[derive(Debug, Error, PartialEq)]
pub enum SentimentError {
    #[error("lexicon line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("lexicon header not found (need `word` and `happiness_average` columns)")]
    MissingHeader,
    #[error("invalid neutral band ({0}, {1}); need 1 <= low < high <= 9")]
    Band(f64, f64),
    #[error("lexicon is empty after excluding the neutral band")]
    Empty,
    #[error("no talk has a sentiment score")]
    NoScores,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lexicon {
    entries: HashMap<String, f64>,
}

impl Lexicon {
    pub fn get(&self, word: &str) -> Option<f64> {
        self.entries.get(word).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.entries.contains_key(word)
    }
}

pub fn validate_band(band: (f64, f64)) -> Result<(f64, f64), SentimentError> {
    let (low, high) = band;
    if !(1.0..=9.0).contains(&low) || !(1.0..=9.0).contains(&high) || low >= high {
        return Err(SentimentError::Band(low, high));
    }
    Ok(band)
}

/// Loads a tab-separated lexicon. Lines before the header row (the labMT
/// distribution carries a short preamble) are skipped; words whose score
/// falls strictly inside `band` are dropped.
pub fn load_lexicon(text: &str, band: Option<(f64, f64)>) -> Result<Lexicon, SentimentError> {
    let (low, high) = validate_band(band.unwrap_or(DEFAULT_BAND))?;
    let mut lines = text.lines().enumerate();
    let (word_col, score_col) = loop {
        let Some((_, line)) = lines.next() else {
            return Err(SentimentError::MissingHeader);
        };
        let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
        let word = cols.iter().position(|c| *c == "word");
        let score = cols.iter().position(|c| *c == "happiness_average");
        if let (Some(w), Some(s)) = (word, score) {
            break (w, s);
        }
    };

    let mut entries = HashMap::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        let parse_err = |reason: String| SentimentError::Parse {
            line: line_no,
            reason,
        };
        let word = cols
            .get(word_col)
            .map(|w| w.trim().to_lowercase())
            .filter(|w| !w.is_empty())
            .ok_or_else(|| parse_err("missing word".into()))?;
        let raw = cols
            .get(score_col)
            .ok_or_else(|| parse_err("missing happiness_average".into()))?
            .trim();
        let score: f64 = raw
            .parse()
            .map_err(|_| parse_err(format!("happiness {raw:?} is not a number")))?;
        if !(1.0..=9.0).contains(&score) {
            return Err(parse_err(format!("happiness {score} outside [1, 9]")));
        }
        if score > low && score < high {
            continue;
        }
        if entries.insert(word.clone(), score).is_some() {
            return Err(parse_err(format!("duplicate word {word:?}")));
        }
    }
    if entries.is_empty() {
        return Err(SentimentError::Empty);
    }
    Ok(Lexicon { entries })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SentimentScore {
    pub score: Option<f64>,
    pub matched_tokens: usize,
    pub total_tokens: usize,
    pub coverage: f64,
}

/// Frequency-weighted mean happiness of the tokens found in the lexicon.
pub fn score_talk<S: AsRef<str>>(tokens: &[S], lexicon: &Lexicon) -> SentimentScore {
    let mut counts: BTreeMap<&str, (usize, f64)> = BTreeMap::new();
    for tok in tokens {
        let tok = tok.as_ref();
        if let Some(h) = lexicon.get(tok) {
            counts.entry(tok).or_insert((0, h)).0 += 1;
        }
    }
    // summing per distinct word in word order makes the result exactly
    // invariant to token order
    let mut sum = 0.0;
    let mut matched = 0usize;
    for (count, h) in counts.values() {
        sum += *count as f64 * h;
        matched += count;
    }
    let total = tokens.len();
    SentimentScore {
        score: (matched > 0).then(|| sum / matched as f64),
        matched_tokens: matched,
        total_tokens: total,
        coverage: if total > 0 {
            matched as f64 / total as f64
        } else {
            0.0
        },
    }
}

/// Min-max scales present scores onto [0, 1]. A constant input maps to 0.5.
pub fn normalize_scores(scores: &[SentimentScore]) -> Result<Vec<Option<f64>>, SentimentError> {
    let present = scores.iter().filter_map(|s| s.score);
    let (min, max) = present.fold(None, |acc: Option<(f64, f64)>, v| match acc {
        None => Some((v, v)),
        Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
    })
    .ok_or(SentimentError::NoScores)?;
    let span = max - min;
    Ok(scores
        .iter()
        .map(|s| {
            s.score.map(|v| {
                if span == 0.0 {
                    0.5
                } else {
                    ((v - min) / span).clamp(0.0, 1.0)
                }
            })
        })
        .collect())
}
