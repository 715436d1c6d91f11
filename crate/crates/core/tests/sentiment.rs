mod common;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use talkgraph::sentiment::{load_lexicon, normalize_scores, score_talk, Lexicon};

const HEADER: &str = "word\thappiness_rank\thappiness_average\thappiness_standard_deviation\n";

fn lexicon(rows: &[(&str, f64)]) -> Lexicon {
    let mut text = HEADER.to_string();
    for (i, (w, h)) in rows.iter().enumerate() {
        text.push_str(&format!("{w}\t{}\t{h}\t1.0\n", i + 1));
    }
    load_lexicon(&text, None).unwrap()
}

#[test]
fn weighted_mean_fixture() {
    // 8.0 twice and 2.0 once: (16 + 2) / 3 = 6.0; "the" is neutral.
    let lex = lexicon(&[("love", 8.0), ("war", 2.0), ("the", 5.0)]);
    let s = score_talk(&["love", "the", "war", "love", "unknown"], &lex);
    assert!((s.score.unwrap() - 6.0).abs() <= 1e-12);
    assert_eq!(s.matched_tokens, 3);
    assert_eq!(s.total_tokens, 5);
    assert!((s.coverage - 0.6).abs() <= 1e-12);
}

#[test]
fn fixture_lexicon_loads_past_preamble() {
    let lex = common::fixture_lexicon();
    assert!(lex.contains("laughter"));
    assert!(!lex.contains("the"), "neutral words are excluded");
}

#[test]
fn fixture_corpus_scores_are_normalized() {
    let corpus = common::fixture_corpus();
    let lex = common::fixture_lexicon();
    let scores: Vec<_> = corpus.talks().iter().map(|t| score_talk(&t.tokens, &lex)).collect();
    let norm = normalize_scores(&scores).unwrap();
    let present: Vec<f64> = norm.iter().flatten().copied().collect();
    assert_eq!(present.len(), corpus.len());
    assert!(present.iter().all(|x| (0.0..=1.0).contains(x)));
    assert!(present.contains(&0.0) && present.contains(&1.0));
}

/// Random token lists over a mixed lexicon, 100 fixtures.
#[test]
fn permutation_and_duplication_invariance_on_random_fixtures() {
    let words: Vec<String> = (0..40).map(|i| format!("w{i}")).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let rows: Vec<(&str, f64)> = words.iter().map(|w| (w.as_str(), rng.random_range(1.0..9.0))).collect();
    let lex = lexicon(&rows);
    for _ in 0..100 {
        let len = rng.random_range(1..200);
        let mut tokens: Vec<&str> = (0..len).map(|_| words[rng.random_range(0..words.len())].as_str()).collect();
        let base = score_talk(&tokens, &lex).score;
        tokens.shuffle(&mut rng);
        assert_eq!(score_talk(&tokens, &lex).score, base);
        let doubled: Vec<&str> = tokens.iter().chain(tokens.iter()).copied().collect();
        assert_eq!(score_talk(&doubled, &lex).score, base);
    }
}

proptest! {
    #[test]
    fn normalization_is_monotone(raw in prop::collection::vec(prop::option::of(1.0f64..9.0), 1..30)) {
        use talkgraph::sentiment::SentimentScore;
        let scores: Vec<SentimentScore> = raw
            .iter()
            .map(|s| SentimentScore { score: *s, matched_tokens: 1, total_tokens: 1, coverage: 1.0 })
            .collect();
        match normalize_scores(&scores) {
            Ok(norm) => {
                for (a, na) in raw.iter().zip(&norm) {
                    prop_assert_eq!(a.is_some(), na.is_some());
                    for (b, nb) in raw.iter().zip(&norm) {
                        if let (Some(a), Some(b), Some(na), Some(nb)) = (a, b, na, nb) {
                            if a < b { prop_assert!(na <= nb); }
                        }
                    }
                }
            }
            Err(_) => prop_assert!(raw.iter().all(Option::is_none)),
        }
    }
}
