//! Honesty dictionaries and the similarity scores computed against them.
//!
//! A document's raw belief-speaking / truth-seeking score is the cosine
//! similarity between its mean token embedding and the dictionary's mean
//! keyword embedding. A linear model of score on document length is then
//! fitted per component and its prediction subtracted, yielding the
//! length-corrected scores used downstream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::tokenize;
use crate::embeddings::{cosine, mean_embedding, EmbeddingError, EmbeddingTable, Vector};
use crate::numeric::quantile;

const BELIEF_SPEAKING_KEYWORDS: &str = include_str!("../data/belief_speaking.txt");
const TRUTH_SEEKING_KEYWORDS: &str = include_str!("../data/truth_seeking.txt");

#[derive(Debug, Error)]
pub enum ScoringError {
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error("dictionary must be nonempty with unique keywords")]
    InvalidDictionary,
    #[error("remove_count {remove_count} out of range for {len} keywords")]
    RemoveCountOutOfRange { remove_count: usize, len: usize },
    #[error("need at least 2 (length, score) pairs, got {0}")]
    InsufficientPairs(usize),
    #[error("empty score list")]
    EmptyScores,
}

/// Name of an honesty component dictionary.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ComponentName {
    BeliefSpeaking,
    TruthSeeking,
    Custom(String),
}

impl std::fmt::Display for ComponentName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ComponentName::BeliefSpeaking => f.write_str("belief_speaking"),
            ComponentName::TruthSeeking => f.write_str("truth_seeking"),
            ComponentName::Custom(name) => f.write_str(name),
        }
    }
}

/// A keyword dictionary. Keywords may be multiword phrases; phrases are
/// embedded as the mean of their constituent token vectors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Dictionary {
    pub name: ComponentName,
    pub keywords: Vec<String>,
}

impl Dictionary {
    pub fn new(name: ComponentName, keywords: Vec<String>) -> Result<Self, ScoringError> {
        if keywords.is_empty() {
            return Err(ScoringError::InvalidDictionary);
        }
        let mut seen = std::collections::HashSet::new();
        for kw in &keywords {
            if kw.trim().is_empty() || !seen.insert(kw.as_str()) {
                return Err(ScoringError::InvalidDictionary);
            }
        }
        Ok(Dictionary { name, keywords })
    }

    /// The shipped belief-speaking dictionary (37 keywords).
    pub fn belief_speaking() -> Self {
        Dictionary::parse(ComponentName::BeliefSpeaking, BELIEF_SPEAKING_KEYWORDS)
            .expect("shipped dictionary is valid")
    }

    /// The shipped truth-seeking dictionary (37 keywords).
    pub fn truth_seeking() -> Self {
        Dictionary::parse(ComponentName::TruthSeeking, TRUTH_SEEKING_KEYWORDS)
            .expect("shipped dictionary is valid")
    }

    /// Parse a newline-separated keyword list (UTF-8, `#` comments allowed).
    pub fn parse(name: ComponentName, contents: &str) -> Result<Self, ScoringError> {
        let keywords: Vec<String> = contents
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| l.to_string())
            .collect();
        Dictionary::new(name, keywords)
    }

    pub fn load(name: ComponentName, path: &std::path::Path) -> Result<Self, ScoringError> {
        let contents = std::fs::read_to_string(path)
            .map_err(|e| ScoringError::Embedding(EmbeddingError::Io(e)))?;
        Dictionary::parse(name, &contents)
    }

    /// All constituent tokens of all keywords, in keyword order.
    pub fn constituent_tokens(&self) -> Vec<String> {
        self.keywords.iter().flat_map(|kw| tokenize(kw)).collect()
    }

    pub fn len(&self) -> usize {
        self.keywords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keywords.is_empty()
    }
}

/// Per-document raw and length-corrected similarity scores.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HonestyScores {
    pub doc_id: String,
    pub d_b: f64,
    pub d_t: f64,
    pub d_b_corr: f64,
    pub d_t_corr: f64,
}

/// Which length measure a length model was fitted on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LengthKind {
    Characters,
    Words,
}

/// Least-squares fit of raw score on document length.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LengthModel {
    pub component: ComponentName,
    pub slope: f64,
    pub intercept: f64,
    pub length_kind: LengthKind,
    /// Set when every length in the fitting sample was identical; the
    /// model then degrades to the mean score.
    pub degenerate: bool,
}

/// Mean embedding over all constituent tokens of all keywords.
///
/// Multiword keywords contribute one vector per constituent token, so a
/// document made of exactly the dictionary's tokens has an identical mean
/// embedding. Out-of-vocabulary tokens are skipped.
pub fn dictionary_embedding(
    dict: &Dictionary,
    table: &EmbeddingTable,
) -> Result<Vector, ScoringError> {
    let tokens = dict.constituent_tokens();
    Ok(mean_embedding(&tokens, table)?.vector)
}

/// DDR score: cosine between the document's mean token embedding and a
/// dictionary embedding. A document with zero in-vocabulary tokens is
/// unscorable, not zero.
pub fn score_document(
    tokens: &[String],
    dict_vec: &Vector,
    table: &EmbeddingTable,
) -> Result<f64, ScoringError> {
    let doc = mean_embedding(tokens, table)?;
    Ok(cosine(&doc.vector, dict_vec)?)
}

/// Fit the linear length-correction model by ordinary least squares.
///
/// All-equal lengths degrade to slope 0 / intercept = mean score with the
/// `degenerate` flag set.
pub fn fit_length_correction(
    component: ComponentName,
    pairs: &[(f64, f64)],
    length_kind: LengthKind,
) -> Result<LengthModel, ScoringError> {
    if pairs.len() < 2 {
        return Err(ScoringError::InsufficientPairs(pairs.len()));
    }
    let n = pairs.len() as f64;
    let mean_len = pairs.iter().map(|(l, _)| l).sum::<f64>() / n;
    let mean_score = pairs.iter().map(|(_, s)| s).sum::<f64>() / n;
    let sxx: f64 = pairs.iter().map(|(l, _)| (l - mean_len) * (l - mean_len)).sum();
    if sxx == 0.0 {
        return Ok(LengthModel {
            component,
            slope: 0.0,
            intercept: mean_score,
            length_kind,
            degenerate: true,
        });
    }
    let sxy: f64 = pairs
        .iter()
        .map(|(l, s)| (l - mean_len) * (s - mean_score))
        .sum();
    let slope = sxy / sxx;
    Ok(LengthModel {
        component,
        slope,
        intercept: mean_score - slope * mean_len,
        length_kind,
        degenerate: false,
    })
}

/// Length-corrected score: the model's prediction subtracted from the raw
/// score.
pub fn apply_length_correction(score: f64, length: f64, model: &LengthModel) -> f64 {
    score - (model.intercept + model.slope * length)
}

/// Quantile-based honesty label for a document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HonestyLabel {
    Belief,
    Truth,
    Neither,
}

impl HonestyLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            HonestyLabel::Belief => "belief",
            HonestyLabel::Truth => "truth",
            HonestyLabel::Neither => "neither",
        }
    }
}

/// Label each document by whether its corrected scores sit in the top
/// `top_fraction` of each component's distribution.
///
/// Ties at the threshold are included. A document above both thresholds
/// takes the component with the larger similarity (belief on an exact
/// tie).
pub fn quantile_labels(
    scores_b: &[f64],
    scores_t: &[f64],
    top_fraction: f64,
) -> Result<Vec<HonestyLabel>, ScoringError> {
    if scores_b.is_empty() || scores_t.is_empty() || scores_b.len() != scores_t.len() {
        return Err(ScoringError::EmptyScores);
    }
    assert!(
        top_fraction > 0.0 && top_fraction < 1.0,
        "top_fraction must be in (0, 1)"
    );
    let thr_b = quantile(scores_b, 1.0 - top_fraction);
    let thr_t = quantile(scores_t, 1.0 - top_fraction);
    Ok(scores_b
        .iter()
        .zip(scores_t)
        .map(|(&b, &t)| match (b >= thr_b, t >= thr_t) {
            (true, true) => {
                if b >= t {
                    HonestyLabel::Belief
                } else {
                    HonestyLabel::Truth
                }
            }
            (true, false) => HonestyLabel::Belief,
            (false, true) => HonestyLabel::Truth,
            (false, false) => HonestyLabel::Neither,
        })
        .collect())
}

/// Remove `remove_count` keywords uniformly at random, deterministically
/// per seed. The surviving keywords keep their original order.
pub fn perturb_dictionary(
    dict: &Dictionary,
    remove_count: usize,
    seed: u64,
) -> Result<Dictionary, ScoringError> {
    let len = dict.keywords.len();
    if remove_count == 0 || remove_count >= len {
        return Err(ScoringError::RemoveCountOutOfRange { remove_count, len });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let removed: std::collections::HashSet<usize> =
        rand::seq::index::sample(&mut rng, len, remove_count)
            .into_iter()
            .collect();
    let keywords: Vec<String> = dict
        .keywords
        .iter()
        .enumerate()
        .filter(|(i, _)| !removed.contains(i))
        .map(|(_, kw)| kw.clone())
        .collect();
    Dictionary::new(dict.name.clone(), keywords)
}
