//! Document ingestion, preprocessing, tokenization, and corpus filters.
//!
//! A corpus is a flat list of [`Document`]s read from JSON-Lines or CSV.
//! Preprocessing strips URLs and replaces @-handles before tokenization;
//! the filter drops retweets, exact duplicate texts, and documents below
//! the configured word-count threshold.

use std::collections::{BTreeMap, HashSet};
use std::io::{BufRead, Write};
use std::path::Path;

use chrono::{DateTime, NaiveDateTime, Utc};
use once_cell::sync::Lazy;
use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_segmentation::UnicodeSegmentation;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("failed to read corpus: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("duplicate document id {0:?}")]
    DuplicateId(String),
    #[error("unrecognized corpus format for {0} (expected .jsonl or .csv)")]
    UnknownFormat(String),
}

/// Party affiliation of the posting account.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Party {
    Democrat,
    Republican,
    Other,
}

impl Party {
    pub fn as_str(&self) -> &'static str {
        match self {
            Party::Democrat => "Democrat",
            Party::Republican => "Republican",
            Party::Other => "Other",
        }
    }
}

impl std::str::FromStr for Party {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Democrat" => Ok(Party::Democrat),
            "Republican" => Ok(Party::Republican),
            "Other" => Ok(Party::Other),
            other => Err(format!("unknown party {other:?}")),
        }
    }
}

impl std::fmt::Display for Party {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Kind of text unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DocumentKind {
    Tweet,
    Article,
}

impl DocumentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            DocumentKind::Tweet => "tweet",
            DocumentKind::Article => "article",
        }
    }
}

impl std::str::FromStr for DocumentKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tweet" => Ok(DocumentKind::Tweet),
            "article" => Ok(DocumentKind::Article),
            other => Err(format!("unknown document kind {other:?}")),
        }
    }
}

/// One text unit (tweet or article) with its account and link metadata.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub created_at: DateTime<Utc>,
    pub account_id: String,
    pub party: Party,
    pub is_retweet: bool,
    pub kind: DocumentKind,
    #[serde(default)]
    pub links: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub external_scores: BTreeMap<String, f64>,
}

impl Document {
    /// Ensure `links` contains every URL present in the text.
    ///
    /// For tweets the URLs extracted from the raw text come first, followed
    /// by any explicitly supplied links not already present. Articles keep
    /// their explicit links untouched.
    pub fn normalize_links(&mut self) {
        if self.kind != DocumentKind::Tweet {
            return;
        }
        let mut links = extract_links(&self.text);
        let mut seen: HashSet<String> = links.iter().cloned().collect();
        let supplied = std::mem::take(&mut self.links);
        for url in supplied {
            if seen.insert(url.clone()) {
                links.push(url);
            }
        }
        self.links = links;
    }
}

/// Token view of a document, plus the two length measures used by the
/// length-correction models.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TokenizedDocument {
    pub doc_id: String,
    pub tokens: Vec<String>,
    /// Characters of the preprocessed text (before tokenization).
    pub char_length: usize,
    /// Number of tokens.
    pub word_length: usize,
}

impl TokenizedDocument {
    pub fn from_document(doc: &Document) -> Self {
        let cleaned = preprocess(&doc.text);
        let tokens = tokenize(&cleaned);
        TokenizedDocument {
            doc_id: doc.id.clone(),
            char_length: cleaned.chars().count(),
            word_length: tokens.len(),
            tokens,
        }
    }
}

static URL_RE: Lazy<Regex> =
    Lazy::new(|| Regex::new(r"https?://[^\s]+").expect("static regex"));
static HANDLE_RE: Lazy<Regex> =
    Lazy::new(|| Regex::new(r"@\w+").expect("static regex"));

/// Remove URLs and replace every @-handle with the literal token "user".
///
/// Idempotent: a second pass finds nothing left to rewrite.
pub fn preprocess(text: &str) -> String {
    let without_urls = URL_RE.replace_all(text, "");
    let replaced = HANDLE_RE.replace_all(&without_urls, "user");
    // Collapse whitespace runs left behind by URL removal.
    let mut out = String::with_capacity(replaced.len());
    let mut last_space = false;
    for ch in replaced.trim().chars() {
        if ch.is_whitespace() {
            if !last_space {
                out.push(' ');
            }
            last_space = true;
        } else {
            out.push(ch);
            last_space = false;
        }
    }
    out
}

/// Split preprocessed text into lowercase word tokens.
///
/// Unicode word segmentation, punctuation dropped, no stopword removal
/// and no stemming.
pub fn tokenize(text: &str) -> Vec<String> {
    text.unicode_words().map(|w| w.to_lowercase()).collect()
}

/// Extract every http/https URL substring in order of appearance.
/// Duplicates are preserved.
pub fn extract_links(text: &str) -> Vec<String> {
    URL_RE
        .find_iter(text)
        .map(|m| m.as_str().trim_end_matches(|c: char| ")],.;!?'\"".contains(c)).to_string())
        .collect()
}

/// How the minimum word count is compared during filtering.
///
/// Tweets keep documents with *more than* `min_words` words; articles keep
/// documents with *at least* `min_words` words.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LengthRule {
    StrictlyMore,
    AtLeast,
}

impl LengthRule {
    pub fn for_kind(kind: DocumentKind) -> Self {
        match kind {
            DocumentKind::Tweet => LengthRule::StrictlyMore,
            DocumentKind::Article => LengthRule::AtLeast,
        }
    }

    fn keeps(&self, word_length: usize, min_words: usize) -> bool {
        match self {
            LengthRule::StrictlyMore => word_length > min_words,
            LengthRule::AtLeast => word_length >= min_words,
        }
    }
}

/// Default word-count threshold per document kind.
pub fn default_min_words(kind: DocumentKind) -> usize {
    match kind {
        DocumentKind::Tweet => 10,
        DocumentKind::Article => 100,
    }
}

/// Apply the corpus filters: drop retweets, drop exact duplicate texts
/// (keeping the first by `(created_at, id)`), drop documents below the
/// word-count threshold, and return the survivors ordered by
/// `(created_at, id)`.
pub fn filter_corpus(docs: Vec<Document>, min_words: usize, rule: LengthRule) -> Vec<Document> {
    let mut docs = docs;
    docs.sort_by(|a, b| (a.created_at, &a.id).cmp(&(b.created_at, &b.id)));
    let mut seen_texts: HashSet<String> = HashSet::new();
    let mut kept = Vec::with_capacity(docs.len());
    for doc in docs {
        if doc.is_retweet {
            continue;
        }
        if !seen_texts.insert(doc.text.clone()) {
            continue;
        }
        let word_length = tokenize(&preprocess(&doc.text)).len();
        if !rule.keeps(word_length, min_words) {
            continue;
        }
        kept.push(doc);
    }
    kept
}

/// Parse a timestamp, accepting RFC 3339 and zone-less datetimes
/// (treated as UTC).
pub fn parse_timestamp(raw: &str) -> Result<DateTime<Utc>, String> {
    if let Ok(dt) = DateTime::parse_from_rfc3339(raw) {
        return Ok(dt.with_timezone(&Utc));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%d"] {
        if let Ok(naive) = NaiveDateTime::parse_from_str(raw, fmt) {
            return Ok(naive.and_utc());
        }
        if fmt == "%Y-%m-%d" {
            if let Ok(d) = chrono::NaiveDate::parse_from_str(raw, fmt) {
                return Ok(d.and_hms_opt(0, 0, 0).unwrap().and_utc());
            }
        }
    }
    Err(format!("unparseable timestamp {raw:?}"))
}

const CSV_HEADER: [&str; 9] = [
    "id",
    "text",
    "created_at",
    "account_id",
    "party",
    "is_retweet",
    "kind",
    "links",
    "external_scores",
];

/// Read a corpus from JSON-Lines (`.jsonl`) or CSV (`.csv`), dispatching
/// on the file extension. Document ids must be unique.
pub fn read_corpus(path: &Path) -> Result<Vec<Document>, CorpusError> {
    let name = path.to_string_lossy().to_string();
    if name.ends_with(".jsonl") || name.ends_with(".ndjson") || name.ends_with(".json") {
        read_jsonl(path)
    } else if name.ends_with(".csv") {
        read_csv(path)
    } else {
        Err(CorpusError::UnknownFormat(name))
    }
}

pub fn read_jsonl(path: &Path) -> Result<Vec<Document>, CorpusError> {
    let file = std::fs::File::open(path)?;
    let reader = std::io::BufReader::new(file);
    let mut docs = Vec::new();
    let mut ids = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut doc: Document =
            serde_json::from_str(&line).map_err(|e| CorpusError::Malformed {
                line: idx + 1,
                message: e.to_string(),
            })?;
        if !ids.insert(doc.id.clone()) {
            return Err(CorpusError::DuplicateId(doc.id));
        }
        doc.normalize_links();
        docs.push(doc);
    }
    Ok(docs)
}

pub fn write_jsonl(path: &Path, docs: &[Document]) -> Result<(), CorpusError> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    for doc in docs {
        serde_json::to_writer(&mut file, doc).map_err(|e| CorpusError::Malformed {
            line: 0,
            message: e.to_string(),
        })?;
        file.write_all(b"\n")?;
    }
    Ok(())
}

/// CSV corpus format. Header columns are fixed; `links` holds
/// space-separated URLs and `external_scores` holds `name=value` pairs
/// separated by `;`.
pub fn read_csv(path: &Path) -> Result<Vec<Document>, CorpusError> {
    let mut reader = csv::Reader::from_path(path).map_err(csv_io)?;
    {
        let headers = reader.headers().map_err(csv_io)?;
        let got: Vec<&str> = headers.iter().collect();
        if got != CSV_HEADER {
            return Err(CorpusError::Malformed {
                line: 1,
                message: format!("expected header {CSV_HEADER:?}, got {got:?}"),
            });
        }
    }
    let mut docs = Vec::new();
    let mut ids = HashSet::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(csv_io)?;
        let field = |i: usize| record.get(i).unwrap_or("").to_string();
        let malformed = |message: String| CorpusError::Malformed { line: idx + 2, message };
        let created_at = parse_timestamp(&field(2)).map_err(malformed)?;
        let party: Party = field(4).parse().map_err(malformed)?;
        let kind: DocumentKind = field(6).parse().map_err(malformed)?;
        let is_retweet = matches!(field(5).as_str(), "true" | "1");
        let links: Vec<String> = field(7)
            .split_whitespace()
            .map(|s| s.to_string())
            .collect();
        let mut external_scores = BTreeMap::new();
        let raw_scores = field(8);
        for pair in raw_scores.split(';').filter(|p| !p.trim().is_empty()) {
            let (name, value) = pair
                .split_once('=')
                .ok_or_else(|| CorpusError::Malformed {
                    line: idx + 2,
                    message: format!("bad external_scores entry {pair:?}"),
                })?;
            let value: f64 = value.parse().map_err(|e| CorpusError::Malformed {
                line: idx + 2,
                message: format!("bad external score value {value:?}: {e}"),
            })?;
            external_scores.insert(name.to_string(), value);
        }
        let mut doc = Document {
            id: field(0),
            text: field(1),
            created_at,
            account_id: field(3),
            party,
            is_retweet,
            kind,
            links,
            external_scores,
        };
        if !ids.insert(doc.id.clone()) {
            return Err(CorpusError::DuplicateId(doc.id));
        }
        doc.normalize_links();
        docs.push(doc);
    }
    Ok(docs)
}

pub fn write_csv(path: &Path, docs: &[Document]) -> Result<(), CorpusError> {
    let mut writer = csv::Writer::from_path(path).map_err(csv_io)?;
    writer.write_record(CSV_HEADER).map_err(csv_io)?;
    for doc in docs {
        let scores = doc
            .external_scores
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(";");
        writer
            .write_record([
                doc.id.as_str(),
                doc.text.as_str(),
                &doc.created_at.to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
                doc.account_id.as_str(),
                doc.party.as_str(),
                if doc.is_retweet { "true" } else { "false" },
                doc.kind.as_str(),
                &doc.links.join(" "),
                &scores,
            ])
            .map_err(csv_io)?;
    }
    writer.flush()?;
    Ok(())
}

fn csv_io(err: csv::Error) -> CorpusError {
    CorpusError::Malformed { line: 0, message: err.to_string() }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(id: &str, text: &str, created: &str) -> Document {
        Document {
            id: id.to_string(),
            text: text.to_string(),
            created_at: parse_timestamp(created).unwrap(),
            account_id: "acc1".to_string(),
            party: Party::Democrat,
            is_retweet: false,
            kind: DocumentKind::Tweet,
            links: vec![],
            external_scores: BTreeMap::new(),
        }
    }

    #[test]
    fn preprocess_removes_urls_and_rewrites_handles() {
        assert_eq!(preprocess("I believe @POTUS https://t.co/x"), "I believe user");
        assert_eq!(preprocess(""), "");
        assert_eq!(preprocess("facts matter"), "facts matter");
    }

    #[test]
    fn preprocess_is_idempotent() {
        for text in [
            "I believe @POTUS https://t.co/x",
            "mixed @a text https://b.co end",
            "plain",
        ] {
            let once = preprocess(text);
            assert_eq!(preprocess(&once), once);
        }
    }

    #[test]
    fn tokenize_lowercases_and_drops_punctuation() {
        assert_eq!(tokenize("Facts Matter!"), vec!["facts", "matter"]);
        assert_eq!(tokenize("of course"), vec!["of", "course"]);
        assert!(tokenize("").is_empty());
    }

    #[test]
    fn tokenize_after_preprocess_emits_no_urls_or_handles() {
        let tokens = tokenize(&preprocess("see @user123 at https://example.com/x?q=1 now"));
        assert!(tokens.iter().all(|t| !t.contains("http") && !t.contains('@')));
    }

    #[test]
    fn extract_links_in_order_with_duplicates() {
        assert_eq!(
            extract_links("see https://a.com and https://b.org/x"),
            vec!["https://a.com", "https://b.org/x"]
        );
        assert!(extract_links("no links").is_empty());
        assert_eq!(extract_links("https://a.com https://a.com").len(), 2);
    }

    #[test]
    fn filter_removes_duplicates_keeping_first() {
        let text = "one two three four five six seven eight nine ten eleven";
        let a = doc("b", text, "2020-01-02T00:00:00Z");
        let b = doc("a", text, "2020-01-01T00:00:00Z");
        let kept = filter_corpus(vec![a, b], 10, LengthRule::StrictlyMore);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].id, "a");
    }

    #[test]
    fn filter_min_words_is_strict_for_tweets() {
        let ten = "w1 w2 w3 w4 w5 w6 w7 w8 w9 w10";
        let eleven = "w1 w2 w3 w4 w5 w6 w7 w8 w9 w10 w11";
        let kept = filter_corpus(
            vec![doc("a", ten, "2020-01-01T00:00:00Z"), doc("b", eleven, "2020-01-01T00:00:00Z")],
            10,
            LengthRule::StrictlyMore,
        );
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].id, "b");
    }

    #[test]
    fn filter_at_least_rule_for_articles() {
        let hundred = vec!["w"; 100].join(" ");
        let ninety_nine = vec!["w"; 99].join(" ");
        let mut a = doc("a", &hundred, "2020-01-01T00:00:00Z");
        a.kind = DocumentKind::Article;
        let mut b = doc("b", &ninety_nine, "2020-01-02T00:00:00Z");
        b.kind = DocumentKind::Article;
        // identical repeated tokens collide as duplicate texts, texts differ here
        let kept = filter_corpus(vec![a, b], 100, LengthRule::AtLeast);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].id, "a");
    }

    #[test]
    fn filter_drops_retweets() {
        let mut d = doc("a", "one two three four five six seven eight nine ten eleven", "2020-01-01T00:00:00Z");
        d.is_retweet = true;
        assert!(filter_corpus(vec![d], 10, LengthRule::StrictlyMore).is_empty());
    }

    #[test]
    fn filter_output_sorted_by_created_then_id() {
        let a = doc("z", "a b c d e f g h i j k l", "2020-01-01T00:00:00Z");
        let b = doc("y", "m n o p q r s t u v w x", "2020-01-01T00:00:00Z");
        let c = doc("x", "aa bb cc dd ee ff gg hh ii jj kk ll", "2019-12-31T00:00:00Z");
        let kept = filter_corpus(vec![a, b, c], 10, LengthRule::StrictlyMore);
        let ids: Vec<&str> = kept.iter().map(|d| d.id.as_str()).collect();
        assert_eq!(ids, vec!["x", "y", "z"]);
    }

    #[test]
    fn timestamp_without_zone_is_utc() {
        let dt = parse_timestamp("2020-05-01T12:30:00").unwrap();
        assert_eq!(dt.to_rfc3339(), "2020-05-01T12:30:00+00:00");
        assert!(parse_timestamp("not a date").is_err());
    }

    #[test]
    fn tweet_links_are_extracted_on_ingest() {
        let mut d = doc("a", "see https://news.example/a", "2020-01-01T00:00:00Z");
        d.links = vec!["https://supplied.example/b".to_string()];
        d.normalize_links();
        assert_eq!(
            d.links,
            vec!["https://news.example/a", "https://supplied.example/b"]
        );
    }

    #[test]
    fn jsonl_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.jsonl");
        let mut d = doc("a", "hello https://x.example world", "2020-01-01T00:00:00Z");
        d.external_scores.insert("neg_sentiment".to_string(), 0.25);
        write_jsonl(&path, &[d.clone()]).unwrap();
        let back = read_jsonl(&path).unwrap();
        assert_eq!(back.len(), 1);
        assert_eq!(back[0].id, d.id);
        assert_eq!(back[0].links, vec!["https://x.example"]);
        assert_eq!(back[0].external_scores["neg_sentiment"], 0.25);
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.csv");
        let mut d = doc("a", "hello, \"quoted\" world", "2020-01-01T00:00:00Z");
        d.links = vec!["https://x.example/a".to_string()];
        d.external_scores.insert("s".to_string(), -1.5);
        write_csv(&path, &[d.clone()]).unwrap();
        let back = read_csv(&path).unwrap();
        assert_eq!(back[0].text, d.text);
        assert_eq!(back[0].links, d.links);
        assert_eq!(back[0].external_scores["s"], -1.5);
    }

    #[test]
    fn duplicate_ids_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.jsonl");
        let d = doc("a", "text one", "2020-01-01T00:00:00Z");
        write_jsonl(&path, &[d.clone(), d]).unwrap();
        assert!(matches!(read_jsonl(&path), Err(CorpusError::DuplicateId(_))));
    }
}
