//! Link normalization, redirect resolution, and joins against
//! domain-trustworthiness databases.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{BufRead, Write};
use std::path::Path;

use chrono::{DateTime, Datelike, Utc};
use once_cell::sync::Lazy;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use url::Url;

use crate::corpus::{Document, Party};

#[derive(Debug, Error)]
pub enum TrustError {
    #[error("unparseable URL {0:?}")]
    UnparseableUrl(String),
    #[error("network error fetching {url}: {message}")]
    Network { url: String, message: String },
    #[error("redirect chain exceeded {max_hops} hops starting from {url}")]
    TooManyRedirects { url: String, max_hops: usize },
    #[error("offline and {0:?} not in redirect cache")]
    OfflineMiss(String),
    #[error("score {0} outside [0, 100]")]
    ScoreOutOfRange(f64),
    #[error("ratings file: {0}")]
    BadRatings(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

// ---------------------------------------------------------------------------
// Registrable domains

const SUFFIX_SNAPSHOT: &str = include_str!("../data/public_suffix_snapshot.dat");

static SUFFIX_RULES: Lazy<HashSet<&'static str>> = Lazy::new(|| {
    SUFFIX_SNAPSHOT
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with("//"))
        .collect()
});

/// Longest public suffix of `host` under the bundled snapshot.
///
/// Multi-level suffixes come from the snapshot; everything else falls back
/// to the default single-label rule.
fn public_suffix_len(labels: &[&str]) -> usize {
    let mut best = 1; // default rule: the TLD itself
    for take in 2..=labels.len() {
        let candidate = labels[labels.len() - take..].join(".");
        if SUFFIX_RULES.contains(candidate.as_str()) {
            best = take;
        }
    }
    best
}

/// Lowercased registrable domain of a URL: the public suffix plus one
/// label, with any leading `www.` stripped. Accepts bare domains so the
/// operation is idempotent on its own output.
pub fn normalize_domain(raw: &str) -> Result<String, TrustError> {
    let parsed = Url::parse(raw)
        .or_else(|_| Url::parse(&format!("http://{raw}")))
        .map_err(|_| TrustError::UnparseableUrl(raw.to_string()))?;
    let host = parsed
        .host_str()
        .ok_or_else(|| TrustError::UnparseableUrl(raw.to_string()))?
        .trim_end_matches('.')
        .to_lowercase();
    if host.is_empty() {
        return Err(TrustError::UnparseableUrl(raw.to_string()));
    }
    // IP literals pass through untouched
    if host.parse::<std::net::IpAddr>().is_ok() || host.starts_with('[') {
        return Ok(host);
    }
    let labels: Vec<&str> = host.split('.').collect();
    if labels.iter().any(|l| l.is_empty()) {
        return Err(TrustError::UnparseableUrl(raw.to_string()));
    }
    if labels.len() < 2 {
        return Err(TrustError::UnparseableUrl(raw.to_string()));
    }
    let suffix_len = public_suffix_len(&labels);
    if suffix_len >= labels.len() {
        // the host itself is a public suffix; nothing registrable below it
        return Err(TrustError::UnparseableUrl(raw.to_string()));
    }
    let registrable = labels[labels.len() - suffix_len - 1..].join(".");
    Ok(registrable
        .strip_prefix("www.")
        .filter(|rest| rest.contains('.'))
        .map(str::to_string)
        .unwrap_or(registrable))
}

// ---------------------------------------------------------------------------
// Redirect resolution

/// One resolved entry in the redirect cache.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CacheEntry {
    pub url: String,
    pub resolved: String,
    pub fetched_at: DateTime<Utc>,
}

/// Append-only map from original URL to its final resolved URL,
/// persisted as JSON-Lines between runs.
#[derive(Debug, Default)]
pub struct RedirectCache {
    entries: HashMap<String, CacheEntry>,
    fresh: Vec<CacheEntry>,
}

impl RedirectCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn load(path: &Path) -> Result<Self, TrustError> {
        let mut cache = RedirectCache::new();
        if !path.exists() {
            return Ok(cache);
        }
        let reader = std::io::BufReader::new(std::fs::File::open(path)?);
        for line in reader.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let entry: CacheEntry = serde_json::from_str(&line)
                .map_err(|e| TrustError::BadRatings(format!("cache line: {e}")))?;
            cache.entries.insert(entry.url.clone(), entry);
        }
        Ok(cache)
    }

    pub fn get(&self, url: &str) -> Option<&str> {
        self.entries.get(url).map(|e| e.resolved.as_str())
    }

    pub fn insert(&mut self, url: String, resolved: String) {
        let entry = CacheEntry { url: url.clone(), resolved, fetched_at: Utc::now() };
        if self.entries.insert(url, entry.clone()).is_none() {
            self.fresh.push(entry);
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Append entries added since load to the persistent file.
    pub fn append_fresh(&mut self, path: &Path) -> Result<usize, TrustError> {
        if self.fresh.is_empty() {
            return Ok(0);
        }
        let mut file = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)?;
        let n = self.fresh.len();
        for entry in self.fresh.drain(..) {
            serde_json::to_writer(&mut file, &entry)
                .map_err(|e| TrustError::BadRatings(e.to_string()))?;
            file.write_all(b"\n")?;
        }
        Ok(n)
    }
}

/// One HTTP hop: returns the redirect target if the URL answers with a
/// 3xx, `None` when it is final.
pub trait RedirectFetcher {
    fn fetch_location(&self, url: &str) -> Result<Option<String>, TrustError>;
}

/// Follows redirect chains through the cache and an optional fetcher.
///
/// Without a fetcher the resolver is offline: cache hits resolve, misses
/// surface as [`TrustError::OfflineMiss`]. Failures never drop a link —
/// callers keep the record with the resolution marked absent.
pub struct Resolver<'a> {
    pub cache: &'a mut RedirectCache,
    pub fetcher: Option<&'a dyn RedirectFetcher>,
    pub max_hops: usize,
}

impl<'a> Resolver<'a> {
    pub fn offline(cache: &'a mut RedirectCache) -> Self {
        Resolver { cache, fetcher: None, max_hops: 10 }
    }

    pub fn online(cache: &'a mut RedirectCache, fetcher: &'a dyn RedirectFetcher, max_hops: usize) -> Self {
        Resolver { cache, fetcher: Some(fetcher), max_hops }
    }

    pub fn resolve(&mut self, url: &str) -> Result<String, TrustError> {
        if let Some(hit) = self.cache.get(url) {
            return Ok(hit.to_string());
        }
        let Some(fetcher) = self.fetcher else {
            return Err(TrustError::OfflineMiss(url.to_string()));
        };
        let mut current = url.to_string();
        for _ in 0..self.max_hops {
            match fetcher.fetch_location(&current)? {
                Some(next) => {
                    // relative Location headers resolve against the hop
                    current = match Url::parse(&next) {
                        Ok(u) => u.to_string(),
                        Err(_) => Url::parse(&current)
                            .and_then(|base| base.join(&next))
                            .map(|u| u.to_string())
                            .map_err(|_| TrustError::UnparseableUrl(next.clone()))?,
                    };
                }
                None => {
                    self.cache.insert(url.to_string(), current.clone());
                    return Ok(current);
                }
            }
        }
        Err(TrustError::TooManyRedirects { url: url.to_string(), max_hops: self.max_hops })
    }
}

// ---------------------------------------------------------------------------
// Exclusions

/// Default exclusion set: social media platforms and search services.
pub const DEFAULT_EXCLUSIONS: [&str; 6] = [
    "twitter.com",
    "facebook.com",
    "youtube.com",
    "instagram.com",
    "google.com",
    "yahoo.com",
];

/// Set of registrable domains excluded from trust joins.
#[derive(Debug, Clone)]
pub struct ExclusionSet {
    domains: HashSet<String>,
}

impl Default for ExclusionSet {
    fn default() -> Self {
        ExclusionSet {
            domains: DEFAULT_EXCLUSIONS.iter().map(|d| d.to_string()).collect(),
        }
    }
}

impl ExclusionSet {
    pub fn from_domains(domains: impl IntoIterator<Item = String>) -> Self {
        ExclusionSet {
            domains: domains
                .into_iter()
                .map(|d| d.trim().to_lowercase())
                .filter(|d| !d.is_empty())
                .collect(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, TrustError> {
        let contents = std::fs::read_to_string(path)?;
        Ok(Self::from_domains(
            contents
                .lines()
                .map(|l| l.trim().to_string())
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        ))
    }

    pub fn is_excluded(&self, domain: &str) -> bool {
        self.domains.contains(&domain.to_lowercase())
    }
}

// ---------------------------------------------------------------------------
// Ratings

/// Per-domain trust record: a 0–100 trustworthiness score and/or 1–5
/// accuracy and 1–3 transparency scores.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DomainRating {
    pub domain: String,
    pub newsguard_score: Option<f64>,
    pub accuracy: Option<u8>,
    pub transparency: Option<u8>,
}

/// Derived labels for a rating. Each label is only present when the
/// fields it depends on exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TrustLabels {
    /// Score of 60 or higher. Below 60 is "not trustworthy".
    pub trustworthy: Option<bool>,
    /// Accuracy of 2 or lower, or transparency of 1.
    pub unreliable: Option<bool>,
}

/// Rescale a 0–100 score to `[0, 1]`.
pub fn rescale_score(score: f64) -> Result<f64, TrustError> {
    if !(0.0..=100.0).contains(&score) {
        return Err(TrustError::ScoreOutOfRange(score));
    }
    Ok(score / 100.0)
}

/// Derive the trustworthy / unreliable labels from a rating.
pub fn trust_labels(rating: &DomainRating) -> TrustLabels {
    let trustworthy = rating.newsguard_score.map(|s| s >= 60.0);
    let unreliable = match (rating.accuracy, rating.transparency) {
        (None, None) => None,
        (acc, tra) => Some(acc.is_some_and(|a| a <= 2) || tra.is_some_and(|t| t == 1)),
    };
    TrustLabels { trustworthy, unreliable }
}

/// Domain-keyed rating lookup loaded from CSV
/// (`domain,score,accuracy,transparency`; empty fields allowed).
#[derive(Debug, Clone, Default)]
pub struct RatingsTable {
    ratings: HashMap<String, DomainRating>,
}

impl RatingsTable {
    pub fn load(path: &Path) -> Result<Self, TrustError> {
        let mut reader = csv::ReaderBuilder::new()
            .flexible(true)
            .from_path(path)
            .map_err(|e| TrustError::BadRatings(e.to_string()))?;
        let mut ratings = HashMap::new();
        for (idx, record) in reader.records().enumerate() {
            let record = record.map_err(|e| TrustError::BadRatings(e.to_string()))?;
            let bad = |msg: String| TrustError::BadRatings(format!("row {}: {msg}", idx + 2));
            let raw_domain = record
                .get(0)
                .ok_or_else(|| bad("missing domain".to_string()))?;
            let domain = normalize_domain(raw_domain)
                .map_err(|e| bad(e.to_string()))?;
            let parse_opt = |i: usize| -> Option<&str> {
                record.get(i).map(str::trim).filter(|s| !s.is_empty())
            };
            let newsguard_score = match parse_opt(1) {
                Some(s) => {
                    let v: f64 = s.parse().map_err(|e| bad(format!("score: {e}")))?;
                    Some(rescale_score(v).map(|_| v).map_err(|e| bad(e.to_string()))?)
                }
                None => None,
            };
            let accuracy = match parse_opt(2) {
                Some(s) => {
                    let v: u8 = s.parse().map_err(|e| bad(format!("accuracy: {e}")))?;
                    if !(1..=5).contains(&v) {
                        return Err(bad(format!("accuracy {v} outside 1..=5")));
                    }
                    Some(v)
                }
                None => None,
            };
            let transparency = match parse_opt(3) {
                Some(s) => {
                    let v: u8 = s.parse().map_err(|e| bad(format!("transparency: {e}")))?;
                    if !(1..=3).contains(&v) {
                        return Err(bad(format!("transparency {v} outside 1..=3")));
                    }
                    Some(v)
                }
                None => None,
            };
            if newsguard_score.is_none() && accuracy.is_none() && transparency.is_none() {
                return Err(bad("rating row with no rating fields".to_string()));
            }
            ratings.insert(
                domain.clone(),
                DomainRating { domain, newsguard_score, accuracy, transparency },
            );
        }
        Ok(RatingsTable { ratings })
    }

    pub fn from_ratings(ratings: impl IntoIterator<Item = DomainRating>) -> Self {
        RatingsTable {
            ratings: ratings.into_iter().map(|r| (r.domain.clone(), r)).collect(),
        }
    }

    pub fn get(&self, domain: &str) -> Option<&DomainRating> {
        self.ratings.get(domain)
    }

    pub fn len(&self) -> usize {
        self.ratings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ratings.is_empty()
    }
}

// ---------------------------------------------------------------------------
// Link records

/// One record per link occurrence, carrying the scores and party of the
/// source document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinkRecord {
    pub doc_id: String,
    pub original_url: String,
    pub resolved_url: Option<String>,
    /// Registrable domain; empty when the URL did not parse.
    pub domain: String,
    pub excluded: bool,
    pub rating: Option<DomainRating>,
    pub d_b_corr: f64,
    pub d_t_corr: f64,
    pub party: Party,
    pub created_at: DateTime<Utc>,
}

/// Scores a document must carry into link expansion.
#[derive(Debug, Clone, Copy)]
pub struct DocScores {
    pub d_b_corr: f64,
    pub d_t_corr: f64,
}

/// Expand scored documents so every record refers to a single link.
///
/// Link resolution is attempted through the resolver; failures keep the
/// record with `resolved_url` absent. Excluded domains are flagged and
/// never joined to a rating.
pub fn expand_to_links(
    docs: &[Document],
    scores: &HashMap<String, DocScores>,
    ratings: &RatingsTable,
    exclusions: &ExclusionSet,
    resolver: &mut Resolver<'_>,
) -> Vec<LinkRecord> {
    let mut records = Vec::new();
    for doc in docs {
        let Some(doc_scores) = scores.get(&doc.id) else {
            continue; // unscorable documents contribute no link records
        };
        for url in &doc.links {
            let resolved_url = resolver.resolve(url).ok();
            let effective = resolved_url.as_deref().unwrap_or(url);
            let domain = normalize_domain(effective).unwrap_or_default();
            let excluded = !domain.is_empty() && exclusions.is_excluded(&domain);
            let rating = if excluded || domain.is_empty() {
                None
            } else {
                ratings.get(&domain).cloned()
            };
            records.push(LinkRecord {
                doc_id: doc.id.clone(),
                original_url: url.clone(),
                resolved_url,
                domain,
                excluded,
                rating,
                d_b_corr: doc_scores.d_b_corr,
                d_t_corr: doc_scores.d_t_corr,
                party: doc.party,
                created_at: doc.created_at,
            });
        }
    }
    records
}

/// Calendar month used as a timeline bucket.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct YearMonth {
    pub year: i32,
    pub month: u32,
}

impl YearMonth {
    pub fn of(ts: &DateTime<Utc>) -> Self {
        YearMonth { year: ts.year(), month: ts.month() }
    }

    pub fn next(&self) -> Self {
        if self.month == 12 {
            YearMonth { year: self.year + 1, month: 1 }
        } else {
            YearMonth { year: self.year, month: self.month + 1 }
        }
    }

    pub fn prev(&self) -> Self {
        if self.month == 1 {
            YearMonth { year: self.year - 1, month: 12 }
        } else {
            YearMonth { year: self.year, month: self.month - 1 }
        }
    }
}

impl std::fmt::Display for YearMonth {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

/// Monthly share of non-excluded links whose domain has a rating.
/// Months without any non-excluded link yield no point.
pub fn coverage_share(records: &[LinkRecord]) -> BTreeMap<YearMonth, (usize, usize, f64)> {
    let mut by_month: BTreeMap<YearMonth, (usize, usize)> = BTreeMap::new();
    for record in records {
        if record.excluded {
            continue;
        }
        let entry = by_month.entry(YearMonth::of(&record.created_at)).or_insert((0, 0));
        entry.1 += 1;
        if record.rating.is_some() {
            entry.0 += 1;
        }
    }
    by_month
        .into_iter()
        .map(|(month, (covered, total))| {
            (month, (covered, total, covered as f64 / total as f64))
        })
        .collect()
}

/// Outcome of article-level deduplication.
#[derive(Debug, Clone, Default)]
pub struct DedupOutcome {
    /// One record per unique article with a single party designation.
    pub kept: Vec<LinkRecord>,
    /// Articles linked by members of both parties, reported separately
    /// and excluded from regression input.
    pub bipartisan: Vec<LinkRecord>,
    /// Extra copies dropped by the one-record-per-article rule.
    pub duplicates_removed: usize,
}

/// Keep one record per unique article URL and split off articles shared
/// by both parties. The first record (input order) represents its
/// article.
pub fn dedup_articles(records: Vec<LinkRecord>) -> DedupOutcome {
    let key_of = |r: &LinkRecord| {
        r.resolved_url.clone().unwrap_or_else(|| r.original_url.clone())
    };
    let mut parties: HashMap<String, HashSet<Party>> = HashMap::new();
    for record in &records {
        parties.entry(key_of(record)).or_default().insert(record.party);
    }
    let mut seen: HashSet<String> = HashSet::new();
    let mut outcome = DedupOutcome::default();
    for record in records {
        let key = key_of(&record);
        if !seen.insert(key.clone()) {
            outcome.duplicates_removed += 1;
            continue;
        }
        let bipartisan = parties[&key]
            .iter()
            .filter(|p| matches!(p, Party::Democrat | Party::Republican))
            .count()
            > 1;
        if bipartisan {
            outcome.bipartisan.push(record);
        } else {
            outcome.kept.push(record);
        }
    }
    outcome
}
