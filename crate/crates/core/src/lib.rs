//! Corpus analytics for honesty-component measurement in political text.
//!
//! The crate covers the full measurement pipeline: ingesting archived
//! document collections, scoring them against belief-speaking and
//! truth-seeking keyword dictionaries via embedding similarity, computing
//! keyness statistics, joining shared links against domain-trustworthiness
//! databases, and the regression / validation / robustness statistics that
//! sit on top.

pub mod corpus;
pub mod embeddings;
pub mod keyness;
pub mod numeric;
pub mod scoring;
pub mod stats;
pub mod trust;

pub use corpus::{Document, DocumentKind, Party, TokenizedDocument};
pub use embeddings::{EmbeddingTable, Vector};
pub use scoring::{ComponentName, Dictionary, HonestyScores, LengthModel};
pub use stats::{MediationResult, RegressionResult, TimeSeriesPoint};
pub use trust::{DomainRating, LinkRecord, RedirectCache};
