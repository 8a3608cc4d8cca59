//! Plain-text word-vector files and the vector arithmetic behind DDR
//! scoring.
//!
//! Vectors are stored as `f32` to keep multi-million-token tables within
//! memory; all similarity arithmetic runs in `f64`.

use std::collections::HashMap;
use std::io::BufRead;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("failed to read vector file: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: expected {expected} components, found {found}")]
    InconsistentDimension { line: usize, expected: usize, found: usize },
    #[error("no valid records in vector file")]
    Empty,
    #[error("no tokens in vocabulary")]
    NoTokensInVocabulary,
    #[error("zero-norm vector")]
    ZeroNormVector,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
}

/// Dense vector with finite components.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector {
    pub components: Vec<f64>,
}

impl Vector {
    pub fn new(components: Vec<f64>) -> Self {
        debug_assert!(components.iter().all(|c| c.is_finite()));
        Vector { components }
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.components.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

/// Token-to-vector map with a fixed dimension.
///
/// Tokens are stored lowercase and lookups are case-normalized. The table
/// is immutable after load and safe to share across threads.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    dim: usize,
    vectors: HashMap<String, Vec<f32>>,
    pub source_name: String,
}

/// Load statistics reported alongside a parsed table.
#[derive(Debug, Clone, Default)]
pub struct LoadReport {
    pub records: usize,
    pub malformed_lines: usize,
    pub duplicate_tokens: usize,
}

/// Result of averaging token embeddings: the mean vector and how many
/// tokens were found in the vocabulary.
#[derive(Debug, Clone)]
pub struct MeanEmbedding {
    pub vector: Vector,
    pub contributing: usize,
}

impl EmbeddingTable {
    pub fn from_vectors(
        source_name: impl Into<String>,
        entries: impl IntoIterator<Item = (String, Vec<f32>)>,
    ) -> Result<Self, EmbeddingError> {
        let mut dim = None;
        let mut vectors = HashMap::new();
        for (token, vec) in entries {
            let d = *dim.get_or_insert(vec.len());
            if vec.len() != d {
                return Err(EmbeddingError::DimensionMismatch(d, vec.len()));
            }
            vectors.entry(token.to_lowercase()).or_insert(vec);
        }
        let dim = dim.ok_or(EmbeddingError::Empty)?;
        Ok(EmbeddingTable { dim, vectors, source_name: source_name.into() })
    }

    /// Parse a plain-text vector file: an optional `count dim` header line,
    /// then one `token v1 .. vD` record per line. Duplicate tokens keep the
    /// first occurrence; lines with unparseable components are counted and
    /// skipped; a record with the wrong component count is an error.
    pub fn load(path: &Path, vocab_limit: Option<usize>) -> Result<(Self, LoadReport), EmbeddingError> {
        let file = std::fs::File::open(path)?;
        let reader = std::io::BufReader::new(file);
        let source_name = path
            .file_stem()
            .map(|s| s.to_string_lossy().to_string())
            .unwrap_or_else(|| "embeddings".to_string());

        let mut report = LoadReport::default();
        let mut dim: Option<usize> = None;
        let mut vectors: HashMap<String, Vec<f32>> = HashMap::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let token = parts.next().expect("nonempty line has a first field");
            let rest: Vec<&str> = parts.collect();
            if idx == 0 && rest.len() == 1 {
                // Header line "count dim": both fields parse as integers.
                if token.parse::<usize>().is_ok() && rest[0].parse::<usize>().is_ok() {
                    continue;
                }
            }
            if let Some(limit) = vocab_limit {
                if vectors.len() >= limit {
                    break;
                }
            }
            let expected = dim.unwrap_or(rest.len());
            if rest.len() != expected {
                return Err(EmbeddingError::InconsistentDimension {
                    line: idx + 1,
                    expected,
                    found: rest.len(),
                });
            }
            let mut components = Vec::with_capacity(rest.len());
            let mut ok = true;
            for value in &rest {
                match value.parse::<f32>() {
                    Ok(v) if v.is_finite() => components.push(v),
                    _ => {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok {
                report.malformed_lines += 1;
                continue;
            }
            dim = Some(expected);
            let token = token.to_lowercase();
            if vectors.contains_key(&token) {
                report.duplicate_tokens += 1;
            } else {
                vectors.insert(token, components);
            }
        }
        let dim = dim.ok_or(EmbeddingError::Empty)?;
        report.records = vectors.len();
        Ok((EmbeddingTable { dim, vectors, source_name }, report))
    }

    /// Write the table back out in the same plain-text format, tokens
    /// sorted, with a `count dim` header.
    pub fn save(&self, path: &Path) -> Result<(), EmbeddingError> {
        use std::io::Write;
        let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(file, "{} {}", self.vectors.len(), self.dim)?;
        let mut tokens: Vec<&String> = self.vectors.keys().collect();
        tokens.sort();
        for token in tokens {
            write!(file, "{token}")?;
            for c in &self.vectors[token] {
                write!(file, " {c}")?;
            }
            writeln!(file)?;
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.lookup(token).is_some()
    }

    pub fn lookup(&self, token: &str) -> Option<&[f32]> {
        if let Some(v) = self.vectors.get(token) {
            return Some(v);
        }
        self.vectors.get(&token.to_lowercase()).map(|v| v.as_slice())
    }
}

/// Arithmetic mean of the in-vocabulary token embeddings.
///
/// Out-of-vocabulary tokens are skipped; the number of contributing tokens
/// is returned alongside the vector. Errors when every token is
/// out-of-vocabulary.
pub fn mean_embedding(tokens: &[String], table: &EmbeddingTable) -> Result<MeanEmbedding, EmbeddingError> {
    let mut sum = vec![0.0f64; table.dim()];
    let mut contributing = 0usize;
    for token in tokens {
        if let Some(vec) = table.lookup(token) {
            for (acc, v) in sum.iter_mut().zip(vec) {
                *acc += f64::from(*v);
            }
            contributing += 1;
        }
    }
    if contributing == 0 {
        return Err(EmbeddingError::NoTokensInVocabulary);
    }
    for acc in &mut sum {
        *acc /= contributing as f64;
    }
    Ok(MeanEmbedding { vector: Vector::new(sum), contributing })
}

/// Cosine similarity, clamped to `[-1, 1]` against rounding.
pub fn cosine(u: &Vector, v: &Vector) -> Result<f64, EmbeddingError> {
    if u.len() != v.len() {
        return Err(EmbeddingError::DimensionMismatch(u.len(), v.len()));
    }
    let mut dot = 0.0;
    let mut nu = 0.0;
    let mut nv = 0.0;
    for (a, b) in u.components.iter().zip(&v.components) {
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return Err(EmbeddingError::ZeroNormVector);
    }
    Ok((dot / (nu.sqrt() * nv.sqrt())).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn table2() -> EmbeddingTable {
        EmbeddingTable::from_vectors(
            "test",
            vec![
                ("a".to_string(), vec![1.0, 0.0]),
                ("b".to_string(), vec![0.0, 1.0]),
            ],
        )
        .unwrap()
    }

    fn toks(words: &[&str]) -> Vec<String> {
        words.iter().map(|w| w.to_string()).collect()
    }

    #[test]
    fn load_plain_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vecs.txt");
        std::fs::write(&path, "a 1 0\nb 0 1\n").unwrap();
        let (table, report) = EmbeddingTable::load(&path, None).unwrap();
        assert_eq!(table.dim(), 2);
        assert_eq!(table.len(), 2);
        assert_eq!(report.records, 2);
        assert_eq!(report.malformed_lines, 0);
    }

    #[test]
    fn load_with_header_is_identical() {
        let dir = tempfile::tempdir().unwrap();
        let plain = dir.path().join("plain.txt");
        let with_header = dir.path().join("header.txt");
        std::fs::write(&plain, "a 1 0\nb 0 1\n").unwrap();
        std::fs::write(&with_header, "2 2\na 1 0\nb 0 1\n").unwrap();
        let (t1, _) = EmbeddingTable::load(&plain, None).unwrap();
        let (t2, _) = EmbeddingTable::load(&with_header, None).unwrap();
        assert_eq!(t1.dim(), t2.dim());
        assert_eq!(t1.len(), t2.len());
        assert_eq!(t1.lookup("a"), t2.lookup("a"));
    }

    #[test]
    fn inconsistent_dimension_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.txt");
        std::fs::write(&path, "a 1 0\nb 0 1 7\n").unwrap();
        assert!(matches!(
            EmbeddingTable::load(&path, None),
            Err(EmbeddingError::InconsistentDimension { .. })
        ));
    }

    #[test]
    fn malformed_components_counted_and_skipped() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vecs.txt");
        std::fs::write(&path, "a 1 0\nb x 1\nc 0 1\n").unwrap();
        let (table, report) = EmbeddingTable::load(&path, None).unwrap();
        assert_eq!(table.len(), 2);
        assert_eq!(report.malformed_lines, 1);
    }

    #[test]
    fn duplicates_keep_first() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vecs.txt");
        std::fs::write(&path, "a 1 0\nA 9 9\n").unwrap();
        let (table, report) = EmbeddingTable::load(&path, None).unwrap();
        assert_eq!(report.duplicate_tokens, 1);
        assert_eq!(table.lookup("a").unwrap(), &[1.0, 0.0]);
    }

    #[test]
    fn empty_file_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.txt");
        std::fs::write(&path, "").unwrap();
        assert!(matches!(EmbeddingTable::load(&path, None), Err(EmbeddingError::Empty)));
    }

    #[test]
    fn vocab_limit_caps_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vecs.txt");
        std::fs::write(&path, "a 1 0\nb 0 1\nc 1 1\n").unwrap();
        let (table, _) = EmbeddingTable::load(&path, Some(2)).unwrap();
        assert_eq!(table.len(), 2);
        assert!(table.contains("a") && table.contains("b"));
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.txt");
        let table = table2();
        table.save(&path).unwrap();
        let (back, _) = EmbeddingTable::load(&path, None).unwrap();
        assert_eq!(back.lookup("a"), table.lookup("a"));
        assert_eq!(back.lookup("b"), table.lookup("b"));
    }

    #[test]
    fn mean_embedding_averages() {
        let m = mean_embedding(&toks(&["a", "b"]), &table2()).unwrap();
        assert_eq!(m.vector.components, vec![0.5, 0.5]);
        assert_eq!(m.contributing, 2);
    }

    #[test]
    fn mean_embedding_skips_oov() {
        let m = mean_embedding(&toks(&["a", "zzz"]), &table2()).unwrap();
        assert_eq!(m.vector.components, vec![1.0, 0.0]);
        assert_eq!(m.contributing, 1);
    }

    #[test]
    fn mean_embedding_all_oov_is_an_error() {
        assert!(matches!(
            mean_embedding(&toks(&["zzz"]), &table2()),
            Err(EmbeddingError::NoTokensInVocabulary)
        ));
    }

    #[test]
    fn cosine_identity_orthogonal_and_derived() {
        let u = Vector::new(vec![3.0, 4.0]);
        assert_relative_eq!(cosine(&u, &u).unwrap(), 1.0);
        let a = Vector::new(vec![1.0, 0.0]);
        let b = Vector::new(vec![0.0, 1.0]);
        assert_eq!(cosine(&a, &b).unwrap(), 0.0);
        // 32 / sqrt(14 * 77)
        let u = Vector::new(vec![1.0, 2.0, 3.0]);
        let v = Vector::new(vec![4.0, 5.0, 6.0]);
        assert!((cosine(&u, &v).unwrap() - 0.9746).abs() < 1e-4);
    }

    #[test]
    fn cosine_rejects_zero_norm() {
        let z = Vector::new(vec![0.0, 0.0]);
        let u = Vector::new(vec![1.0, 0.0]);
        assert!(matches!(cosine(&z, &u), Err(EmbeddingError::ZeroNormVector)));
    }

    #[test]
    fn lookup_is_case_normalized() {
        let table = table2();
        assert_eq!(table.lookup("A"), table.lookup("a"));
    }
}
