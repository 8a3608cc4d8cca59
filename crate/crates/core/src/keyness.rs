//! Scaled F-Score keyness along two category axes.
//!
//! For each term and category the precision (share of the term's
//! occurrences falling in the category) and frequency (share of the
//! category's tokens that are the term) are standardized across the
//! vocabulary, pushed through the standard normal CDF, and combined by a
//! harmonic mean. Two per-category scores are then folded onto a single
//! bipolar axis in `[-1, 1]`.

use std::collections::BTreeMap;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum KeynessError {
    #[error("unknown term {0:?}")]
    UnknownTerm(String),
    #[error("category {0:?} has no tokens")]
    EmptyCategory(String),
    #[error("unknown category {0:?}")]
    UnknownCategory(String),
    #[error("axis {0:?} has no documents on at least one side")]
    EmptyAxis(String),
}

/// Token counts per (term, category), with per-category totals.
#[derive(Debug, Clone, Default)]
pub struct TermCategoryCounts {
    categories: Vec<String>,
    counts: BTreeMap<String, Vec<u64>>,
    totals: Vec<u64>,
}

impl TermCategoryCounts {
    pub fn new(categories: Vec<String>) -> Self {
        let totals = vec![0; categories.len()];
        TermCategoryCounts { categories, counts: BTreeMap::new(), totals }
    }

    pub fn categories(&self) -> &[String] {
        &self.categories
    }

    pub fn category_index(&self, category: &str) -> Result<usize, KeynessError> {
        self.categories
            .iter()
            .position(|c| c == category)
            .ok_or_else(|| KeynessError::UnknownCategory(category.to_string()))
    }

    /// Add one token occurrence of `term` under `category`.
    pub fn add(&mut self, term: &str, category: &str) {
        let idx = self
            .category_index(category)
            .expect("category registered at construction");
        let row = self
            .counts
            .entry(term.to_string())
            .or_insert_with(|| vec![0; self.categories.len()]);
        row[idx] += 1;
        self.totals[idx] += 1;
    }

    /// Accumulate every token of a document labeled with `category`.
    pub fn add_document(&mut self, tokens: &[String], category: &str) {
        for token in tokens {
            self.add(token, category);
        }
    }

    pub fn count(&self, term: &str, category: &str) -> u64 {
        let Ok(idx) = self.category_index(category) else {
            return 0;
        };
        self.counts.get(term).map_or(0, |row| row[idx])
    }

    pub fn term_total(&self, term: &str) -> u64 {
        self.counts.get(term).map_or(0, |row| row.iter().sum())
    }

    pub fn category_total(&self, category: &str) -> u64 {
        self.category_index(category).map_or(0, |idx| self.totals[idx])
    }

    pub fn terms(&self) -> impl Iterator<Item = &String> {
        self.counts.keys()
    }

    pub fn n_terms(&self) -> usize {
        self.counts.len()
    }

    /// Merge counts from another table with the same category layout.
    pub fn merge(&mut self, other: &TermCategoryCounts) {
        assert_eq!(self.categories, other.categories, "category layout mismatch");
        for (term, row) in &other.counts {
            let entry = self
                .counts
                .entry(term.clone())
                .or_insert_with(|| vec![0; self.categories.len()]);
            for (acc, v) in entry.iter_mut().zip(row) {
                *acc += v;
            }
        }
        for (acc, v) in self.totals.iter_mut().zip(&other.totals) {
            *acc += v;
        }
    }
}

/// Share of a term's occurrences that fall in `category`.
pub fn precision(counts: &TermCategoryCounts, term: &str, category: &str) -> Result<f64, KeynessError> {
    let total = counts.term_total(term);
    if total == 0 {
        return Err(KeynessError::UnknownTerm(term.to_string()));
    }
    Ok(counts.count(term, category) as f64 / total as f64)
}

/// Share of a category's tokens that are `term`.
pub fn frequency(counts: &TermCategoryCounts, term: &str, category: &str) -> Result<f64, KeynessError> {
    counts.category_index(category)?;
    let total = counts.category_total(category);
    if total == 0 {
        return Err(KeynessError::EmptyCategory(category.to_string()));
    }
    Ok(counts.count(term, category) as f64 / total as f64)
}

/// Precomputed standardization context for Scaled F-Scores.
///
/// Each statistic is standardized against its distribution over all
/// vocabulary terms within the category (population standard deviation).
/// Zero-variance statistics degrade every term to 0.5 and set the
/// `degenerate` flag.
pub struct SfsCalculator<'a> {
    counts: &'a TermCategoryCounts,
    // per category: (prec mean, prec sd, freq mean, freq sd)
    moments: Vec<(f64, f64, f64, f64)>,
    pub degenerate: bool,
}

impl<'a> SfsCalculator<'a> {
    pub fn new(counts: &'a TermCategoryCounts) -> Result<Self, KeynessError> {
        let n_terms = counts.n_terms();
        let mut moments = Vec::with_capacity(counts.categories().len());
        let mut degenerate = false;
        for category in counts.categories() {
            if counts.category_total(category) == 0 {
                return Err(KeynessError::EmptyCategory(category.clone()));
            }
            let mut precs = Vec::with_capacity(n_terms);
            let mut freqs = Vec::with_capacity(n_terms);
            for term in counts.terms() {
                precs.push(precision(counts, term, category)?);
                freqs.push(frequency(counts, term, category)?);
            }
            let stat = |v: &[f64]| -> (f64, f64) {
                let m = v.iter().sum::<f64>() / v.len() as f64;
                let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64;
                (m, var.sqrt())
            };
            let (pm, ps) = stat(&precs);
            let (fm, fs) = stat(&freqs);
            if ps == 0.0 || fs == 0.0 {
                degenerate = true;
            }
            moments.push((pm, ps, fm, fs));
        }
        Ok(SfsCalculator { counts, moments, degenerate })
    }

    /// Scaled F-Score of `term` within `category`, in `[0, 1]`.
    pub fn sfs(&self, term: &str, category: &str) -> Result<f64, KeynessError> {
        let idx = self.counts.category_index(category)?;
        let prec = precision(self.counts, term, category)?;
        let freq = frequency(self.counts, term, category)?;
        let (pm, ps, fm, fs) = self.moments[idx];
        let phi = |x: f64, m: f64, s: f64| -> f64 {
            if s == 0.0 {
                0.5
            } else {
                Normal::standard().cdf((x - m) / s)
            }
        };
        Ok(harmonic_mean(phi(prec, pm, ps), phi(freq, fm, fs)))
    }
}

/// Harmonic mean with H(0, _) = 0.
pub fn harmonic_mean(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        0.0
    } else {
        2.0 * a * b / (a + b)
    }
}

/// Fold two per-category SFS values onto one bipolar axis in `[-1, 1]`:
/// positive leans toward the first category, negative toward the second.
pub fn bipolar_sfs(sfs_x: f64, sfs_y: f64) -> f64 {
    if sfs_x > sfs_y {
        2.0 * (-0.5 + sfs_x)
    } else if sfs_x < sfs_y {
        2.0 * (-0.5 + (1.0 - sfs_y))
    } else {
        0.0
    }
}

/// One scatter point: the term and its two bipolar keyness coordinates.
#[derive(Debug, Clone, Serialize)]
pub struct ScatterPoint {
    pub term: String,
    /// Positive leans toward the first party category (Democrat by
    /// convention), negative toward the second (Republican).
    pub sfs_party: f64,
    /// Positive leans belief-speaking, negative truth-seeking.
    pub sfs_honesty: f64,
    pub count_party_a: u64,
    pub count_party_b: u64,
    pub count_honesty_a: u64,
    pub count_honesty_b: u64,
    /// Set when either coordinate clears the label-emission threshold.
    pub label_flag: bool,
}

/// Threshold above which a term would be labeled on the scatterplot.
pub const LABEL_THRESHOLD: f64 = 0.65;

/// Compute per-term scatter coordinates from two two-category count
/// tables (party axis and honesty axis).
///
/// Terms whose total count on the party axis falls below `min_count`, or
/// that never occur in an honesty-labeled document, are dropped. Output is
/// sorted by term.
pub fn scatter_coords(
    party_counts: &TermCategoryCounts,
    honesty_counts: &TermCategoryCounts,
    min_count: u64,
) -> Result<Vec<ScatterPoint>, KeynessError> {
    for (axis, counts) in [("party", party_counts), ("honesty", honesty_counts)] {
        if counts.categories().len() != 2 {
            return Err(KeynessError::EmptyAxis(axis.to_string()));
        }
        for category in counts.categories() {
            if counts.category_total(category) == 0 {
                return Err(KeynessError::EmptyAxis(axis.to_string()));
            }
        }
    }
    let party_sfs = SfsCalculator::new(party_counts)?;
    let honesty_sfs = SfsCalculator::new(honesty_counts)?;
    let (pa, pb) = (&party_counts.categories()[0], &party_counts.categories()[1]);
    let (ha, hb) = (&honesty_counts.categories()[0], &honesty_counts.categories()[1]);

    let mut points = Vec::new();
    for term in party_counts.terms() {
        if party_counts.term_total(term) < min_count {
            continue;
        }
        if honesty_counts.term_total(term) == 0 {
            continue;
        }
        let sfs_party = bipolar_sfs(party_sfs.sfs(term, pa)?, party_sfs.sfs(term, pb)?);
        let sfs_honesty = bipolar_sfs(honesty_sfs.sfs(term, ha)?, honesty_sfs.sfs(term, hb)?);
        points.push(ScatterPoint {
            term: term.clone(),
            sfs_party,
            sfs_honesty,
            count_party_a: party_counts.count(term, pa),
            count_party_b: party_counts.count(term, pb),
            count_honesty_a: honesty_counts.count(term, ha),
            count_honesty_b: honesty_counts.count(term, hb),
            label_flag: sfs_party.abs() > LABEL_THRESHOLD || sfs_honesty.abs() > LABEL_THRESHOLD,
        });
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn two_cat(counts: &[(&str, u64, u64)]) -> TermCategoryCounts {
        let mut t = TermCategoryCounts::new(vec!["A".to_string(), "B".to_string()]);
        for &(term, a, b) in counts {
            for _ in 0..a {
                t.add(term, "A");
            }
            for _ in 0..b {
                t.add(term, "B");
            }
        }
        t
    }

    #[test]
    fn precision_formula() {
        let t = two_cat(&[("w", 3, 1)]);
        assert_relative_eq!(precision(&t, "w", "A").unwrap(), 0.75);
        let only_a = two_cat(&[("x", 2, 0)]);
        assert_relative_eq!(precision(&only_a, "x", "A").unwrap(), 1.0);
        assert!(matches!(
            precision(&t, "absent", "A"),
            Err(KeynessError::UnknownTerm(_))
        ));
    }

    #[test]
    fn frequency_formula() {
        let t = two_cat(&[("w", 3, 0), ("z", 9, 1)]);
        assert_relative_eq!(frequency(&t, "w", "A").unwrap(), 0.25);
        assert_relative_eq!(frequency(&t, "absent", "A").unwrap(), 0.0);
        let mut empty_b = TermCategoryCounts::new(vec!["A".into(), "B".into()]);
        empty_b.add("w", "A");
        assert!(matches!(
            frequency(&empty_b, "w", "B"),
            Err(KeynessError::EmptyCategory(_))
        ));
    }

    #[test]
    fn precision_sums_to_one_over_categories() {
        let t = two_cat(&[("w", 3, 5), ("z", 2, 0)]);
        for term in ["w", "z"] {
            let total: f64 = ["A", "B"]
                .iter()
                .map(|c| precision(&t, term, c).unwrap())
                .sum();
            assert_relative_eq!(total, 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn frequency_sums_to_one_over_terms() {
        let t = two_cat(&[("w", 3, 5), ("z", 2, 1), ("q", 4, 0)]);
        let total: f64 = t
            .terms()
            .map(|term| frequency(&t, term, "A").unwrap())
            .sum::<f64>();
        assert_relative_eq!(total, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn sfs_at_category_mean_is_half() {
        // both terms symmetric: each sits exactly at the mean of prec and freq
        let t = two_cat(&[("w", 3, 1), ("z", 1, 3)]);
        let calc = SfsCalculator::new(&t).unwrap();
        // prec(w,A)=0.75, prec(z,A)=0.25, mean 0.5 -> w is above, z below
        let w = calc.sfs("w", "A").unwrap();
        let z = calc.sfs("z", "A").unwrap();
        assert!(w > 0.5 && z < 0.5);
        // a term exactly at both means scores 0.5
        let t3 = two_cat(&[("hi", 4, 0), ("mid", 2, 2), ("lo", 0, 4)]);
        let calc3 = SfsCalculator::new(&t3).unwrap();
        assert_relative_eq!(calc3.sfs("mid", "A").unwrap(), 0.5, max_relative = 1e-12);
    }

    #[test]
    fn degenerate_corpus_flags_and_returns_half() {
        // single term: prec and freq have zero variance across the vocabulary
        let t = two_cat(&[("w", 2, 2)]);
        let calc = SfsCalculator::new(&t).unwrap();
        assert!(calc.degenerate);
        assert_relative_eq!(calc.sfs("w", "A").unwrap(), 0.5);
    }

    #[test]
    fn sfs_matches_brute_force_oracle() {
        let t = two_cat(&[("a", 5, 1), ("b", 1, 5), ("c", 3, 3), ("d", 7, 0), ("e", 0, 2)]);
        let calc = SfsCalculator::new(&t).unwrap();
        for category in ["A", "B"] {
            let oracle = oracle_sfs(&t, category);
            for term in ["a", "b", "c", "d", "e"] {
                let got = calc.sfs(term, category).unwrap();
                assert_relative_eq!(got, oracle[term], max_relative = 1e-12);
            }
        }
    }

    /// Independent reimplementation of the SFS definition for tests.
    fn oracle_sfs(t: &TermCategoryCounts, category: &str) -> std::collections::HashMap<&'static str, f64> {
        let terms = ["a", "b", "c", "d", "e"];
        let cats = ["A", "B"];
        let count = |w: &str, c: &str| t.count(w, c) as f64;
        let prec = |w: &str, c: &str| {
            let tot: f64 = cats.iter().map(|cc| count(w, cc)).sum();
            count(w, c) / tot
        };
        let freq = |w: &str, c: &str| {
            let tot: f64 = terms.iter().map(|ww| count(ww, c)).sum();
            count(w, c) / tot
        };
        let phi = |z: f64| 0.5 * (1.0 + erf_approx(z / std::f64::consts::SQRT_2));
        let moments = |vals: &[f64]| {
            let m = vals.iter().sum::<f64>() / vals.len() as f64;
            let sd =
                (vals.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / vals.len() as f64).sqrt();
            (m, sd)
        };
        let precs: Vec<f64> = terms.iter().map(|w| prec(w, category)).collect();
        let freqs: Vec<f64> = terms.iter().map(|w| freq(w, category)).collect();
        let (pm, ps) = moments(&precs);
        let (fm, fs) = moments(&freqs);
        terms
            .iter()
            .map(|&w| {
                let p = phi((prec(w, category) - pm) / ps);
                let f = phi((freq(w, category) - fm) / fs);
                let h = if p == 0.0 || f == 0.0 { 0.0 } else { 2.0 * p * f / (p + f) };
                (w, h)
            })
            .collect()
    }

    /// High-accuracy erf for the oracle (Abramowitz & Stegun 7.1.26 is too
    /// coarse at 1e-12; use the series/continued fraction split).
    fn erf_approx(x: f64) -> f64 {
        // series for small |x|, complementary continued fraction otherwise
        let ax = x.abs();
        if ax < 3.0 {
            // Taylor series erf(x) = 2/sqrt(pi) sum (-1)^n x^(2n+1)/(n!(2n+1))
            let mut term = x;
            let mut sum = x;
            for n in 1..200 {
                term *= -x * x / n as f64;
                let add = term / (2 * n + 1) as f64;
                sum += add;
                if add.abs() < 1e-17 * sum.abs() {
                    break;
                }
            }
            sum * 2.0 / std::f64::consts::PI.sqrt()
        } else if x > 0.0 {
            1.0
        } else {
            -1.0
        }
    }

    #[test]
    fn bipolar_cases() {
        assert_relative_eq!(bipolar_sfs(0.9, 0.2), 0.8, max_relative = 1e-12);
        assert_relative_eq!(bipolar_sfs(0.2, 0.9), -0.8, max_relative = 1e-12);
        assert_eq!(bipolar_sfs(0.5, 0.5), 0.0);
    }

    #[test]
    fn bipolar_antisymmetry_grid() {
        for i in 0..=100 {
            for j in 0..=100 {
                let a = i as f64 / 100.0;
                let b = j as f64 / 100.0;
                assert_eq!(bipolar_sfs(a, b), -bipolar_sfs(b, a));
            }
        }
    }

    fn scatter_fixture() -> (TermCategoryCounts, TermCategoryCounts) {
        let mut party = TermCategoryCounts::new(vec!["Democrat".into(), "Republican".into()]);
        let mut honesty = TermCategoryCounts::new(vec!["belief".into(), "truth".into()]);
        // "corner" used only by Democrats and only in belief docs
        for _ in 0..8 {
            party.add("corner", "Democrat");
            honesty.add("corner", "belief");
        }
        for (term, d, r, b, t) in [
            ("shared", 6, 6, 3, 3),
            ("redish", 1, 7, 2, 4),
            ("filler", 5, 4, 2, 2),
        ] {
            for _ in 0..d {
                party.add(term, "Democrat");
            }
            for _ in 0..r {
                party.add(term, "Republican");
            }
            for _ in 0..b {
                honesty.add(term, "belief");
            }
            for _ in 0..t {
                honesty.add(term, "truth");
            }
        }
        (party, honesty)
    }

    #[test]
    fn corner_term_lands_in_corner() {
        let (party, honesty) = scatter_fixture();
        let points = scatter_coords(&party, &honesty, 1).unwrap();
        let corner = points.iter().find(|p| p.term == "corner").unwrap();
        assert!(corner.sfs_party > 0.5, "party coord {}", corner.sfs_party);
        assert!(corner.sfs_honesty > 0.5, "honesty coord {}", corner.sfs_honesty);
        assert!(corner.label_flag);
    }

    #[test]
    fn swapping_party_corpora_negates_x() {
        let (party, honesty) = scatter_fixture();
        let mut swapped = TermCategoryCounts::new(vec!["Democrat".into(), "Republican".into()]);
        for term in party.terms() {
            for _ in 0..party.count(term, "Republican") {
                swapped.add(term, "Democrat");
            }
            for _ in 0..party.count(term, "Democrat") {
                swapped.add(term, "Republican");
            }
        }
        let original = scatter_coords(&party, &honesty, 1).unwrap();
        let flipped = scatter_coords(&swapped, &honesty, 1).unwrap();
        for (o, f) in original.iter().zip(&flipped) {
            assert_eq!(o.term, f.term);
            assert_relative_eq!(o.sfs_party, -f.sfs_party, max_relative = 1e-12);
            assert_relative_eq!(o.sfs_honesty, f.sfs_honesty);
        }
    }

    #[test]
    fn coordinates_invariant_under_corpus_duplication() {
        let (party, honesty) = scatter_fixture();
        let mut party2 = party.clone();
        party2.merge(&party);
        let mut honesty2 = honesty.clone();
        honesty2.merge(&honesty);
        let original = scatter_coords(&party, &honesty, 1).unwrap();
        let doubled = scatter_coords(&party2, &honesty2, 1).unwrap();
        assert_eq!(original.len(), doubled.len());
        for (o, d) in original.iter().zip(&doubled) {
            assert_relative_eq!(o.sfs_party, d.sfs_party, max_relative = 1e-12);
            assert_relative_eq!(o.sfs_honesty, d.sfs_honesty, max_relative = 1e-12);
        }
    }

    #[test]
    fn min_count_drops_rare_terms() {
        let (party, honesty) = scatter_fixture();
        let points = scatter_coords(&party, &honesty, 9).unwrap();
        assert!(points.iter().all(|p| p.term != "redish"));
        assert!(points.iter().any(|p| p.term == "shared"));
    }

    #[test]
    fn empty_axis_is_an_error() {
        let party = TermCategoryCounts::new(vec!["Democrat".into(), "Republican".into()]);
        let honesty = TermCategoryCounts::new(vec!["belief".into(), "truth".into()]);
        assert!(scatter_coords(&party, &honesty, 1).is_err());
    }
}
