//! Seeded bootstrap confidence intervals and bootstrap mediation
//! analysis.
//!
//! Every iteration draws its RNG from a labeled substream of the master
//! seed, so parallel execution reproduces serial output bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::StatsError;
use crate::numeric::{derive_seed, quantile};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BootstrapCi {
    pub point: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Percentile bootstrap CI (2.5 / 97.5) for an arbitrary statistic.
///
/// Deterministic per seed: iteration `i` resamples with an RNG seeded
/// from `derive_seed(seed, "bootstrap", i)` regardless of worker count.
pub fn bootstrap_ci<F>(values: &[f64], statistic: F, n_iter: usize, seed: u64) -> BootstrapCi
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    assert!(!values.is_empty(), "bootstrap over empty sample");
    assert!(n_iter >= 1, "bootstrap needs at least one iteration");
    let n = values.len();
    let stats: Vec<f64> = (0..n_iter)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "bootstrap", i as u64));
            let resample: Vec<f64> = (0..n).map(|_| values[rng.gen_range(0..n)]).collect();
            statistic(&resample)
        })
        .collect();
    BootstrapCi {
        point: statistic(values),
        ci_low: quantile(&stats, 0.025),
        ci_high: quantile(&stats, 0.975),
    }
}

/// Mediation estimates with percentile bootstrap intervals.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MediationResult {
    pub acme: f64,
    pub ade: f64,
    pub total_effect: f64,
    pub prop_mediated: f64,
    pub acme_ci: (f64, f64),
    pub ade_ci: (f64, f64),
    pub total_ci: (f64, f64),
    pub prop_ci: (f64, f64),
    pub acme_p: f64,
    pub ade_p: f64,
    pub total_p: f64,
    pub n_boot: usize,
}

/// Least squares by unnormalized modified Gram-Schmidt, dropping columns
/// that are linearly dependent on earlier ones (their coefficient is 0).
///
/// Exact in floating point for designs whose columns are bitwise equal:
/// the projection coefficient reduces to `dot(u,u)/dot(u,u) = 1` and the
/// residual column cancels to zero exactly.
fn mgs_lstsq(cols: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let k = cols.len();
    let n = y.len();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut basis_norm2: Vec<f64> = Vec::with_capacity(k);
    // gamma[i][j]: projection of column j onto basis vector i
    let mut gamma = vec![vec![0.0f64; k]; k];
    let mut kept = vec![true; k];
    for j in 0..k {
        let mut u = cols[j].clone();
        for i in 0..j {
            if !kept[i] {
                continue;
            }
            let g = dot(&u, &basis[i]) / basis_norm2[i];
            gamma[i][j] = g;
            for (uv, bv) in u.iter_mut().zip(&basis[i]) {
                *uv -= g * bv;
            }
        }
        let norm2 = dot(&u, &u);
        let orig2 = dot(&cols[j], &cols[j]);
        if norm2 <= 1e-24 * orig2.max(f64::MIN_POSITIVE) {
            kept[j] = false;
            basis.push(vec![0.0; n]);
            basis_norm2.push(1.0);
        } else {
            basis.push(u);
            basis_norm2.push(norm2);
        }
    }
    // coefficients in the orthogonal basis, then back-substitution
    let mut c = vec![0.0f64; k];
    for i in 0..k {
        if kept[i] {
            c[i] = dot(y, &basis[i]) / basis_norm2[i];
        }
    }
    let mut beta = vec![0.0f64; k];
    for j in (0..k).rev() {
        if !kept[j] {
            continue;
        }
        let mut b = c[j];
        for l in (j + 1)..k {
            b -= gamma[j][l] * beta[l];
        }
        beta[j] = b;
    }
    beta
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn mediation_effects(x: &[f64], m: &[f64], y: &[f64]) -> (f64, f64, f64, f64) {
    let n = x.len();
    let ones = vec![1.0f64; n];
    // mediator model: m ~ 1 + x
    let a = mgs_lstsq(&[ones.clone(), x.to_vec()], m)[1];
    // outcome model: y ~ 1 + m + x, mediator column ahead of treatment so
    // full collinearity (m identical to x) credits the mediator path
    let coefs = mgs_lstsq(&[ones, m.to_vec(), x.to_vec()], y);
    let b = coefs[1];
    let c_prime = coefs[2];
    let acme = a * b;
    let total = acme + c_prime;
    let prop = if total == 0.0 { f64::NAN } else { acme / total };
    (acme, c_prime, total, prop)
}

/// Bootstrap mediation: fit `m ~ x` (coefficient a) and `y ~ x + m`
/// (direct effect c', mediator effect b); ACME = a*b, ADE = c',
/// total = ACME + ADE. CIs are percentile over row resamples and
/// p-values are two-sided bootstrap sign tests.
pub fn mediation(
    x: &[f64],
    m: &[f64],
    y: &[f64],
    n_boot: usize,
    seed: u64,
) -> Result<MediationResult, StatsError> {
    let n = x.len();
    if m.len() != n || y.len() != n {
        return Err(StatsError::LengthMismatch(n, m.len().min(y.len())));
    }
    if n < 10 {
        return Err(StatsError::InsufficientData { need: 10, got: n });
    }
    let var = |v: &[f64]| {
        let mn = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|a| (a - mn) * (a - mn)).sum::<f64>()
    };
    if var(x) == 0.0 {
        return Err(StatsError::ZeroVariance("treatment"));
    }

    let (acme, ade, total, prop) = mediation_effects(x, m, y);

    let draws: Vec<(f64, f64, f64, f64)> = (0..n_boot)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "mediation", i as u64));
            let mut bx = Vec::with_capacity(n);
            let mut bm = Vec::with_capacity(n);
            let mut by = Vec::with_capacity(n);
            for _ in 0..n {
                let idx = rng.gen_range(0..n);
                bx.push(x[idx]);
                bm.push(m[idx]);
                by.push(y[idx]);
            }
            mediation_effects(&bx, &bm, &by)
        })
        .collect();

    let column = |f: fn(&(f64, f64, f64, f64)) -> f64| -> Vec<f64> {
        draws.iter().map(f).filter(|v| v.is_finite()).collect()
    };
    let ci = |vals: &[f64]| -> (f64, f64) {
        if vals.is_empty() {
            (f64::NAN, f64::NAN)
        } else {
            (quantile(vals, 0.025), quantile(vals, 0.975))
        }
    };
    // two-sided bootstrap sign test
    let p_of = |vals: &[f64]| -> f64 {
        if vals.is_empty() {
            return f64::NAN;
        }
        let le = vals.iter().filter(|v| **v <= 0.0).count() as f64;
        let ge = vals.iter().filter(|v| **v >= 0.0).count() as f64;
        (2.0 * (le.min(ge)) / vals.len() as f64).min(1.0)
    };

    let acmes = column(|d| d.0);
    let ades = column(|d| d.1);
    let totals = column(|d| d.2);
    let props = column(|d| d.3);
    Ok(MediationResult {
        acme,
        ade,
        total_effect: total,
        prop_mediated: prop,
        acme_ci: ci(&acmes),
        ade_ci: ci(&ades),
        total_ci: ci(&totals),
        prop_ci: ci(&props),
        acme_p: p_of(&acmes),
        ade_p: p_of(&ades),
        total_p: p_of(&totals),
        n_boot,
    })
}
