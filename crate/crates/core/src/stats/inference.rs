//! t-tests with effect sizes and Pearson correlation.

use super::{two_sided_t_p, StatsError};
use crate::numeric::{mean, sample_variance};

/// Variance treatment for two-sample t-tests. Welch is the default used
/// throughout; the pooled-variance form is available for comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TTestMode {
    Paired,
    UnpairedWelch,
    UnpairedPooled,
}

#[derive(Debug, Clone, Copy)]
pub struct TTestResult {
    pub t: f64,
    pub p: f64,
    pub df: f64,
    pub cohens_d: f64,
    /// Zero variance made the statistic infinite (or exactly zero for
    /// identical inputs).
    pub degenerate: bool,
}

/// Two-sample t-test. Cohen's d uses the pooled standard deviation for
/// unpaired modes and the standard deviation of differences when paired.
pub fn t_test(a: &[f64], b: &[f64], mode: TTestMode) -> Result<TTestResult, StatsError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(StatsError::InsufficientData { need: 2, got: a.len().min(b.len()) });
    }
    match mode {
        TTestMode::Paired => {
            if a.len() != b.len() {
                return Err(StatsError::LengthMismatch(a.len(), b.len()));
            }
            let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
            let n = diffs.len() as f64;
            let md = mean(&diffs);
            let sd = sample_variance(&diffs).sqrt();
            let df = n - 1.0;
            if sd == 0.0 {
                // constant difference: zero when identical, infinite otherwise
                let t = if md == 0.0 { 0.0 } else { f64::INFINITY * md.signum() };
                return Ok(TTestResult {
                    t,
                    p: if md == 0.0 { 1.0 } else { 0.0 },
                    df,
                    cohens_d: if md == 0.0 { 0.0 } else { f64::INFINITY * md.signum() },
                    degenerate: true,
                });
            }
            let t = md / (sd / n.sqrt());
            Ok(TTestResult { t, p: two_sided_t_p(t, df), df, cohens_d: md / sd, degenerate: false })
        }
        TTestMode::UnpairedWelch | TTestMode::UnpairedPooled => {
            let (na, nb) = (a.len() as f64, b.len() as f64);
            let (ma, mb) = (mean(a), mean(b));
            let (va, vb) = (sample_variance(a), sample_variance(b));
            let pooled_var = ((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0);
            let pooled_sd = pooled_var.sqrt();
            let delta = ma - mb;
            if (mode == TTestMode::UnpairedWelch && va == 0.0 && vb == 0.0)
                || (mode == TTestMode::UnpairedPooled && pooled_var == 0.0)
            {
                let t = if delta == 0.0 { 0.0 } else { f64::INFINITY * delta.signum() };
                return Ok(TTestResult {
                    t,
                    p: if delta == 0.0 { 1.0 } else { 0.0 },
                    df: na + nb - 2.0,
                    cohens_d: if delta == 0.0 { 0.0 } else { f64::INFINITY * delta.signum() },
                    degenerate: true,
                });
            }
            let (t, df) = match mode {
                TTestMode::UnpairedWelch => {
                    let se2 = va / na + vb / nb;
                    let df = se2 * se2
                        / ((va / na) * (va / na) / (na - 1.0)
                            + (vb / nb) * (vb / nb) / (nb - 1.0));
                    (delta / se2.sqrt(), df)
                }
                TTestMode::UnpairedPooled => {
                    let se = (pooled_var * (1.0 / na + 1.0 / nb)).sqrt();
                    (delta / se, na + nb - 2.0)
                }
                TTestMode::Paired => unreachable!(),
            };
            Ok(TTestResult {
                t,
                p: two_sided_t_p(t, df),
                df,
                cohens_d: delta / pooled_sd,
                degenerate: false,
            })
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PearsonResult {
    pub r: f64,
    pub p: f64,
}

/// Sample Pearson correlation with a t-transform p-value (n-2 df).
pub fn pearson_r(x: &[f64], y: &[f64]) -> Result<PearsonResult, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 3 {
        return Err(StatsError::InsufficientData { need: 3, got: x.len() });
    }
    let n = x.len() as f64;
    let (mx, my) = (mean(x), mean(y));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::ZeroVariance("pearson input"));
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    let df = n - 2.0;
    let p = if r.abs() >= 1.0 {
        0.0
    } else {
        let t = r * (df / (1.0 - r * r)).sqrt();
        two_sided_t_p(t, df)
    };
    Ok(PearsonResult { r, p })
}
