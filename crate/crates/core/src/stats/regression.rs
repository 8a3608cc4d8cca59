//! Design-matrix construction, ordinary least squares, and the
//! fixed-effects (within-group demeaning) transformation.

use nalgebra::{DMatrix, DVector};

use super::{two_sided_t_p, t_critical, RegressionResult, StatsError};
use crate::corpus::Party;

/// One observation for the link-quality regression: the rescaled outcome
/// score and the predictors it is modeled on.
#[derive(Debug, Clone, Copy)]
pub struct RegressionRow {
    pub outcome: f64,
    pub d_b_corr: f64,
    pub d_t_corr: f64,
    pub party: Party,
}

/// Number of columns in the full three-way interaction design.
pub const EQ2_TERM_COUNT: usize = 8;

/// Build the 8-column design for `outcome ~ 1 + D_b' * D_t' * P`:
/// intercept, the two scores, the party dummy, and all interactions.
///
/// `baseline` is the party coded 0 (Democrat in the reported analyses).
/// Rows must contain both parties, otherwise the dummy has no contrast.
pub fn build_design_matrix(
    rows: &[RegressionRow],
    baseline: Party,
) -> Result<(DMatrix<f64>, DVector<f64>, Vec<String>), StatsError> {
    if rows.is_empty() {
        return Err(StatsError::InsufficientData { need: 1, got: 0 });
    }
    let other = match baseline {
        Party::Democrat => Party::Republican,
        Party::Republican => Party::Democrat,
        Party::Other => return Err(StatsError::MissingField("baseline party".into())),
    };
    for row in rows {
        if row.party == Party::Other {
            return Err(StatsError::MissingField("party".into()));
        }
        if !(row.outcome.is_finite() && row.d_b_corr.is_finite() && row.d_t_corr.is_finite()) {
            return Err(StatsError::MissingField("score".into()));
        }
    }
    if !rows.iter().any(|r| r.party == baseline) || !rows.iter().any(|r| r.party == other) {
        return Err(StatsError::SinglePartyInput);
    }
    let names = vec![
        "Intercept".to_string(),
        "D_b_corr".to_string(),
        "D_t_corr".to_string(),
        other.as_str().to_string(),
        "D_b_corr:D_t_corr".to_string(),
        format!("D_b_corr:{}", other.as_str()),
        format!("D_t_corr:{}", other.as_str()),
        format!("D_b_corr:D_t_corr:{}", other.as_str()),
    ];
    let n = rows.len();
    let mut x = DMatrix::zeros(n, EQ2_TERM_COUNT);
    let mut y = DVector::zeros(n);
    for (i, row) in rows.iter().enumerate() {
        let p = if row.party == other { 1.0 } else { 0.0 };
        let b = row.d_b_corr;
        let t = row.d_t_corr;
        x[(i, 0)] = 1.0;
        x[(i, 1)] = b;
        x[(i, 2)] = t;
        x[(i, 3)] = p;
        x[(i, 4)] = b * t;
        x[(i, 5)] = b * p;
        x[(i, 6)] = t * p;
        x[(i, 7)] = b * t * p;
        y[i] = row.outcome;
    }
    Ok((x, y, names))
}

/// Ordinary least squares via QR decomposition.
///
/// Standard errors come from `sigma^2 (X'X)^-1` with `sigma^2 = SSR/(n-k)`;
/// t and two-sided p use the t-distribution with `n-k` degrees of freedom;
/// the Gaussian log-likelihood uses the MLE variance `SSR/n`;
/// `AIC = 2k - 2lnL` and `BIC = k ln n - 2lnL` with `k` the number of
/// coefficients; Durbin-Watson runs over residuals in input row order.
pub fn ols(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    term_names: &[String],
) -> Result<RegressionResult, StatsError> {
    let n = x.nrows();
    let k = x.ncols();
    if y.len() != n {
        return Err(StatsError::LengthMismatch(n, y.len()));
    }
    if n <= k {
        return Err(StatsError::TooFewObservations { n_obs: n, n_terms: k });
    }

    let qr = x.clone().qr();
    let r = qr.r();
    let max_diag = (0..k).map(|i| r[(i, i)].abs()).fold(0.0f64, f64::max);
    if max_diag == 0.0 || (0..k).any(|i| r[(i, i)].abs() < 1e-10 * max_diag) {
        return Err(StatsError::RankDeficient);
    }
    let qty = qr.q().transpose() * y;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or(StatsError::RankDeficient)?;

    // (X'X)^-1 = R^-1 R^-T from the triangular factor
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .ok_or(StatsError::RankDeficient)?;
    let xtx_inv = &r_inv * r_inv.transpose();

    let fitted = x * &beta;
    let residuals = y - &fitted;
    let ssr: f64 = residuals.iter().map(|e| e * e).sum();
    let df = (n - k) as f64;
    let sigma2 = ssr / df;

    let mut coefficients = Vec::with_capacity(k);
    let mut std_errors = Vec::with_capacity(k);
    let mut t_values = Vec::with_capacity(k);
    let mut p_values = Vec::with_capacity(k);
    let mut ci_low = Vec::with_capacity(k);
    let mut ci_high = Vec::with_capacity(k);
    let t_crit = t_critical(df, 0.95);
    for i in 0..k {
        let b = beta[i];
        let se = (sigma2 * xtx_inv[(i, i)]).sqrt();
        let t = if se > 0.0 { b / se } else { f64::INFINITY * b.signum() };
        coefficients.push(b);
        std_errors.push(se);
        t_values.push(t);
        p_values.push(if se > 0.0 { two_sided_t_p(t, df) } else { 0.0 });
        ci_low.push(b - t_crit * se);
        ci_high.push(b + t_crit * se);
    }

    let mean_y = y.iter().sum::<f64>() / n as f64;
    let sst: f64 = y.iter().map(|v| (v - mean_y) * (v - mean_y)).sum();
    let r_squared = if sst == 0.0 { 0.0 } else { 1.0 - ssr / sst };
    let adj_r_squared = if sst == 0.0 {
        0.0
    } else {
        1.0 - (1.0 - r_squared) * (n as f64 - 1.0) / df
    };

    let nf = n as f64;
    let log_likelihood = -0.5 * nf * ((2.0 * std::f64::consts::PI).ln() + (ssr / nf).ln() + 1.0);
    let kf = k as f64;
    let aic = 2.0 * kf - 2.0 * log_likelihood;
    let bic = kf * nf.ln() - 2.0 * log_likelihood;

    let mut dw_num = 0.0;
    for i in 1..n {
        let d = residuals[i] - residuals[i - 1];
        dw_num += d * d;
    }
    let durbin_watson = if ssr > 0.0 { dw_num / ssr } else { f64::NAN };

    let term_names = if term_names.len() == k {
        term_names.to_vec()
    } else {
        (0..k).map(|i| format!("x{i}")).collect()
    };

    Ok(RegressionResult {
        term_names,
        coefficients,
        std_errors,
        t_values,
        p_values,
        ci_low,
        ci_high,
        n_obs: n,
        r_squared,
        adj_r_squared,
        log_likelihood,
        aic,
        bic,
        durbin_watson,
    })
}

/// Result of the fixed-effects transformation: demeaned copies of the
/// design and response plus the observed group sizes.
#[derive(Debug, Clone)]
pub struct AbsorbedDesign {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub group_sizes: std::collections::BTreeMap<String, usize>,
}

/// Subtract group means from the response and every regressor column
/// (within-group demeaning). A single group is plain centering; a group
/// with one record contributes a zero row of variation.
pub fn absorb_group_intercepts(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    groups: &[String],
) -> Result<AbsorbedDesign, StatsError> {
    let n = x.nrows();
    if groups.len() != n || y.len() != n {
        return Err(StatsError::LengthMismatch(n, groups.len()));
    }
    let mut index: std::collections::BTreeMap<String, Vec<usize>> = Default::default();
    for (i, g) in groups.iter().enumerate() {
        index.entry(g.clone()).or_default().push(i);
    }
    let mut xd = x.clone();
    let mut yd = y.clone();
    for rows in index.values() {
        let m = rows.len() as f64;
        for c in 0..x.ncols() {
            let mean: f64 = rows.iter().map(|&i| x[(i, c)]).sum::<f64>() / m;
            for &i in rows {
                xd[(i, c)] = x[(i, c)] - mean;
            }
        }
        let mean_y: f64 = rows.iter().map(|&i| y[i]).sum::<f64>() / m;
        for &i in rows {
            yd[i] = y[i] - mean_y;
        }
    }
    let group_sizes = index.into_iter().map(|(g, rows)| (g, rows.len())).collect();
    Ok(AbsorbedDesign { x: xd, y: yd, group_sizes })
}
