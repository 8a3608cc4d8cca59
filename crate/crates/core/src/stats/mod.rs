//! Statistical procedures: OLS with interactions, group-intercept
//! absorption, t-tests and effect sizes, correlations, bootstrap CIs,
//! rolling timelines, ROC/AUC, mediation, agreement, and group-mean
//! deviations.

mod agreement;
mod inference;
mod regression;
mod resample;
mod roc;
mod timeline;

pub use agreement::krippendorff_alpha;
pub use inference::{pearson_r, t_test, PearsonResult, TTestMode, TTestResult};
pub use regression::{
    absorb_group_intercepts, build_design_matrix, ols, AbsorbedDesign, RegressionRow,
    EQ2_TERM_COUNT,
};
pub use resample::{bootstrap_ci, mediation, BootstrapCi, MediationResult};
pub use roc::{roc_auc, RocResult};
pub use timeline::{group_mean_deviation, rolling_timeline, TimeSeriesPoint};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("design matrix is rank deficient")]
    RankDeficient,
    #[error("need more observations than terms: n={n_obs}, k={n_terms}")]
    TooFewObservations { n_obs: usize, n_terms: usize },
    #[error("input lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least {need} values, got {got}")]
    InsufficientData { need: usize, got: usize },
    #[error("zero variance in {0}")]
    ZeroVariance(&'static str),
    #[error("both classes must be present")]
    SingleClass,
    #[error("no variation in pooled labels; alpha undefined")]
    NoLabelVariation,
    #[error("regression rows must include both parties")]
    SinglePartyInput,
    #[error("record {0} is missing required fields")]
    MissingField(String),
}

/// Coefficient table plus fit statistics for a least-squares fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegressionResult {
    pub term_names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub t_values: Vec<f64>,
    pub p_values: Vec<f64>,
    pub ci_low: Vec<f64>,
    pub ci_high: Vec<f64>,
    pub n_obs: usize,
    pub r_squared: f64,
    pub adj_r_squared: f64,
    pub log_likelihood: f64,
    pub aic: f64,
    pub bic: f64,
    pub durbin_watson: f64,
}

impl RegressionResult {
    pub fn coefficient(&self, term: &str) -> Option<f64> {
        self.term_names
            .iter()
            .position(|t| t == term)
            .map(|i| self.coefficients[i])
    }

    pub fn std_error(&self, term: &str) -> Option<f64> {
        self.term_names
            .iter()
            .position(|t| t == term)
            .map(|i| self.std_errors[i])
    }
}

/// Two-sided p-value from the t-distribution with `df` degrees of freedom.
pub(crate) fn two_sided_t_p(t: f64, df: f64) -> f64 {
    use statrs::distribution::{ContinuousCDF, StudentsT};
    if !t.is_finite() {
        return 0.0;
    }
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive df");
    (2.0 * dist.cdf(-t.abs())).min(1.0)
}

/// Critical value t* with `P(|T| <= t*) = level` for the t-distribution.
pub(crate) fn t_critical(df: f64, level: f64) -> f64 {
    use statrs::distribution::{ContinuousCDF, StudentsT};
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive df");
    dist.inverse_cdf(0.5 + level / 2.0)
}
